//! Integer partitions, multi-indices, pruning and merging.

use std::fmt;

use crate::error::{invalid, Result};

/// Nonincreasing tuple of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition(Vec<u32>);

/// Tuple of nonnegative integers, unsorted and possibly containing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(invalid(format!("partition parts must be positive: {parts:?}")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid(format!("partition parts must be nonincreasing: {parts:?}")));
        }
        Ok(Self(parts))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// `(1, ..., 1)` with `n` ones.
    pub fn ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// `|α|`, the sum of the parts.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `#α`, the number of parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

impl From<Partition> for MultiIndex {
    fn from(p: Partition) -> Self {
        MultiIndex(p.0)
    }
}

/// All partitions of `n` in canonical order: decreasing lexicographic,
/// from `(n)` down to `(1, ..., 1)`. `n = 0` yields the empty partition.
pub fn partitions_canonical(n: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = if n == 0 { Vec::new() } else { vec![n] };
    loop {
        out.push(Partition(current.clone()));
        // Rightmost part greater than one.
        let Some(pos) = current.iter().rposition(|&p| p > 1) else {
            break;
        };
        let freed: u32 = current[pos + 1..].iter().sum::<u32>() + 1;
        let cap = current[pos] - 1;
        current.truncate(pos);
        current.push(cap);
        let mut rest = freed;
        while rest > 0 {
            let part = rest.min(cap);
            current.push(part);
            rest -= part;
        }
    }
    out
}

/// `⟨m⟩`: drops zeros and sorts the remaining entries nonincreasingly.
pub fn prune(m: &MultiIndex) -> Partition {
    let mut parts: Vec<u32> = m.0.iter().copied().filter(|&x| x > 0).collect();
    parts.sort_unstable_by(|a, b| b.cmp(a));
    Partition(parts)
}

/// `α_{i→j}`: removes entry `i` and adds it onto entry `j` (zero-based).
pub fn merge(alpha: &MultiIndex, i: usize, j: usize) -> Result<MultiIndex> {
    let k = alpha.0.len();
    if i == j || i >= k || j >= k {
        return Err(invalid(format!(
            "merge indices must be distinct and below {k}, got ({i}, {j})"
        )));
    }
    let mut v = alpha.0.clone();
    v[j] += v[i];
    v.remove(i);
    Ok(MultiIndex(v))
}
