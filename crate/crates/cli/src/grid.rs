use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use turnover::empirical::linspace;

/// `a:b:count`, `count` evenly spaced points with both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        linspace(self.start, self.end, self.count)
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err(format!("grid must look like a:b:count, got `{s}`"));
        };
        let num = |t: &str| -> Result<f64, String> {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("bad grid endpoint `{t}`"))
        };
        let (start, end) = (num(a)?, num(b)?);
        let count: usize = c.trim().parse().map_err(|_| format!("bad grid count `{c}`"))?;
        if count == 0 {
            return Err("grid count must be positive".into());
        }
        if count == 1 && start != end {
            return Err("a one-point grid needs equal endpoints".into());
        }
        if count > 1 && end <= start {
            return Err(format!("grid end must exceed start, got `{s}`"));
        }
        Ok(Self { start, end, count })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{:?}:{}", self.start, self.end, self.count)
    }
}

impl Serialize for GridSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
