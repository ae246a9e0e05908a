//! Simulation and analysis of a branching-turnover particle system on the
//! real line.
//!
//! At every step an ordered pair `(i, j)` of distinct particles is drawn
//! uniformly and particle `i` is moved to `X_j + Δ`, where `Δ` is a symmetric
//! centred offset with variance `σ²`. The crate provides
//!
//! * [`offsets`]: the offset law `Δ`, its sampler, density and characteristic function;
//! * [`simulator`]: the Markov chain, its centred and scaled view, and the
//!   inter-particle distance process;
//! * [`empirical`]: time-averaged statistics of recorded trajectories;
//! * [`charfn`]: closed forms and recursions for the stationary
//!   characteristic functions, at finite `N` and in the `N → ∞` limit;
//! * [`moments`]: exact rational moments of the limiting single-particle law.

pub mod charfn;
pub mod empirical;
mod error;
pub mod moments;
pub mod offsets;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
pub use offsets::{OffsetDistribution, OffsetKind};
