//! Partition functions of Unique Games instances.
//!
//! The partition function `Z(G; w)` sums `w^(#satisfied edges)` over all
//! colorings of a Unique Games instance. This crate provides exact oracles
//! for it (direct enumeration and the random-cluster subgraph expansion),
//! two approximation schemes for `log Z` (the truncated cluster expansion
//! over polymers and Taylor interpolation inside a zero-free region), the
//! Count Unique Games decision procedure built on them, and numeric checks
//! of the constants behind the zero-free region.
//!
//! Colors are 0-indexed. Every edge `(u, v, perm)` is oriented and is
//! satisfied by a coloring `x` exactly when `perm[x[u]] == x[v]`.

pub mod cluster;
pub mod config;
pub mod decider;
pub mod error;
pub mod exact;
pub mod instance;
pub mod interp;
pub mod par;
pub mod polymer;
pub mod zerofree;

pub use config::Budget;
pub use error::{Error, Result};
pub use instance::{Assignment, Edge, PlantedInstance, UgInstance};

/// Approximation of `Z(G; w)` carried in log space.
///
/// `log_abs` is `log |ξ|` and `phase` is `arg ξ` (not reduced modulo 2π).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LogValue {
    pub log_abs: f64,
    pub phase: f64,
}

impl LogValue {
    pub fn new(log_abs: f64, phase: f64) -> Self {
        Self { log_abs, phase }
    }

    pub fn from_log(z: num_complex::Complex64) -> Self {
        Self::new(z.re, z.im)
    }

    pub fn as_complex_log(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.log_abs, self.phase)
    }
}
