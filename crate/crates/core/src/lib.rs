//! Secure multi-user XL-MIMO downlink: near-field channel modelling,
//! leakage-subspace precoding with greedy user scheduling, and a seeded
//! Monte Carlo driver for secrecy sum-rate experiments.
//!
//! The crate is organised bottom-up:
//!
//! - [`arraychannel`]: uniform linear array geometry and spherical /
//!   planar wavefront steering vectors.
//! - [`scenario`]: seeded drops of legitimate users and clustered
//!   eavesdroppers.
//! - [`precoding`]: orthogonal projectors, projected zero-forcing,
//!   waterfilling, the greedy leakage-subspace scheduler and the plain ZF
//!   baseline.
//! - [`metrics`]: SINR, leakage-to-noise ratio and secrecy rates.
//! - [`experiment`]: parameter sweeps, aggregation and CSV output.

pub mod arraychannel;
pub mod checks;
pub mod config;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod precoding;
pub mod scenario;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dynamically sized complex column vector.
pub type CVector = nalgebra::DVector<C64>;
/// Dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
