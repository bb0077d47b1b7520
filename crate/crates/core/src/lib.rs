//! Gridless recovery of frequency-sparse signals from partial samples.
//!
//! The crate recovers `Y = Σ_k a(f_k) s_k` (one or many snapshots sharing the
//! same frequencies) from a subset of its rows by minimizing the atomic norm,
//! written as a trace minimization over a structured PSD matrix, and refines
//! it with reweighted trace minimization. Frequencies and amplitudes are then
//! read off the Toeplitz block by a Vandermonde decomposition.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the precision to `f64`.

pub mod admm;
pub mod decompose;
pub mod error;
pub mod linalg;
pub mod music;
pub mod relax;
pub mod scalar;
pub mod signal;
pub mod spark;

pub use error::{Error, Result};
pub use scalar::{torus_distance, wrap_unit, CMat, CVec, Cplx, Real};

pub type Signal = signal::FrequencySparseSignal<f64>;
pub type Problem = signal::ObservationProblem<f64>;
pub type Solution = admm::SolverSolution<f64>;
pub type Config = admm::SolverConfig<f64>;
pub type Weight = admm::WeightMatrix<f64>;
