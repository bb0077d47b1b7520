//! Experiment orchestration for the gridless solvers: file formats, a grid
//! oracle for the atomic norm, the phase-transition and DOA studies, and plot
//! data emission.

pub mod cli;
pub mod doa;
pub mod error;
pub mod formats;
pub mod oracle;
pub mod phase;
pub mod plots;
pub mod record;
pub mod settings;

pub use error::{HarnessError, Result};
pub use settings::{Method, SolverSettings};
