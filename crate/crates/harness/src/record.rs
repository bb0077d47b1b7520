//! Experiment records: the result, the configuration that produced it and
//! the environment it ran in.

use serde::{Deserialize, Serialize};

/// Build and host facts; no timestamps, so reruns compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
    pub threads: usize,
    /// Noise convention used by every noisy experiment.
    pub snr_definition: String,
}

impl Environment {
    pub fn current(threads: usize) -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            threads,
            snr_definition: "mean per-sample signal power over per-sample noise variance".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord<T> {
    pub experiment: String,
    pub environment: Environment,
    pub result: T,
}

impl<T> ExperimentRecord<T> {
    pub fn new(experiment: &str, threads: usize, result: T) -> Self {
        Self { experiment: experiment.into(), environment: Environment::current(threads), result }
    }
}
