//! Solver settings shared by the CLI and the experiments.

use std::time::{Duration, Instant};

use gridless_core::admm::{SolverConfig, SolverSolution};
use gridless_core::relax::{anm_complete, rwtm, EpsilonMode, RwtmConfig, RwtmOutcome};
use gridless_core::{torus_distance, Problem};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Anm,
    Rwtm,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Anm => "anm",
            Method::Rwtm => "rwtm",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iters: usize,
    pub rho: f64,
    pub outer: usize,
    pub epsilon_rel: f64,
    pub loose_early: bool,
    pub rank_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: 1e-7, max_iters: 50_000, rho: 1.0, outer: 3, epsilon_rel: 1e-2, loose_early: true, rank_tol: 1e-6 }
    }
}

impl SolverSettings {
    pub fn admm(&self) -> SolverConfig<f64> {
        SolverConfig { rho: self.rho, max_iters: self.max_iters, ..SolverConfig::with_tolerance(self.tol) }
    }

    pub fn reweighted(&self) -> RwtmConfig<f64> {
        RwtmConfig {
            max_outer: self.outer,
            epsilon_mode: EpsilonMode::RelativeToSpectrum,
            epsilon_value: self.epsilon_rel,
            inner: self.admm(),
            loose_early: self.loose_early,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.admm().validate()?;
        self.reweighted().validate()?;
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(HarnessError::Config(format!("rank tolerance {} outside (0, 1)", self.rank_tol)));
        }
        Ok(())
    }
}

/// A solved problem with its timing; `outcome` is set for RWTM.
#[derive(Debug, Clone)]
pub struct Solved {
    pub solution: SolverSolution<f64>,
    pub outcome: Option<RwtmOutcome<f64>>,
    pub runtime: Duration,
}

impl Solved {
    pub fn iterations(&self) -> usize {
        match &self.outcome {
            Some(o) => o.iterates.iter().map(|s| s.iterations).sum(),
            None => self.solution.iterations,
        }
    }
}

pub fn solve(problem: &Problem, method: Method, settings: &SolverSettings) -> Result<Solved> {
    let started = Instant::now();
    Ok(match method {
        Method::Anm => {
            let solution = anm_complete(problem, &settings.admm())?;
            Solved { solution, outcome: None, runtime: started.elapsed() }
        }
        Method::Rwtm => {
            let outcome = rwtm(problem, &settings.reweighted())?;
            Solved { solution: outcome.solution.clone(), outcome: Some(outcome), runtime: started.elapsed() }
        }
    })
}

/// Largest distance from a true frequency to its nearest estimate; `None`
/// when there are no estimates.
pub fn frequency_error(truth: &[f64], estimates: &[f64]) -> Option<f64> {
    if estimates.is_empty() {
        return None;
    }
    Some(
        truth
            .iter()
            .map(|&f| estimates.iter().map(|&e| torus_distance(f, e)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max),
    )
}
