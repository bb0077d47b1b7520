//! Phase-transition study over the `(M, K)` plane.
//!
//! Every trial redraws `Ω`, the frequencies and the amplitudes from its own
//! ChaCha stream, keyed by `(seed, cell, trial)`, so results do not depend on
//! the number of worker threads.

use std::time::Instant;

use gridless_core::admm::SolverSolution;
use gridless_core::decompose::full_decomposition;
use gridless_core::relax::rwtm;
use gridless_core::signal::{random_problem, relative_error, synthesize};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::settings::{frequency_error, Method, SolverSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransitionGrid {
    pub n: usize,
    pub l: usize,
    pub m_values: Vec<usize>,
    pub k_values: Vec<usize>,
    pub trials: usize,
    /// Success iff the relative error of the completed signal is below this.
    pub threshold: f64,
    /// Minimum wrap-around frequency separation; `1/N` when absent.
    pub min_sep: Option<f64>,
    pub seed: u64,
}

impl PhaseTransitionGrid {
    /// The desk-scale grid: `N = 32`, `M = 8, 12, …, 32`, `K = 2, 4, …, 16`.
    pub fn desk(l: usize, seed: u64) -> Self {
        Self {
            n: 32,
            l,
            m_values: (8..=32).step_by(4).collect(),
            k_values: (2..=16).step_by(2).collect(),
            trials: 5,
            threshold: 1e-6,
            min_sep: None,
            seed,
        }
    }

    pub fn cells(&self) -> usize {
        self.m_values.len() * self.k_values.len()
    }

    pub fn min_separation(&self) -> f64 {
        self.min_sep.unwrap_or(1.0 / self.n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() || self.k_values.is_empty() || self.trials == 0 {
            return Err(HarnessError::Config("phase grid needs M values, K values and at least one trial".into()));
        }
        if self.l == 0 || self.n == 0 {
            return Err(HarnessError::Config("N and L must be positive".into()));
        }
        if let Some(&m) = self.m_values.iter().find(|&&m| m == 0 || m > self.n) {
            return Err(HarnessError::Config(format!("M = {m} outside 1..={}", self.n)));
        }
        if self.k_values.contains(&0) {
            return Err(HarnessError::Config("K must be positive".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(HarnessError::Config("success threshold must be positive".into()));
        }
        Ok(())
    }

    /// ChaCha stream of trial `trial` in cell `cell`.
    pub fn stream(&self, cell: usize, trial: usize) -> u64 {
        ((cell as u64) << 32) | trial as u64
    }
}

/// Metrics of one trial of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: Method,
    pub m: usize,
    pub k: usize,
    pub trial: usize,
    pub seed: u64,
    pub stream: u64,
    pub success: bool,
    pub relative_error: Option<f64>,
    /// Largest distance from a true frequency to the nearest retrieved one.
    pub frequency_error: Option<f64>,
    pub components: Option<usize>,
    pub converged: bool,
    pub iterations: usize,
    pub runtime_s: f64,
    pub error: Option<String>,
}

/// Success fractions, rows indexed by `M` and columns by `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatrix {
    pub method: Method,
    pub n: usize,
    pub l: usize,
    pub m_values: Vec<usize>,
    pub k_values: Vec<usize>,
    pub success: Vec<Vec<f64>>,
}

impl PhaseMatrix {
    pub fn at(&self, m: usize, k: usize) -> Option<f64> {
        let i = self.m_values.iter().position(|&v| v == m)?;
        let j = self.k_values.iter().position(|&v| v == k)?;
        Some(self.success[i][j])
    }

    /// The reference line `K = (M + L)/2` at each `M`.
    pub fn reference_line(&self) -> Vec<(usize, f64)> {
        self.m_values.iter().map(|&m| (m, (m + self.l) as f64 / 2.0)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTransitionResult {
    pub grid: PhaseTransitionGrid,
    pub settings: SolverSettings,
    pub matrices: Vec<PhaseMatrix>,
    pub records: Vec<TrialRecord>,
}

impl PhaseTransitionResult {
    pub fn matrix(&self, method: Method) -> Option<&PhaseMatrix> {
        self.matrices.iter().find(|m| m.method == method)
    }
}

/// Runs every `(M, K)` cell and trial for each requested method.
///
/// When both methods are requested one reweighted run serves both: with the
/// non-final steps at full accuracy its first step is exactly the ANM solve.
pub fn run_phase_transition(
    grid: &PhaseTransitionGrid,
    methods: &[Method],
    settings: &SolverSettings,
    threads: usize,
) -> Result<PhaseTransitionResult> {
    grid.validate()?;
    settings.validate()?;
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();
    if methods.is_empty() {
        return Err(HarnessError::Config("no method requested".into()));
    }
    let mut settings = *settings;
    if methods.contains(&Method::Anm) && methods.contains(&Method::Rwtm) {
        settings.loose_early = false;
    }

    let tasks: Vec<(usize, usize, usize, usize)> = grid
        .m_values
        .iter()
        .flat_map(|&m| grid.k_values.iter().map(move |&k| (m, k)))
        .enumerate()
        .flat_map(|(cell, (m, k))| (0..grid.trials).map(move |t| (cell, m, k, t)))
        .collect();
    let run = |&(cell, m, k, t): &(usize, usize, usize, usize)| run_trial(grid, &methods, &settings, cell, m, k, t);
    let per_trial: Vec<Vec<TrialRecord>> = if threads <= 1 {
        tasks.iter().map(run).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?
            .install(|| tasks.par_iter().map(run).collect())
    };
    let records: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();

    let matrices = methods
        .iter()
        .map(|&method| {
            let success = grid
                .m_values
                .iter()
                .map(|&m| {
                    grid.k_values
                        .iter()
                        .map(|&k| {
                            let hits = records
                                .iter()
                                .filter(|r| r.method == method && r.m == m && r.k == k && r.success)
                                .count();
                            hits as f64 / grid.trials as f64
                        })
                        .collect()
                })
                .collect();
            PhaseMatrix {
                method,
                n: grid.n,
                l: grid.l,
                m_values: grid.m_values.clone(),
                k_values: grid.k_values.clone(),
                success,
            }
        })
        .collect();
    Ok(PhaseTransitionResult { grid: grid.clone(), settings, matrices, records })
}

fn run_trial(
    grid: &PhaseTransitionGrid,
    methods: &[Method],
    settings: &SolverSettings,
    cell: usize,
    m: usize,
    k: usize,
    trial: usize,
) -> Vec<TrialRecord> {
    let stream = grid.stream(cell, trial);
    let blank = |method: Method| TrialRecord {
        method,
        m,
        k,
        trial,
        seed: grid.seed,
        stream,
        success: false,
        relative_error: None,
        frequency_error: None,
        components: None,
        converged: false,
        iterations: 0,
        runtime_s: 0.0,
        error: None,
    };
    let failed = |msg: String| methods.iter().map(|&method| TrialRecord { error: Some(msg.clone()), ..blank(method) }).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    rng.set_stream(stream);
    let (signal, problem) = match random_problem::<f64, _>(grid.n, m, k, grid.l, grid.min_separation(), &mut rng) {
        Ok(p) => p,
        Err(e) => return failed(e.to_string()),
    };
    let truth = synthesize(&signal);

    let score = |method: Method, sol: &SolverSolution<f64>, seconds: f64, iterations: usize| {
        let err = relative_error(&sol.blocks.y, &truth).ok();
        let decomposition = full_decomposition(&sol, settings.rank_tol).ok();
        TrialRecord {
            success: err.is_some_and(|e| e < grid.threshold),
            relative_error: err,
            frequency_error: decomposition.as_ref().and_then(|d| frequency_error(signal.frequencies(), &d.frequencies)),
            components: decomposition.as_ref().map(|d| d.len()),
            converged: sol.converged,
            iterations,
            runtime_s: seconds,
            ..blank(method)
        }
    };

    if methods.contains(&Method::Rwtm) {
        let started = Instant::now();
        match rwtm(&problem, &settings.reweighted()) {
            Ok(out) => {
                let total = started.elapsed().as_secs_f64();
                let mut records = Vec::with_capacity(methods.len());
                if methods.contains(&Method::Anm) {
                    let first = &out.iterates[0];
                    records.push(score(Method::Anm, first, out.step_times[0].as_secs_f64(), first.iterations));
                }
                let iterations = out.iterates.iter().map(|s| s.iterations).sum();
                records.push(score(Method::Rwtm, &out.solution, total, iterations));
                records
            }
            Err(e) => failed(e.to_string()),
        }
    } else {
        let started = Instant::now();
        match gridless_core::relax::anm_complete(&problem, &settings.admm()) {
            Ok(sol) => vec![score(Method::Anm, &sol, started.elapsed().as_secs_f64(), sol.iterations)],
            Err(e) => failed(e.to_string()),
        }
    }
}
