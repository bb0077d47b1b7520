//! Convex atomic-norm minimization (ANM) and its reweighted nonconvex
//! refinement (RWTM), both solved by [`crate::admm`].
//!
//! RWTM minimizes `ln det(U + εI)` by majorization-minimization: each outer
//! step solves the trace problem with weight `(U_{j−1} + εI)⁻¹`, starting
//! from `U₀ = I`, so the first step is ANM itself.

use std::time::{Duration, Instant};

use crate::admm::{solve_weighted_trace, SolverConfig, SolverSolution, WeightMatrix};
use crate::error::{domain, Result};
use crate::linalg::hermitian_eigen;
use crate::scalar::{CMat, Real};
use crate::signal::ObservationProblem;

/// Inner tolerance for non-final RWTM steps when `loose_early` is set.
pub const LOOSE_INNER_TOLERANCE: f64 = 1e-4;

/// Smallest ε used by the relative mode.
pub const EPSILON_FLOOR: f64 = 1e-8;

/// How the RWTM smoothing constant ε is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonMode {
    /// `ε = value · λ_max(U₁)` (floored), fixed after the first, convex, step.
    RelativeToSpectrum,
    /// `ε = value`.
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwtmConfig<T: Real> {
    pub max_outer: usize,
    pub epsilon_mode: EpsilonMode,
    pub epsilon_value: T,
    pub inner: SolverConfig<T>,
    pub loose_early: bool,
}

impl<T: Real> Default for RwtmConfig<T> {
    fn default() -> Self {
        Self {
            max_outer: 3,
            epsilon_mode: EpsilonMode::RelativeToSpectrum,
            epsilon_value: T::lit(1e-2),
            inner: SolverConfig::default(),
            loose_early: true,
        }
    }
}

impl<T: Real> RwtmConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer == 0 {
            return domain("max_outer must be at least 1");
        }
        if !(self.epsilon_value > T::zero()) {
            return domain("epsilon must be positive");
        }
        self.inner.validate()
    }
}

/// Result of [`rwtm`].
#[derive(Debug, Clone, PartialEq)]
pub struct RwtmOutcome<T: Real> {
    /// Solution of the last outer step.
    pub solution: SolverSolution<T>,
    /// `ln det(U_j + εI)` for `j = 1, …, outer_iterations`.
    pub surrogate_trace: Vec<T>,
    /// The ε in effect at each step (constant after step 1).
    pub epsilons: Vec<T>,
    /// Every outer solution in order; the first is the ANM solution.
    pub iterates: Vec<SolverSolution<T>>,
    /// Wall-clock time of each outer step.
    pub step_times: Vec<Duration>,
}

impl<T: Real> RwtmOutcome<T> {
    pub fn outer_iterations(&self) -> usize {
        self.iterates.len()
    }
}

/// `Σ ln(max(λ_i, 0) + ε)` over the eigenvalues of `U`.
pub fn logdet_surrogate<T: Real>(u: &CMat<T>, epsilon: T) -> Result<T> {
    if !(epsilon > T::zero()) {
        return domain("epsilon must be positive");
    }
    let eig = hermitian_eigen(u)?;
    Ok(eig
        .values
        .iter()
        .fold(T::zero(), |acc, &l| acc + (l.max(T::zero()) + epsilon).ln()))
}

/// Atomic norm `‖Y‖_A`, evaluated as `tr(U*)/(2√N)` of the fully observed SDP.
pub fn atomic_norm<T: Real>(y: &CMat<T>, config: &SolverConfig<T>) -> Result<T> {
    if y.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return domain("atomic norm of a non-finite matrix");
    }
    let (n, l) = y.shape();
    let problem = ObservationProblem::full(y.clone())?;
    let sol = solve_weighted_trace(&WeightMatrix::identity(l, n), &problem, config)?;
    Ok(sol.objective / (T::lit(2.0) * T::count(n).sqrt()))
}

/// Atomic-norm completion: the trace problem with `B = I`.
pub fn anm_complete<T: Real>(problem: &ObservationProblem<T>, config: &SolverConfig<T>) -> Result<SolverSolution<T>> {
    let weight = WeightMatrix::identity(problem.num_snapshots(), problem.num_samples());
    solve_weighted_trace(&weight, problem, config)
}

/// Reweighted trace minimization.
///
/// Weights are rescaled to unit spectral norm, `B_j ∝ (U_{j−1} + εI)⁻¹`;
/// a positive rescaling leaves each subproblem's minimizer unchanged and
/// keeps the penalty on the same scale as the objective. Every step starts
/// from a cold ADMM state.
pub fn rwtm<T: Real>(problem: &ObservationProblem<T>, config: &RwtmConfig<T>) -> Result<RwtmOutcome<T>> {
    config.validate()?;
    let n = problem.num_samples();
    let l = problem.num_snapshots();
    let mut iterates: Vec<SolverSolution<T>> = Vec::with_capacity(config.max_outer);
    let mut surrogate_trace = Vec::with_capacity(config.max_outer);
    let mut epsilons = Vec::with_capacity(config.max_outer);
    let mut epsilon = config.epsilon_value;
    let mut step_times = Vec::with_capacity(config.max_outer);

    for j in 1..=config.max_outer {
        let started = Instant::now();
        let inner = if config.loose_early && j < config.max_outer {
            SolverConfig { eps_abs: T::lit(LOOSE_INNER_TOLERANCE), eps_rel: T::lit(LOOSE_INNER_TOLERANCE), ..config.inner }
        } else {
            config.inner
        };
        let weight = match iterates.last() {
            None => WeightMatrix::identity(l, n),
            Some(prev) => reweight(&prev.blocks.psd, epsilon, l)?,
        };
        let sol = solve_weighted_trace(&weight, problem, &inner)?;
        if j == 1 && config.epsilon_mode == EpsilonMode::RelativeToSpectrum {
            let lambda_max = hermitian_eigen(&sol.blocks.psd)?.max_value();
            epsilon = (config.epsilon_value * lambda_max).max(T::lit(EPSILON_FLOOR));
        }
        surrogate_trace.push(logdet_surrogate(&sol.blocks.psd, epsilon)?);
        epsilons.push(epsilon);
        iterates.push(sol);
        step_times.push(started.elapsed());
    }

    Ok(RwtmOutcome {
        solution: iterates.last().cloned().expect("max_outer >= 1"),
        surrogate_trace,
        epsilons,
        iterates,
        step_times,
    })
}

/// `(λ_min + ε)·(U + εI)⁻¹`, Hermitian PSD with largest eigenvalue 1.
pub fn reweight<T: Real>(u: &CMat<T>, epsilon: T, snapshots: usize) -> Result<WeightMatrix<T>> {
    let eig = hermitian_eigen(u)?;
    let floor = eig.min_value().max(T::zero()) + epsilon;
    let b = eig.reconstruct(|lambda| floor / (lambda.max(T::zero()) + epsilon));
    WeightMatrix::from_assembled(b, snapshots)
}
