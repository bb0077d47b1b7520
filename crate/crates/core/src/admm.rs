//! ADMM for weighted trace minimization over the structured PSD cone.
//!
//! Solves
//!
//! ```text
//! min  tr(B₁W) + tr(B₃T(u)) + tr(B₂ᴴY + YᴴB₂)
//! s.t. U = [[W, Yᴴ], [Y, T(u)]] ⪰ 0,   ‖Y_Ω − Y°_Ω‖_F ≤ η
//! ```
//!
//! with the two-block splitting `x = (W, Y, u)`, `z = U`, coupled by
//! `U = G(x)`. Both updates are closed form: the x-step is a Frobenius
//! projection onto block/Toeplitz structure (plus the data ball), the z-step
//! is one Hermitian eigendecomposition of order `N + L`.


use crate::error::{domain, Error, Result};
use crate::linalg::{fro_norm, hermitian_eigen, hermitian_part, psd_project, real_inner, toeplitz_fit, toeplitz_unchecked};
use crate::scalar::{CMat, CVec, Real};
use crate::signal::ObservationProblem;

/// Iterations between penalty updates. Rebalancing every iteration can lock
/// the penalty into a two-cycle that stalls convergence.
pub const RHO_UPDATE_INTERVAL: usize = 10;

/// PSD weight `B = [[B₁, B₂ᴴ], [B₂, B₃]]` partitioned like `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<T: Real> {
    snapshots: usize,
    matrix: CMat<T>,
}

impl<T: Real> WeightMatrix<T> {
    /// `b1` is `L×L`, `b2` is `N×L`, `b3` is `N×N`.
    pub fn new(b1: &CMat<T>, b2: &CMat<T>, b3: &CMat<T>) -> Result<Self> {
        let l = b1.nrows();
        let n = b3.nrows();
        if !b1.is_square() || !b3.is_square() || b2.shape() != (n, l) {
            return Err(Error::Dimension(format!(
                "weight blocks {:?}, {:?}, {:?} do not partition an (N+L)-square matrix",
                b1.shape(),
                b2.shape(),
                b3.shape()
            )));
        }
        let mut b = CMat::zeros(n + l, n + l);
        b.view_mut((0, 0), (l, l)).copy_from(b1);
        b.view_mut((l, 0), (n, l)).copy_from(b2);
        b.view_mut((0, l), (l, n)).copy_from(&b2.adjoint());
        b.view_mut((l, l), (n, n)).copy_from(b3);
        Self::from_assembled(b, l)
    }

    /// Wraps an assembled `(N+L)×(N+L)` matrix whose leading block is `L×L`.
    pub fn from_assembled(b: CMat<T>, snapshots: usize) -> Result<Self> {
        if !b.is_square() || snapshots == 0 || snapshots >= b.nrows() {
            return Err(Error::Dimension(format!(
                "weight of shape {:?} cannot hold an {snapshots}×{snapshots} leading block",
                b.shape()
            )));
        }
        let scale = fro_norm(&b).max(T::one());
        let asym = fro_norm(&(&b - b.adjoint()));
        if asym > T::lit(1e-10) * scale {
            return domain(format!("weight matrix is not Hermitian (asymmetry {asym})"));
        }
        let b = hermitian_part(&b);
        let eig = hermitian_eigen(&b)?;
        if eig.min_value() < -T::lit(1e-9) * scale {
            return domain(format!("weight matrix is not PSD (min eigenvalue {})", eig.min_value()));
        }
        Ok(Self { snapshots, matrix: b })
    }

    /// `B = I`, which makes the objective `tr(U)`.
    pub fn identity(snapshots: usize, samples: usize) -> Self {
        let d = snapshots + samples;
        Self { snapshots, matrix: CMat::identity(d, d) }
    }

    pub fn snapshots(&self) -> usize {
        self.snapshots
    }

    pub fn samples(&self) -> usize {
        self.matrix.nrows() - self.snapshots
    }

    pub fn as_matrix(&self) -> &CMat<T> {
        &self.matrix
    }

    pub fn b1(&self) -> CMat<T> {
        let l = self.snapshots;
        self.matrix.view((0, 0), (l, l)).into_owned()
    }

    pub fn b2(&self) -> CMat<T> {
        let l = self.snapshots;
        self.matrix.view((l, 0), (self.samples(), l)).into_owned()
    }

    pub fn b3(&self) -> CMat<T> {
        let l = self.snapshots;
        let n = self.samples();
        self.matrix.view((l, l), (n, n)).into_owned()
    }
}

/// ADMM parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T: Real> {
    /// Initial penalty.
    pub rho: T,
    pub max_iters: usize,
    pub eps_abs: T,
    pub eps_rel: T,
    /// Residual balancing of the penalty.
    pub adaptive_rho: bool,
    pub rho_scale: T,
    pub residual_ratio: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self::with_tolerance(T::lit(1e-7))
    }
}

impl<T: Real> SolverConfig<T> {
    /// Defaults with both tolerances set to `tol`.
    pub fn with_tolerance(tol: T) -> Self {
        Self {
            rho: T::one(),
            max_iters: 50_000,
            eps_abs: tol,
            eps_rel: tol,
            adaptive_rho: true,
            rho_scale: T::lit(2.0),
            residual_ratio: T::lit(10.0),
        }
    }

    /// Moderate accuracy for bulk experiments.
    pub fn loose() -> Self {
        Self::with_tolerance(T::lit(1e-5))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > T::zero()) {
            return domain("rho must be positive");
        }
        if self.max_iters == 0 {
            return domain("max_iters must be at least 1");
        }
        if !(self.eps_abs > T::zero() && self.eps_rel > T::zero()) {
            return domain("tolerances must be positive");
        }
        if self.adaptive_rho && !(self.rho_scale > T::one() && self.residual_ratio > T::one()) {
            return domain("rho_scale and residual_ratio must exceed 1");
        }
        Ok(())
    }
}

/// The block variables of the semidefinite program.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpBlockMatrix<T: Real> {
    /// `L×L` Hermitian.
    pub w: CMat<T>,
    /// `N×L` completed signal.
    pub y: CMat<T>,
    /// First row of the Toeplitz block; `u[0]` is real.
    pub u: CVec<T>,
    /// PSD variable of order `N + L`.
    pub psd: CMat<T>,
}

impl<T: Real> SdpBlockMatrix<T> {
    /// `T(u)`.
    pub fn toeplitz(&self) -> CMat<T> {
        toeplitz_unchecked(&self.u)
    }

    /// `[[W, Yᴴ], [Y, T(u)]]` built from the structured variables.
    pub fn structured(&self) -> CMat<T> {
        assemble(&self.w, &self.y, &self.u)
    }
}

/// Output of [`solve_weighted_trace`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSolution<T: Real> {
    pub blocks: SdpBlockMatrix<T>,
    /// `tr(B·G(x))` at the structured iterate.
    pub objective: T,
    pub iterations: usize,
    pub primal_residual: T,
    pub dual_residual: T,
    pub converged: bool,
    /// Penalty in effect at termination.
    pub rho: T,
}

/// Projects `y` onto the Frobenius ball of radius `eta` around `center`.
pub fn ball_project<T: Real>(y: &CMat<T>, center: &CMat<T>, eta: T) -> Result<CMat<T>> {
    if y.shape() != center.shape() {
        return Err(Error::Dimension(format!("{:?} vs center {:?}", y.shape(), center.shape())));
    }
    if !(eta >= T::zero()) {
        return domain("ball radius must be nonnegative");
    }
    if eta == T::zero() {
        return Ok(center.clone());
    }
    let diff = y - center;
    let dist = fro_norm(&diff);
    if dist <= eta {
        return Ok(y.clone());
    }
    Ok(center + diff.map(|z| z.scale(eta / dist)))
}

fn assemble<T: Real>(w: &CMat<T>, y: &CMat<T>, u: &CVec<T>) -> CMat<T> {
    let (n, l) = y.shape();
    let mut g = CMat::zeros(n + l, n + l);
    g.view_mut((0, 0), (l, l)).copy_from(w);
    g.view_mut((l, 0), (n, l)).copy_from(y);
    g.view_mut((0, l), (l, n)).copy_from(&y.adjoint());
    g.view_mut((l, l), (n, n)).copy_from(&toeplitz_unchecked(u));
    g
}

/// Solves the weighted trace problem from `Z = Λ = 0`.
pub fn solve_weighted_trace<T: Real>(
    weight: &WeightMatrix<T>,
    problem: &ObservationProblem<T>,
    config: &SolverConfig<T>,
) -> Result<SolverSolution<T>> {
    config.validate()?;
    let n = problem.num_samples();
    let l = problem.num_snapshots();
    if weight.samples() != n || weight.snapshots() != l {
        return Err(Error::Dimension(format!(
            "weight partitions N={}, L={} but problem has N={n}, L={l}",
            weight.samples(),
            weight.snapshots()
        )));
    }
    let dim = n + l;
    let b = weight.as_matrix();
    let rows: Vec<usize> = problem.omega().iter().map(|&m| m - 1).collect();
    let center = problem.observed();
    let eta = problem.noise_bound();

    let mut z = CMat::zeros(dim, dim);
    let mut dual = CMat::zeros(dim, dim);
    let mut rho = config.rho;
    let abs_scale = T::count(dim);
    let half = T::lit(0.5);

    let mut w = CMat::zeros(l, l);
    let mut y = CMat::zeros(n, l);
    let mut u = CVec::zeros(n);
    let mut g = CMat::zeros(dim, dim);
    let mut primal = T::zero();
    let mut dual_res = T::zero();
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=config.max_iters {
        iterations = it;
        // x-update: structure projection of C = Z − (Λ + B)/ρ
        let c = &z - (&dual + b).unscale(rho);
        w = hermitian_part(&c.view((0, 0), (l, l)).into_owned());
        let lower = c.view((l, 0), (n, l));
        let upper = c.view((0, l), (l, n));
        y = (lower + upper.adjoint()).map(|v| v.scale(half));
        let free_obs = y.select_rows(rows.iter());
        let fitted = ball_project(&free_obs, center, eta)?;
        for (r, &row) in rows.iter().enumerate() {
            y.row_mut(row).copy_from(&fitted.row(r));
        }
        u = toeplitz_fit(&c.view((l, l), (n, n)).into_owned())?;
        u[0].im = T::zero();
        g = assemble(&w, &y, &u);

        // z-update
        let z_prev = std::mem::replace(&mut z, psd_project(&(&g + dual.unscale(rho)))?);

        // dual ascent
        let gap = &g - &z;
        dual += gap.scale(rho);

        primal = fro_norm(&gap);
        dual_res = rho * fro_norm(&(&z - &z_prev));
        let eps_pri = abs_scale * config.eps_abs + config.eps_rel * fro_norm(&g).max(fro_norm(&z));
        let eps_dual = abs_scale * config.eps_abs + config.eps_rel * fro_norm(&dual);
        if !(primal.is_finite() && dual_res.is_finite()) {
            return Err(Error::Solver(format!("ADMM diverged at iteration {it} (rho {rho})")));
        }
        if primal <= eps_pri && dual_res <= eps_dual {
            converged = true;
            break;
        }
        if config.adaptive_rho && it % RHO_UPDATE_INTERVAL == 0 {
            if primal > config.residual_ratio * dual_res {
                rho *= config.rho_scale;
            } else if dual_res > config.residual_ratio * primal {
                rho /= config.rho_scale;
            }
        }
    }

    let objective = real_inner(b, &g);
    Ok(SolverSolution {
        blocks: SdpBlockMatrix { w, y, u, psd: z },
        objective,
        iterations,
        primal_residual: primal,
        dual_residual: dual_res,
        converged,
        rho,
    })
}

