//! Frequency and amplitude retrieval from a solved SDP.
//!
//! A PSD Toeplitz matrix of rank `r < N` factors uniquely as
//! `T(u) = Σ_k p_k a(f_k) a(f_k)ᴴ`. Frequencies come from the rotational
//! invariance of its signal subspace (rows `1..N` versus rows `2..N+1` differ by
//! the diagonal phase matrix `diag(e^{i2πf_k})`); powers come from a
//! nonnegative least-squares fit of the Toeplitz entries.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::admm::SolverSolution;
use crate::error::{domain, Error, Result};
use crate::linalg::{hermitian_eigen, least_squares, nnls};
use crate::scalar::{cis, torus_distance, wrap_unit, CMat, CVec, Real};
use crate::signal::{sample, steering_on, steering_unchecked};

/// Default relative eigenvalue threshold for the numerical rank of `T(u)`.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;
/// Components with `c_k` below this fraction of the largest are dropped.
pub const PRUNE_RELATIVE: f64 = 1e-6;
/// Minimum torus gap between frequencies for amplitude retrieval.
pub const MIN_FREQUENCY_GAP: f64 = 1e-8;

/// Retrieved atoms `Y ≈ Σ_k c_k a(f_k) φ_k`, sorted by frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicDecomposition<T: Real> {
    pub frequencies: Vec<T>,
    /// Vandermonde weights of `T(u)`.
    pub powers: Vec<T>,
    /// `r×L`; row `k` is `s_k`.
    pub amplitudes: CMat<T>,
    /// `c_k = ‖s_k‖₂`.
    pub coefficients: Vec<T>,
    /// Unit-norm rows `φ_k`.
    pub directions: CMat<T>,
}

impl<T: Real> AtomicDecomposition<T> {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    fn empty(snapshots: usize) -> Self {
        Self {
            frequencies: Vec::new(),
            powers: Vec::new(),
            amplitudes: CMat::zeros(0, snapshots),
            coefficients: Vec::new(),
            directions: CMat::zeros(0, snapshots),
        }
    }
}

/// Vandermonde decomposition of `T(u)`: frequencies ascending in `[0, 1)` and
/// their positive powers.
pub fn vandermonde_decompose<T: Real>(u: &CVec<T>, rank_tol: T) -> Result<(Vec<T>, Vec<T>)> {
    let t = crate::linalg::toeplitz(u)?;
    let n = t.nrows();
    let eig = hermitian_eigen(&t)?;
    let lambda_max = eig.max_value();
    let scale = eig.values.iter().fold(T::zero(), |acc, l| acc.max(l.abs()));
    if scale == T::zero() {
        return Ok((Vec::new(), Vec::new()));
    }
    if lambda_max <= T::zero() {
        return domain("Toeplitz block is negative semidefinite");
    }
    let threshold = rank_tol * lambda_max;
    let rank = eig.values.iter().filter(|&&l| l > threshold).count();
    if rank >= n {
        return Err(Error::NotLowRank { rank, n });
    }

    let signal = eig.vectors.columns(n - rank, rank);
    let upper = signal.rows(0, n - 1).into_owned();
    let lower = signal.rows(1, n - 1).into_owned();
    let rotation = least_squares(upper, &lower)?;
    let schur = rotation
        .try_schur(T::eps(), 10_000)
        .ok_or_else(|| Error::Solver("Schur decomposition of rotation operator failed".into()))?;
    let (_, tri) = schur.unpack();
    let mut freqs: Vec<T> = (0..rank)
        .map(|k| wrap_unit(tri[(k, k)].im.atan2(tri[(k, k)].re) / T::two_pi()))
        .collect();
    freqs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));

    let powers = fit_powers(u, &freqs)?;
    Ok((freqs, powers))
}

/// Nonnegative powers matching `T(u)` entrywise for the given frequencies.
///
/// Each generator entry `u_d` is weighted by how often it occurs in `T(u)`.
fn fit_powers<T: Real>(u: &CVec<T>, freqs: &[T]) -> Result<Vec<T>> {
    let n = u.len();
    let r = freqs.len();
    let rows = 2 * n - 1;
    let mut a = DMatrix::<T>::zeros(rows, r);
    let mut b = DVector::<T>::zeros(rows);
    let root_n = T::count(n).sqrt();
    a.row_mut(0).fill(root_n);
    b[0] = u[0].re * root_n;
    for d in 1..n {
        let w = T::count(2 * (n - d)).sqrt();
        for (k, &f) in freqs.iter().enumerate() {
            let z = cis(-T::two_pi() * wrap_unit(T::count(d) * f));
            a[(2 * d - 1, k)] = z.re * w;
            a[(2 * d, k)] = z.im * w;
        }
        b[2 * d - 1] = u[d].re * w;
        b[2 * d] = u[d].im * w;
    }
    let p = nnls(&a, &b)?;
    Ok(p.iter().map(|&v| v.max(T::zero())).collect())
}

/// Least-squares amplitudes `S` minimizing `‖Y − Σ_k a(f_k) s_k‖_F`.
pub fn retrieve_amplitudes<T: Real>(y: &CMat<T>, freqs: &[T]) -> Result<CMat<T>> {
    let omega: Vec<usize> = (1..=y.nrows()).collect();
    retrieve_amplitudes_on(y, &omega, freqs)
}

/// As [`retrieve_amplitudes`], fitting only the rows `omega` (1-based) of the
/// full-length model to `y_omega`.
pub fn retrieve_amplitudes_on<T: Real>(y_omega: &CMat<T>, omega: &[usize], freqs: &[T]) -> Result<CMat<T>> {
    if y_omega.nrows() != omega.len() {
        return Err(Error::Dimension(format!("{} rows vs {} indices", y_omega.nrows(), omega.len())));
    }
    let r = freqs.len();
    if r == 0 {
        return Ok(CMat::zeros(0, y_omega.ncols()));
    }
    if r > omega.len() {
        return domain(format!("{r} frequencies exceed {} samples", omega.len()));
    }
    for i in 0..r {
        for j in 0..i {
            if torus_distance(freqs[i], freqs[j]) < T::lit(MIN_FREQUENCY_GAP) {
                return Err(Error::Conditioning(format!(
                    "frequencies {} and {} are closer than {MIN_FREQUENCY_GAP}",
                    freqs[j], freqs[i]
                )));
            }
        }
    }
    let mut a = CMat::<T>::zeros(omega.len(), r);
    for (k, &f) in freqs.iter().enumerate() {
        a.set_column(k, &steering_on(f, omega));
    }
    least_squares(a, y_omega)
}

/// Where amplitudes are fitted in [`full_decomposition_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplitudeFit<'a> {
    /// On the completed `Y` (all `N` rows).
    #[default]
    Completed,
    /// On the observed rows only; carries the 1-based sample indices.
    Observed(&'a [usize]),
}

/// Frequencies from `T(u)`, amplitudes from the completed `Y`, spurious
/// components pruned.
pub fn full_decomposition<T: Real>(solution: &SolverSolution<T>, rank_tol: T) -> Result<AtomicDecomposition<T>> {
    full_decomposition_with(solution, rank_tol, AmplitudeFit::Completed)
}

pub fn full_decomposition_with<T: Real>(
    solution: &SolverSolution<T>,
    rank_tol: T,
    fit: AmplitudeFit<'_>,
) -> Result<AtomicDecomposition<T>> {
    let y = &solution.blocks.y;
    let l = y.ncols();
    let (freqs, powers) = vandermonde_decompose(&solution.blocks.u, rank_tol)?;
    if freqs.is_empty() {
        return Ok(AtomicDecomposition::empty(l));
    }
    let amps = match fit {
        AmplitudeFit::Completed => retrieve_amplitudes(y, &freqs)?,
        AmplitudeFit::Observed(omega) => retrieve_amplitudes_on(&sample(y, omega)?, omega, &freqs)?,
    };
    let coeffs: Vec<T> = amps.row_iter().map(|r| r.norm()).collect();
    let c_max = coeffs.iter().fold(T::zero(), |acc, &c| acc.max(c));
    let keep: Vec<usize> = (0..freqs.len())
        .filter(|&k| c_max > T::zero() && coeffs[k] >= T::lit(PRUNE_RELATIVE) * c_max && powers[k] > T::zero())
        .collect();
    if keep.is_empty() {
        return Ok(AtomicDecomposition::empty(l));
    }
    let amplitudes = amps.select_rows(keep.iter());
    let coefficients: Vec<T> = keep.iter().map(|&k| coeffs[k]).collect();
    let directions = CMat::from_fn(keep.len(), l, |i, t| amplitudes[(i, t)].unscale(coefficients[i]));
    Ok(AtomicDecomposition {
        frequencies: keep.iter().map(|&k| freqs[k]).collect(),
        powers: keep.iter().map(|&k| powers[k]).collect(),
        amplitudes,
        coefficients,
        directions,
    })
}

/// `Σ_k p_k a(f_k) a(f_k)ᴴ` as a Toeplitz generator (first row).
pub fn toeplitz_generator<T: Real>(freqs: &[T], powers: &[T], n: usize) -> CVec<T> {
    let mut u = CVec::<T>::zeros(n);
    for (&f, &p) in freqs.iter().zip(powers) {
        let a = steering_unchecked(f, n);
        for d in 0..n {
            u[d] += a[d].conj().scale(p);
        }
    }
    u[0] = Complex::new(u[0].re, T::zero());
    u
}
