//! Dense complex kernels: Hermitian eigendecomposition, PSD projection,
//! Toeplitz assembly and its adjoint, least squares and a small NNLS solver.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::scalar::{CMat, CVec, Real};

/// Ascending eigenvalues with matching unit eigenvectors (as columns).
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMat<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn max_value(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }

    pub fn min_value(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    /// Rebuilds `V f(Λ) Vᴴ`, skipping eigenpairs mapped to zero.
    pub fn reconstruct(&self, f: impl Fn(T) -> T) -> CMat<T> {
        let n = self.vectors.nrows();
        let mut out = CMat::<T>::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == T::zero() {
                continue;
            }
            let v = self.vectors.column(k);
            let scaled = v.map(|z| z * w);
            out.gerc(Complex::new(T::one(), T::zero()), &scaled, &v, Complex::new(T::one(), T::zero()));
        }
        hermitian_part(&out)
    }
}

/// `(H + Hᴴ) / 2`.
pub fn hermitian_part<T: Real>(h: &CMat<T>) -> CMat<T> {
    let half = T::lit(0.5);
    let mut out = h + h.adjoint();
    out.iter_mut().for_each(|z| *z = z.scale(half));
    out
}

/// Eigendecomposition of the Hermitian part of `h`, eigenvalues ascending.
pub fn hermitian_eigen<T: Real>(h: &CMat<T>) -> Result<HermitianEigen<T>> {
    if !h.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition of non-square {}x{} matrix",
            h.nrows(),
            h.ncols()
        )));
    }
    let n = h.nrows();
    if n == 0 {
        return Ok(HermitianEigen { values: Vec::new(), vectors: CMat::zeros(0, 0) });
    }
    if h.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Solver("non-finite entry in Hermitian eigenproblem".into()));
    }
    let sym = hermitian_part(h);
    let eig = sym
        .try_symmetric_eigen(T::default_epsilon(), 200 * n.max(10))
        .ok_or_else(|| Error::Solver(format!("Hermitian eigensolver did not converge (order {n})")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Frobenius-nearest PSD matrix: negative eigenvalues clipped to zero.
pub fn psd_project<T: Real>(h: &CMat<T>) -> Result<CMat<T>> {
    Ok(psd_project_with_spectrum(h)?.0)
}

/// PSD projection that also returns the eigendecomposition it used.
///
/// Built from whichever side of the spectrum is smaller: `V₊Λ₊V₊ᴴ`, or
/// `H − V₋Λ₋V₋ᴴ`.
pub fn psd_project_with_spectrum<T: Real>(h: &CMat<T>) -> Result<(CMat<T>, HermitianEigen<T>)> {
    let eig = hermitian_eigen(h)?;
    let n = eig.values.len();
    let negative = eig.values.iter().take_while(|&&l| l <= T::zero()).count();
    let projected = if negative == n {
        CMat::zeros(n, n)
    } else if negative == 0 {
        hermitian_part(h)
    } else if n - negative <= negative {
        hermitian_part(&outer_sum(&eig, negative..n))
    } else {
        hermitian_part(&(hermitian_part(h) - outer_sum(&eig, 0..negative)))
    };
    Ok((projected, eig))
}

/// `Σ_k λ_k v_k v_kᴴ` over the eigenpairs in `range`.
fn outer_sum<T: Real>(eig: &HermitianEigen<T>, range: std::ops::Range<usize>) -> CMat<T> {
    let v = eig.vectors.columns(range.start, range.len());
    let mut scaled = v.clone_owned();
    for (j, k) in range.enumerate() {
        let lambda = eig.values[k];
        scaled.column_mut(j).iter_mut().for_each(|z| *z = z.scale(lambda));
    }
    scaled * v.adjoint()
}

/// Hermitian Toeplitz matrix whose first row is `u`.
///
/// Entry `(m, n)` is `u[n - m]` on and above the diagonal and the conjugate
/// of `u[m - n]` below it. `u[0]` must be real.
pub fn toeplitz<T: Real>(u: &CVec<T>) -> Result<CMat<T>> {
    if u.is_empty() {
        return domain("Toeplitz generator must be non-empty");
    }
    let scale = u.iter().fold(T::zero(), |acc, z| acc.max(z.norm_sqr().sqrt()));
    if u[0].im.abs() > T::lit(1e3) * T::eps() * scale.max(T::one()) {
        return domain(format!("first Toeplitz entry must be real, got imaginary part {}", u[0].im));
    }
    Ok(toeplitz_unchecked(u))
}

/// [`toeplitz`] without the realness check; the imaginary part of `u[0]` is dropped.
pub fn toeplitz_unchecked<T: Real>(u: &CVec<T>) -> CMat<T> {
    let n = u.len();
    CMat::from_fn(n, n, |r, c| {
        if c > r {
            u[c - r]
        } else if c < r {
            u[r - c].conj()
        } else {
            Complex::new(u[0].re, T::zero())
        }
    })
}

/// Adjoint of `u ↦ T(u)` under the real inner product `Re tr(Aᴴ B)`.
///
/// Returns `g` with `⟨T(u), M⟩ = Re Σ_d conj(u_d) g_d` for every `u` with real
/// `u_0`: `g_0` is the real part of the trace and `g_d` sums superdiagonal `d`
/// plus the conjugate of subdiagonal `d`.
pub fn toeplitz_adjoint<T: Real>(m: &CMat<T>) -> Result<CVec<T>> {
    if !m.is_square() {
        return Err(Error::Dimension("Toeplitz adjoint needs a square matrix".into()));
    }
    let n = m.nrows();
    let mut g = CVec::<T>::zeros(n);
    if n == 0 {
        return Ok(g);
    }
    let tr = (0..n).fold(T::zero(), |acc, i| acc + m[(i, i)].re);
    g[0] = Complex::new(tr, T::zero());
    for d in 1..n {
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..n - d {
            acc += m[(i, i + d)] + m[(i + d, i)].conj();
        }
        g[d] = acc;
    }
    Ok(g)
}

/// Generator of the Frobenius-nearest Hermitian Toeplitz matrix to `m`
/// (diagonal averaging: the adjoint normalized by diagonal multiplicity).
pub fn toeplitz_fit<T: Real>(m: &CMat<T>) -> Result<CVec<T>> {
    let n = m.nrows();
    let mut g = toeplitz_adjoint(m)?;
    if n == 0 {
        return Ok(g);
    }
    g[0] = g[0].unscale(T::count(n));
    for d in 1..n {
        g[d] = g[d].unscale(T::count(2 * (n - d)));
    }
    Ok(g)
}

/// Real inner product `Re tr(Aᴴ B)`.
pub fn real_inner<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc + x.re * y.re + x.im * y.im)
}

/// Frobenius norm.
pub fn fro_norm<T: Real>(a: &CMat<T>) -> T {
    a.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// Least-squares solution of `A X = B` for tall `A` of full column rank,
/// via Householder QR.
pub fn least_squares<T, N>(a: DMatrix<N>, b: &DMatrix<N>) -> Result<DMatrix<N>>
where
    T: Real,
    N: ComplexField<RealField = T>,
{
    let (m, n) = a.shape();
    if b.nrows() != m {
        return Err(Error::Dimension(format!("least squares: A has {m} rows but B has {}", b.nrows())));
    }
    if n > m {
        return Err(Error::Dimension(format!("least squares: {n} unknowns exceed {m} equations")));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, b.ncols()));
    }
    let qr = a.qr();
    let r = qr.r();
    let diag: Vec<T> = (0..n).map(|i| r[(i, i)].clone().modulus()).collect();
    let largest = diag.iter().fold(T::zero(), |acc, &d| acc.max(d));
    let smallest = diag.iter().fold(largest, |acc, &d| acc.min(d));
    let floor = T::count(m) * T::eps() * largest;
    if !(smallest > floor) {
        return Err(Error::Conditioning(format!(
            "least-squares system is rank deficient (|R| diagonal spans {} to {})",
            smallest.as_f64(),
            largest.as_f64()
        )));
    }
    let rhs = qr.q().adjoint() * b;
    r.solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::Solver("triangular solve failed".into()))
}

/// Lawson–Hanson nonnegative least squares: `min ‖A x − b‖₂` with `x ≥ 0`.
pub fn nnls<T: Real>(a: &DMatrix<T>, b: &DVector<T>) -> Result<DVector<T>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::Dimension(format!("nnls: A has {m} rows but b has {}", b.len())));
    }
    let mut x = DVector::<T>::zeros(n);
    let mut passive = vec![false; n];
    let scale = a.iter().fold(T::zero(), |acc, v| acc.max(v.abs())).max(T::one());
    let tol = T::lit(10.0) * T::count(m.max(n)) * T::eps() * scale * scale
        * b.iter().fold(T::zero(), |acc, v| acc.max(v.abs())).max(T::one());
    let max_outer = 3 * n + 10;

    let solve_passive = |passive: &[bool]| -> Result<DVector<T>> {
        let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let mut z = DVector::<T>::zeros(n);
        if idx.is_empty() {
            return Ok(z);
        }
        let sub = DMatrix::from_fn(m, idx.len(), |i, k| a[(i, idx[k])]);
        let sol = least_squares(sub, &DMatrix::from_column_slice(m, 1, b.as_slice()))?;
        for (k, &j) in idx.iter().enumerate() {
            z[j] = sol[k];
        }
        Ok(z)
    };

    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&p, &q| w[p].partial_cmp(&w[q]).unwrap_or(std::cmp::Ordering::Equal));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            let z = solve_passive(&passive)?;
            if (0..n).filter(|&k| passive[k]).all(|k| z[k] > T::zero()) {
                x = z;
                break;
            }
            let mut alpha = T::one();
            for k in (0..n).filter(|&k| passive[k] && z[k] <= T::zero()) {
                let step = x[k] / (x[k] - z[k]);
                if step < alpha {
                    alpha = step;
                }
            }
            x = &x + (z - &x) * alpha;
            for k in 0..n {
                if passive[k] && x[k] <= tol {
                    passive[k] = false;
                    x[k] = T::zero();
                }
            }
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn toeplitz_identity() {
        let u = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(toeplitz(&u).unwrap(), CMat::identity(3, 3));
    }

    #[test]
    fn toeplitz_two_by_two() {
        let u = CVec::from_vec(vec![c(2.0, 0.0), c(0.0, 1.0)]);
        let t = toeplitz(&u).unwrap();
        let expect = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        assert_eq!(t, expect);
    }

    #[test]
    fn toeplitz_rejects_complex_lead() {
        let u = CVec::from_vec(vec![c(1.0, 0.5), c(0.0, 0.0)]);
        assert!(matches!(toeplitz(&u), Err(Error::Domain(_))));
    }

    #[test]
    fn toeplitz_of_single_frequency_is_outer_product() {
        let (n, f) = (4usize, 0.2f64);
        let u = CVec::from_fn(n, |k, _| crate::scalar::cis(-2.0 * std::f64::consts::PI * f * k as f64));
        let a = crate::signal::steering_vector(f, n).unwrap();
        let outer = &a * a.adjoint();
        let t = toeplitz(&u).unwrap();
        assert!(fro_norm(&(t - outer)) < 1e-13);
    }

    #[test]
    fn adjoint_on_identity_and_rank_one() {
        let n = 3;
        let g = toeplitz_adjoint(&CMat::<f64>::identity(n, n)).unwrap();
        assert_eq!(g[0], c(3.0, 0.0));
        assert_eq!(g[1], c(0.0, 0.0));

        let (n, f) = (6usize, 0.13f64);
        let a = crate::signal::steering_vector(f, n).unwrap();
        let m = &a * a.adjoint();
        let mut e2 = CVec::zeros(n);
        e2[1] = c(1.0, 0.0);
        let direct = real_inner(&toeplitz(&e2).unwrap(), &m);
        let expect = 2.0 * (n as f64 - 1.0) * (2.0 * std::f64::consts::PI * f).cos();
        assert_relative_eq!(direct, expect, epsilon = 1e-12);
        let g = toeplitz_adjoint(&m).unwrap();
        assert_relative_eq!(g[1].re, expect, epsilon = 1e-12);
    }

    #[test]
    fn psd_projection_cases() {
        let h = CMat::from_row_slice(2, 2, &[c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let p = psd_project(&h).unwrap();
        assert!((p[(0, 0)] - c(3.0, 0.0)).norm() < 1e-14);
        assert!(p[(1, 1)].norm() < 1e-14);

        let h = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let p = psd_project(&h).unwrap();
        for z in p.iter() {
            assert!((z - c(0.5, 0.0)).norm() < 1e-14);
        }

        let b = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.5), c(2.0, -1.0), c(0.3, 0.0)]);
        let psd = &b * b.adjoint();
        assert!(fro_norm(&(psd_project(&psd).unwrap() - &psd)) < 1e-12);
    }

    #[test]
    fn nnls_matches_unconstrained_when_interior_and_clips_otherwise() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = nnls(&a, &b).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 2.0, epsilon = 1e-12);

        let b = DVector::from_vec(vec![-1.0, 2.0, 1.0]);
        let x = nnls(&a, &b).unwrap();
        assert_eq!(x[0], 0.0);
        assert_relative_eq!(x[1], 1.5, epsilon = 1e-12);
    }

    #[test]
    fn least_squares_exact_and_rank_checks() {
        let a = CMat::<f64>::from_fn(5, 2, |i, j| Complex::new((i + 1) as f64, (i * j) as f64 - 1.0));
        let x = CMat::<f64>::from_fn(2, 3, |i, j| Complex::new(i as f64 - j as f64, 0.5));
        let b = &a * &x;
        let sol = least_squares(a.clone(), &b).unwrap();
        assert!(fro_norm(&(sol - x)) < 1e-12);

        let mut dup = a.clone();
        let first = dup.column(0).into_owned();
        dup.set_column(1, &first);
        assert!(matches!(least_squares(dup, &b), Err(Error::Conditioning(_))));
        assert!(least_squares(a.transpose(), &CMat::zeros(2, 1)).is_err());
    }
}
