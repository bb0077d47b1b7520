//! Frequency-sparse signal model, sampling, noise injection and random
//! problem generation.
//!
//! A signal is `Y = Σ_k a(f_k) s_k` with steering vector
//! `a(f) = [1, e^{i2πf}, …, e^{i2π(N−1)f}]ᵀ` and amplitude rows `s_k ∈ ℂ^{1×L}`.
//! Sample indices are 1-based at every public boundary.

use num_complex::Complex;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::scalar::{cis, torus_distance, CMat, CVec, Real};

/// Retry budget of the separated-frequency rejection sampler.
pub const FREQUENCY_DRAW_BUDGET: usize = 10_000;

/// Ground-truth parametric signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySparseSignal<T: Real> {
    num_samples: usize,
    frequencies: Vec<T>,
    amplitudes: CMat<T>,
}

impl<T: Real> FrequencySparseSignal<T> {
    /// `amplitudes` is `K×L`; row `k` belongs to `frequencies[k]`.
    pub fn new(num_samples: usize, frequencies: Vec<T>, amplitudes: CMat<T>) -> Result<Self> {
        if num_samples == 0 {
            return domain("signal length N must be positive");
        }
        if amplitudes.ncols() == 0 {
            return domain("number of snapshots L must be positive");
        }
        if amplitudes.nrows() != frequencies.len() {
            return Err(Error::Dimension(format!(
                "{} frequencies but {} amplitude rows",
                frequencies.len(),
                amplitudes.nrows()
            )));
        }
        for &f in &frequencies {
            check_frequency(f)?;
        }
        for (i, &fi) in frequencies.iter().enumerate() {
            if frequencies[..i].iter().any(|&fj| fj == fi) {
                return domain(format!("duplicate frequency {fi}"));
            }
        }
        for (k, row) in amplitudes.row_iter().enumerate() {
            if row.iter().all(|z| z.norm_sqr() == T::zero()) {
                return domain(format!("amplitude row {k} is identically zero"));
            }
        }
        Ok(Self { num_samples, frequencies, amplitudes })
    }

    pub fn num_samples(&self) -> usize {
        self.num_samples
    }

    pub fn num_snapshots(&self) -> usize {
        self.amplitudes.ncols()
    }

    pub fn num_components(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[T] {
        &self.frequencies
    }

    pub fn amplitudes(&self) -> &CMat<T> {
        &self.amplitudes
    }

    /// `c_k = ‖s_k‖₂`.
    pub fn coefficients(&self) -> Vec<T> {
        self.amplitudes.row_iter().map(|r| r.norm()).collect()
    }

    /// Unit-norm rows `φ_k = s_k / c_k`.
    pub fn directions(&self) -> CMat<T> {
        let c = self.coefficients();
        CMat::from_fn(self.amplitudes.nrows(), self.amplitudes.ncols(), |k, t| {
            self.amplitudes[(k, t)].unscale(c[k])
        })
    }

    /// Smallest pairwise torus distance, `None` for fewer than two components.
    pub fn min_separation(&self) -> Option<T> {
        min_separation(&self.frequencies)
    }
}

/// Observed rows of a signal with a Frobenius noise bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationProblem<T: Real> {
    num_samples: usize,
    omega: Vec<usize>,
    observed: CMat<T>,
    noise_bound: T,
}

impl<T: Real> ObservationProblem<T> {
    /// `omega` holds strictly increasing 1-based indices; `observed` is `M×L`.
    pub fn new(num_samples: usize, omega: Vec<usize>, observed: CMat<T>, noise_bound: T) -> Result<Self> {
        validate_omega(&omega, num_samples)?;
        if observed.nrows() != omega.len() {
            return Err(Error::Dimension(format!(
                "{} sample indices but {} observed rows",
                omega.len(),
                observed.nrows()
            )));
        }
        if observed.ncols() == 0 {
            return domain("number of snapshots L must be positive");
        }
        if !(noise_bound >= T::zero()) {
            return domain("noise bound must be nonnegative");
        }
        Ok(Self { num_samples, omega, observed, noise_bound })
    }

    /// Every row observed, no noise.
    pub fn full(y: CMat<T>) -> Result<Self> {
        let n = y.nrows();
        Self::new(n, (1..=n).collect(), y, T::zero())
    }

    pub fn num_samples(&self) -> usize {
        self.num_samples
    }

    pub fn num_snapshots(&self) -> usize {
        self.observed.ncols()
    }

    pub fn num_observed(&self) -> usize {
        self.omega.len()
    }

    /// 1-based sample indices.
    pub fn omega(&self) -> &[usize] {
        &self.omega
    }

    pub fn observed(&self) -> &CMat<T> {
        &self.observed
    }

    pub fn noise_bound(&self) -> T {
        self.noise_bound
    }

    pub fn with_noise_bound(mut self, eta: T) -> Result<Self> {
        if !(eta >= T::zero()) {
            return domain("noise bound must be nonnegative");
        }
        self.noise_bound = eta;
        Ok(self)
    }
}

/// Checks that `omega` is strictly increasing, 1-based, within `1..=n`, non-empty.
pub fn validate_omega(omega: &[usize], n: usize) -> Result<()> {
    if omega.is_empty() {
        return domain("sample index set must be non-empty");
    }
    if omega.len() > n {
        return domain(format!("{} samples exceed signal length {n}", omega.len()));
    }
    if omega[0] == 0 {
        return domain("sample indices are 1-based; got 0");
    }
    if omega.windows(2).any(|w| w[0] >= w[1]) {
        return domain("sample indices must be strictly increasing");
    }
    if *omega.last().unwrap() > n {
        return domain(format!("sample index {} out of range 1..={n}", omega.last().unwrap()));
    }
    Ok(())
}

fn check_frequency<T: Real>(f: T) -> Result<()> {
    if !(f >= T::zero() && f < T::one()) {
        return domain(format!("frequency {f} outside [0, 1)"));
    }
    Ok(())
}

pub(crate) fn min_separation<T: Real>(f: &[T]) -> Option<T> {
    let mut best: Option<T> = None;
    for i in 0..f.len() {
        for j in 0..i {
            let d = torus_distance(f[i], f[j]);
            best = Some(best.map_or(d, |b| b.min(d)));
        }
    }
    best
}

/// `a(f)` of length `n`.
pub fn steering_vector<T: Real>(f: T, n: usize) -> Result<CVec<T>> {
    check_frequency(f)?;
    if n == 0 {
        return domain("steering vector length must be positive");
    }
    Ok(steering_unchecked(f, n))
}

/// `a(f)` without the range check; any real `f` is reduced modulo 1.
pub fn steering_unchecked<T: Real>(f: T, n: usize) -> CVec<T> {
    CVec::from_fn(n, |j, _| phase(f, j))
}

/// Rows of `a(f)` selected by 1-based `omega`.
pub fn steering_on<T: Real>(f: T, omega: &[usize]) -> CVec<T> {
    CVec::from_fn(omega.len(), |r, _| phase(f, omega[r] - 1))
}

#[inline]
fn phase<T: Real>(f: T, j: usize) -> Complex<T> {
    // reduce j·f modulo 1 first so large indices keep full phase accuracy
    let x = T::count(j) * f;
    cis(T::two_pi() * (x - x.floor()))
}

/// `Σ_k a(f_k) s_k` (`N×L`).
pub fn synthesize<T: Real>(signal: &FrequencySparseSignal<T>) -> CMat<T> {
    synthesize_from(signal.num_samples(), signal.frequencies(), signal.amplitudes())
}

pub(crate) fn synthesize_from<T: Real>(n: usize, freqs: &[T], amps: &CMat<T>) -> CMat<T> {
    let mut y = CMat::<T>::zeros(n, amps.ncols());
    for (k, &f) in freqs.iter().enumerate() {
        let a = steering_unchecked(f, n);
        y += &a * amps.row(k);
    }
    y
}

/// Rows of `y` indexed by 1-based `omega`.
pub fn sample<T: Real>(y: &CMat<T>, omega: &[usize]) -> Result<CMat<T>> {
    if let Some(&bad) = omega.iter().find(|&&m| m == 0 || m > y.nrows()) {
        return domain(format!("sample index {bad} out of range 1..={}", y.nrows()));
    }
    Ok(y.select_rows(omega.iter().map(|&m| m - 1).collect::<Vec<_>>().iter()))
}

/// Adds circular complex Gaussian noise at the given SNR.
///
/// SNR is mean per-entry signal power over per-entry noise variance.
/// `snr_db = +∞` returns the input unchanged with `η = 0`. Returns the noisy
/// matrix and the realized Frobenius norm of the noise.
pub fn add_noise<T: Real, R: Rng + ?Sized>(clean: &CMat<T>, snr_db: T, rng: &mut R) -> Result<(CMat<T>, T)> {
    if snr_db != snr_db || snr_db == -T::one() / T::zero() {
        return domain("SNR must be a number greater than -inf");
    }
    let count = clean.len();
    let power = clean.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()) / T::count(count.max(1));
    if count == 0 || power == T::zero() {
        return domain("SNR undefined for a zero signal");
    }
    if snr_db == T::one() / T::zero() {
        return Ok((clean.clone(), T::zero()));
    }
    let variance = power * T::lit(10.0).powf(-snr_db / T::lit(10.0));
    let sigma = (variance / T::lit(2.0)).sqrt();
    let noise = CMat::from_fn(clean.nrows(), clean.ncols(), |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(T::lit(re) * sigma, T::lit(im) * sigma)
    });
    let eta = noise.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
    Ok((clean + noise, eta))
}

/// Uniformly random `m`-subset of `1..=n`, sorted.
pub fn random_omega<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    if m == 0 || m > n {
        return domain(format!("cannot draw {m} distinct indices from 1..={n}"));
    }
    let mut omega: Vec<usize> = index::sample(rng, n, m).into_iter().map(|i| i + 1).collect();
    omega.sort_unstable();
    Ok(omega)
}

/// `k` uniform frequencies with pairwise torus distance at least `min_sep`.
pub fn random_frequencies<T: Real, R: Rng + ?Sized>(k: usize, min_sep: T, rng: &mut R) -> Result<Vec<T>> {
    if !(min_sep >= T::zero()) || min_sep * T::count(k) > T::one() {
        return domain(format!("{k} frequencies cannot be separated by {min_sep} on the unit torus"));
    }
    let mut freqs: Vec<T> = Vec::with_capacity(k);
    let mut attempts = 0usize;
    while freqs.len() < k {
        if attempts >= FREQUENCY_DRAW_BUDGET {
            return Err(Error::SamplingBudget {
                attempts,
                reason: format!("could not place {k} frequencies with separation {min_sep}"),
            });
        }
        attempts += 1;
        let f = T::lit(rng.gen::<f64>());
        if f >= T::one() {
            continue;
        }
        if freqs.iter().all(|&g| torus_distance(f, g) >= min_sep && f != g) {
            freqs.push(f);
        } else if freqs.len() > 1 && blocked(&freqs, min_sep) {
            // jammed configuration; start over
            freqs.clear();
        }
    }
    Ok(freqs)
}

// True when no point of the torus is at least `sep` away from all of `freqs`.
fn blocked<T: Real>(freqs: &[T], sep: T) -> bool {
    let mut sorted = freqs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    (0..n).all(|i| {
        let next = if i + 1 < n { sorted[i + 1] } else { sorted[0] + T::one() };
        next - sorted[i] < sep + sep
    })
}

/// Amplitudes `(0.5 + w²)·e^{iθ}` with `w ~ N(0,1)`, `θ ~ U[0, 2π)`.
pub fn random_amplitudes<T: Real, R: Rng + ?Sized>(k: usize, l: usize, rng: &mut R) -> CMat<T> {
    CMat::from_fn(k, l, |_, _| {
        let w: f64 = StandardNormal.sample(rng);
        let theta = rng.gen::<f64>() * std::f64::consts::TAU;
        cis(T::lit(theta)).scale(T::lit(0.5 + w * w))
    })
}

/// Random noiseless completion instance: signal plus its observation on a
/// uniformly drawn `Ω`.
pub fn random_problem<T: Real, R: Rng + ?Sized>(
    n: usize,
    m: usize,
    k: usize,
    l: usize,
    min_sep: T,
    rng: &mut R,
) -> Result<(FrequencySparseSignal<T>, ObservationProblem<T>)> {
    if k == 0 || l == 0 {
        return domain("K and L must be positive");
    }
    let omega = random_omega(n, m, rng)?;
    let freqs = random_frequencies(k, min_sep, rng)?;
    let amps = random_amplitudes(k, l, rng);
    let signal = FrequencySparseSignal::new(n, freqs, amps)?;
    let observed = sample(&synthesize(&signal), &omega)?;
    let problem = ObservationProblem::new(n, omega, observed, T::zero())?;
    Ok((signal, problem))
}

/// `‖estimate − truth‖_F / ‖truth‖_F`.
pub fn relative_error<T: Real>(estimate: &CMat<T>, truth: &CMat<T>) -> Result<T> {
    if estimate.shape() != truth.shape() {
        return Err(Error::Dimension(format!(
            "estimate {:?} vs truth {:?}",
            estimate.shape(),
            truth.shape()
        )));
    }
    let denom = truth.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
    if denom == T::zero() {
        return domain("relative error undefined for a zero reference");
    }
    let num = estimate
        .iter()
        .zip(truth.iter())
        .fold(T::zero(), |acc, (a, b)| acc + (a - b).norm_sqr())
        .sqrt();
    Ok(num / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn close(a: &CMat<f64>, b: &CMat<f64>, tol: f64) -> bool {
        a.shape() == b.shape() && a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn steering_examples() {
        let a = steering_vector(0.0, 3).unwrap();
        assert!(a.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-15));
        let a = steering_vector(0.5, 4).unwrap();
        let expect = [1.0, -1.0, 1.0, -1.0];
        assert!(a.iter().zip(expect).all(|(z, e)| (z - c(e, 0.0)).norm() < 1e-15));
        let a = steering_vector(0.25, 4).unwrap();
        let expect = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        assert!(a.iter().zip(expect).all(|(z, e)| (z - e).norm() < 1e-15));
    }

    #[test]
    fn steering_rejects_out_of_range() {
        assert!(steering_vector(1.0, 4).is_err());
        assert!(steering_vector(-0.1, 4).is_err());
        assert!(steering_vector(f64::NAN, 4).is_err());
    }

    #[test]
    fn synthesize_small_cases() {
        let s = FrequencySparseSignal::new(4, vec![0.25], CMat::from_element(1, 1, c(2.0, 0.0))).unwrap();
        let y = synthesize(&s);
        let expect = CMat::from_column_slice(4, 1, &[c(2.0, 0.0), c(0.0, 2.0), c(-2.0, 0.0), c(0.0, -2.0)]);
        assert!(close(&y, &expect, 1e-14));

        let s = FrequencySparseSignal::new(2, vec![0.0, 0.5], CMat::from_element(2, 1, c(1.0, 0.0))).unwrap();
        let y = synthesize(&s);
        assert!(close(&y, &CMat::from_column_slice(2, 1, &[c(2.0, 0.0), c(0.0, 0.0)]), 1e-14));
    }

    #[test]
    fn synthesize_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let freqs = random_frequencies(3, 1.0 / 16.0, &mut rng).unwrap();
        let amps: CMat<f64> = random_amplitudes(3, 4, &mut rng);
        let s = FrequencySparseSignal::new(16, freqs.clone(), amps.clone()).unwrap();
        let y = synthesize(&s);
        for j in 0..16 {
            for t in 0..4 {
                let mut acc = c(0.0, 0.0);
                for k in 0..3 {
                    let ang = std::f64::consts::TAU * j as f64 * freqs[k];
                    acc += amps[(k, t)] * c(ang.cos(), ang.sin());
                }
                assert!((y[(j, t)] - acc).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn signal_invariants_enforced() {
        let z = CMat::from_element(2, 1, c(1.0, 0.0));
        assert!(FrequencySparseSignal::new(4, vec![0.1, 0.1], z.clone()).is_err());
        assert!(FrequencySparseSignal::new(4, vec![0.1, 1.0], z.clone()).is_err());
        let mut zero_row = z.clone();
        zero_row[(1, 0)] = c(0.0, 0.0);
        assert!(FrequencySparseSignal::new(4, vec![0.1, 0.2], zero_row).is_err());
        let s = FrequencySparseSignal::new(4, vec![0.1, 0.2], CMat::from_row_slice(2, 2, &[c(3.0, 0.0), c(0.0, 4.0), c(1.0, 0.0), c(0.0, 0.0)])).unwrap();
        assert_eq!(s.coefficients(), vec![5.0, 1.0]);
        for row in s.directions().row_iter() {
            assert!((row.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sampling() {
        let y = CMat::<f64>::identity(3, 3);
        let s = sample(&y, &[1, 3]).unwrap();
        assert_eq!(s.row(0), y.row(0));
        assert_eq!(s.row(1), y.row(2));
        assert_eq!(sample(&y, &[1, 2, 3]).unwrap(), y);
        assert!(sample(&y, &[4]).is_err());
        assert!(sample(&y, &[0]).is_err());

        let sig = FrequencySparseSignal::new(4, vec![0.25], CMat::from_element(1, 1, c(1.0, 0.0))).unwrap();
        let s = sample(&synthesize(&sig), &[2]).unwrap();
        assert!((s[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn omega_validation() {
        let ok = ObservationProblem::new(5, vec![1, 3, 5], CMat::<f64>::zeros(3, 1), 0.0);
        assert!(ok.is_ok());
        assert!(ObservationProblem::new(5, vec![3, 1], CMat::<f64>::zeros(2, 1), 0.0).is_err());
        assert!(ObservationProblem::new(5, vec![1, 6], CMat::<f64>::zeros(2, 1), 0.0).is_err());
        assert!(ObservationProblem::new(5, vec![], CMat::<f64>::zeros(0, 1), 0.0).is_err());
        assert!(ObservationProblem::new(5, vec![1, 2], CMat::<f64>::zeros(2, 1), -1.0).is_err());
    }

    #[test]
    fn noise_limits_and_determinism() {
        let clean = CMat::from_element(2, 2, c(1.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (y, eta) = add_noise(&clean, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(y, clean);
        assert_eq!(eta, 0.0);

        let a = add_noise(&clean, 10.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = add_noise(&clean, 10.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!((crate::linalg::fro_norm(&(&a.0 - &clean)) - a.1).abs() < 1e-14);

        assert!(add_noise(&CMat::<f64>::zeros(2, 2), 10.0, &mut rng).is_err());
    }

    #[test]
    fn noise_power_matches_snr() {
        // Monte Carlo: E[‖E‖²_F / ‖clean‖²_F] = 10^{-SNR/10}
        let clean = CMat::from_element(2, 2, c(1.0, 0.0));
        let trials = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let ratios: Vec<f64> = (0..trials)
            .map(|_| {
                let (y, _) = add_noise(&clean, 10.0, &mut rng).unwrap();
                let e = &y - &clean;
                e.iter().map(|z| z.norm_sqr()).sum::<f64>() / 4.0
            })
            .collect();
        let mean = ratios.iter().sum::<f64>() / trials as f64;
        let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        assert!((mean - 0.1).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn random_problem_respects_separation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..20 {
            let (sig, prob) = random_problem::<f64, _>(128, 20, 4, 5, 1.0 / 128.0, &mut rng).unwrap();
            assert!(sig.min_separation().unwrap() >= 1.0 / 128.0);
            assert_eq!(prob.num_observed(), 20);
            assert_eq!(prob.observed().shape(), (20, 5));
            assert!(prob.omega().windows(2).all(|w| w[0] < w[1]));
            assert!(*prob.omega().last().unwrap() <= 128);
        }
        let (sig, _) = random_problem::<f64, _>(8, 4, 1, 1, 0.9, &mut rng).unwrap();
        assert_eq!(sig.num_components(), 1);
    }

    #[test]
    fn random_frequencies_fail_loudly_when_infeasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(random_frequencies::<f64, _>(5, 0.3, &mut rng).is_err());
        // feasible in principle (K·sep = 1) but practically never reachable by rejection
        let r = random_frequencies::<f64, _>(10, 0.1, &mut rng);
        assert!(matches!(r, Err(Error::SamplingBudget { .. })));
    }

    #[test]
    fn amplitude_magnitude_mean() {
        // |s| = 0.5 + w², E = 1.5, Var = Var(w²) = 2
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let a: CMat<f64> = random_amplitudes(1, n, &mut rng);
        let mean = a.iter().map(|z| z.norm()).sum::<f64>() / n as f64;
        let se = (2.0f64 / n as f64).sqrt();
        assert!((mean - 1.5).abs() < 4.0 * se, "mean {mean}");
    }

    #[test]
    fn relative_error_examples() {
        let t = CMat::from_row_slice(2, 1, &[c(0.6, 0.0), c(0.0, 0.8)]);
        assert_eq!(relative_error(&t, &t).unwrap(), 0.0);
        let twice = t.map(|z| z * 2.0);
        assert!((relative_error(&twice, &t).unwrap() - 1.0).abs() < 1e-15);
        let mut p = t.clone();
        p[(0, 0)] += c(1e-3, 0.0);
        assert!((relative_error(&p, &t).unwrap() - 1e-3).abs() < 1e-15);
        assert!(relative_error(&t, &CMat::zeros(2, 1)).is_err());
    }
}
