//! MUSIC pseudospectrum on a (sparse) linear array.

use crate::error::{domain, Error, Result};
use crate::linalg::hermitian_eigen;
use crate::scalar::{wrap_unit, CMat, Real};
use crate::signal::{steering_on, validate_omega};

/// Default grid size.
pub const DEFAULT_GRID: usize = 1 << 12;
/// Floor on `‖E_nᴴ a‖²`; caps the pseudospectrum at its inverse.
pub const NOISE_PROJECTION_FLOOR: f64 = 1e-12;
/// Spectra whose max/min ratio is below `1 + FLAT_RATIO` have no peaks.
pub const FLAT_RATIO: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MusicSpectrum<T: Real> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    /// Assumed number of sources.
    pub sources: usize,
    /// Cap applied where the noise projection vanishes.
    pub cap: T,
}

/// Peaks returned by [`pick_peaks`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeakPick<T: Real> {
    /// Strongest first.
    pub frequencies: Vec<T>,
    /// Fewer local maxima than requested.
    pub underdetermined: bool,
}

/// `(1/L) Y Yᴴ`.
pub fn sample_covariance<T: Real>(y_omega: &CMat<T>) -> Result<CMat<T>> {
    let l = y_omega.ncols();
    if l == 0 {
        return domain("sample covariance needs at least one snapshot");
    }
    let r = (y_omega * y_omega.adjoint()).unscale(T::count(l));
    Ok(crate::linalg::hermitian_part(&r))
}

/// `P(f) = 1 / ‖E_nᴴ a_Ω(f)‖²` on a uniform grid of `[0, 1)`, where `E_n`
/// spans the eigenvectors of the `M − K` smallest eigenvalues of `R`.
pub fn music_spectrum<T: Real>(r: &CMat<T>, omega: &[usize], sources: usize, grid: usize) -> Result<MusicSpectrum<T>> {
    let m = omega.len();
    if r.shape() != (m, m) {
        return Err(Error::Dimension(format!("covariance {:?} for {m} sensors", r.shape())));
    }
    let n = *omega.iter().max().ok_or_else(|| Error::Domain("empty sample set".into()))?;
    validate_omega(omega, n)?;
    if sources >= m {
        return domain(format!("source count {sources} must be below the sensor count {m}"));
    }
    if grid < 2 {
        return domain("grid needs at least two points");
    }
    let eig = hermitian_eigen(r)?;
    let noise = eig.vectors.columns(0, m - sources).into_owned();
    let floor = T::lit(NOISE_PROJECTION_FLOOR);
    let grid_points: Vec<T> = (0..grid).map(|g| T::count(g) / T::count(grid)).collect();
    let values = grid_points
        .iter()
        .map(|&f| {
            let a = steering_on(f, omega);
            let proj = noise.ad_mul(&a);
            T::one() / proj.norm_squared().max(floor)
        })
        .collect();
    Ok(MusicSpectrum { grid: grid_points, values, sources, cap: T::one() / floor })
}

/// The `k` largest local maxima (wrap-around neighbours), refined by
/// three-point quadratic interpolation.
pub fn pick_peaks<T: Real>(spectrum: &MusicSpectrum<T>, k: usize) -> Result<PeakPick<T>> {
    if k == 0 {
        return domain("at least one peak must be requested");
    }
    let maxima = local_maxima(spectrum);
    let mut ranked: Vec<usize> = maxima;
    ranked.sort_by(|&a, &b| {
        spectrum.values[b]
            .partial_cmp(&spectrum.values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let underdetermined = ranked.len() < k;
    let g = spectrum.values.len();
    let frequencies = ranked
        .into_iter()
        .take(k)
        .map(|i| {
            let prev = spectrum.values[(i + g - 1) % g];
            let here = spectrum.values[i];
            let next = spectrum.values[(i + 1) % g];
            let curvature = prev - here - here + next;
            let shift = if curvature < T::zero() {
                (T::lit(0.5) * (prev - next) / curvature).max(-T::lit(0.5)).min(T::lit(0.5))
            } else {
                T::zero()
            };
            wrap_unit((T::count(i) + shift) / T::count(g))
        })
        .collect();
    Ok(PeakPick { frequencies, underdetermined })
}

/// Indices of local maxima (strictly above the left neighbour, at least the
/// right one), empty for a flat spectrum.
pub fn local_maxima<T: Real>(spectrum: &MusicSpectrum<T>) -> Vec<usize> {
    let v = &spectrum.values;
    let g = v.len();
    let hi = v.iter().fold(T::zero(), |a, &b| a.max(b));
    let lo = v.iter().fold(hi, |a, &b| a.min(b));
    if g < 3 || hi <= lo * (T::one() + T::lit(FLAT_RATIO)) {
        return Vec::new();
    }
    (0..g)
        .filter(|&i| {
            let prev = v[(i + g - 1) % g];
            let next = v[(i + 1) % g];
            v[i] > prev && v[i] >= next
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::torus_distance;
    use crate::signal::{steering_unchecked, FrequencySparseSignal};
    use num_complex::Complex;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn covariance_examples() {
        let mut y = CMat::<f64>::zeros(3, 1);
        y[(0, 0)] = c(1.0, 0.0);
        let r = sample_covariance(&y).unwrap();
        let mut e = CMat::<f64>::zeros(3, 3);
        e[(0, 0)] = c(1.0, 0.0);
        assert_eq!(r, e);

        // columns √L·e_t → identity
        let y = CMat::<f64>::identity(3, 3).scale(3f64.sqrt());
        let r = sample_covariance(&y).unwrap();
        assert!((r - CMat::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn white_noise_is_flat() {
        let omega = [1, 2, 5, 9];
        let r = CMat::<f64>::identity(4, 4);
        let s = music_spectrum(&r, &omega, 0, 256).unwrap();
        let hi = s.values.iter().cloned().fold(0.0, f64::max);
        let lo = s.values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo <= 1.0 + 1e-6);
        let peaks = pick_peaks(&s, 1).unwrap();
        assert!(peaks.underdetermined && peaks.frequencies.is_empty());
    }

    #[test]
    fn too_many_sources_rejected() {
        let r = CMat::<f64>::identity(3, 3);
        assert!(music_spectrum(&r, &[1, 2, 3], 3, 64).is_err());
        assert!(music_spectrum(&r, &[1, 2, 3], 1, 1).is_err());
    }

    fn noiseless_snapshots(freqs: &[f64], omega: &[usize], l: usize) -> CMat<f64> {
        let amps = CMat::from_fn(freqs.len(), l, |k, t| {
            let th = 1.3 * (k * t) as f64 + 0.4 * k as f64 + 0.9 * (t * t) as f64;
            c(th.cos(), th.sin())
        });
        let sig = FrequencySparseSignal::new(*omega.last().unwrap(), freqs.to_vec(), amps).unwrap();
        crate::signal::sample(&crate::signal::synthesize(&sig), omega).unwrap()
    }

    #[test]
    fn single_source_peak() {
        let omega: Vec<usize> = (1..=8).collect();
        let y = noiseless_snapshots(&[0.3], &omega, 4);
        let r = sample_covariance(&y).unwrap();
        let g = 1024;
        let s = music_spectrum(&r, &omega, 1, g).unwrap();
        let argmax = (0..g).max_by(|&a, &b| s.values[a].partial_cmp(&s.values[b]).unwrap()).unwrap();
        assert!(torus_distance(s.grid[argmax], 0.3) <= 1.0 / g as f64);
        let p = pick_peaks(&s, 1).unwrap();
        assert!(!p.underdetermined);
        assert!(torus_distance(p.frequencies[0], 0.3) <= 1.0 / g as f64);
    }

    #[test]
    fn two_sources_resolved() {
        let omega: Vec<usize> = (1..=10).collect();
        let y = noiseless_snapshots(&[0.12, 0.61], &omega, 6);
        let r = sample_covariance(&y).unwrap();
        let g = 2048;
        let s = music_spectrum(&r, &omega, 2, g).unwrap();
        let mut p = pick_peaks(&s, 2).unwrap().frequencies;
        p.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(torus_distance(p[0], 0.12) <= 1.0 / g as f64);
        assert!(torus_distance(p[1], 0.61) <= 1.0 / g as f64);
    }

    #[test]
    fn scaling_covariance_keeps_argmax() {
        let omega = [1, 2, 4, 7, 8];
        let mut y = noiseless_snapshots(&[0.2, 0.45], &omega, 3);
        let a = steering_unchecked(0.8, 8);
        for (r, &m) in omega.iter().enumerate() {
            y[(r, 0)] += a[m - 1] * 0.1;
        }
        let r = sample_covariance(&y).unwrap();
        let s1 = music_spectrum(&r, &omega, 2, 512).unwrap();
        let s2 = music_spectrum(&r.scale(37.0), &omega, 2, 512).unwrap();
        let p1 = pick_peaks(&s1, 2).unwrap();
        let p2 = pick_peaks(&s2, 2).unwrap();
        for (a, b) in p1.frequencies.iter().zip(&p2.frequencies) {
            assert!(torus_distance(*a, *b) < 1e-9);
        }
    }
}
