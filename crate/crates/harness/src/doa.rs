//! Direction-of-arrival comparison on a sparse linear array.
//!
//! One noisy snapshot matrix is drawn and handed to ANM, RWTM and MUSIC.
//! Source amplitudes are `√p_k·e^{iθ}` with an independent uniform phase per
//! source and snapshot; the noise bound `η` is the realized noise norm.

use std::time::Instant;

use gridless_core::decompose::full_decomposition;
use gridless_core::music::{music_spectrum, pick_peaks, sample_covariance, DEFAULT_GRID};
use gridless_core::signal::{add_noise, sample, synthesize, FrequencySparseSignal, ObservationProblem};
use gridless_core::scalar::cis;
use gridless_core::CMat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::settings::{frequency_error, solve, Method, SolverSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DoaScenario {
    /// 1-based sensor positions; the aperture is `max Ω`.
    pub omega: Vec<usize>,
    pub frequencies: Vec<f64>,
    pub powers: Vec<f64>,
    pub snapshots: usize,
    pub snr_db: f64,
    pub seed: u64,
    pub music_grid: usize,
    /// Sources assumed by MUSIC; the true count when absent.
    pub music_sources: Option<usize>,
}

impl Default for DoaScenario {
    fn default() -> Self {
        Self::sla(0)
    }
}

impl DoaScenario {
    /// Ten-sensor redundancy array with two close sources and a weak third.
    pub fn sla(seed: u64) -> Self {
        Self {
            omega: vec![1, 2, 7, 11, 24, 27, 35, 42, 54, 56],
            frequencies: vec![0.1, 0.106, 0.3],
            powers: vec![1.0, 1.0, 0.25],
            snapshots: 10,
            snr_db: 14.2,
            seed,
            music_grid: DEFAULT_GRID,
            music_sources: None,
        }
    }

    pub fn aperture(&self) -> usize {
        self.omega.iter().copied().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.frequencies.is_empty() || self.frequencies.len() != self.powers.len() {
            return Err(HarnessError::Config(format!(
                "{} frequencies but {} powers",
                self.frequencies.len(),
                self.powers.len()
            )));
        }
        if self.powers.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(HarnessError::Config("source powers must be positive".into()));
        }
        if self.snapshots == 0 {
            return Err(HarnessError::Config("at least one snapshot is needed".into()));
        }
        if self.snr_db.is_nan() {
            return Err(HarnessError::Config("SNR must be a number".into()));
        }
        gridless_core::signal::validate_omega(&self.omega, self.aperture())?;
        Ok(())
    }

    /// Clean signal, noisy observation problem and realized `η`.
    pub fn draw(&self) -> Result<(FrequencySparseSignal<f64>, ObservationProblem<f64>)> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let k = self.frequencies.len();
        let amplitudes = CMat::<f64>::from_fn(k, self.snapshots, |i, _| {
            cis(rng.gen::<f64>() * std::f64::consts::TAU).scale(self.powers[i].sqrt())
        });
        let n = self.aperture();
        let signal = FrequencySparseSignal::new(n, self.frequencies.clone(), amplitudes)?;
        let clean = sample(&synthesize(&signal), &self.omega)?;
        let (noisy, eta) = add_noise(&clean, self.snr_db, &mut rng)?;
        let problem = ObservationProblem::new(n, self.omega.clone(), noisy, eta)?;
        Ok((signal, problem))
    }
}

/// Which estimator produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Anm,
    Rwtm,
    Music,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Anm, Estimator::Rwtm, Estimator::Music];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Anm => "anm",
            Estimator::Rwtm => "rwtm",
            Estimator::Music => "music",
        }
    }
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Estimates of one method; `error` is set when the method failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoaEstimate {
    pub method: Estimator,
    pub seed: u64,
    /// Ascending.
    pub frequencies: Vec<f64>,
    /// Powers aligned with `frequencies`; MUSIC reports pseudospectrum values.
    pub powers: Vec<f64>,
    pub frequency_error: Option<f64>,
    pub runtime_s: f64,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub error: Option<String>,
}

impl DoaEstimate {
    /// Estimates with `|f − center| ≤ radius` on the torus.
    pub fn near(&self, center: f64, radius: f64) -> Vec<f64> {
        self.frequencies
            .iter()
            .copied()
            .filter(|&f| gridless_core::torus_distance(f, center) <= radius)
            .collect()
    }
}

/// A power spectrum on `[0, 1)`: lines for the gridless methods, the
/// pseudospectrum for MUSIC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoaSpectrum {
    pub method: Estimator,
    pub frequency: Vec<f64>,
    pub value: Vec<f64>,
}

impl DoaSpectrum {
    /// Number of local maxima of a MUSIC pseudospectrum inside `[lo, hi]`.
    pub fn peaks_in(&self, lo: f64, hi: f64) -> usize {
        let n = self.value.len();
        if n < 3 {
            return 0;
        }
        (0..n)
            .filter(|&i| {
                let v = self.value[i];
                let prev = self.value[(i + n - 1) % n];
                let next = self.value[(i + 1) % n];
                v > prev && v >= next && (lo..=hi).contains(&self.frequency[i])
            })
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoaResult {
    pub scenario: DoaScenario,
    pub settings: SolverSettings,
    /// Realized noise norm used as the ball radius.
    pub eta: f64,
    pub estimates: Vec<DoaEstimate>,
    pub spectra: Vec<DoaSpectrum>,
}

impl DoaResult {
    pub fn estimate(&self, method: Estimator) -> Option<&DoaEstimate> {
        self.estimates.iter().find(|e| e.method == method)
    }

    pub fn spectrum(&self, method: Estimator) -> Option<&DoaSpectrum> {
        self.spectra.iter().find(|s| s.method == method)
    }
}

/// Runs the requested estimators on one draw of the scenario. A failing
/// method is recorded in its estimate and does not stop the others.
pub fn run_doa(scenario: &DoaScenario, settings: &SolverSettings, methods: &[Estimator]) -> Result<DoaResult> {
    settings.validate()?;
    let (signal, problem) = scenario.draw()?;
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();

    let mut estimates = Vec::with_capacity(methods.len());
    let mut spectra = Vec::with_capacity(methods.len());
    for method in methods {
        let blank = DoaEstimate {
            method,
            seed: scenario.seed,
            frequencies: Vec::new(),
            powers: Vec::new(),
            frequency_error: None,
            runtime_s: 0.0,
            iterations: None,
            converged: None,
            error: None,
        };
        let started = Instant::now();
        let outcome = match method {
            Estimator::Anm => gridless(&problem, Method::Anm, settings),
            Estimator::Rwtm => gridless(&problem, Method::Rwtm, settings),
            Estimator::Music => music(&problem, scenario),
        };
        let runtime_s = started.elapsed().as_secs_f64();
        match outcome {
            Ok((mut estimate, spectrum)) => {
                estimate.frequency_error = frequency_error(signal.frequencies(), &estimate.frequencies);
                estimates.push(DoaEstimate { runtime_s, ..estimate.with(blank) });
                spectra.push(DoaSpectrum { method, ..spectrum });
            }
            Err(e) => estimates.push(DoaEstimate { runtime_s, error: Some(e.to_string()), ..blank }),
        }
    }
    Ok(DoaResult { scenario: scenario.clone(), settings: *settings, eta: problem.noise_bound(), estimates, spectra })
}

/// Partial estimate filled in by one method.
struct Found {
    frequencies: Vec<f64>,
    powers: Vec<f64>,
    frequency_error: Option<f64>,
    iterations: Option<usize>,
    converged: Option<bool>,
}

impl Found {
    fn with(self, blank: DoaEstimate) -> DoaEstimate {
        DoaEstimate {
            frequencies: self.frequencies,
            powers: self.powers,
            frequency_error: self.frequency_error,
            iterations: self.iterations,
            converged: self.converged,
            ..blank
        }
    }
}

fn sorted_pairs(freqs: &[f64], values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut pairs: Vec<(f64, f64)> = freqs.iter().copied().zip(values.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

fn gridless(problem: &ObservationProblem<f64>, method: Method, settings: &SolverSettings) -> Result<(Found, DoaSpectrum)> {
    let solved = solve(problem, method, settings)?;
    let decomposition = full_decomposition(&solved.solution, settings.rank_tol)?;
    let (frequencies, powers) = sorted_pairs(&decomposition.frequencies, &decomposition.powers);
    let spectrum = DoaSpectrum { method: Estimator::Anm, frequency: frequencies.clone(), value: powers.clone() };
    let found = Found {
        frequencies,
        powers,
        frequency_error: None,
        iterations: Some(solved.iterations()),
        converged: Some(match &solved.outcome {
            Some(o) => o.iterates.iter().all(|s| s.converged),
            None => solved.solution.converged,
        }),
    };
    Ok((found, spectrum))
}

fn music(problem: &ObservationProblem<f64>, scenario: &DoaScenario) -> Result<(Found, DoaSpectrum)> {
    let sources = scenario.music_sources.unwrap_or(scenario.frequencies.len());
    let covariance = sample_covariance(problem.observed())?;
    let spectrum = music_spectrum(&covariance, problem.omega(), sources, scenario.music_grid)?;
    let peaks = pick_peaks(&spectrum, sources)?;
    let step = 1.0 / spectrum.grid.len() as f64;
    let heights: Vec<f64> = peaks
        .frequencies
        .iter()
        .map(|&f| spectrum.values[((f / step).round() as usize) % spectrum.grid.len()])
        .collect();
    let (frequencies, powers) = sorted_pairs(&peaks.frequencies, &heights);
    let found = Found { frequencies, powers, frequency_error: None, iterations: None, converged: None };
    Ok((found, DoaSpectrum { method: Estimator::Music, frequency: spectrum.grid, value: spectrum.values }))
}
