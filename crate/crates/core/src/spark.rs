//! Recoverability analysis for a sampling pattern `Ω`: difference sets,
//! spark bounds of the sub-sampled steering dictionary, the ℓ0 uniqueness
//! certificate, and the probability that a random `Ω` has spark 2.

use std::collections::BTreeSet;

use num_integer::Integer;
use rand::Rng;

use crate::error::Result;
use crate::signal::{random_omega, validate_omega};

/// Why a [`SparkBounds`] value is what it is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SparkReason {
    /// The nonzero differences share a common factor: spark is exactly 2.
    NoncoprimeDiffset,
    /// `Ω` is a run of consecutive integers: spark is exactly `M + 1`.
    ConsecutiveBlock,
    /// Neither decidable case applies.
    BoundsOnly,
}

impl SparkReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SparkReason::NoncoprimeDiffset => "noncoprime_diffset",
            SparkReason::ConsecutiveBlock => "consecutive_block",
            SparkReason::BoundsOnly => "bounds_only",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparkBounds {
    pub lower: usize,
    pub upper: usize,
    pub exact: Option<usize>,
    pub reason: SparkReason,
}

impl SparkBounds {
    fn exact(value: usize, reason: SparkReason) -> Self {
        Self { lower: value, upper: value, exact: Some(value), reason }
    }
}

/// `{m₁ − m₂ : m₁, m₂ ∈ Ω, m₁ ≥ m₂}`, ascending. Always contains 0 for non-empty `Ω`.
pub fn difference_set(omega: &[usize]) -> Vec<usize> {
    let mut set = BTreeSet::new();
    for (i, &a) in omega.iter().enumerate() {
        for &b in &omega[..=i] {
            set.insert(a.abs_diff(b));
        }
    }
    set.into_iter().collect()
}

/// gcd of the nonzero differences; 0 when `Ω` has a single element.
///
/// Equal to the gcd of offsets from the smallest index, which avoids forming
/// the full difference set.
pub fn difference_gcd(omega: &[usize]) -> usize {
    let Some(&first) = omega.iter().min() else { return 0 };
    omega.iter().fold(0usize, |g, &m| g.gcd(&(m - first)))
}

/// Spark bounds of `{a_Ω(f) : f ∈ [0,1)}`.
pub fn spark_bounds(omega: &[usize], n: usize) -> Result<SparkBounds> {
    validate_omega(omega, n)?;
    let m = omega.len();
    if m == 1 {
        // a single row: any two atoms are proportional
        return Ok(SparkBounds::exact(2, SparkReason::ConsecutiveBlock));
    }
    if difference_gcd(omega) > 1 {
        return Ok(SparkBounds::exact(2, SparkReason::NoncoprimeDiffset));
    }
    if omega[m - 1] - omega[0] + 1 == m {
        return Ok(SparkBounds::exact(m + 1, SparkReason::ConsecutiveBlock));
    }
    Ok(SparkBounds { lower: 3, upper: m + 1, exact: None, reason: SparkReason::BoundsOnly })
}

/// Sufficient condition for `K` components to be the unique sparsest
/// explanation: `2K < spark − 1 + rank(Y_Ω)`.
///
/// Passing a lower bound on the spark keeps the answer sound but incomplete.
pub fn l0_certificate(k: usize, spark_lower: usize, rank_obs: usize) -> bool {
    2 * k + 1 < spark_lower + rank_obs
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityEstimate {
    pub estimate: f64,
    pub std_err: f64,
    pub trials: u64,
    pub hits: u64,
}

impl ProbabilityEstimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let p = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        let std_err = if trials == 0 { 0.0 } else { (p * (1.0 - p) / trials as f64).sqrt() };
        Self { estimate: p, std_err, trials, hits }
    }

    /// Pools independent estimates by summing counts.
    pub fn merge(self, other: Self) -> Self {
        Self::from_counts(self.hits + other.hits, self.trials + other.trials)
    }
}

/// Fraction of uniformly random size-`m` subsets of `1..=n` whose nonzero
/// differences are not coprime (spark exactly 2).
pub fn noncoprime_probability<R: Rng + ?Sized>(n: usize, m: usize, trials: u64, rng: &mut R) -> Result<ProbabilityEstimate> {
    if trials == 0 {
        return crate::error::domain("at least one trial is required");
    }
    random_omega(n, m, rng)?;
    let mut hits = 0u64;
    for _ in 0..trials {
        let omega = rand::seq::index::sample(rng, n, m);
        let min = omega.iter().min().unwrap_or(0);
        let g = omega.iter().fold(0usize, |g, i| g.gcd(&(i - min)));
        if g > 1 {
            hits += 1;
        }
    }
    Ok(ProbabilityEstimate::from_counts(hits, trials))
}
