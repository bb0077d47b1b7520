use gridless_harness::cli::pooled_noncoprime_probability;
use gridless_harness::doa::{run_doa, DoaScenario, Estimator};
use gridless_harness::phase::{run_phase_transition, PhaseTransitionGrid, PhaseTransitionResult};
use gridless_harness::{Method, SolverSettings};

fn small_grid(seed: u64) -> PhaseTransitionGrid {
    PhaseTransitionGrid {
        n: 12,
        l: 2,
        m_values: vec![6, 10],
        k_values: vec![1, 3],
        trials: 2,
        threshold: 1e-6,
        min_sep: None,
        seed,
    }
}

fn settings() -> SolverSettings {
    SolverSettings { tol: 1e-8, max_iters: 1500, outer: 3, ..Default::default() }
}

/// The result with wall-clock fields zeroed.
fn timeless(mut r: PhaseTransitionResult) -> PhaseTransitionResult {
    for t in &mut r.records {
        t.runtime_s = 0.0;
    }
    r
}

#[test]
fn phase_transition_is_reproducible_across_runs_and_threads() {
    let methods = [Method::Anm, Method::Rwtm];
    let a = timeless(run_phase_transition(&small_grid(7), &methods, &settings(), 1).unwrap());
    let b = timeless(run_phase_transition(&small_grid(7), &methods, &settings(), 1).unwrap());
    let c = timeless(run_phase_transition(&small_grid(7), &methods, &settings(), 3).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a.records.len(), 2 * 2 * 2 * 2);
    assert_eq!(a.matrices.len(), 2);

    let d = timeless(run_phase_transition(&small_grid(8), &methods, &settings(), 1).unwrap());
    assert_ne!(a.records, d.records);
}

#[test]
fn combined_run_matches_separate_runs() {
    let both = run_phase_transition(&small_grid(3), &[Method::Anm, Method::Rwtm], &settings(), 1).unwrap();
    let anm = run_phase_transition(&small_grid(3), &[Method::Anm], &settings(), 1).unwrap();
    let exact = SolverSettings { loose_early: false, ..settings() };
    let rwtm = run_phase_transition(&small_grid(3), &[Method::Rwtm], &exact, 1).unwrap();
    assert_eq!(both.matrix(Method::Anm), anm.matrix(Method::Anm));
    assert_eq!(both.matrix(Method::Rwtm), rwtm.matrix(Method::Rwtm));
}

#[test]
fn failed_trials_are_recorded_not_fatal() {
    // five frequencies cannot be 0.3 apart on the unit torus
    let grid = PhaseTransitionGrid { k_values: vec![1, 5], min_sep: Some(0.3), ..small_grid(1) };
    let r = run_phase_transition(&grid, &[Method::Anm], &settings(), 1).unwrap();
    let failed: Vec<_> = r.records.iter().filter(|t| t.error.is_some()).collect();
    assert_eq!(failed.len(), 4);
    assert!(failed.iter().all(|t| t.k == 5 && !t.success));
    assert!(r.records.iter().filter(|t| t.k == 1).all(|t| t.error.is_none()));
    assert_eq!(r.matrix(Method::Anm).unwrap().at(10, 5), Some(0.0));
}

#[test]
fn invalid_grids_are_rejected() {
    let s = settings();
    assert!(run_phase_transition(&PhaseTransitionGrid { m_values: vec![13], ..small_grid(0) }, &[Method::Anm], &s, 1).is_err());
    assert!(run_phase_transition(&PhaseTransitionGrid { trials: 0, ..small_grid(0) }, &[Method::Anm], &s, 1).is_err());
    assert!(run_phase_transition(&small_grid(0), &[], &s, 1).is_err());
}

#[test]
fn doa_estimators_fail_independently() {
    // more MUSIC sources than sensors leaves no noise subspace
    let scenario = DoaScenario { music_sources: Some(40), music_grid: 512, ..DoaScenario::sla(2) };
    let settings = SolverSettings { tol: 1e-4, max_iters: 400, ..Default::default() };
    let r = run_doa(&scenario, &settings, &[Estimator::Anm, Estimator::Music]).unwrap();
    let music = r.estimate(Estimator::Music).unwrap();
    assert!(music.error.is_some());
    assert!(music.frequencies.is_empty());
    let anm = r.estimate(Estimator::Anm).unwrap();
    assert!(anm.error.is_none());
    assert!(!anm.frequencies.is_empty());
    assert!(anm.frequencies.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn doa_draw_is_seeded() {
    let (s1, p1) = DoaScenario::sla(4).draw().unwrap();
    let (s2, p2) = DoaScenario::sla(4).draw().unwrap();
    let (_, p3) = DoaScenario::sla(5).draw().unwrap();
    assert_eq!((s1, &p1), (s2, &p2));
    assert_ne!(p1.observed(), p3.observed());
    assert_eq!(p1.num_samples(), DoaScenario::sla(4).aperture());
}

#[test]
fn monte_carlo_ignores_thread_count() {
    let one = pooled_noncoprime_probability(30, 5, 20_000, 11, 1).unwrap();
    let four = pooled_noncoprime_probability(30, 5, 20_000, 11, 4).unwrap();
    assert_eq!(one.estimate, four.estimate);
    assert_eq!(one.trials, 20_000);
}
