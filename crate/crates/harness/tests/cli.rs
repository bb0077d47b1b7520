use std::path::Path;

use gridless_harness::cli::{parse, run, Command};
use gridless_harness::doa::DoaResult;
use gridless_harness::formats::{read_json, DecompositionFile, ProblemFile, SolutionFile};
use gridless_harness::phase::PhaseTransitionResult;
use gridless_harness::record::ExperimentRecord;
use gridless_harness::Method;

fn args(list: &[&str]) -> Vec<std::ffi::OsString> {
    std::iter::once("gridless").chain(list.iter().copied()).map(Into::into).collect()
}

fn gridless(list: &[&str]) {
    run(args(list)).unwrap_or_else(|e| panic!("{list:?}: {e:#}"));
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn synth_solve_decompose_pipeline_recovers_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    gridless(&["synth", "--seed", "3", "--out-dir", &out, "--n", "16", "--m", "12", "--k", "2", "--l", "2", "--min-sep", "0.125"]);
    let problem: ProblemFile = read_json(&dir.path().join("problem.json")).unwrap();
    assert_eq!((problem.n, problem.l, problem.k, problem.omega.len()), (16, 2, Some(2), 12));
    assert_eq!(problem.seed, Some(3));

    let prob = path(dir.path(), "problem.json");
    for method in ["anm", "rwtm"] {
        let sol = format!("{method}.json");
        gridless(&["solve", "--problem", &prob, "--method", method, "--tol", "1e-9", "--out-dir", &out, "--out", &sol]);
        let file: SolutionFile = read_json(&dir.path().join(&sol)).unwrap();
        assert!(file.converged, "{method}");
        assert_eq!(file.method.as_deref(), Some(method));

        let dec = format!("{method}_dec.json");
        gridless(&["decompose", "--solution", &path(dir.path(), &sol), "--out-dir", &out, "--out", &dec]);
        let d: DecompositionFile = read_json(&dir.path().join(&dec)).unwrap();
        let mut truth = problem.f.clone().unwrap();
        truth.sort_by(f64::total_cmp);
        let mut found = d.f.clone();
        found.sort_by(f64::total_cmp);
        assert_eq!(found.len(), 2, "{method}: {found:?}");
        for (a, b) in found.iter().zip(&truth) {
            let dist = (a - b).abs().min(1.0 - (a - b).abs());
            assert!(dist < 1e-5, "{method}: {found:?} vs {truth:?}");
        }
    }
}

#[test]
fn same_seed_gives_same_problem() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        gridless(&["--seed", "9", "synth", "--n", "12", "--m", "8", "--snr-db", "20", "--out-dir", &dir.path().to_string_lossy()]);
    }
    let read = |d: &tempfile::TempDir| std::fs::read_to_string(d.path().join("problem.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    let p: ProblemFile = read_json(&a.path().join("problem.json")).unwrap();
    assert!(p.eta > 0.0);
}

#[test]
fn config_file_fills_in_and_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let toml = dir.path().join("run.toml");
    std::fs::write(
        &toml,
        "seed = 5\nthreads = 2\n[phase-transition]\nn = 16\nm_values = [8, 12]\nk_values = [2]\ntrials = 3\nmethods = [\"anm\"]\ntol = 1e-7\n",
    )
    .unwrap();
    let toml = toml.to_string_lossy().into_owned();

    let cli = parse(args(&["--config", &toml, "phase-transition"])).unwrap();
    assert_eq!(cli.seed, Some(5));
    assert_eq!(cli.threads, Some(2));
    let Command::PhaseTransition(p) = &cli.command else { panic!("wrong subcommand") };
    assert_eq!((p.n, p.trials), (16, 3));
    assert_eq!(p.m_values.as_deref(), Some(&[8, 12][..]));
    assert_eq!(p.methods, vec![Method::Anm]);
    assert_eq!(p.solver.tol, Some(1e-7));

    let cli = parse(args(&["--config", &toml, "phase-transition", "--seed", "6", "--m-values", "20", "--trials=4"])).unwrap();
    assert_eq!(cli.seed, Some(6));
    let Command::PhaseTransition(p) = &cli.command else { panic!("wrong subcommand") };
    assert_eq!(p.m_values.as_deref(), Some(&[20][..]));
    assert_eq!(p.trials, 4);
    assert_eq!(p.n, 16);

    let json = dir.path().join("run.json");
    std::fs::write(&json, r#"{"seed": 8, "spark": {"omega": [1, 3, 5], "n": 8}}"#).unwrap();
    let cli = parse(args(&["spark", "--config", &json.to_string_lossy()])).unwrap();
    assert_eq!(cli.seed, Some(8));
    let Command::Spark(s) = &cli.command else { panic!("wrong subcommand") };
    assert_eq!(s.omega.as_deref(), Some(&[1, 3, 5][..]));
}

#[test]
fn bad_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let toml = dir.path().join("bad.toml");
    std::fs::write(&toml, "[synth]\nbogus = 1\n").unwrap();
    assert!(parse(args(&["--config", &toml.to_string_lossy(), "synth"])).is_err());
    std::fs::write(&toml, "[synth]\nn = { a = 1 }\n").unwrap();
    assert!(parse(args(&["--config", &toml.to_string_lossy(), "synth"])).is_err());
    assert!(parse(args(&["--config", "/nonexistent/x.toml", "synth"])).is_err());
    assert!(run(args(&["--threads", "0", "spark", "--monte-carlo", "--n", "10", "--m", "3", "--trials", "10"])).is_err());
}

#[test]
fn spark_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    gridless(&["spark", "--omega", "1,3,5", "--n", "8", "--k", "1", "--out-dir", &out, "--out", "s.json"]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(v["lower"], 2);
    assert_eq!(v["upper"], 2);
    assert_eq!(v["exact"], 2);
    assert_eq!(v["certificate"]["certified"], false);

    gridless(&["spark", "--monte-carlo", "--n", "20", "--m", "4", "--trials", "1000", "--out-dir", &out, "--out", "p.json"]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(v["trials"], 1000);
    let p = v["estimate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));
}

#[test]
fn music_writes_spectrum_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    gridless(&["synth", "--n", "16", "--l", "8", "--k", "2", "--min-sep", "0.2", "--out-dir", &out]);
    gridless(&["music", "--problem", &path(dir.path(), "problem.json"), "--k", "2", "--grid", "512", "--out-dir", &out]);
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("f,pseudospectrum"));
    assert_eq!(lines.count(), 512);
}

#[test]
fn phase_and_doa_write_records_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    gridless(&[
        "phase-transition", "--n", "12", "--m-values", "8,10", "--k-values", "1,2", "--trials", "2", "--max-iters", "800",
        "--tol", "1e-7", "--out-dir", &out,
    ]);
    let record: ExperimentRecord<PhaseTransitionResult> = read_json(&dir.path().join("phase_transition.json")).unwrap();
    assert_eq!(record.experiment, "phase-transition");
    assert_eq!(record.result.records.len(), 2 * 2 * 2 * 2);
    for name in ["matrix_anm.csv", "matrix_rwtm.csv", "phase_anm.dat", "phase_rwtm.dat", "reference.dat", "trials.csv"] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }

    gridless(&["doa", "--methods", "music,anm", "--music-grid", "512", "--max-iters", "300", "--tol", "1e-4", "--out-dir", &out]);
    let record: ExperimentRecord<DoaResult> = read_json(&dir.path().join("doa.json")).unwrap();
    assert_eq!(record.result.estimates.len(), 2);
    for name in ["spectrum_music.dat", "spectrum_anm.dat", "estimates.csv"] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let dat = std::fs::read_to_string(dir.path().join("spectrum_music.dat")).unwrap();
    for line in dat.lines().skip(1) {
        let f: f64 = line.split_whitespace().next().unwrap().parse().unwrap();
        assert!((0.0..=0.35).contains(&f));
    }
}
