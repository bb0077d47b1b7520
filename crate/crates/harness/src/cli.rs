//! The `gridless` command line.
//!
//! A TOML or JSON file given with `--config` mirrors the flags: top-level keys
//! are global flags and a table named after the subcommand holds its flags.
//! File values are spliced in ahead of the command line, so flags given on
//! the command line win.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{ArgAction, Args, CommandFactory, Parser, Subcommand};
use gridless_core::decompose::{full_decomposition_with, AmplitudeFit};
use gridless_core::music::{music_spectrum, pick_peaks, sample_covariance, DEFAULT_GRID};
use gridless_core::relax::atomic_norm;
use gridless_core::signal::{add_noise, random_problem, ObservationProblem};
use gridless_core::spark::{l0_certificate, noncoprime_probability, spark_bounds, ProbabilityEstimate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::doa::{run_doa, DoaScenario, Estimator};
use crate::formats::{read_json, sci, write_json, write_text, DecompositionFile, ProblemFile, SolutionFile};
use crate::oracle::{grid_atomic_norm, GridOracleConfig};
use crate::phase::{run_phase_transition, PhaseTransitionGrid};
use crate::plots::{emit_doa_plots, emit_phase_plots, matrix_csv, DOA_CLIP};
use crate::record::ExperimentRecord;
use crate::settings::{solve, Method, SolverSettings};

/// Independent Monte Carlo streams; the pooled estimate does not depend on
/// the thread count.
const MONTE_CARLO_CHUNKS: u64 = 64;

#[derive(Debug, Parser)]
#[command(name = "gridless", version, about = "Gridless compressed sensing experiments", args_override_self = true)]
pub struct Cli {
    /// Base seed of every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the experiments.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for outputs; relative `--out` paths resolve against it.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// TOML or JSON file mirroring the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn threads(&self) -> anyhow::Result<usize> {
        match self.threads.unwrap_or(1) {
            0 => bail!("--threads must be at least 1"),
            t => Ok(t),
        }
    }

    fn out_path(&self, out: Option<&Path>, default: &str) -> PathBuf {
        let dir = self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        dir.join(out.unwrap_or(Path::new(default)))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a random problem with ground truth.
    Synth(SynthArgs),
    /// Solve a problem with ANM or RWTM.
    Solve(SolveArgs),
    /// Frequencies, powers and amplitudes of a solution.
    Decompose(DecomposeArgs),
    /// MUSIC pseudospectrum of a problem's observed snapshots.
    Music(MusicArgs),
    /// Spark bounds of a sampling pattern, or the non-coprime probability.
    Spark(SparkArgs),
    /// Success fractions over the (M, K) plane.
    PhaseTransition(PhaseArgs),
    /// ANM, RWTM and MUSIC on one sparse-array scenario.
    Doa(DoaArgs),
    /// Grid upper bound on the atomic norm of a signal.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// ADMM residual tolerance (absolute and relative).
    #[arg(long)]
    pub tol: Option<f64>,
    /// ADMM iteration budget per solve.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Initial ADMM penalty.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Reweighting steps.
    #[arg(long)]
    pub outer: Option<usize>,
    /// Reweighting floor relative to the largest eigenvalue of the first solve.
    #[arg(long)]
    pub epsilon_rel: Option<f64>,
    /// Loose tolerance on every reweighting step but the last.
    #[arg(long, action = ArgAction::Set)]
    pub loose_early: Option<bool>,
    /// Relative eigenvalue threshold of the Vandermonde decomposition.
    #[arg(long)]
    pub rank_tol: Option<f64>,
}

impl SolverArgs {
    pub fn apply(&self, base: SolverSettings) -> SolverSettings {
        SolverSettings {
            tol: self.tol.unwrap_or(base.tol),
            max_iters: self.max_iters.unwrap_or(base.max_iters),
            rho: self.rho.unwrap_or(base.rho),
            outer: self.outer.unwrap_or(base.outer),
            epsilon_rel: self.epsilon_rel.unwrap_or(base.epsilon_rel),
            loose_early: self.loose_early.unwrap_or(base.loose_early),
            rank_tol: self.rank_tol.unwrap_or(base.rank_tol),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Observed samples; all `N` when absent.
    #[arg(long)]
    pub m: Option<usize>,
    /// Minimum frequency separation; `1/N` when absent.
    #[arg(long)]
    pub min_sep: Option<f64>,
    /// Adds noise at this SNR and sets `eta` to the realized noise norm.
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Anm)]
    pub method: Method,
    /// Replaces the problem's noise bound.
    #[arg(long)]
    pub eta: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub rank_tol: f64,
    /// Fit amplitudes on the observed rows of `--problem` only.
    #[arg(long, requires = "problem")]
    pub fit_observed: bool,
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MusicArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Assumed number of sources.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SparkArgs {
    /// 1-based sample indices.
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "monte_carlo")]
    pub omega: Option<Vec<usize>>,
    #[arg(long)]
    pub n: usize,
    /// Estimate the probability that a random `Ω` has spark 2.
    #[arg(long)]
    pub monte_carlo: bool,
    /// Size of the random `Ω`.
    #[arg(long, requires = "monte_carlo")]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// Sparsity to certify against the spark bound.
    #[arg(long, requires = "omega")]
    pub k: Option<usize>,
    /// Rank of the observed snapshots used by the certificate.
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub m_values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub k_values: Option<Vec<usize>>,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,
    #[arg(long)]
    pub min_sep: Option<f64>,
    #[arg(long, value_enum, value_delimiter = ',', num_args = 1.., default_values_t = [Method::Anm, Method::Rwtm])]
    pub methods: Vec<Method>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DoaArgs {
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub omega: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub frequencies: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub powers: Option<Vec<f64>>,
    #[arg(long)]
    pub snapshots: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub music_grid: Option<usize>,
    #[arg(long)]
    pub music_sources: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',', num_args = 1.., default_values_t = Estimator::ALL)]
    pub methods: Vec<Estimator>,
    /// Frequency interval of the spectrum files, as `lo,hi`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub clip: Option<Vec<f64>>,
    /// Write the spectra on all of `[0, 1)`.
    #[arg(long, conflicts_with = "clip")]
    pub no_clip: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Fully observed problem whose samples are the signal.
    #[arg(long, conflicts_with = "solution", required_unless_present = "solution")]
    pub problem: Option<PathBuf>,
    /// Solution whose completed `Y` is the signal.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[arg(long, default_value_t = 1 << 14)]
    pub grid: usize,
    /// Iteration budget per grid level.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Relative duality gap at which a level stops.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also solve the semidefinite program for comparison.
    #[arg(long)]
    pub compare: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), merges the config file and runs.
pub fn run<I, T>(args: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = parse(args)?;
    execute(&cli)
}

/// Parses the command line with the config file merged in. Keys given on
/// the command line are dropped from the file.
pub fn parse(args: Vec<OsString>) -> anyhow::Result<Cli> {
    let tokens: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let (Some(config), Some(position)) = (config_path(&tokens), subcommand_position(&tokens)) else {
        return Ok(Cli::try_parse_from(&args)?);
    };
    let name = tokens[position].as_str();
    if Cli::command().find_subcommand(name).is_none() {
        return Ok(Cli::try_parse_from(&args)?);
    }
    let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
    let table = parse_config(&config, &text)?;
    let given: Vec<&str> = tokens[1..]
        .iter()
        .filter_map(|t| t.strip_prefix("--"))
        .map(|t| t.split('=').next().unwrap_or(t))
        .collect();
    let spliced = config_args(&table, name, &given)?;

    let mut merged: Vec<OsString> = args[..=position].to_vec();
    merged.extend(spliced.into_iter().map(OsString::from));
    merged.extend(args[position + 1..].iter().cloned());
    Ok(Cli::try_parse_from(merged)?)
}

/// Global options that take a value.
const VALUED_GLOBALS: [&str; 4] = ["--seed", "--threads", "--out-dir", "--config"];

fn config_path(tokens: &[String]) -> Option<PathBuf> {
    let mut iter = tokens.iter().skip(1);
    while let Some(t) = iter.next() {
        if t == "--config" {
            return iter.next().map(PathBuf::from);
        }
        if let Some(v) = t.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Index of the first token that is neither an option nor a global option's value.
fn subcommand_position(tokens: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < tokens.len() {
        let t = tokens[i].as_str();
        if !t.starts_with('-') {
            return Some(i);
        }
        i += if VALUED_GLOBALS.contains(&t) { 2 } else { 1 };
    }
    None
}

fn parse_config(path: &Path, text: &str) -> anyhow::Result<serde_json::Map<String, Value>> {
    let value: Value = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => serde_json::from_str(text).with_context(|| format!("parsing {}", path.display()))?,
        _ => {
            let table: toml::Table = toml::from_str(text).with_context(|| format!("parsing {}", path.display()))?;
            serde_json::to_value(table)?
        }
    };
    match value {
        Value::Object(map) => Ok(map),
        _ => bail!("{} must hold a table of settings", path.display()),
    }
}

/// Flags for the global keys and the subcommand's table. Tables of other
/// subcommands are ignored.
fn config_args(table: &serde_json::Map<String, Value>, name: &str, given: &[&str]) -> anyhow::Result<Vec<String>> {
    let root = Cli::command();
    let sub = root.find_subcommand(name).expect("subcommand exists");
    let mut out = Vec::new();
    for (key, value) in table {
        if let Value::Object(section) = value {
            if key.replace('_', "-") == name {
                for (k, v) in section.iter().filter(|(k, _)| !given.contains(&k.replace('_', "-").as_str())) {
                    push_flag(&mut out, sub, k, v)?;
                }
            }
            continue;
        }
        if key == "config" {
            bail!("config files cannot include other config files");
        }
        if given.contains(&key.replace('_', "-").as_str()) {
            continue;
        }
        push_flag(&mut out, &root, key, value)?;
    }
    Ok(out)
}

fn push_flag(out: &mut Vec<String>, command: &clap::Command, key: &str, value: &Value) -> anyhow::Result<()> {
    let long = key.replace('_', "-");
    let switch = command
        .get_arguments()
        .find(|a| a.get_long() == Some(long.as_str()))
        .is_some_and(|a| matches!(a.get_action(), ArgAction::SetTrue));
    let flag = format!("--{long}");
    match value {
        Value::Bool(b) if switch => {
            if *b {
                out.push(flag);
            }
        }
        Value::Null => {}
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar_text).collect::<anyhow::Result<_>>()?;
            out.push(format!("{flag}={}", parts.join(",")));
        }
        other => out.push(format!("{flag}={}", scalar_text(other)?)),
    }
    Ok(())
}

fn scalar_text(value: &Value) -> anyhow::Result<String> {
    Ok(match value {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        _ => bail!("unsupported config value {value}"),
    })
}

pub fn execute(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Synth(a) => synth(cli, a),
        Command::Solve(a) => solve_cmd(cli, a),
        Command::Decompose(a) => decompose(cli, a),
        Command::Music(a) => music(cli, a),
        Command::Spark(a) => spark(cli, a),
        Command::PhaseTransition(a) => phase(cli, a),
        Command::Doa(a) => doa(cli, a),
        Command::Oracle(a) => oracle(cli, a),
    }
}

fn report(path: &Path) {
    println!("wrote {}", path.display());
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let text = crate::formats::to_json(value)?;
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn synth(cli: &Cli, a: &SynthArgs) -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed());
    let m = a.m.unwrap_or(a.n);
    let min_sep = a.min_sep.unwrap_or(1.0 / a.n.max(1) as f64);
    let (signal, mut problem) = random_problem::<f64, _>(a.n, m, a.k, a.l, min_sep, &mut rng)?;
    if let Some(snr) = a.snr_db {
        let (noisy, eta) = add_noise(problem.observed(), snr, &mut rng)?;
        problem = ObservationProblem::new(a.n, problem.omega().to_vec(), noisy, eta)?;
    }
    let path = cli.out_path(a.out.as_deref(), "problem.json");
    write_json(&path, &ProblemFile::new(&problem, Some(&signal), Some(cli.seed())))?;
    report(&path);
    Ok(())
}

fn solve_cmd(cli: &Cli, a: &SolveArgs) -> anyhow::Result<()> {
    let file: ProblemFile = read_json(&a.problem)?;
    let mut problem = file.problem()?;
    if let Some(eta) = a.eta {
        problem = problem.with_noise_bound(eta)?;
    }
    let settings = a.solver.apply(SolverSettings::default());
    settings.validate()?;
    let solved = solve(&problem, a.method, &settings)?;
    let out = match &solved.outcome {
        Some(outcome) => SolutionFile::reweighted(outcome),
        None => SolutionFile::new(&solved.solution, Some(a.method.name())),
    };
    let path = cli.out_path(a.out.as_deref(), "solution.json");
    write_json(&path, &out)?;
    report(&path);
    if !out.converged {
        eprintln!("warning: ADMM stopped at the iteration budget before converging");
    }
    Ok(())
}

fn decompose(cli: &Cli, a: &DecomposeArgs) -> anyhow::Result<()> {
    let solution = read_json::<SolutionFile>(&a.solution)?.solution()?;
    let omega = match (&a.problem, a.fit_observed) {
        (Some(p), true) => Some(read_json::<ProblemFile>(p)?.omega),
        _ => None,
    };
    let fit = match &omega {
        Some(o) => AmplitudeFit::Observed(o),
        None => AmplitudeFit::Completed,
    };
    let decomposition = full_decomposition_with(&solution, a.rank_tol, fit)?;
    let path = cli.out_path(a.out.as_deref(), "decomposition.json");
    write_json(&path, &DecompositionFile::from(&decomposition))?;
    report(&path);
    Ok(())
}

fn music(cli: &Cli, a: &MusicArgs) -> anyhow::Result<()> {
    let problem = read_json::<ProblemFile>(&a.problem)?.problem()?;
    let covariance = sample_covariance(problem.observed())?;
    let spectrum = music_spectrum(&covariance, problem.omega(), a.k, a.grid)?;
    let mut csv = String::from("f,pseudospectrum\n");
    for (&f, &v) in spectrum.grid.iter().zip(&spectrum.values) {
        csv.push_str(&format!("{},{}\n", sci(f), sci(v)));
    }
    let path = cli.out_path(a.out.as_deref(), "spectrum.csv");
    write_text(&path, &csv)?;
    report(&path);
    let peaks = pick_peaks(&spectrum, a.k)?;
    print_json(&serde_json::json!({ "peaks": peaks.frequencies, "underdetermined": peaks.underdetermined }))
}

#[derive(Serialize)]
struct SparkReport {
    lower: usize,
    upper: usize,
    exact: Option<usize>,
    reason: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<CertificateReport>,
}

#[derive(Serialize)]
struct CertificateReport {
    k: usize,
    rank: usize,
    certified: bool,
}

#[derive(Serialize)]
struct ProbabilityReport {
    n: usize,
    m: usize,
    seed: u64,
    estimate: f64,
    std_err: f64,
    trials: u64,
}

/// Pools `MONTE_CARLO_CHUNKS` independent streams of `(seed, chunk)`.
pub fn pooled_noncoprime_probability(n: usize, m: usize, trials: u64, seed: u64, threads: usize) -> anyhow::Result<ProbabilityEstimate> {
    if trials == 0 {
        bail!("at least one trial is required");
    }
    let chunks = MONTE_CARLO_CHUNKS.min(trials);
    let run = |c: u64| {
        let share = trials / chunks + u64::from(c < trials % chunks);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c);
        noncoprime_probability(n, m, share, &mut rng)
    };
    let parts: Vec<_> = if threads <= 1 {
        (0..chunks).map(run).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()?
            .install(|| (0..chunks).into_par_iter().map(run).collect())
    };
    let mut parts = parts.into_iter();
    let first = parts.next().expect("at least one chunk")?;
    parts.try_fold(first, |acc, p| Ok(acc.merge(p?)))
}

fn spark(cli: &Cli, a: &SparkArgs) -> anyhow::Result<()> {
    let text = if a.monte_carlo {
        let m = a.m.ok_or_else(|| anyhow!("--monte-carlo needs --m"))?;
        let est = pooled_noncoprime_probability(a.n, m, a.trials, cli.seed(), cli.threads()?)?;
        crate::formats::to_json(&ProbabilityReport {
            n: a.n,
            m,
            seed: cli.seed(),
            estimate: est.estimate,
            std_err: est.std_err,
            trials: est.trials,
        })?
    } else {
        let omega = a.omega.as_ref().ok_or_else(|| anyhow!("give --omega or --monte-carlo"))?;
        let bounds = spark_bounds(omega, a.n)?;
        let certificate = a.k.map(|k| CertificateReport { k, rank: a.rank, certified: l0_certificate(k, bounds.lower, a.rank) });
        crate::formats::to_json(&SparkReport {
            lower: bounds.lower,
            upper: bounds.upper,
            exact: bounds.exact,
            reason: bounds.reason.as_str(),
            certificate,
        })?
    };
    print!("{text}");
    if let Some(out) = &a.out {
        let path = cli.out_path(Some(out), "spark.json");
        write_text(&path, &text)?;
        report(&path);
    }
    Ok(())
}

/// Settings of the phase-transition study when no flag overrides them.
pub fn phase_defaults() -> SolverSettings {
    SolverSettings { tol: 1e-8, max_iters: 5000, ..SolverSettings::default() }
}

fn phase(cli: &Cli, a: &PhaseArgs) -> anyhow::Result<()> {
    let mut grid = PhaseTransitionGrid::desk(a.l, cli.seed());
    grid.n = a.n;
    if let Some(m) = &a.m_values {
        grid.m_values = m.clone();
    }
    if let Some(k) = &a.k_values {
        grid.k_values = k.clone();
    }
    grid.trials = a.trials;
    grid.threshold = a.threshold;
    grid.min_sep = a.min_sep;
    let settings = a.solver.apply(phase_defaults());
    let threads = cli.threads()?;
    let result = run_phase_transition(&grid, &a.methods, &settings, threads)?;

    let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let path = dir.join("phase_transition.json");
    write_json(&path, &ExperimentRecord::new("phase-transition", threads, &result))?;
    report(&path);
    for matrix in &result.matrices {
        let path = dir.join(format!("matrix_{}.csv", matrix.method));
        write_text(&path, &matrix_csv(matrix))?;
        report(&path);
    }
    for path in emit_phase_plots(&dir, &result.records, grid.l)? {
        report(&path);
    }
    let failed = result.records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("warning: {failed} trial(s) failed; see the error column of trials.csv");
    }
    Ok(())
}

fn doa(cli: &Cli, a: &DoaArgs) -> anyhow::Result<()> {
    let mut scenario = DoaScenario::sla(cli.seed());
    if let Some(v) = &a.omega {
        scenario.omega = v.clone();
    }
    if let Some(v) = &a.frequencies {
        scenario.frequencies = v.clone();
    }
    if let Some(v) = &a.powers {
        scenario.powers = v.clone();
    }
    scenario.snapshots = a.snapshots.unwrap_or(scenario.snapshots);
    scenario.snr_db = a.snr_db.unwrap_or(scenario.snr_db);
    scenario.music_grid = a.music_grid.unwrap_or(scenario.music_grid);
    scenario.music_sources = a.music_sources.or(scenario.music_sources);
    let clip = match (&a.clip, a.no_clip) {
        (_, true) => None,
        (Some(c), _) if c.len() == 2 && c[0] < c[1] => Some((c[0], c[1])),
        (Some(c), _) => bail!("--clip takes `lo,hi` with lo < hi, got {c:?}"),
        (None, _) => Some(DOA_CLIP),
    };
    let settings = a.solver.apply(SolverSettings::default());
    let result = run_doa(&scenario, &settings, &a.methods)?;

    let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let path = dir.join("doa.json");
    write_json(&path, &ExperimentRecord::new("doa", cli.threads()?, &result))?;
    report(&path);
    for path in emit_doa_plots(&dir, &result, clip)? {
        report(&path);
    }
    for e in result.estimates.iter().filter(|e| e.error.is_some()) {
        eprintln!("warning: {} failed: {}", e.method, e.error.as_deref().unwrap_or_default());
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleReport {
    grid: usize,
    value: f64,
    dual_bound: f64,
    relative_gap: f64,
    iterations: usize,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    sdp: Option<f64>,
}

fn oracle(cli: &Cli, a: &OracleArgs) -> anyhow::Result<()> {
    let y = match (&a.problem, &a.solution) {
        (Some(p), _) => {
            let problem = read_json::<ProblemFile>(p)?.problem()?;
            if problem.num_observed() != problem.num_samples() {
                bail!("the oracle needs a fully observed problem; pass a solution instead");
            }
            problem.observed().clone()
        }
        (None, Some(s)) => read_json::<SolutionFile>(s)?.solution()?.blocks.y,
        (None, None) => bail!("give --problem or --solution"),
    };
    let defaults = GridOracleConfig::default();
    let config = GridOracleConfig {
        max_iters: a.max_iters.unwrap_or(defaults.max_iters),
        tol: a.tol.unwrap_or(defaults.tol),
        ..defaults
    };
    let norm = grid_atomic_norm(&y, a.grid, &config)?;
    let sdp = if a.compare { Some(atomic_norm(&y, &SolverSettings::default().admm())?) } else { None };
    let out = OracleReport {
        grid: a.grid,
        value: norm.value,
        dual_bound: norm.dual_bound,
        relative_gap: norm.relative_gap(),
        iterations: norm.iterations,
        converged: norm.converged,
        sdp,
    };
    let path = cli.out_path(a.out.as_deref(), "oracle.json");
    write_json(&path, &out)?;
    report(&path);
    if !norm.converged {
        eprintln!("warning: the grid solver did not reach its tolerance; the value is an upper bound only");
    }
    print_json(&out)
}
