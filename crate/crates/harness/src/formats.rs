//! JSON file formats. Complex numbers are `[re, im]` pairs and matrices are
//! row-major lists of rows. Floats are written in 17-digit scientific notation
//! so every file parses back to identical values.

use std::io::Write;
use std::path::Path;

use gridless_core::admm::{SdpBlockMatrix, SolverSolution};
use gridless_core::decompose::AtomicDecomposition;
use gridless_core::relax::RwtmOutcome;
use gridless_core::{CMat, CVec, Cplx, Problem, Signal};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{io_error, HarnessError, Result};

pub type Pair = [f64; 2];
pub type Rows = Vec<Vec<Pair>>;

pub fn pair(z: Cplx<f64>) -> Pair {
    [z.re, z.im]
}

pub fn to_rows(m: &CMat<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().map(|&z| pair(z)).collect()).collect()
}

/// Rows back to a matrix; `cols` fixes the width when there are no rows.
pub fn from_rows(rows: &[Vec<Pair>], cols: usize) -> Result<CMat<f64>> {
    let width = rows.first().map_or(cols, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(HarnessError::Format("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(rows.len(), width, |i, j| Cplx::new(rows[i][j][0], rows[i][j][1])))
}

fn to_vec(v: &CVec<f64>) -> Vec<Pair> {
    v.iter().map(|&z| pair(z)).collect()
}

/// A (possibly ground-truth-annotated) observation problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<f64>>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Rows>,
    pub omega: Vec<usize>,
    pub observed: Rows,
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ProblemFile {
    pub fn new(problem: &Problem, truth: Option<&Signal>, seed: Option<u64>) -> Self {
        Self {
            n: problem.num_samples(),
            l: problem.num_snapshots(),
            k: truth.map(|s| s.num_components()),
            f: truth.map(|s| s.frequencies().to_vec()),
            s: truth.map(|s| to_rows(s.amplitudes())),
            omega: problem.omega().to_vec(),
            observed: to_rows(problem.observed()),
            eta: problem.noise_bound(),
            seed,
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        let observed = from_rows(&self.observed, self.l)?;
        Ok(Problem::new(self.n, self.omega.clone(), observed, self.eta)?)
    }

    pub fn signal(&self) -> Result<Option<Signal>> {
        match (&self.f, &self.s) {
            (Some(f), Some(s)) => Ok(Some(Signal::new(self.n, f.clone(), from_rows(s, self.l)?)?)),
            (None, None) => Ok(None),
            _ => Err(HarnessError::Format("`f` and `S` must be given together".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
}

/// Solver output, optionally with the reweighting history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    #[serde(rename = "W")]
    pub w: Rows,
    #[serde(rename = "Y")]
    pub y: Rows,
    pub u: Vec<Pair>,
    pub objective: f64,
    pub iterations: usize,
    pub residuals: Residuals,
    pub converged: bool,
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate_trace: Option<Vec<f64>>,
}

impl SolutionFile {
    pub fn new(sol: &SolverSolution<f64>, method: Option<&str>) -> Self {
        Self {
            w: to_rows(&sol.blocks.w),
            y: to_rows(&sol.blocks.y),
            u: to_vec(&sol.blocks.u),
            objective: sol.objective,
            iterations: sol.iterations,
            residuals: Residuals { primal: sol.primal_residual, dual: sol.dual_residual },
            converged: sol.converged,
            rho: sol.rho,
            method: method.map(str::to_owned),
            outer_iterations: None,
            surrogate_trace: None,
        }
    }

    pub fn reweighted(outcome: &RwtmOutcome<f64>) -> Self {
        let mut file = Self::new(&outcome.solution, Some("rwtm"));
        file.iterations = outcome.iterates.iter().map(|s| s.iterations).sum();
        file.outer_iterations = Some(outcome.outer_iterations());
        file.surrogate_trace = Some(outcome.surrogate_trace.clone());
        file
    }

    /// Rebuilds the solution; the PSD variable is taken as the structured matrix.
    pub fn solution(&self) -> Result<SolverSolution<f64>> {
        let y = from_rows(&self.y, self.w.len())?;
        let w = from_rows(&self.w, self.w.len())?;
        let u = CVec::from_iterator(self.u.len(), self.u.iter().map(|p| Cplx::new(p[0], p[1])));
        if u.len() != y.nrows() || w.nrows() != y.ncols() || !w.is_square() {
            return Err(HarnessError::Format(format!(
                "block sizes disagree: W {:?}, Y {:?}, u {}",
                w.shape(),
                y.shape(),
                u.len()
            )));
        }
        if u.is_empty() || u[0].im != 0.0 {
            return Err(HarnessError::Format("u[0] must be real".into()));
        }
        let mut blocks = SdpBlockMatrix { w, y, u, psd: CMat::zeros(0, 0) };
        blocks.psd = blocks.structured();
        Ok(SolverSolution {
            blocks,
            objective: self.objective,
            iterations: self.iterations,
            primal_residual: self.residuals.primal,
            dual_residual: self.residuals.dual,
            converged: self.converged,
            rho: self.rho,
        })
    }
}

/// Retrieved frequencies, powers, amplitudes and coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub f: Vec<f64>,
    pub p: Vec<f64>,
    #[serde(rename = "S")]
    pub s: Rows,
    pub c: Vec<f64>,
}

impl From<&AtomicDecomposition<f64>> for DecompositionFile {
    fn from(d: &AtomicDecomposition<f64>) -> Self {
        Self { f: d.frequencies.clone(), p: d.powers.clone(), s: to_rows(&d.amplitudes), c: d.coefficients.clone() }
    }
}

/// `serde_json` formatter writing floats as `{:.16e}`.
struct Scientific;

impl serde_json::ser::Formatter for Scientific {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{}", sci(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{}", sci(f64::from(value)))
    }
}

/// Full-precision scientific notation.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Scientific);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json(&std::fs::read_to_string(path).map_err(io_error(path))?)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_error(dir))?;
    }
    std::fs::write(path, text).map_err(io_error(path))
}
