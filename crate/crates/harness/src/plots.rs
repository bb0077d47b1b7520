//! Gnuplot-ready data files and CSV tables.
//!
//! Data files are whitespace separated with a `#` header line; every float is
//! written in full-precision scientific notation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::doa::{DoaResult, DoaSpectrum, Estimator};
use crate::error::Result;
use crate::formats::{sci, write_text};
use crate::phase::{PhaseMatrix, TrialRecord};
use crate::settings::Method;

/// The interval shown in DOA spectrum plots.
pub const DOA_CLIP: (f64, f64) = (0.0, 0.35);

/// One phase-plane cell aggregated over its trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCell {
    pub m: usize,
    pub k: usize,
    pub success: f64,
    pub trials: usize,
}

/// Success fractions of `method`, ordered by `(M, K)`.
pub fn phase_cells(records: &[TrialRecord], method: Method) -> Vec<PhaseCell> {
    let mut counts: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.method == method) {
        let entry = counts.entry((r.m, r.k)).or_default();
        entry.0 += usize::from(r.success);
        entry.1 += 1;
    }
    counts
        .into_iter()
        .map(|((m, k), (hits, trials))| PhaseCell { m, k, success: hits as f64 / trials as f64, trials })
        .collect()
}

/// `x = M, y = K, z = success` data file.
pub fn phase_dat(cells: &[PhaseCell]) -> String {
    let mut out = String::from("# M K success trials\n");
    for c in cells {
        let _ = writeln!(out, "{} {} {} {}", c.m, c.k, sci(c.success), c.trials);
    }
    out
}

pub fn phase_csv(cells: &[PhaseCell]) -> String {
    let mut out = String::from("M,K,success,trials\n");
    for c in cells {
        let _ = writeln!(out, "{},{},{},{}", c.m, c.k, sci(c.success), c.trials);
    }
    out
}

/// The success matrix with one row per `M` and one column per `K`.
pub fn matrix_csv(matrix: &PhaseMatrix) -> String {
    let mut out = String::from("M");
    for k in &matrix.k_values {
        let _ = write!(out, ",K={k}");
    }
    out.push('\n');
    for (m, row) in matrix.m_values.iter().zip(&matrix.success) {
        out.push_str(&m.to_string());
        for &v in row {
            let _ = write!(out, ",{}", sci(v));
        }
        out.push('\n');
    }
    out
}

/// `K = (M + L)/2` at the given `M` values.
pub fn reference_dat(m_values: &[usize], l: usize) -> String {
    let mut out = String::from("# M K\n");
    for &m in m_values {
        let _ = writeln!(out, "{} {}", m, sci((m + l) as f64 / 2.0));
    }
    out
}

pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(
        "method,M,K,trial,seed,stream,success,relative_error,frequency_error,components,converged,iterations,runtime_s,error\n",
    );
    let opt = |v: Option<f64>| v.map(sci).unwrap_or_default();
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.m,
            r.k,
            r.trial,
            r.seed,
            r.stream,
            r.success,
            opt(r.relative_error),
            opt(r.frequency_error),
            r.components.map(|c| c.to_string()).unwrap_or_default(),
            r.converged,
            r.iterations,
            sci(r.runtime_s),
            csv_text(r.error.as_deref()),
        );
    }
    out
}

fn csv_text(text: Option<&str>) -> String {
    text.unwrap_or("").replace([',', '\n'], ";")
}

/// Writes `phase_<method>.{dat,csv}` for both methods, `reference.dat` and
/// `trials.csv` into `dir`. Methods without records get header-only files.
pub fn emit_phase_plots(dir: &Path, records: &[TrialRecord], l: usize) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut emit = |name: String, text: String| -> Result<()> {
        let path = dir.join(name);
        write_text(&path, &text)?;
        written.push(path);
        Ok(())
    };
    for method in [Method::Anm, Method::Rwtm] {
        let cells = phase_cells(records, method);
        emit(format!("phase_{method}.dat"), phase_dat(&cells))?;
        emit(format!("phase_{method}.csv"), phase_csv(&cells))?;
    }
    let mut m_values: Vec<usize> = records.iter().map(|r| r.m).collect();
    m_values.sort_unstable();
    m_values.dedup();
    emit("reference.dat".into(), reference_dat(&m_values, l))?;
    emit("trials.csv".into(), trials_csv(records))?;
    Ok(written)
}

/// Spectrum samples with frequency inside `clip` (all when `None`).
pub fn spectrum_dat(spectrum: &DoaSpectrum, clip: Option<(f64, f64)>) -> String {
    let header = match spectrum.method {
        Estimator::Music => "# f pseudospectrum\n",
        _ => "# f power\n",
    };
    let mut out = String::from(header);
    for (&f, &v) in spectrum.frequency.iter().zip(&spectrum.value) {
        if clip.is_none_or(|(lo, hi)| (lo..=hi).contains(&f)) {
            let _ = writeln!(out, "{} {}", sci(f), sci(v));
        }
    }
    out
}

pub fn estimates_csv(result: &DoaResult) -> String {
    let mut out = String::from("method,seed,f,power,runtime_s,error\n");
    for e in &result.estimates {
        if e.frequencies.is_empty() {
            let _ = writeln!(out, "{},{},,,{},{}", e.method, e.seed, sci(e.runtime_s), csv_text(e.error.as_deref()));
        }
        for (&f, &p) in e.frequencies.iter().zip(&e.powers) {
            let _ = writeln!(out, "{},{},{},{},{},", e.method, e.seed, sci(f), sci(p), sci(e.runtime_s));
        }
    }
    out
}

/// Writes `spectrum_<method>.dat` for every method that produced a spectrum,
/// and `estimates.csv`.
pub fn emit_doa_plots(dir: &Path, result: &DoaResult, clip: Option<(f64, f64)>) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for spectrum in &result.spectra {
        let path = dir.join(format!("spectrum_{}.dat", spectrum.method));
        write_text(&path, &spectrum_dat(spectrum, clip))?;
        written.push(path);
    }
    let path = dir.join("estimates.csv");
    write_text(&path, &estimates_csv(result))?;
    written.push(path);
    Ok(written)
}
