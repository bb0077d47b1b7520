use gridless_harness::doa::{DoaSpectrum, Estimator};
use gridless_harness::phase::{PhaseMatrix, TrialRecord};
use gridless_harness::plots::{emit_phase_plots, matrix_csv, phase_cells, phase_dat, reference_dat, spectrum_dat};
use gridless_harness::Method;

fn record(method: Method, m: usize, k: usize, trial: usize, success: bool) -> TrialRecord {
    TrialRecord {
        method,
        m,
        k,
        trial,
        seed: 1,
        stream: trial as u64,
        success,
        relative_error: Some(if success { 1e-9 } else { 0.5 }),
        frequency_error: None,
        components: Some(k),
        converged: true,
        iterations: 10,
        runtime_s: 0.25,
        error: None,
    }
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn empty_records_give_header_only_files() {
    let dir = tempfile::tempdir().unwrap();
    let files = emit_phase_plots(dir.path(), &[], 1).unwrap();
    assert_eq!(files.len(), 6);
    for path in files {
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1, "{} has data", path.display());
    }
}

#[test]
fn phase_rows_are_lexicographic() {
    let mut records = Vec::new();
    for &m in &[12, 8] {
        for &k in &[6, 2, 4] {
            for t in 0..2 {
                records.push(record(Method::Anm, m, k, t, k < 6 && (t == 0 || m == 12)));
            }
        }
    }
    records.push(record(Method::Rwtm, 8, 2, 0, true));
    let cells = phase_cells(&records, Method::Anm);
    let keys: Vec<(usize, usize)> = cells.iter().map(|c| (c.m, c.k)).collect();
    assert_eq!(keys, vec![(8, 2), (8, 4), (8, 6), (12, 2), (12, 4), (12, 6)]);
    let fractions: Vec<f64> = cells.iter().map(|c| c.success).collect();
    assert_eq!(fractions, vec![0.5, 0.5, 0.0, 1.0, 1.0, 0.0]);
    assert!(cells.iter().all(|c| c.trials == 2));

    let text = phase_dat(&cells);
    let lines = data_lines(&text);
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], "8 2 5.0000000000000000e-1 2");
    assert_eq!(lines[5], "12 6 0.0000000000000000e0 2");

    let dir = tempfile::tempdir().unwrap();
    emit_phase_plots(dir.path(), &records, 1).unwrap();
    let rwtm = std::fs::read_to_string(dir.path().join("phase_rwtm.dat")).unwrap();
    assert_eq!(data_lines(&rwtm), vec!["8 2 1.0000000000000000e0 1"]);
    let reference = std::fs::read_to_string(dir.path().join("reference.dat")).unwrap();
    assert_eq!(data_lines(&reference), vec!["8 4.5000000000000000e0", "12 6.5000000000000000e0"]);
    let trials = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), records.len() + 1);
}

#[test]
fn reference_line_is_half_of_m_plus_l() {
    let text = reference_dat(&[8, 20], 3);
    assert_eq!(data_lines(&text), vec!["8 5.5000000000000000e0", "20 1.1500000000000000e1"]);
    let matrix = PhaseMatrix {
        method: Method::Anm,
        n: 32,
        l: 3,
        m_values: vec![8, 20],
        k_values: vec![2],
        success: vec![vec![1.0], vec![0.0]],
    };
    assert_eq!(matrix.reference_line(), vec![(8, 5.5), (20, 11.5)]);
    let csv = matrix_csv(&matrix);
    assert_eq!(csv, "M,K=2\n8,1.0000000000000000e0\n20,0.0000000000000000e0\n");
}

#[test]
fn spectra_are_clipped() {
    let spectrum = DoaSpectrum {
        method: Estimator::Music,
        frequency: (0..10).map(|i| i as f64 / 10.0).collect(),
        value: (0..10).map(|i| i as f64).collect(),
    };
    let clipped = spectrum_dat(&spectrum, Some((0.0, 0.35)));
    assert!(clipped.starts_with("# f pseudospectrum\n"));
    assert_eq!(data_lines(&clipped).len(), 4);
    assert_eq!(data_lines(&spectrum_dat(&spectrum, None)).len(), 10);
    let lines = DoaSpectrum { method: Estimator::Rwtm, ..spectrum };
    assert!(spectrum_dat(&lines, None).starts_with("# f power\n"));
}

#[test]
fn merged_peaks_are_counted_as_one() {
    let f: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
    let one_bump: Vec<f64> = f.iter().map(|&x| 1.0 / (1e-3 + (x - 0.1f64).powi(2))).collect();
    let spectrum = DoaSpectrum { method: Estimator::Music, frequency: f.clone(), value: one_bump };
    assert_eq!(spectrum.peaks_in(0.05, 0.15), 1);
    let two: Vec<f64> = f
        .iter()
        .map(|&x| 1.0 / (1e-4 + (x - 0.08f64).powi(2)) + 1.0 / (1e-4 + (x - 0.12f64).powi(2)))
        .collect();
    let spectrum = DoaSpectrum { method: Estimator::Music, frequency: f, value: two };
    assert_eq!(spectrum.peaks_in(0.05, 0.15), 2);
}
