use std::path::Path;
use std::process::{Command, Output};

fn tubeint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tubeint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows as floats, skipping metadata and the header.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn summary(csv: &str, key: &str) -> f64 {
    let line = csv.lines().rev().find(|l| l.starts_with("# summary:")).unwrap();
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn help_lists_experiments() {
    let o = tubeint(&["--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for cmd in ["simulate-y", "invariant-drift", "fourier", "ermakov", "tube", "gplot"] {
        assert!(text.contains(&format!("tubeint {cmd}")), "{cmd}");
    }
}

#[test]
fn unforced_simulation_is_flat() {
    let o = tubeint(&["simulate-y", "--eps", "0", "--y0", "1.3", "--tau-max", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("tau,y_numeric,y_series_o1,y_series_o2,y_series_o3,abs_err_o3,rel_err_o3"));
    let data = rows(&text);
    assert_eq!(data.len(), 201);
    for r in data {
        assert_eq!(&r[1..5], &[1.3; 4]);
        assert_eq!(r[5], 0.0);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(tubeint(&["simulate-y", "--bogus", "1"]).status.code(), Some(2));
    assert_eq!(tubeint(&["simulate-y", "--y0=-1"]).status.code(), Some(2));
    assert_eq!(tubeint(&["invariant-drift", "--omega", "2"]).status.code(), Some(2));
    assert_eq!(tubeint(&["ermakov", "--l0", "1.5"]).status.code(), Some(2));
    let o = tubeint(&["simulate-y", "--y0", "0.05", "--eps", "5", "--h", "0.5", "--tau-max", "50"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("positivity violation") && err.contains("time"), "{err}");
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# drift run\ny0 = 0.9\neps = 0.05\nt_end = 20\nrecord-every = 1000\n").unwrap();
    let c = cfg.to_str().unwrap();
    let text = stdout(&tubeint(&["invariant-drift", "--config", c]));
    assert!(text.contains("# y0: 0.9\n"));
    assert_eq!(rows(&text).len(), 21);
    let text = stdout(&tubeint(&["invariant-drift", "--config", c, "--y0", "1.2"]));
    assert!(text.contains("# y0: 1.2\n"));

    std::fs::write(&cfg, "y0 = 0.9\nwobble = 3\n").unwrap();
    let o = tubeint(&["invariant-drift", "--config", c]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("unknown key `wobble`"));
}

#[test]
fn drift_modes() {
    let base = ["invariant-drift", "--eps", "0.05", "--y0", "0.8"];
    let exact = stdout(&tubeint(&[&base[..], &["--mode", "exact"]].concat()));
    assert!(exact.contains("# mode: exact"));
    assert!(summary(&exact, "max_drift_pct") < 1e-4);
    let pert = stdout(&tubeint(&base));
    assert!(pert.contains("# mode: perturbative"));
    let d = summary(&pert, "max_drift_pct");
    assert!((6.0..12.0).contains(&d), "{d}");
    let flat = stdout(&tubeint(&["invariant-drift", "--eps", "0", "--t-end", "100"]));
    assert!(summary(&flat, "max_drift_pct") < 1e-10);
}

#[test]
fn fourier_unforced_has_no_harmonics() {
    let text = stdout(&tubeint(&["fourier", "--eps", "0", "--tau-max", "40"]));
    let data = rows(&text);
    assert_eq!(data.len(), 6);
    for r in data {
        assert!((r[2] - 1.0).abs() < 1e-12);
        assert!(r[3..].iter().all(|v| v.abs() < 1e-10));
    }
}

#[test]
fn fourier_reports_third_harmonic() {
    let text = stdout(&tubeint(&["fourier", "--tau-max", "40"]));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.ends_with("s2_secular,s3_detrended,s3_predicted"));
    assert!((summary(&text, "s3_predicted") - 7.0 / 864.0 * 1e-3).abs() < 1e-18);
}

#[test]
fn ermakov_runs() {
    let text = stdout(&tubeint(&["ermakov", "--t-end", "50"]));
    assert!(summary(&text, "max_drift_pct") < 1e-4);
    let flat = stdout(&tubeint(&["ermakov", "--df", "0", "--t-end", "10"]));
    for r in rows(&flat) {
        assert_eq!(r[1], 1.0);
        assert_eq!(r[4], 1.0);
    }
    let settled = stdout(&tubeint(&["ermakov", "--l0", "0.5", "--t-end", "6", "--record-every", "1000"]));
    let f: Vec<f64> = rows(&settled).iter().map(|r| r[1]).collect();
    for (got, want) in f.iter().zip([1.0, 1.3, 0.7, 0.7, 0.7, 0.7, 0.7]) {
        assert!((got - want).abs() < 1e-12, "{f:?}");
    }
}

#[test]
fn tube_filaments_have_distinct_levels() {
    let text = stdout(&tubeint(&["tube", "--z0-grid", "0.1,0.25", "--t-end", "10"]));
    let data = rows(&text);
    let k: Vec<f64> = data.iter().map(|r| r[3]).collect();
    assert!(k.iter().any(|&v| (v - k[0]).abs() > 1e-3));
    assert_eq!(data.len(), 2 * 101);
}

#[test]
fn plot_scripts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("y.csv");
    let c = csv.to_str().unwrap();
    let o = tubeint(&["simulate-y", "--tau-max", "10", "--out", c, "--plot"]);
    assert!(o.status.success());
    let script = std::fs::read_to_string(csv.with_extension("gp")).unwrap();
    assert!(script.contains("title \"y_numeric\"") && script.contains("title \"y_series_o3\""));

    let gp = dir.path().join("d.gp");
    let d = dir.path().join("d.csv");
    tubeint(&["invariant-drift", "--t-end", "10", "--out", d.to_str().unwrap()]);
    let o = tubeint(&["gplot", "--input", d.to_str().unwrap(), "--out", gp.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&gp).unwrap().matches("plot ").count(), 1);

    let missing = dir.path().join("nope.csv");
    assert_eq!(tubeint(&["gplot", "--input", missing.to_str().unwrap()]).status.code(), Some(2));
    assert!(!Path::new(&missing).exists());
}
