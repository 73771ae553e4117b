use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn dephasim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dephasim"))
        .args(args)
        .env_remove("DEPHASIM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("device.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

fn fig2_text() -> String {
    std::fs::read_to_string(example("fig2.cfg")).unwrap()
}

#[test]
fn regime_on_fig2() {
    let out = dephasim(&["regime", "--config", example("fig2.cfg").to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["classification"], "quasi-static-dominant");
    let value = report["neg2lnD_at_crossover"].as_f64().unwrap();
    assert!((value - 40.0).abs() < 1e-9, "{value}");
    assert!((report["t_crossover_us"].as_f64().unwrap() - 100.0).abs() < 1e-9);
}

#[test]
fn missing_qubit_section_exits_2_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let text = fig2_text().replace("[qubit]\ne0 = 5000\n", "");
    let cfg = write_config(dir.path(), &text);
    let out = dephasim(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("r.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("[qubit]") && err.contains("e0"), "{err}");
}

#[test]
fn zero_runs_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dephasim(&[
        "simulate",
        "--config",
        example("fig2.cfg").to_str().unwrap(),
        "--runs",
        "0",
        "--out",
        dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("n_runs"));
}

#[test]
fn unknown_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &fig2_text().replace("[bath]\n", "[bath]\ntemperature = 0.1\n"));
    let out = dephasim(&["regime", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("temperature"));
}

#[test]
fn simulate_writes_record_csv_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let record = dir.path().join("fig2.json");
    let out = Command::new(env!("CARGO_BIN_EXE_dephasim"))
        .args([
            "simulate",
            "--config",
            example("fig2.cfg").to_str().unwrap(),
            "--runs",
            "200",
            "--seed",
            "5",
            "--out",
            record.to_str().unwrap(),
            "--plot",
        ])
        .env("DEPHASIM_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = stdout(&out);
    assert!(summary.contains("quasi-static-dominant") && summary.contains("t_tilde = 100.0000 us"), "{summary}");
    assert!(summary.contains("short-time exponent"), "{summary}");

    let rec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&record).unwrap()).unwrap();
    assert_eq!(rec["seed"], 5);
    assert_eq!(rec["config"]["n_runs"], 200);
    assert_eq!(rec["timing"]["threads"], 1);
    let csv = std::fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t_us,M,R,D,D_err"));
    assert_eq!(lines.count(), 101);
    let script = std::fs::read_to_string(dir.path().join("fig2.gp")).unwrap();
    assert!(script.contains("'fig2.csv'"));
}

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let record = dir.path().join(name);
        let out = dephasim(&[
            "simulate",
            "--config",
            example("fig2.cfg").to_str().unwrap(),
            "--runs",
            "40",
            "--threads",
            threads,
            "--out",
            record.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        std::fs::read_to_string(record.with_extension("csv")).unwrap()
    };
    assert_eq!(run("1", "a.json"), run("3", "b.json"));
}

#[test]
fn analytic_csv_has_header_and_branches() {
    let dir = tempfile::tempdir().unwrap();
    let text = fig2_text().replace("t_stop = 100", "t_stop = 2000");
    let cfg = write_config(dir.path(), &text);
    let out = dephasim(&["analytic", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = stdout(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t_us,neg2lnD,branch_id"));
    let rows: Vec<(f64, f64, u8)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 101);
    for (t, _, b) in &rows {
        // Grid points sit on the branch edges up to rounding.
        if (t - 100.0).abs() < 1e-6 || (t - 1000.0).abs() < 1e-6 {
            continue;
        }
        let want = if *t <= 100.0 { 1 } else if *t <= 1000.0 { 2 } else { 3 };
        assert_eq!(*b, want, "t = {t}");
    }
    assert!(rows.windows(2).all(|w| w[1].1 >= w[0].1));
}

#[test]
fn sweep_peaks_where_mu_av_meets_gamma() {
    let out = dephasim(&["sweep", "--config", example("fig2.cfg").to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = stdout(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("T_K,gamma_phi,gamma_phi_long"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
            (f[0], f[1])
        })
        .collect();
    assert_eq!(rows.len(), 31);
    let peak = (0..rows.len()).max_by(|&i, &j| rows[i].1.total_cmp(&rows[j].1)).unwrap();
    // t_star defaults to the geometric midpoint, 0.1 K.
    assert_eq!(peak, 15);
    assert!((rows[peak].0 - 0.1).abs() < 1e-12);
}

#[test]
fn validate_single_tls_agrees_within_one_percent() {
    let out = dephasim(&["validate", "--config", example("single_tls.cfg").to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["tls"], 1);
    assert!(report["max_rel_abs_deviation"].as_f64().unwrap() <= 0.01, "{report}");
    assert_eq!(report["within_1_percent"], true);
}

#[test]
fn oracle_diffusion_reports_small_ks_distances() {
    let out = dephasim(&["oracle-diffusion", "--config", example("fig2.cfg").to_str().unwrap(), "--runs", "20000"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = json(&out);
    for key in ["propagator", "stationary"] {
        let d = report[key]["ks_statistic"].as_f64().unwrap();
        assert!(d < 0.02, "{key}: {d}");
    }
}

#[test]
fn show_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = dephasim(&["show-config", "--config", example("fig2.cfg").to_str().unwrap()]);
    assert!(first.status.success());
    let cfg = write_config(dir.path(), &stdout(&first));
    let second = dephasim(&["show-config", "--config", cfg.to_str().unwrap()]);
    assert_eq!(stdout(&first), stdout(&second));
}
