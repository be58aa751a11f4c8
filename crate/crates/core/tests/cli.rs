//! End-to-end checks of the `hbc-link` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use hbc_link::scenario::sweep::sweep_scenario;
use hbc_link::scenario::{preset, Scenario, SweepAxis};

fn hbc_link(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbc-link")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = hbc_link(args);
    assert!(
        out.status.success(),
        "hbc-link {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_config(dir: &Path, scenario: &Scenario) -> PathBuf {
    let path = dir.join(format!("{}.json", scenario.name));
    fs::write(&path, scenario.to_json_pretty()).unwrap();
    path
}

fn csv_rows(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

/// (direct errors, integrated errors, bits) recounted from a decisions file.
fn recount(path: &Path) -> (u64, u64, u64) {
    let (header, rows) = csv_rows(path);
    assert_eq!(header, "bit_index,tx,rx_direct,rx_integrated,sample_direct_v,sample_integrated");
    let mut errs = (0, 0, 0);
    for r in rows {
        errs.0 += u64::from(r[1] != r[2]);
        errs.1 += u64::from(r[1] != r[3]);
        errs.2 += 1;
    }
    errs
}

fn small(name: &str, n_bits: usize) -> Scenario {
    let mut s = preset(name).unwrap();
    s.data.n_bits = n_bits;
    s
}

#[test]
fn run_lists_its_artifacts_and_bers_recount() {
    let tmp = tempfile::tempdir().unwrap();
    let report: Value = serde_json::from_str(&ok(&["run", "--preset", "fig8k", "--out-dir", p(tmp.path())])).unwrap();
    let artifacts: Vec<&str> = report["artifacts"].as_array().unwrap().iter().map(|a| a.as_str().unwrap()).collect();
    assert_eq!(artifacts.len(), 7);
    for a in &artifacts {
        assert!(Path::new(a).is_file(), "missing {a}");
    }
    let (d, i, n) = recount(&tmp.path().join("fig8k_decisions.csv"));
    assert_eq!(report["ber_direct"]["errors"].as_u64(), Some(d));
    assert_eq!(report["ber_integrated"]["errors"].as_u64(), Some(i));
    assert_eq!(report["ber_integrated"]["bits"].as_u64(), Some(n));
    assert!(report["eye_height_direct"].as_f64().unwrap() < 0.0);
    assert!(report["eye_height_integrated"].as_f64().unwrap() > 0.0);
    // Defaults are echoed explicitly.
    assert_eq!(report["scenario"]["link"]["samples_per_bit"], 100);
    assert_eq!(report["scenario"]["link"]["k_int_per_s"], 1e8);
    assert_eq!(report["scenario"]["receiver"]["phase_steps"], 32);
}

#[test]
fn identical_configs_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &small("fig8p", 2000));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["run", p(&cfg), "--out-dir", p(&a)]);
    ok(&["run", p(&cfg), "--out-dir", p(&b)]);
    for f in ["decisions.csv", "eye_direct.csv", "eye_integrated.csv", "psd.csv"] {
        let name = format!("fig8p_{f}");
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name}");
    }
    let c = tmp.path().join("c");
    ok(&["run", p(&cfg), "--out-dir", p(&c), "--seed", "99"]);
    assert_ne!(
        fs::read(a.join("fig8p_eye_direct.csv")).unwrap(),
        fs::read(c.join("fig8p_eye_direct.csv")).unwrap()
    );
}

fn single_line_error(out: &Output) -> String {
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "), "{err}");
    err
}

#[test]
fn invalid_configs_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();

    let mut typo: Value = serde_json::from_str(&preset("fig8a").unwrap().to_json_pretty()).unwrap();
    typo["link"]["bit_rate"] = typo["link"]["bit_rate_hz"].clone();
    let path = tmp.path().join("typo.json");
    fs::write(&path, typo.to_string()).unwrap();
    let err = single_line_error(&hbc_link(&["run", p(&path), "--out-dir", p(tmp.path())]));
    assert!(err.contains("link"), "{err}");

    let mut s = preset("fig8k").unwrap();
    s.name = "alias".into();
    if let hbc_link::channel::InterferenceSpec::Cw(cw) = &mut s.interferers[0] {
        cw.freq_hz = 6e9;
    }
    let cfg = write_config(tmp.path(), &s);
    let err = single_line_error(&hbc_link(&["run", p(&cfg), "--out-dir", p(tmp.path())]));
    assert!(err.contains("interferers[0]") && err.contains("Nyquist"), "{err}");
    assert!(!tmp.path().join("alias_report.json").exists());

    let mut s = preset("fig8a").unwrap();
    s.name = "short".into();
    s.link.samples_per_bit = 8;
    let cfg = write_config(tmp.path(), &s);
    let err = single_line_error(&hbc_link(&["run", p(&cfg)]));
    assert!(err.contains("link.samples_per_bit"), "{err}");

    let err = single_line_error(&hbc_link(&["run", "--preset", "fig9z"]));
    assert!(err.contains("preset"), "{err}");
}

#[test]
fn rejection_sweep_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("rej.csv");
    ok(&["sweep-rejection", "--points", "201", "--out", p(&out)]);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, "freq_hz,rejection_db");
    assert_eq!(rows.len(), 201);
    let at = |f: &str| rows.iter().find(|r| r[0] == f).unwrap()[1].parse::<f64>().unwrap();
    assert!((at("95000000") - 25.61).abs() <= 0.01);
    assert_eq!(at("100000000"), 120.0);
    assert!((at("88000000") - 17.5).abs() < 0.05);
}

#[test]
fn ber_sweep_rows_match_recomputed_decisions() {
    let tmp = tempfile::tempdir().unwrap();
    let base = small("fig8k", 3000);
    let cfg = write_config(tmp.path(), &base);
    let out = tmp.path().join("sir.csv");
    let values = [-30.0, -23.0, -11.0];
    ok(&["sweep-ber", p(&cfg), "--axis", "sir_db", "--values", "-30,-23,-11", "--out", p(&out)]);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, "axis_value,ber_direct,ber_integrated,ci95_lo,ci95_hi");
    assert_eq!(rows.len(), 3);
    for (i, v) in values.iter().enumerate() {
        assert_eq!(rows[i][0].parse::<f64>().unwrap(), *v);
        let point = sweep_scenario(&base, SweepAxis::SirDb, *v, i).unwrap();
        let point_cfg = write_config(tmp.path(), &point);
        ok(&["run", p(&point_cfg), "--out-dir", p(tmp.path())]);
        let (d, n_i, n) = recount(&tmp.path().join(format!("{}_decisions.csv", point.name)));
        assert_eq!(rows[i][1].parse::<f64>().unwrap(), d as f64 / n as f64);
        assert_eq!(rows[i][2].parse::<f64>().unwrap(), n_i as f64 / n as f64);
    }
    let row_23: f64 = rows[1][2].parse().unwrap();
    assert!(row_23 <= 1e-3);
}

#[test]
fn snr_sweep_without_interference_is_error_free() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("snr.csv");
    ok(&["sweep-ber", "--preset", "fig8a", "--axis", "snr_db", "--values", "20", "--out", p(&out)]);
    let (_, rows) = csv_rows(&out);
    assert_eq!(rows[0][2], "0");
}

#[test]
fn empty_sweep_values_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("none.csv");
    let res = hbc_link(&["sweep-ber", "--preset", "fig8a", "--axis", "snr_db", "--values", "", "--out", p(&out)]);
    assert!(!res.status.success());
    assert!(!out.exists());
}

#[test]
fn eye_exports() {
    let tmp = tempfile::tempdir().unwrap();
    let mut clean = preset("fig8a").unwrap();
    clean.noise = None;
    let cfg = write_config(tmp.path(), &clean);
    let out = tmp.path().join("clean_direct.csv");
    ok(&["eye", p(&cfg), "--which", "direct", "--out", p(&out)]);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, "trace_id,t_s,v");
    assert!(rows.iter().all(|r| r[2] == "0.01" || r[2] == "-0.01"));

    for (which, sign) in [("direct", -1.0), ("integrated", 1.0)] {
        ok(&["eye", "--preset", "fig8k", "--which", which, "--out-dir", p(tmp.path())]);
        let sidecar = tmp.path().join(format!("fig8k_eye_{which}.metrics.json"));
        let text = fs::read_to_string(&sidecar).unwrap();
        assert_eq!(text.lines().count(), 1);
        let m: Value = serde_json::from_str(&text).unwrap();
        assert!(m["eye_height"].as_f64().unwrap() * sign > 0.0, "{which}: {m}");
    }
}

#[test]
fn presets_and_trajectory() {
    let listed = ok(&["presets"]);
    assert_eq!(listed.lines().collect::<Vec<_>>(), ["fig8a", "fig8f", "fig8k", "fig8p", "fig8u"]);

    let tmp = tempfile::tempdir().unwrap();
    ok(&["presets", "--out-dir", p(tmp.path())]);
    let back = Scenario::from_path(&tmp.path().join("fig8u.json")).unwrap();
    assert_eq!(back, preset("fig8u").unwrap());

    let out = tmp.path().join("traj.csv");
    ok(&["trajectory", "--freq-hz", "1e8", "--points", "101", "--out", p(&out)]);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, "t_s,integrated_v");
    assert_eq!(rows.len(), 101);
    assert!(rows[100][1].parse::<f64>().unwrap().abs() < 1e-9);
}
