//! End-to-end tests of the `qnr` binary: flag handling, exit codes, and
//! CSV/JSON table output.

use std::process::{Command, Output};

use qnr_herald::closed_form::single_click_probability;
use qnr_herald::{DetectorParams, SourceParams};

fn qnr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .expect("header row")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| {
        panic!("missing column {name} in {header:?}");
    })
}

/// Mirrors the binary's numeric formatting (12 significant digits,
/// scientific below 1e-4) for the round-trip check.
fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.abs() < 1e-4 {
        format!("{x:.11e}")
    } else {
        let magnitude = x.abs().log10().floor() as i32;
        let decimals = (11 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    }
}

#[test]
fn distribution_defaults_reproduce_reference_rows() {
    for (modes, expect) in [("1", 0.45), ("4", 0.72)] {
        let out = qnr(&["distribution", "--modes", modes]);
        assert!(out.status.success());
        let (header, rows) = csv_rows(&stdout(&out));
        let n = column(&header, "n");
        let pre = column(&header, "pre_herald");
        let post = column(&header, "post_herald");
        let oracle = column(&header, "oracle");
        let row1 = rows.iter().find(|r| r[n] == "1").unwrap();
        assert!((row1[pre].parse::<f64>().unwrap() - 0.25).abs() < 1e-9);
        let post_val: f64 = row1[post].parse().unwrap();
        assert!((post_val - expect).abs() < 0.005, "M={modes}: {post_val}");
        // oracle column must be populated and agree at these small sizes
        let oracle_val: f64 = row1[oracle].parse().unwrap();
        assert!((oracle_val - post_val).abs() < 1e-9);
    }
}

#[test]
fn sweep_m_starts_at_reference_point_and_decreases() {
    let out = qnr(&["sweep-m", "--modes-range", "1:8"]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 8);
    let p = column(&header, "p_click_1");
    let first: f64 = rows[0][p].parse().unwrap();
    assert!((first - 0.44).abs() < 0.005);
    for pair in rows.windows(2) {
        let a: f64 = pair[0][p].parse().unwrap();
        let b: f64 = pair[1][p].parse().unwrap();
        assert!(b < a, "p_click_1 not decreasing over M=1..8");
    }
}

#[test]
fn sweep_m_fidelity_monotone_without_dark_counts() {
    let out = qnr(&["sweep-m", "--modes-range", "1:200", "--delta", "0"]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&stdout(&out));
    let f = column(&header, "fidelity_1");
    for pair in rows.windows(2) {
        let a: f64 = pair[0][f].parse().unwrap();
        let b: f64 = pair[1][f].parse().unwrap();
        assert!(b >= a, "fidelity decreased with delta = 0");
    }
}

#[test]
fn sweep_m_csv_round_trips_bit_identically() {
    let out = qnr(&["sweep-m", "--modes-range", "1:30"]);
    let (header, rows) = csv_rows(&stdout(&out));
    let m = column(&header, "m_modes");
    let mu_col = column(&header, "mu");
    let eta_col = column(&header, "eta");
    let delta_col = column(&header, "delta");
    let p = column(&header, "p_click_1");
    for row in &rows {
        let source = SourceParams::new(row[mu_col].parse().unwrap()).unwrap();
        let detector = DetectorParams::new(
            row[eta_col].parse().unwrap(),
            row[delta_col].parse().unwrap(),
        )
        .unwrap();
        let modes: u32 = row[m].parse().unwrap();
        let recomputed = single_click_probability(modes, &source, &detector).unwrap();
        assert_eq!(fmt_sig(recomputed), row[p], "M={modes}");
    }
}

#[test]
fn contour_reports_approximation_and_scan() {
    let out = qnr(&[
        "contour",
        "--eta-range",
        "0.8:0.8",
        "--eta-steps",
        "1",
        "--delta-range",
        "5e-4:5e-4",
        "--delta-steps",
        "1",
    ]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    let approx: f64 = rows[0][column(&header, "m_fidelity_approx")].parse().unwrap();
    let scan: u32 = rows[0][column(&header, "m_fidelity_scan")].parse().unwrap();
    assert!((approx - 21.6).abs() < 0.1);
    assert_eq!(scan, 22);
}

#[test]
fn contour_rejects_zero_dark_counts() {
    let out = qnr(&["contour", "--delta-range", "0:1e-3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_passes_at_default_tolerance() {
    let out = qnr(&["verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS"));
}

#[test]
fn verify_fails_at_absurd_tolerance() {
    let out = qnr(&["verify", "--tolerance", "1e-18"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn optimize_reports_reference_optimum() {
    let out = qnr(&["optimize", "--format", "json"]);
    assert!(out.status.success());
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let row = &rows.as_array().unwrap()[0];
    assert_eq!(row["m_fidelity_opt"], 22);
    assert!((row["fidelity_at_opt"].as_f64().unwrap() - 0.777).abs() < 0.005);
    assert!(row["m_prob_local_max"].as_i64().unwrap() > 1000);
    assert!((row["m_prob_approx"].as_f64().unwrap() - 1105.26).abs() < 0.1);
}

#[test]
fn mc_requires_seed_and_is_reproducible() {
    let out = qnr(&["mc", "--trials", "20000"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));

    let args = ["mc", "--trials", "20000", "--seed", "7"];
    let a = qnr(&args);
    let b = qnr(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));

    let (header, rows) = csv_rows(&stdout(&a));
    let est: f64 = rows[0][column(&header, "estimate")].parse().unwrap();
    let se: f64 = rows[0][column(&header, "std_error")].parse().unwrap();
    let exact: f64 = rows[0][column(&header, "exact")].parse().unwrap();
    assert!((est - exact).abs() <= 4.0 * se);
}

#[test]
fn invalid_parameters_exit_with_code_one() {
    let out = qnr(&["sweep-m", "--eta", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = qnr(&["distribution", "--mu", "-1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn json_output_matches_csv_columns() {
    let csv = qnr(&["sweep-m", "--modes-range", "1:3"]);
    let json = qnr(&["sweep-m", "--modes-range", "1:3", "--format", "json"]);
    let (header, rows) = csv_rows(&stdout(&csv));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    let objects = parsed.as_array().unwrap();
    assert_eq!(objects.len(), rows.len());
    for (obj, row) in objects.iter().zip(&rows) {
        for (i, name) in header.iter().enumerate() {
            let csv_val: f64 = row[i].parse().unwrap();
            let json_val = obj[name].as_f64().unwrap();
            assert!((csv_val - json_val).abs() <= 1e-12 * csv_val.abs().max(1.0));
        }
    }
}
