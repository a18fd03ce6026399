use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn doomsday(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doomsday"))
        .args(args)
        .env_remove("DOOMSDAY_FIXTURES")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    serde_json::from_str(&stdout(&doomsday(&all))).unwrap()
}

/// Rows after the `#` comment lines and the header.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn urn_default_fixtures_give_five_to_one() {
    let v = json(&["urn", "--trials", "200000"]);
    let c = v["candidates"].as_array().unwrap();
    assert_eq!(c[0]["exact"], "0/1");
    assert_eq!(c[1]["exact"], "5/6");
    assert_eq!(c[2]["exact"], "1/6");
    assert_eq!(c[2]["odds_against"], 5.0);
    assert!((c[1]["monte_carlo"].as_f64().unwrap() - 5.0 / 6.0).abs() < 0.01);
}

#[test]
fn urn_without_trials_is_exact_only() {
    let v = json(&["urn", "--trials", "0"]);
    assert!(v["candidates"][1]["monte_carlo"].is_null());
}

#[test]
fn urn_fixture_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("fig2_left.txt", "1\n1\n"),
        ("fig2_centre.txt", "2\n"),
        ("fig2_right.txt", "# comment\n4\n"),
    ] {
        std::fs::write(dir.path().join(name), body).unwrap();
    }
    let out = Command::new(env!("CARGO_BIN_EXE_doomsday"))
        .args(["--format", "json", "urn", "--rank", "2", "--trials", "0"])
        .env("DOOMSDAY_FIXTURES", dir.path())
        .output()
        .unwrap();
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    // likelihoods 0, 1/2, 1/4
    assert_eq!(v["candidates"][1]["exact"], "2/3");
    assert_eq!(v["candidates"][2]["exact"], "1/3");
}

#[test]
fn urn_bad_fixture_path_is_an_error_record() {
    let out = doomsday(&["urn", "--ensemble", "/nonexistent/urns.txt"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(v["error"]["kind"], "io");
}

#[test]
fn urn_scan_scales_inversely_with_mean() {
    let text = stdout(&doomsday(&["urn", "--scan", "--total", "1e6", "--rank", "20"]));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 49);
    for row in &rows {
        let mu: u64 = row[0].parse().unwrap();
        if mu < 20 {
            assert_eq!(row[2], "0/1");
        } else {
            assert_eq!(row[2], format!("1/{mu}"));
        }
    }
}

#[test]
fn posterior_over_n_reports_median() {
    let v = json(&["posterior", "--rank", "1e11", "--over", "N", "--points", "512"]);
    assert_eq!(v["summary"]["median"].as_f64().unwrap(), 2e11 - 1.0);
    let v = json(&["posterior", "--rank", "1", "--points", "64"]);
    assert_eq!(v["grid"][0], 0.5);
}

#[test]
fn posterior_over_b_has_half_mass_at_rank() {
    let v = json(&["posterior", "--rank", "100", "--over", "B"]);
    let grid: Vec<f64> = serde_json::from_value(v["grid"].clone()).unwrap();
    let cdf: Vec<f64> = serde_json::from_value(v["cdf"].clone()).unwrap();
    let i = grid.partition_point(|&b| b < 100.0);
    let exact = |b: f64| b / (b + 100.0);
    assert!((cdf[i] - exact(grid[i])).abs() < 1e-12);
    assert!((v["summary"]["median"].as_f64().unwrap() - 100.0).abs() < 1e-6);
}

#[test]
fn posterior_csv_carries_config_and_summary() {
    let text = stdout(&doomsday(&["posterior", "--rank", "10", "--points", "16"]));
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert!(lines.next().unwrap().starts_with("# {\"variable\":\"N\""));
    assert_eq!(lines.next(), Some("N,density"));
    assert_eq!(lines.count(), 16);
}

#[test]
fn forecast_defaults() {
    let v = json(&["forecast", "--end", "2200"]);
    let m = &v["milestones"];
    let p = m["p_extinct_by_horizon"].as_f64().unwrap();
    assert!((0.11..=0.15).contains(&p));
    assert!((m["odds_survive_vs_extinct"].as_f64().unwrap() - 7.33).abs() < 0.01);
    let h = m["fitted_hazard"].as_f64().unwrap();
    assert!((0.0012..=0.0025).contains(&h));
}

#[test]
fn forecast_exact_rank_median_year() {
    let v = json(&["forecast", "--rank-exact", "1e11"]);
    let y = v["milestones"]["median_year"].as_f64().unwrap();
    assert!((y - 2730.29).abs() < 0.05);
}

#[test]
fn forecast_custom_hazard_column() {
    let text = stdout(&doomsday(&["forecast", "--hazard", "0.002", "--end", "2100"]));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "year,p_doomsday,p_h0002,hazard_doomsday");
    let rows = csv_rows(&text);
    let last = rows.last().unwrap();
    assert_eq!(last[0], "2100");
    let p: f64 = last[2].parse().unwrap();
    assert!((p - (1.0 - 0.998f64.powi(84))).abs() < 1e-12);
}

#[test]
fn forecast_births_axis() {
    let text = stdout(&doomsday(&["forecast", "--births-axis", "--end", "2020"]));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "births,p_doomsday,p_h0002,p_h00002");
    assert_eq!(csv_rows(&text).len(), 5);
}

#[test]
fn fermi_defaults_and_single_model() {
    let v = json(&["fermi"]);
    let models = v["models"].as_array().unwrap();
    assert_eq!(models.len(), 3);
    for m in models {
        assert!(m["report"]["m_group"].as_f64().unwrap() < 1e6);
    }
    let v = json(&["fermi", "--model", "pareto"]);
    let alpha = v["models"][0]["report"]["spec"]["alpha"].as_f64().unwrap();
    assert!((alpha - 1.048).abs() < 1e-3);
    let v = json(&["fermi", "--target-mi", "7e9", "--model", "lognormal", "--sigma", "3.7"]);
    let frac = v["models"][0]["report"]["frac_exceeding"].as_f64().unwrap();
    assert!((frac / 1e-4 - 1.0).abs() < 0.1);
}

#[test]
fn fermi_csv_has_curves_per_model() {
    let text = stdout(&doomsday(&["fermi", "--points", "32"]));
    assert_eq!(text.lines().filter(|l| l.starts_with("# report: ")).count(), 3);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 96);
    assert_eq!(rows[0][0], "pareto");
    assert_eq!(rows[95][0], "bimodal");
}

#[test]
fn medians_bundled_and_between() {
    let v = json(&["medians", "--between", "5.4e6", "1.92e8"]);
    assert_eq!(v["groups"], 233);
    let central = v["neutrality"]["bins"][1].as_f64().unwrap();
    assert!((central - 0.48).abs() < 0.05);
    let between = v["between"]["value"].as_f64().unwrap();
    assert!((between - 0.483).abs() < 1e-3);
}

#[test]
fn medians_custom_table_and_output_file() {
    let mut table = tempfile::NamedTempFile::new().unwrap();
    writeln!(table, "name,population\nA,1\nB,1\nC,98").unwrap();
    let out_dir = tempfile::tempdir().unwrap();
    let out_path = out_dir.path().join("report.csv");
    let path = table.path().to_str().unwrap();
    let status = doomsday(&["medians", "--table", path, "--output", out_path.to_str().unwrap()]);
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    let text = std::fs::read_to_string(out_path).unwrap();
    assert!(text.contains("m_group,1,\n"));
    assert!(text.contains("m_individual,98,\n"));
    assert!(text.contains("share_between_medians,0.98,49/50\n"));
}

#[test]
fn malformed_table_reports_line() {
    let mut table = tempfile::NamedTempFile::new().unwrap();
    writeln!(table, "name,population\nA,1\nB,many").unwrap();
    let out = doomsday(&["medians", "--table", table.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(v["error"]["kind"], "parse");
    assert!(v["error"]["message"].as_str().unwrap().starts_with("line 3:"));
}

#[test]
fn runs_are_byte_identical() {
    let args = ["urn", "--trials", "100000", "--seed", "9"];
    assert_eq!(doomsday(&args).stdout, doomsday(&args).stdout);
    let args = ["forecast", "--end", "2050"];
    assert_eq!(doomsday(&args).stdout, doomsday(&args).stdout);
}

#[test]
fn usage_errors_exit_two() {
    let out = doomsday(&["posterior", "--over", "Q"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(v["error"]["kind"], "usage");
}
