use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{Days, NaiveDate};
use gts_core::model::{cumulants, ParamsFile};
use gts_core::sampler::quantile_sample;
use gts_core::spectral::{choose_grid, density_table, DerivOrder, DEFAULT_COVERAGE};
use gts_core::GtsParams;
use tempfile::TempDir;

fn gts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gts")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_prices(path: &Path, prices: &[f64]) {
    let start = NaiveDate::from_ymd_opt(2010, 1, 4).unwrap();
    let mut text = String::from("Date,Adj Close\n");
    for (i, p) in prices.iter().enumerate() {
        text.push_str(&format!(
            "{},{p:.17e}\n",
            start.checked_add_days(Days::new(i as u64)).unwrap()
        ));
    }
    fs::write(path, text).unwrap();
}

/// Prices whose percent log returns are `returns`.
fn prices_from_returns(returns: &[f64]) -> Vec<f64> {
    let mut p = vec![100.0];
    for r in returns {
        p.push(p.last().unwrap() * (r / 100.0).exp());
    }
    p
}

fn write_params(dir: &Path, name: &str, p: GtsParams) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, ParamsFile::new(p).to_json()).unwrap();
    path
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn summary_value(rows: &[Vec<String>], stat: &str, col: usize) -> f64 {
    rows.iter().find(|r| r[0] == stat).unwrap()[col].parse().unwrap()
}

#[test]
fn stats_matches_hand_computed_values() {
    let dir = TempDir::new().unwrap();
    let r = [1.0, -2.0, 3.0, 0.0, -1.0, 2.0, -3.0, 1.0, 0.5, -0.5];
    let input = dir.path().join("prices.csv");
    write_prices(&input, &prices_from_returns(&r));
    let out = dir.path().join("out");
    let o = gts(&["stats", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let n = 10.0;
    let mean = 0.1;
    let dev: Vec<f64> = r.iter().map(|x| x - mean).collect();
    let m2 = dev.iter().map(|d| d * d).sum::<f64>() / n;
    let m3 = dev.iter().map(|d| d * d * d).sum::<f64>() / n;
    let m4 = dev.iter().map(|d| d.powi(4)).sum::<f64>() / n;
    let std = (m2 * n / (n - 1.0)).sqrt();
    let rows = read_csv(&out.join("summary.csv"));
    assert_eq!(rows[0], ["statistic", "empirical", "theoretical"]);
    assert_eq!(summary_value(&rows, "n", 1), 10.0);
    for (stat, want) in [
        ("mean", mean),
        ("std", std),
        ("cv", std / mean),
        ("skewness", m3 / m2.powf(1.5)),
        ("kurtosis", m4 / (m2 * m2)),
        ("min", -3.0),
        ("max", 3.0),
    ] {
        let got = summary_value(&rows, stat, 1);
        assert!(
            (got - want).abs() < 1e-9 * want.abs().max(1.0),
            "{stat}: {got} vs {want}"
        );
    }
    assert_eq!(read_csv(&out.join("returns.csv")).len(), 11);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn stats_theoretical_column_reproduces_moments() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("prices.csv");
    write_prices(&input, &prices_from_returns(&[0.3, -0.2, 0.1, 0.5, -0.4, 0.2]));
    let params = write_params(dir.path(), "sp.json", GtsParams::sp500());
    let out = dir.path().join("out");
    let o = gts(&["stats", "--input", s(&input), "--params", s(&params), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let rows = read_csv(&out.join("summary.csv"));
    for (stat, want) in [
        ("mean", 0.0401),
        ("std", 1.0947),
        ("skewness", -0.5796),
        ("kurtosis", 8.9232),
    ] {
        let got = summary_value(&rows, stat, 2);
        assert!((got - want).abs() < 5e-5, "{stat}: {got} vs {want}");
    }
}

#[test]
fn empty_input_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("empty.csv");
    fs::write(&input, "Date,Adj Close\n").unwrap();
    let out = dir.path().join("out");
    for cmd in ["stats", "vol", "fit"] {
        let o = gts(&[cmd, "--input", s(&input), "--out", s(&out)]);
        assert_eq!(code(&o), 2, "{cmd}");
        assert!(!out.exists(), "{cmd} left output behind");
    }
}

#[test]
fn missing_input_file_exits_2() {
    let o = gts(&["stats", "--input", "/nonexistent/prices.csv"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_params_exit_2() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("prices.csv");
    write_prices(&input, &prices_from_returns(&[0.3, -0.2, 0.1, 0.5, -0.4, 0.2]));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"units\": \"percent\", \"mu\": ").unwrap();
    let out = dir.path().join("out");
    for cmd in ["fit", "pdf", "risk", "synth"] {
        let o = gts(&[cmd, "--input", s(&input), "--params", s(&bad), "--out", s(&out)]);
        assert_eq!(code(&o), 2, "{cmd}");
    }
    let mut outside = GtsParams::sp500();
    outside.beta_plus = 1.2;
    let outside = write_params(dir.path(), "outside.json", outside);
    assert_eq!(code(&gts(&["pdf", "--params", s(&outside), "--out", s(&out)])), 2);
    assert!(!out.exists());
}

#[test]
fn fit_from_truth_converges_quickly() {
    let dir = TempDir::new().unwrap();
    let truth = GtsParams::sp500();
    let grid = choose_grid(&truth, 8192, DEFAULT_COVERAGE).unwrap();
    let table = density_table(&truth, &grid, DerivOrder::None).unwrap();
    let r = quantile_sample(&table, 4000).unwrap();
    let input = dir.path().join("prices.csv");
    write_prices(&input, &prices_from_returns(&r));
    let init = write_params(dir.path(), "init.json", truth);
    let out = dir.path().join("out");
    let o = gts(&["fit", "--input", s(&input), "--params", s(&init), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let trace = read_csv(&out.join("trace.csv"));
    assert!(trace.len() - 1 <= 4, "{} trace rows", trace.len() - 1);
    let fitted = ParamsFile::from_json(&fs::read_to_string(out.join("params.json")).unwrap()).unwrap();
    for (a, b) in fitted.to_array().iter().zip(truth.to_array()) {
        assert!(((a - b) / b).abs() < 0.05, "{a} vs {b}");
    }
}

#[test]
fn fit_without_convergence_exits_3_and_keeps_trace() {
    let dir = TempDir::new().unwrap();
    let truth = GtsParams::sp500();
    let grid = choose_grid(&truth, 8192, DEFAULT_COVERAGE).unwrap();
    let table = density_table(&truth, &grid, DerivOrder::None).unwrap();
    let input = dir.path().join("prices.csv");
    write_prices(&input, &prices_from_returns(&quantile_sample(&table, 600).unwrap()));
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"fit": {"max_iter": 1}}"#).unwrap();
    let out = dir.path().join("out");
    let o = gts(&["fit", "--config", s(&config), "--input", s(&input), "--out", s(&out)]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_csv(&out.join("trace.csv")).len(), 2);
    assert!(!out.join("params.json").exists());
}

#[test]
fn pdf_mass_overlay_and_interval() {
    let dir = TempDir::new().unwrap();
    let p = GtsParams::bitcoin();
    let params = write_params(dir.path(), "btc.json", p);
    let out = dir.path().join("out");
    let o = gts(&["pdf", "--params", s(&params), "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let rows = read_csv(&out.join("density.csv"));
    assert_eq!(rows[0], ["x", "f", "F", "normal"]);
    let v: Vec<[f64; 4]> = rows[1..]
        .iter()
        .map(|r| [0, 1, 2, 3].map(|i| r[i].parse::<f64>().unwrap()))
        .collect();
    let h = v[1][0] - v[0][0];
    let mass: f64 = h * (v.iter().map(|r| r[1]).sum::<f64>() - 0.5 * (v[0][1] + v[v.len() - 1][1]));
    assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
    let c = cumulants(&p, 2).unwrap();
    let peak = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * c.get(2).sqrt());
    let nearest = v
        .iter()
        .min_by(|a, b| (a[0] - c.get(1)).abs().total_cmp(&(b[0] - c.get(1)).abs()))
        .unwrap();
    assert!((nearest[3] / peak - 1.0).abs() < 1e-4);

    let sp = write_params(dir.path(), "sp.json", GtsParams::sp500());
    let o = gts(&["pdf", "--params", s(&sp), "--out", s(&out)]);
    let stdout = String::from_utf8(o.stdout).unwrap();
    let line = stdout.lines().find(|l| l.starts_with("P(")).unwrap();
    let prob: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
    assert!((prob - 0.8005).abs() < 0.002, "{line}");
}

#[test]
fn risk_reproduces_lower_tail_tables() {
    let dir = TempDir::new().unwrap();
    let params = write_params(dir.path(), "sp.json", GtsParams::sp500());
    let out = dir.path().join("out");
    let o = gts(&[
        "risk",
        "--params",
        s(&params),
        "--levels",
        "0.01,0.05,0.1",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out.join("risk.csv"));
    assert_eq!(
        rows[0],
        [
            "side",
            "level_pct",
            "var_empirical",
            "var_theoretical",
            "avar_empirical",
            "avar_theoretical",
            "q"
        ]
    );
    let want = [
        ("1.0", -3.4102, -4.5264),
        ("5.0", -1.7598, -2.7915),
        ("10.0", -1.1207, -2.0955),
    ];
    for (row, (level, var, avar)) in rows[1..].iter().zip(want) {
        assert_eq!(row[0], "lower");
        assert_eq!(row[1], level);
        assert!(row[2].is_empty() && row[4].is_empty());
        let got_var: f64 = row[3].parse().unwrap();
        let got_avar: f64 = row[5].parse().unwrap();
        assert!(
            (got_var - var).abs() <= 0.005f64.max(0.005 * var.abs()),
            "VaR {level}: {got_var}"
        );
        assert!(
            (got_avar - avar).abs() <= 0.02f64.max(0.01 * avar.abs()),
            "AVaR {level}: {got_avar}"
        );
    }
}

#[test]
fn risk_rejects_levels_outside_unit_interval() {
    let dir = TempDir::new().unwrap();
    let params = write_params(dir.path(), "sp.json", GtsParams::sp500());
    let out = dir.path().join("out");
    for levels in ["0.01,1.5", "0", "1"] {
        let o = gts(&["risk", "--params", s(&params), "--levels", levels, "--out", s(&out)]);
        assert_eq!(code(&o), 2, "{levels}");
    }
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"levels": {"lower": [-0.1], "upper": []}}"#).unwrap();
    let o = gts(&["risk", "--config", s(&config), "--params", s(&params), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn vol_row_counts_flat_and_scaled_series() {
    let dir = TempDir::new().unwrap();
    let r: Vec<f64> = (0..299).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.3).collect();
    let scaled: Vec<f64> = r.iter().map(|x| 5.0 * x).collect();
    let mut means = Vec::new();
    for (name, series) in [("base", &r), ("scaled", &scaled)] {
        let input = dir.path().join(format!("{name}.csv"));
        write_prices(&input, &prices_from_returns(series));
        let out = dir.path().join(name);
        let o = gts(&["vol", "--input", s(&input), "--out", s(&out)]);
        assert_eq!(code(&o), 0);
        // 300 prices give 299 returns; each window of T + 1 returns yields one row.
        assert_eq!(read_csv(&out.join("vol_month.csv")).len() - 1, 299 - 21);
        assert_eq!(read_csv(&out.join("vol_year.csv")).len() - 1, 299 - 252);
        let rows = read_csv(&out.join("vol_month.csv"));
        let vals: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
        means.push(vals.iter().sum::<f64>() / vals.len() as f64);
    }
    assert!((means[1] / means[0] - 5.0).abs() < 1e-9);

    let flat = dir.path().join("flat.csv");
    write_prices(&flat, &[50.0; 40]);
    let out = dir.path().join("flat");
    assert_eq!(
        code(&gts(&["vol", "--input", s(&flat), "--window", "10", "--out", s(&out)])),
        0
    );
    let rows = read_csv(&out.join("vol_10d.csv"));
    assert_eq!(rows.len() - 1, 39 - 10);
    assert!(rows[1..].iter().all(|r| r[1].parse::<f64>().unwrap() == 0.0));

    let short = dir.path().join("short.csv");
    write_prices(&short, &[50.0, 51.0, 52.0]);
    assert_eq!(
        code(&gts(&[
            "vol",
            "--input",
            s(&short),
            "--out",
            s(&dir.path().join("short"))
        ])),
        2
    );
}

#[test]
fn synth_is_byte_reproducible_with_manifest() {
    let dir = TempDir::new().unwrap();
    let params = write_params(dir.path(), "btc.json", GtsParams::bitcoin());
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = gts(&[
            "synth",
            "--params",
            s(&params),
            "--seed",
            seed,
            "--samples",
            "500",
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&o), 0);
        out
    };
    let (a, b, c) = (run("a", "9"), run("b", "9"), run("c", "10"));
    for f in ["synth.csv", "returns.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_ne!(
        fs::read(a.join("synth.csv")).unwrap(),
        fs::read(c.join("synth.csv")).unwrap()
    );
    assert_eq!(read_csv(&a.join("synth.csv")).len(), 502);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "synth");
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["input_sha256"].is_null());
    assert_eq!(manifest["params_sha256"].as_str().unwrap().len(), 64);

    // The synthetic prices feed back into the pipeline.
    let stats = dir.path().join("stats");
    assert_eq!(
        code(&gts(&["stats", "--input", s(&a.join("synth.csv")), "--out", s(&stats)])),
        0
    );
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(stats.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["input_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn invalid_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"grid_m": "big"}"#).unwrap();
    assert_eq!(code(&gts(&["stats", "--config", s(&config)])), 2);
    fs::write(&config, r#"{"unknown_field": 1}"#).unwrap();
    assert_eq!(code(&gts(&["stats", "--config", s(&config)])), 2);
    assert_eq!(code(&gts(&["stats", "--window", "fortnight", "--input", "x.csv"])), 2);
}
