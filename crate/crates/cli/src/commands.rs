use std::f64::consts::PI;
use std::path::Path;

use chrono::{Days, NaiveDate};
use gts_core::data::{
    load_price_csv, log_returns, realized_vol, summary_stats, write_series_csv, ReturnSeries, VolWindow,
};
use gts_core::mle::{fit_with_progress, heuristic_init, FitStatus, TraceRow};
use gts_core::model::{cumulants, moment_stats, ParamsFile, PARAM_NAMES};
use gts_core::risk::{prob_interval, write_reports_csv, RiskEngine, RiskReport, Side};
use gts_core::sampler::sample_inverse_cdf;
use gts_core::spectral::density::fmt17;
use gts_core::spectral::{choose_grid, density_table, DensityTable, DerivOrder, DEFAULT_COVERAGE};
use gts_core::GtsParams;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{sig6, Staged};

/// Observations below which `fit` warns that estimates are unreliable.
const MIN_FIT_SAMPLE: usize = 500;

/// Staged files plus the error that should set the exit code after they are written.
pub type CommandOutput = (Staged, Option<CliError>);

fn read_params(path: &Path) -> Result<GtsParams, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    ParamsFile::from_json(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn load_returns(cfg: &RunConfig) -> Result<ReturnSeries, CliError> {
    let path = cfg.require_input()?;
    let (series, report) =
        load_price_csv(path, &cfg.columns).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if report.dropped > 0 || report.duplicates > 0 {
        eprintln!(
            "{}: {} rows read, {} dropped, {} duplicate dates",
            path.display(),
            report.rows,
            report.dropped,
            report.duplicates
        );
    }
    Ok(log_returns(&series)?)
}

fn table_for(params: &GtsParams, cfg: &RunConfig) -> Result<DensityTable, CliError> {
    let grid = choose_grid(params, cfg.grid_m, DEFAULT_COVERAGE)?;
    Ok(density_table(params, &grid, DerivOrder::None)?)
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> gts_core::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

pub fn stats(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let returns = load_returns(cfg)?;
    let s = summary_stats(&returns.returns)?;
    let theory = match &cfg.params {
        Some(p) => Some(moment_stats(&read_params(p)?)?),
        None => None,
    };
    let rows: [(&str, Option<f64>, Option<f64>); 8] = [
        ("n", Some(s.n as f64), None),
        ("mean", Some(s.mean), theory.map(|t| t.mean)),
        ("std", Some(s.std), theory.map(|t| t.std_dev)),
        ("cv", s.cv, theory.map(|t| t.cv)),
        ("skewness", Some(s.skewness), theory.map(|t| t.skewness)),
        ("kurtosis", Some(s.kurtosis), theory.map(|t| t.kurtosis)),
        ("min", Some(s.min), None),
        ("max", Some(s.max), None),
    ];
    let cell = |v: Option<f64>, f: fn(f64) -> String| v.map(f).unwrap_or_default();
    let mut summary = String::from("statistic,empirical,theoretical\n");
    println!("{:<10} {:>14} {:>14}", "statistic", "empirical", "theoretical");
    for (name, emp, th) in rows {
        let stored = if name == "n" { s.n.to_string() } else { cell(emp, fmt17) };
        summary.push_str(&format!("{name},{stored},{}\n", cell(th, fmt17)));
        let shown = if name == "n" { s.n.to_string() } else { cell(emp, sig6) };
        println!("{name:<10} {shown:>14} {:>14}", cell(th, sig6));
    }
    let series: Vec<(NaiveDate, f64)> = returns
        .dates
        .iter()
        .copied()
        .zip(returns.returns.iter().copied())
        .collect();
    let mut staged = Staged::default();
    staged.add("summary.csv", summary.into_bytes());
    staged.add("returns.csv", csv_bytes(|b| write_series_csv(&series, b))?);
    Ok((staged, None))
}

fn print_row(row: &TraceRow) {
    let p: Vec<String> = row.params.to_array().iter().map(|v| sig6(*v)).collect();
    eprintln!(
        "iter {:>3}  logL {}  |g| {}  max eig {}  [{}]",
        row.iteration,
        sig6(row.log_ml),
        sig6(row.grad_norm),
        sig6(row.max_eigenvalue),
        p.join(", ")
    );
}

pub fn fit(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let returns = load_returns(cfg)?;
    let x = &returns.returns;
    if x.len() < MIN_FIT_SAMPLE {
        eprintln!("warning: only {} observations; estimates may be unreliable", x.len());
    }
    let init = match &cfg.params {
        Some(p) => read_params(p)?,
        None => heuristic_init(x)?,
    };
    let mut staged = Staged::default();
    match fit_with_progress(x, &init, &cfg.fit, print_row) {
        Ok(r) => {
            staged.add("trace.csv", csv_bytes(|b| r.trace.write_csv(b))?);
            for (name, v) in PARAM_NAMES.iter().zip(r.params.to_array()) {
                println!("{name:<13} {}", sig6(v));
            }
            println!("status        {:?}", r.status);
            if r.status == FitStatus::Converged {
                let mut json = ParamsFile::new(r.params).to_json();
                json.push('\n');
                staged.add("params.json", json.into_bytes());
                Ok((staged, None))
            } else {
                let reason = format!("fit did not converge ({:?}); trace written", r.status);
                Ok((staged, Some(CliError::not_converged(reason))))
            }
        }
        Err(failure) => {
            staged.add("trace.csv", csv_bytes(|b| failure.trace.write_csv(b))?);
            Ok((staged, Some(failure.error.into())))
        }
    }
}

pub fn pdf(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let params = read_params(cfg.require_params()?)?;
    let table = table_for(&params, cfg)?;
    let c = cumulants(&params, 2)?;
    let (mean, sd) = (c.get(1), c.get(2).sqrt());
    let mut out = String::from("x,f,F,normal\n");
    for k in 0..table.len() {
        let z = (table.x[k] - mean) / sd;
        let normal = (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * sd);
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt17(table.x[k]),
            fmt17(table.f[k]),
            fmt17(table.cdf[k]),
            fmt17(normal)
        ));
    }
    let [lo, hi] = cfg.interval;
    let p = prob_interval(&table, lo, hi)?;
    println!("nodes         {}", table.len());
    println!("mass          {}", sig6(table.mass));
    println!("mean          {}", sig6(mean));
    println!("std           {}", sig6(sd));
    println!("P({} < X < {})  {}", sig6(lo), sig6(hi), sig6(p));
    let mut staged = Staged::default();
    staged.add("density.csv", out.into_bytes());
    Ok((staged, None))
}

pub fn risk(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let params = read_params(cfg.require_params()?)?;
    let sample = match &cfg.input {
        Some(_) => Some(load_returns(cfg)?.returns),
        None => None,
    };
    let numeric = |e: gts_core::GtsError| CliError::numeric(e);
    let table = table_for(&params, cfg)?;
    let engine = RiskEngine::with_default_grid(&table).map_err(numeric)?;
    let levels = cfg
        .levels
        .lower
        .iter()
        .map(|l| (*l, Side::LowerTail))
        .chain(cfg.levels.upper.iter().map(|l| (*l, Side::UpperTail)));
    let mut reports: Vec<RiskReport> = Vec::new();
    for (level, side) in levels {
        let mut r = engine.report(level, side).map_err(numeric)?;
        if let Some(x) = &sample {
            r = r.with_empirical(x).map_err(numeric)?;
        }
        reports.push(r);
    }
    println!(
        "{:<6} {:>7} {:>12} {:>12} {:>12} {:>12}",
        "side", "level", "VaR", "AVaR", "emp VaR", "emp AVaR"
    );
    for r in &reports {
        let side = if r.side == Side::LowerTail { "lower" } else { "upper" };
        let opt = |v: Option<f64>| v.map(sig6).unwrap_or_default();
        println!(
            "{side:<6} {:>7} {:>12} {:>12} {:>12} {:>12}",
            sig6(r.level),
            sig6(r.var),
            sig6(r.avar),
            opt(r.empirical_var),
            opt(r.empirical_avar)
        );
    }
    let mut staged = Staged::default();
    staged.add("risk.csv", csv_bytes(|b| write_reports_csv(&reports, b))?);
    Ok((staged, None))
}

fn window_file(w: VolWindow) -> String {
    match w {
        VolWindow::Month => "vol_month.csv".to_string(),
        VolWindow::Year => "vol_year.csv".to_string(),
        VolWindow::Days(n) => format!("vol_{n}d.csv"),
    }
}

pub fn vol(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let returns = load_returns(cfg)?;
    let windows = match &cfg.window {
        Some(w) => vec![w.parse::<VolWindow>()?],
        None => vec![VolWindow::Month, VolWindow::Year],
    };
    let mut staged = Staged::default();
    for w in windows {
        let rows = realized_vol(&returns, w.days()).map_err(CliError::input)?;
        let mean = rows.iter().map(|r| r.1).sum::<f64>() / rows.len() as f64;
        println!(
            "window {:>4} days: {} rows, mean vol {}",
            w.days(),
            rows.len(),
            sig6(mean)
        );
        staged.add(&window_file(w), csv_bytes(|b| write_series_csv(&rows, b))?);
    }
    Ok((staged, None))
}

/// First date of synthetic price series.
const SYNTH_START: (i32, u32, u32) = (2000, 1, 1);
const SYNTH_START_PRICE: f64 = 100.0;

pub fn synth(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let params = read_params(cfg.require_params()?)?;
    let table = table_for(&params, cfg)?;
    let draws = sample_inverse_cdf(&table, cfg.samples, cfg.seed)?;
    let start = NaiveDate::from_ymd_opt(SYNTH_START.0, SYNTH_START.1, SYNTH_START.2).expect("valid date");
    let date = |i: usize| start.checked_add_days(Days::new(i as u64)).expect("date in range");
    let mut prices = String::from("Date,Adj Close\n");
    let mut price = SYNTH_START_PRICE;
    prices.push_str(&format!("{},{}\n", date(0), fmt17(price)));
    let mut series = Vec::with_capacity(draws.len());
    for (i, r) in draws.iter().enumerate() {
        price *= (r / 100.0).exp();
        prices.push_str(&format!("{},{}\n", date(i + 1), fmt17(price)));
        series.push((date(i + 1), *r));
    }
    println!("{} draws, seed {}", draws.len(), cfg.seed);
    let mut staged = Staged::default();
    staged.add("synth.csv", prices.into_bytes());
    staged.add("returns.csv", csv_bytes(|b| write_series_csv(&series, b))?);
    Ok((staged, None))
}
