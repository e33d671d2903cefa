//! Price ingestion, percent log-returns, realized volatility and sample statistics.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{GtsError, Result};
use crate::spectral::density::{csv_err, fmt17};

/// Trading days per year used by the annualization factor.
pub const TRADING_DAYS: f64 = 252.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub date: String,
    pub price: String,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        Self {
            date: "Date".to_string(),
            price: "Adj Close".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    pub prices: Vec<f64>,
}

impl PriceSeries {
    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// Counts of rows removed while cleaning.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows: usize,
    pub dropped: usize,
    pub duplicates: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub dates: Vec<NaiveDate>,
    /// Percent log-returns.
    pub returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(d);
    }
    if let Ok(dt) = chrono::DateTime::parse_from_rfc3339(s) {
        return Some(dt.date_naive());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.date());
        }
    }
    None
}

/// Reads a price file from any reader. See [`load_price_csv`].
pub fn read_price_csv<R: Read>(reader: R, spec: &ColumnSpec) -> Result<(PriceSeries, LoadReport)> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| GtsError::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| GtsError::Parse {
                line: 1,
                message: format!("missing column `{name}`"),
            })
    };
    let (di, pi) = (find(&spec.date)?, find(&spec.price)?);
    let mut report = LoadReport::default();
    let mut by_date = BTreeMap::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| GtsError::Parse {
            line,
            message: e.to_string(),
        })?;
        report.rows += 1;
        let raw_date = rec.get(di).unwrap_or("");
        let date = parse_date(raw_date).ok_or_else(|| GtsError::Parse {
            line,
            message: format!("unparseable date `{raw_date}`"),
        })?;
        let price = rec.get(pi).and_then(|p| p.trim().parse::<f64>().ok());
        match price {
            Some(p) if p.is_finite() && p > 0.0 => {
                if by_date.insert(date, p).is_some() {
                    report.duplicates += 1;
                }
            }
            _ => report.dropped += 1,
        }
    }
    if by_date.is_empty() {
        return Err(GtsError::EmptySample);
    }
    let (dates, prices) = by_date.into_iter().unzip();
    Ok((PriceSeries { dates, prices }, report))
}

/// Parses, sorts by date, drops non-positive or non-numeric prices and keeps
/// the last row of each duplicated date.
pub fn load_price_csv(path: &Path, spec: &ColumnSpec) -> Result<(PriceSeries, LoadReport)> {
    read_price_csv(std::fs::File::open(path)?, spec)
}

/// `100·ln(S_j / S_{j-1})`.
pub fn log_returns(series: &PriceSeries) -> Result<ReturnSeries> {
    if series.len() < 2 {
        return Err(GtsError::InvalidArgument(format!(
            "need at least two prices, got {}",
            series.len()
        )));
    }
    let returns = series.prices.windows(2).map(|w| 100.0 * (w[1] / w[0]).ln()).collect();
    Ok(ReturnSeries {
        dates: series.dates[1..].to_vec(),
        returns,
    })
}

/// Window length in trading days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VolWindow {
    Month,
    Year,
    Days(usize),
}

impl VolWindow {
    pub fn days(self) -> usize {
        match self {
            VolWindow::Month => 21,
            VolWindow::Year => 252,
            VolWindow::Days(n) => n,
        }
    }
}

impl std::str::FromStr for VolWindow {
    type Err = GtsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "month" => Ok(VolWindow::Month),
            "year" => Ok(VolWindow::Year),
            other => match other.parse::<usize>() {
                Ok(n) if n > 0 => Ok(VolWindow::Days(n)),
                _ => Err(GtsError::InvalidArgument(format!(
                    "window must be `month`, `year` or a positive integer, got `{other}`"
                ))),
            },
        }
    }
}

/// `σ_k = sqrt((252/T) Σ_{j=0}^{T} y²_{k-j})` for every `k ≥ T`.
///
/// The sum has `T + 1` terms against the `252/T` factor.
pub fn realized_vol(returns: &ReturnSeries, window: usize) -> Result<Vec<(NaiveDate, f64)>> {
    let y = &returns.returns;
    if window == 0 || y.len() <= window {
        return Err(GtsError::InvalidArgument(format!(
            "window {window} needs more than {window} returns, got {}",
            y.len()
        )));
    }
    let factor = TRADING_DAYS / window as f64;
    let mut sum: f64 = y[..window].iter().map(|v| v * v).sum();
    let mut out = Vec::with_capacity(y.len() - window);
    for k in window..y.len() {
        sum += y[k] * y[k];
        out.push((returns.dates[k], (factor * sum.max(0.0)).sqrt()));
        sum -= y[k - window] * y[k - window];
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    /// `std / mean`, absent when the mean is zero.
    pub cv: Option<f64>,
    pub skewness: f64,
    pub kurtosis: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean, standard deviation (divisor n-1), CV, moment-ratio skewness and kurtosis.
pub fn summary_stats(sample: &[f64]) -> Result<SummaryStats> {
    let n = sample.len();
    if n < 4 {
        return Err(GtsError::InvalidArgument(format!(
            "need at least 4 observations, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in sample {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    if m2 == 0.0 {
        return Err(GtsError::Degenerate("zero variance".into()));
    }
    let std = (m2 / (nf - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    Ok(SummaryStats {
        n,
        mean,
        std,
        cv: (mean != 0.0).then(|| std / mean),
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
        min: sample.iter().copied().fold(f64::INFINITY, f64::min),
        max: sample.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// `date,value` rows with LF line endings.
pub fn write_series_csv<W: Write>(rows: &[(NaiveDate, f64)], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["date", "value"]).map_err(csv_err)?;
    for (d, v) in rows {
        w.write_record([d.format("%Y-%m-%d").to_string(), fmt17(*v)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
