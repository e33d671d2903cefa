//! Value-at-risk and average value-at-risk.

pub mod avar;
pub mod empirical;
pub mod quantile;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectral::density::csv_err;

pub use avar::{avar, default_q_grid, optimize_q, payoff_error, tail_payoff_fourier, Payoff, QChoice, RiskEngine};
pub use empirical::{empirical_avar, empirical_var};
pub use quantile::{prob_interval, quartic_root_unit, var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    LowerTail,
    UpperTail,
}

/// VaR/AVaR at one quantile level. Values are signed returns in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub level: f64,
    pub side: Side,
    pub var: f64,
    pub avar: f64,
    pub empirical_var: Option<f64>,
    pub empirical_avar: Option<f64>,
    pub q_used: f64,
}

impl RiskReport {
    /// Adds the order-statistic estimates from `sample`.
    pub fn with_empirical(mut self, sample: &[f64]) -> Result<Self> {
        self.empirical_var = Some(empirical_var(sample, self.level)?);
        self.empirical_avar = Some(empirical_avar(sample, self.level, self.side)?);
        Ok(self)
    }
}

fn fmt4(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

/// Table layout: one row per level with empirical and theoretical columns.
pub fn write_reports_csv<W: Write>(reports: &[RiskReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "side",
        "level_pct",
        "var_empirical",
        "var_theoretical",
        "avar_empirical",
        "avar_theoretical",
        "q",
    ])
    .map_err(csv_err)?;
    for r in reports {
        let side = match r.side {
            Side::LowerTail => "lower",
            Side::UpperTail => "upper",
        };
        w.write_record([
            side.to_string(),
            format!("{:.1}", 100.0 * r.level),
            fmt4(r.empirical_var),
            format!("{:.4}", r.var),
            fmt4(r.empirical_avar),
            format!("{:.4}", r.avar),
            format!("{:.4}", r.q_used),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
