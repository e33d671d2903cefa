//! Order-statistic estimators of VaR and AVaR.

use crate::error::{GtsError, Result};
use crate::risk::Side;

fn check(sample: &[f64], alpha: f64) -> Result<()> {
    if sample.is_empty() {
        return Err(GtsError::EmptySample);
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GtsError::InvalidArgument(format!("level {alpha} outside (0, 1)")));
    }
    Ok(())
}

/// `⌈nα⌉`, clamped to `1..=n`. A relative slack absorbs products like `100·0.07`.
fn rank(n: usize, alpha: f64) -> usize {
    let t = n as f64 * alpha;
    ((t - 1e-9 * t.max(1.0)).ceil() as usize).clamp(1, n)
}

fn sorted(sample: &[f64]) -> Vec<f64> {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `x_(⌈nα⌉)` from the ascending order statistics.
pub fn empirical_var(sample: &[f64], alpha: f64) -> Result<f64> {
    check(sample, alpha)?;
    let v = sorted(sample);
    Ok(v[rank(v.len(), alpha) - 1])
}

/// Average of the order statistics beyond `x_(⌈nα⌉)` with a fractional weight on it.
///
/// `UpperTail` averages the right tail of mass `1 - α`; `LowerTail` averages
/// the left tail of mass `α`.
pub fn empirical_avar(sample: &[f64], alpha: f64, side: Side) -> Result<f64> {
    check(sample, alpha)?;
    let v = sorted(sample);
    let n = v.len();
    let nf = n as f64;
    let r = rank(n, alpha);
    let pivot = v[r - 1];
    Ok(match side {
        Side::UpperTail => {
            let tail: f64 = v[r..].iter().sum();
            (tail / nf + (r as f64 / nf - alpha) * pivot) / (1.0 - alpha)
        }
        Side::LowerTail => {
            let tail: f64 = v[..r - 1].iter().sum();
            (tail / nf + (alpha - (r - 1) as f64 / nf) * pivot) / alpha
        }
    })
}
