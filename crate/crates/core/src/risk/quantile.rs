//! Quantiles of a density table by quartic Taylor inversion of the CDF.

use crate::error::{GtsError, Result};
use crate::spectral::DensityTable;

fn poly(b: &[f64; 5], y: f64) -> f64 {
    (((b[4] * y + b[3]) * y + b[2]) * y + b[1]) * y + b[0]
}

fn dpoly(b: &[f64; 5], y: f64) -> f64 {
    ((4.0 * b[4] * y + 3.0 * b[3]) * y + 2.0 * b[2]) * y + b[1]
}

/// Bisection-guarded Newton iteration on a bracket with a sign change.
fn refine(b: &[f64; 5], mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = poly(b, lo);
    if flo == 0.0 {
        return lo;
    }
    if poly(b, hi) == 0.0 {
        return hi;
    }
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fy = poly(b, y);
        if fy.abs() <= tol {
            return y;
        }
        if (fy < 0.0) == (flo < 0.0) {
            lo = y;
            flo = fy;
        } else {
            hi = y;
        }
        let d = dpoly(b, y);
        let newton = y - fy / d;
        y = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * 4.0 {
            return y;
        }
    }
    y
}

/// Root in `[0, 1]` of `b0 + b1 y + b2 y² + b3 y³ + b4 y⁴`.
///
/// Requires a sign change between the endpoints. When several roots lie in
/// the interval the one nearest `-b0/b1` is returned.
pub fn quartic_root_unit(b: [f64; 5]) -> Result<f64> {
    let f0 = poly(&b, 0.0);
    let f1 = poly(&b, 1.0);
    if f0 * f1 > 0.0 || !(f0.is_finite() && f1.is_finite()) {
        return Err(GtsError::NoBracket);
    }
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tol = 1e-13 * scale;
    const SCAN: usize = 64;
    let mut roots = Vec::new();
    let mut prev = f0;
    for i in 1..=SCAN {
        let hi = i as f64 / SCAN as f64;
        let lo = (i - 1) as f64 / SCAN as f64;
        let cur = poly(&b, hi);
        if prev == 0.0 {
            roots.push(lo);
        } else if prev * cur < 0.0 {
            roots.push(refine(&b, lo, hi, tol));
        }
        prev = cur;
    }
    if prev == 0.0 {
        roots.push(1.0);
    }
    let guess = if b[1] != 0.0 { -b[0] / b[1] } else { 0.5 };
    roots
        .into_iter()
        .min_by(|x, y| (x - guess).abs().total_cmp(&(y - guess).abs()))
        .ok_or(GtsError::NoBracket)
}

/// α-quantile of the tabulated law.
pub fn var(table: &DensityTable, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GtsError::InvalidArgument(format!("level {alpha} outside (0, 1)")));
    }
    let c = &table.cdf;
    let n = c.len();
    // First node with F ≥ α; the bracket is [i, i+1] with F_i < α ≤ F_{i+1}.
    let upper = c.partition_point(|v| *v < alpha);
    if upper < 3 || upper + 2 > n {
        return Err(GtsError::BracketAtEdge { alpha });
    }
    let i = upper - 1;
    let f = |d: isize| c[(i as isize + d) as usize];
    let a1 = (f(1) - f(-1)) / 2.0;
    let a2 = f(-1) - 2.0 * f(0) + f(1);
    let a3 = (-f(-2) + 2.0 * f(-1) - 2.0 * f(1) + f(2)) / 2.0;
    let a4 = f(-2) - 4.0 * f(-1) + 6.0 * f(0) - 4.0 * f(1) + f(2);
    let b = [-(alpha - f(0)), a1, a2 / 2.0, a3 / 6.0, a4 / 24.0];
    let y = match quartic_root_unit(b) {
        Ok(y) => y,
        Err(GtsError::NoBracket) => (alpha - f(0)) / (f(1) - f(0)),
        Err(e) => return Err(e),
    };
    Ok(table.x[i] + y * (table.x[i + 1] - table.x[i]))
}

/// `F(hi) - F(lo)`.
pub fn prob_interval(table: &DensityTable, lo: f64, hi: f64) -> Result<f64> {
    if lo > hi {
        return Err(GtsError::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
    }
    Ok(table.cdf_at(hi)? - table.cdf_at(lo)?)
}
