use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{GtsError, Result};
use crate::model::{cumulants, CharExponent, GtsParams};
use crate::spectral::newton_cotes::Q;
use num_complex::Complex64;

/// Frequency-domain truncation tolerance on |F(±a/2)|.
pub const TAIL_TOL: f64 = 1e-12;
/// Default output span in standard deviations.
pub const DEFAULT_COVERAGE: f64 = 40.0;
/// Largest phase step `x·beta_step` (radians) allowed between adjacent frequency nodes.
pub const MAX_PHASE_STEP: f64 = 0.3;
const MAX_A: f64 = 1e6;
const MAX_M: usize = 1 << 23;

/// Discretization of the inverse Fourier integral.
///
/// Frequency nodes are `y_ν = (ν - m/2)·beta_step` for `ν = 0..=m`; output
/// points are `x_k = center + (k - m/2)·gamma_step` for `k = 0..m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierGrid {
    pub a: f64,
    pub q: usize,
    pub n: usize,
    pub m: usize,
    pub beta_step: f64,
    pub gamma_step: f64,
    pub delta: f64,
    pub s: f64,
    pub center: f64,
}

impl FourierGrid {
    /// Builds a grid with frequency width `a` and output span `span` around `center`.
    ///
    /// `m` is `m_target` rounded up to a multiple of 12, raised further when
    /// needed so that the phase step between frequency nodes stays below
    /// [`MAX_PHASE_STEP`] across the span.
    pub fn new(a: f64, m_target: usize, center: f64, span: f64) -> Result<Self> {
        if m_target == 0 {
            return Err(GtsError::Grid("m_target must be positive".into()));
        }
        if !(a > 0.0 && span > 0.0 && a.is_finite() && span.is_finite() && center.is_finite()) {
            return Err(GtsError::Grid(format!(
                "non-positive or non-finite width (a = {a}, span = {span})"
            )));
        }
        let needed = (0.5 * span * a / MAX_PHASE_STEP).ceil() as usize;
        let m = m_target.max(needed).div_ceil(Q) * Q;
        if m > MAX_M {
            return Err(GtsError::Grid(format!(
                "grid would need {m} points (a = {a}, span = {span})"
            )));
        }
        let beta_step = a / m as f64;
        let gamma_step = span / m as f64;
        Ok(Self {
            a,
            q: Q,
            n: m / Q,
            m,
            beta_step,
            gamma_step,
            delta: beta_step * gamma_step / (2.0 * PI),
            s: 0.0,
            center,
        })
    }

    pub fn x(&self, k: usize) -> f64 {
        self.center + (k as f64 - 0.5 * self.m as f64) * self.gamma_step
    }

    pub fn y(&self, node: usize) -> f64 {
        (node as f64 - 0.5 * self.m as f64) * self.beta_step
    }

    pub fn x_min(&self) -> f64 {
        self.x(0)
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.m - 1)
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.m).map(|k| self.x(k)).collect()
    }
}

/// Smallest `a = 2^j` with `|cf(±a/2)| < TAIL_TOL`.
pub fn frequency_width(abs_cf: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut a: f64 = 1.0;
    loop {
        let h = 0.5 * a;
        if abs_cf(h)?.max(abs_cf(-h)?) < TAIL_TOL {
            return Ok(a);
        }
        a *= 2.0;
        if a > MAX_A {
            return Err(GtsError::Grid(format!(
                "characteristic function above {TAIL_TOL:e} beyond a = {MAX_A:e}"
            )));
        }
    }
}

/// Grid for `params` whose output covers `coverage` standard deviations around κ₁.
pub fn choose_grid(params: &GtsParams, m_target: usize, coverage: f64) -> Result<FourierGrid> {
    choose_grid_covering(params, m_target, coverage, None)
}

/// As [`choose_grid`], widening the span if needed so that `[lo, hi]` lies inside it.
pub fn choose_grid_covering(
    params: &GtsParams,
    m_target: usize,
    coverage: f64,
    sample_range: Option<(f64, f64)>,
) -> Result<FourierGrid> {
    if !(coverage > 0.0) {
        return Err(GtsError::Grid(format!("coverage must be positive, got {coverage}")));
    }
    let ce = CharExponent::new(params)?;
    let a = frequency_width(|y| Ok(ce.eval(Complex64::new(-y, 0.0))?.re.exp()))?;
    let c = cumulants(params, 2)?;
    let center = c.get(1);
    let mut span = coverage * c.get(2).sqrt();
    if let Some((lo, hi)) = sample_range {
        let reach = (hi - center).abs().max((lo - center).abs());
        span = span.max(2.0 * reach * 1.05);
    }
    FourierGrid::new(a, m_target, center, span)
}
