//! Tail payoff expectations along a shifted Fourier contour, and AVaR.
//!
//! For a contour `z = t + iq`,
//!
//! ```text
//! E[(X-k)⁺] = (1/2π) ∫_{Im z = +q} -e^{izk + Ψ(-z)} / z² dz,   0 < q < λ₊
//! E[(X-k)⁻] = (1/2π) ∫_{Im z = -q}  e^{izk + Ψ(-z)} / z² dz,   0 < q < λ₋
//! ```
//!
//! with `(x)⁻ = min(x, 0)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GtsError, Result};
use crate::model::{cumulants, CharExponent, GtsParams};
use crate::risk::quantile::var;
use crate::risk::{RiskReport, Side};
use crate::spectral::grid::FourierGrid;
use crate::spectral::newton_cotes::{integrate, Q};
use crate::spectral::{DensityTable, Inverter};

/// Integrand magnitude at which the contour is truncated.
pub const CONTOUR_TOL: f64 = 1e-14;
/// Upper bound on the contour half-width.
pub const MAX_HALF_WIDTH: f64 = 1e5;
/// Frequency step of the payoff reconstruction behind ER(k, q).
pub const ER_STEP: f64 = 0.01;
/// Phase step bound between contour nodes, in radians.
const MAX_CONTOUR_PHASE: f64 = 0.25;
/// Nodes per unit of offset near the double pole at the origin.
const POLE_RESOLUTION: f64 = 32.0;
const MAX_CONTOUR_NODES: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Payoff {
    Call,
    Put,
}

impl Payoff {
    /// Sign of the contour's imaginary part.
    fn contour_sign(self) -> f64 {
        match self {
            Payoff::Call => 1.0,
            Payoff::Put => -1.0,
        }
    }
}

/// Contour integrand of one payoff for fixed `(k, q)`.
struct ContourIntegrand<'a> {
    ce: &'a CharExponent,
    k: f64,
    im: f64,
    sign: f64,
}

impl ContourIntegrand<'_> {
    fn eval(&self, t: f64) -> Result<Complex64> {
        let z = Complex64::new(t, self.im);
        let e = Complex64::i() * z * self.k + self.ce.eval(-z)?;
        Ok(-self.sign * e.exp() / (z * z))
    }

    fn half_width(&self) -> Result<f64> {
        let mut r: f64 = 1.0;
        loop {
            if self.eval(r)?.norm().max(self.eval(-r)?.norm()) < CONTOUR_TOL {
                return Ok(r);
            }
            r *= 2.0;
            if r > MAX_HALF_WIDTH {
                return Err(GtsError::DivergentContour(format!(
                    "integrand above {CONTOUR_TOL:e} at |t| = {MAX_HALF_WIDTH:e} (q = {})",
                    self.im
                )));
            }
        }
    }
}

fn check_offset(params: &GtsParams, q: f64, payoff: Payoff) -> Result<()> {
    let limit = match payoff {
        Payoff::Call => params.lambda_plus,
        Payoff::Put => params.lambda_minus,
    };
    if !(q > 0.0 && q < limit) {
        return Err(GtsError::DivergentContour(format!(
            "offset {q} outside (0, {limit}) for {payoff:?}"
        )));
    }
    Ok(())
}

/// `E[(X-k)⁺]` for `Call` or `E[(X-k)⁻]` for `Put` by contour integration at offset `q > 0`.
pub fn tail_payoff_fourier(params: &GtsParams, k: f64, q: f64, payoff: Payoff) -> Result<f64> {
    check_offset(params, q, payoff)?;
    let ce = CharExponent::new(params)?;
    let f = ContourIntegrand {
        ce: &ce,
        k,
        im: payoff.contour_sign() * q,
        sign: payoff.contour_sign(),
    };
    let r = f.half_width()?;
    let h = (q / POLE_RESOLUTION).min(MAX_CONTOUR_PHASE / k.abs().max(1.0));
    let panels = (2.0 * r / h / Q as f64).ceil() as usize;
    let nodes = panels * Q + 1;
    if nodes > MAX_CONTOUR_NODES {
        return Err(GtsError::DivergentContour(format!(
            "contour needs {nodes} nodes (q = {q}, k = {k})"
        )));
    }
    let h = 2.0 * r / (panels * Q) as f64;
    let values = (0..nodes)
        .into_par_iter()
        .map(|i| f.eval(-r + i as f64 * h).map(|v| v.re))
        .collect::<Result<Vec<f64>>>()?;
    let total = integrate(&values, h)? / (2.0 * PI);
    if !total.is_finite() {
        return Err(GtsError::DivergentContour(format!("non-finite result at q = {q}")));
    }
    Ok(total)
}

/// Result of the ER(k, q) search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QChoice {
    /// Offset in the payoff-reconstruction variable (negative for calls).
    pub q: f64,
    pub er: f64,
}

impl QChoice {
    /// Offset of the pricing contour, `|q|`.
    pub fn contour_offset(&self) -> f64 {
        self.q.abs()
    }
}

/// Default candidate offsets: 40 log-spaced magnitudes in [1e-3, 0.5], both signs.
pub fn default_q_grid() -> Vec<f64> {
    let (lo, hi) = (1e-3_f64.ln(), 0.5_f64.ln());
    let mags: Vec<f64> = (0..40).map(|i| (lo + (hi - lo) * i as f64 / 39.0).exp()).collect();
    mags.iter().map(|m| -m).chain(mags.iter().copied()).collect()
}

/// Half-range `M` of the reconstruction points: `|κ₁| + 5σ`.
pub fn reconstruction_range(params: &GtsParams) -> Result<f64> {
    let c = cumulants(params, 2)?;
    Ok(c.get(1).abs() + 5.0 * c.get(2).sqrt())
}

/// ER(k, q): RMS gap between the payoff and its inverse-Fourier reconstruction
/// along `Im y = q` over equally spaced points in `[-M, M)`.
///
/// The frequency range is the truncation range of the pricing contour at
/// offset `|q|`. Returns `None` when that contour is not admissible.
pub fn payoff_error(params: &GtsParams, k: f64, q: f64, payoff: Payoff) -> Result<Option<f64>> {
    if q == 0.0 || check_offset(params, q.abs(), payoff).is_err() {
        return Ok(None);
    }
    let ce = CharExponent::new(params)?;
    let f = ContourIntegrand {
        ce: &ce,
        k,
        im: payoff.contour_sign() * q.abs(),
        sign: payoff.contour_sign(),
    };
    let r = match f.half_width() {
        Ok(r) => r,
        Err(GtsError::DivergentContour(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let big_m = reconstruction_range(params)?;
    let m_target = (2.0 * r / ER_STEP).ceil() as usize;
    let grid = FourierGrid::new(2.0 * r, m_target, 0.0, 2.0 * big_m)?;
    let inv = Inverter::new(&grid);
    // Payoff transforms: call -e^{-iyk}/y² (Im y < 0), put e^{-iyk}/y² (Im y > 0).
    let g: Vec<Complex64> = (0..=grid.m)
        .map(|node| {
            let y = Complex64::new(grid.y(node), q);
            -payoff.contour_sign() * (-Complex64::i() * y * k).exp() / (y * y)
        })
        .collect();
    let rec = inv.invert(&g);
    let mut acc = 0.0;
    for (idx, v) in rec.iter().enumerate() {
        let x = grid.x(idx);
        let approx = v.re * (-q * x).exp();
        let exact = match payoff {
            Payoff::Call => (x - k).max(0.0),
            Payoff::Put => (x - k).min(0.0),
        };
        acc += (exact - approx).powi(2);
    }
    let er = (acc / rec.len() as f64).sqrt();
    Ok(er.is_finite().then_some(er))
}

/// Golden-section iterations used to polish the best grid candidate.
const REFINE_ITERS: usize = 12;

/// Minimizer of ER(k, q): the best grid candidate, refined by golden-section
/// search between its same-sign neighbours on the grid.
pub fn optimize_q(params: &GtsParams, k: f64, q_grid: &[f64], payoff: Payoff) -> Result<QChoice> {
    let scored = q_grid
        .par_iter()
        .map(|&q| payoff_error(params, k, q, payoff).map(|er| er.map(|er| QChoice { q, er })))
        .collect::<Result<Vec<Option<QChoice>>>>()?;
    let best = scored
        .into_iter()
        .flatten()
        .min_by(|a, b| a.er.total_cmp(&b.er))
        .ok_or_else(|| GtsError::DivergentContour(format!("no admissible offset for {payoff:?}")))?;
    let sign = best.q.signum();
    let mag = best.q.abs();
    let mut lo = mag;
    let mut hi = mag;
    for q in q_grid.iter().filter(|q| q.signum() == sign).map(|q| q.abs()) {
        if q < mag && (lo == mag || q > lo) {
            lo = q;
        }
        if q > mag && (hi == mag || q < hi) {
            hi = q;
        }
    }
    if lo == hi {
        return Ok(best);
    }
    let er = |m: f64| -> Result<f64> { Ok(payoff_error(params, k, sign * m, payoff)?.unwrap_or(f64::INFINITY)) };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (er(c)?, er(d)?);
    for _ in 0..REFINE_ITERS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = er(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = er(d)?;
        }
    }
    let (m, e) = if fc < fd { (c, fc) } else { (d, fd) };
    Ok(if e < best.er {
        QChoice { q: sign * m, er: e }
    } else {
        best
    })
}

/// VaR and AVaR for one parameter set, with the contour offsets chosen once.
#[derive(Debug, Clone)]
pub struct RiskEngine<'a> {
    pub table: &'a DensityTable,
    pub call: QChoice,
    pub put: QChoice,
}

impl<'a> RiskEngine<'a> {
    /// Picks the offsets by ER minimization at `k = κ₁` over `q_grid`.
    pub fn new(table: &'a DensityTable, q_grid: &[f64]) -> Result<Self> {
        let params = &table.params;
        let k = cumulants(params, 1)?.get(1);
        Ok(Self {
            table,
            call: optimize_q(params, k, q_grid, Payoff::Call)?,
            put: optimize_q(params, k, q_grid, Payoff::Put)?,
        })
    }

    pub fn with_default_grid(table: &'a DensityTable) -> Result<Self> {
        Self::new(table, &default_q_grid())
    }

    /// VaR at quantile level `level` and the matching AVaR on `side`.
    pub fn report(&self, level: f64, side: Side) -> Result<RiskReport> {
        let params = &self.table.params;
        let v = var(self.table, level)?;
        let (avar, q_used) = match side {
            Side::LowerTail => {
                let q = self.put.contour_offset();
                let e = tail_payoff_fourier(params, v, q, Payoff::Put)?;
                (v + e / level, q)
            }
            Side::UpperTail => {
                let q = self.call.contour_offset();
                let e = tail_payoff_fourier(params, v, q, Payoff::Call)?;
                (v + e / (1.0 - level), q)
            }
        };
        Ok(RiskReport {
            level,
            side,
            var: v,
            avar,
            empirical_var: None,
            empirical_avar: None,
            q_used,
        })
    }
}

/// AVaR with offsets chosen by [`default_q_grid`].
pub fn avar(table: &DensityTable, level: f64, side: Side) -> Result<RiskReport> {
    RiskEngine::with_default_grid(table)?.report(level, side)
}
