//! Maximum likelihood fitting by damped Newton–Raphson.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GtsError, Result};
use crate::linalg::{eigen_sym, solve_sym, SymMatrix7, DIM};
use crate::model::GtsParams;
use crate::special::gamma_fn;
use crate::spectral::density::{csv_err, fmt17, HESS_LEN};
use crate::spectral::{
    choose_grid_covering, density_table, hess_index, DensityTable, DerivOrder, FourierGrid, DEFAULT_COVERAGE, TAIL_TOL,
};

/// Floor applied to interpolated densities before taking logs.
pub const DENSITY_FLOOR: f64 = 1e-300;
/// Distance kept from every parameter bound during line search.
pub const BOUND_MARGIN: f64 = 1e-8;
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Tolerance on the Euclidean norm of the score.
    pub grad_tol: f64,
    /// Maximum number of step halvings per iteration.
    pub step_damping: usize,
    pub grid_m: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            grad_tol: 1e-6,
            step_damping: 50,
            grid_m: 8192,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || self.step_damping == 0 || self.grid_m == 0 {
            return Err(GtsError::InvalidArgument(
                "max_iter, step_damping and grid_m must be positive".into(),
            ));
        }
        if !(self.grad_tol > 0.0) {
            return Err(GtsError::InvalidArgument(format!(
                "grad_tol must be positive, got {}",
                self.grad_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub params: GtsParams,
    pub log_ml: f64,
    pub grad_norm: f64,
    pub max_eigenvalue: f64,
    /// Step fraction taken from this point, `None` on the last row.
    pub damping: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitTrace {
    pub rows: Vec<TraceRow>,
}

pub const TRACE_COLUMNS: [&str; 11] = [
    "iteration",
    "mu",
    "beta_plus",
    "beta_minus",
    "alpha_plus",
    "alpha_minus",
    "lambda_plus",
    "lambda_minus",
    "log_ml",
    "grad_norm",
    "max_eigenvalue",
];

impl FitTrace {
    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TRACE_COLUMNS).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![r.iteration.to_string()];
            rec.extend(r.params.to_array().iter().map(|v| fmt17(*v)));
            rec.extend([fmt17(r.log_ml), fmt17(r.grad_norm), fmt17(r.max_eigenvalue)]);
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitStatus {
    Converged,
    MaxIter,
    /// No step fraction improved the likelihood.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: GtsParams,
    pub trace: FitTrace,
    pub status: FitStatus,
    pub grid: FourierGrid,
}

/// A fit that stopped on an error, with the iterations completed so far.
#[derive(Debug, Clone, PartialEq)]
pub struct FitFailure {
    pub error: GtsError,
    pub trace: FitTrace,
}

impl std::fmt::Display for FitFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} after {} iterations", self.error, self.trace.rows.len())
    }
}

impl std::error::Error for FitFailure {}

/// Log-likelihood with optional score and observed Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub loglik: f64,
    pub score: Option<[f64; DIM]>,
    pub hessian: Option<SymMatrix7>,
}

#[derive(Clone, Copy)]
struct Partial {
    ll: f64,
    g: [f64; DIM],
    h: [f64; HESS_LEN],
}

impl Partial {
    fn zero() -> Self {
        Self {
            ll: 0.0,
            g: [0.0; DIM],
            h: [0.0; HESS_LEN],
        }
    }

    fn add(&mut self, o: &Partial) {
        self.ll += o.ll;
        for (a, b) in self.g.iter_mut().zip(&o.g) {
            *a += b;
        }
        for (a, b) in self.h.iter_mut().zip(&o.h) {
            *a += b;
        }
    }
}

fn check_sample(returns: &[f64]) -> Result<()> {
    if returns.is_empty() {
        return Err(GtsError::EmptySample);
    }
    if let Some(x) = returns.iter().find(|x| !x.is_finite()) {
        return Err(GtsError::InvalidArgument(format!("non-finite observation {x}")));
    }
    Ok(())
}

fn sample_range(returns: &[f64]) -> (f64, f64) {
    returns.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(*x), hi.max(*x))
    })
}

/// Sums over a tabulated density. Chunks are reduced in a fixed order so the
/// result does not depend on the thread count.
pub fn evaluate_table(returns: &[f64], table: &DensityTable, order: DerivOrder) -> Result<Evaluation> {
    check_sample(returns)?;
    let want_g = order != DerivOrder::None;
    let want_h = order == DerivOrder::Second;
    if (want_g && table.df.len() != DIM) || (want_h && table.d2f.len() != HESS_LEN) {
        return Err(GtsError::InvalidArgument(
            "density table lacks the requested derivatives".into(),
        ));
    }
    let partials: Vec<Partial> = returns
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<Partial> {
            let mut acc = Partial::zero();
            for &x in chunk {
                let st = table.stencil(x)?;
                let f = st.apply(&table.f).max(DENSITY_FLOOR);
                acc.ll += f.ln();
                if !want_g {
                    continue;
                }
                let r: [f64; DIM] = std::array::from_fn(|j| st.apply(&table.df[j]) / f);
                for j in 0..DIM {
                    acc.g[j] += r[j];
                }
                if want_h {
                    for k in 0..DIM {
                        for j in k..DIM {
                            let idx = hess_index(k, j);
                            acc.h[idx] += st.apply(&table.d2f[idx]) / f - r[k] * r[j];
                        }
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = Partial::zero();
    for p in &partials {
        total.add(p);
    }
    let hessian = want_h.then(|| {
        SymMatrix7::new(std::array::from_fn(|k| {
            std::array::from_fn(|j| total.h[hess_index(k, j)])
        }))
    });
    Ok(Evaluation {
        loglik: total.ll,
        score: want_g.then_some(total.g),
        hessian,
    })
}

/// Evaluates on a fixed grid.
pub fn evaluate_on(returns: &[f64], params: &GtsParams, grid: &FourierGrid, order: DerivOrder) -> Result<Evaluation> {
    check_sample(returns)?;
    let table = density_table(params, grid, order)?;
    evaluate_table(returns, &table, order)
}

/// Grid sized for `params` whose span also covers the sample.
pub fn grid_for(returns: &[f64], params: &GtsParams, grid_m: usize, coverage: f64) -> Result<FourierGrid> {
    check_sample(returns)?;
    choose_grid_covering(params, grid_m, coverage, Some(sample_range(returns)))
}

fn evaluate(returns: &[f64], params: &GtsParams, grid_m: usize, order: DerivOrder) -> Result<Evaluation> {
    params.validate_with_margin(0.0)?;
    let grid = grid_for(returns, params, grid_m, DEFAULT_COVERAGE)?;
    match evaluate_on(returns, params, &grid, order) {
        Err(GtsError::OutOfSpan { .. }) => {
            let wide = grid_for(returns, params, grid_m, 2.0 * DEFAULT_COVERAGE)?;
            evaluate_on(returns, params, &wide, order)
        }
        other => other,
    }
}

/// `Σ log f(x_j)` with `f` interpolated from a density table.
pub fn loglik(returns: &[f64], params: &GtsParams, grid_m: usize) -> Result<f64> {
    Ok(evaluate(returns, params, grid_m, DerivOrder::None)?.loglik)
}

/// `Σ (∂f/∂V_j) / f` at the observations.
pub fn score(returns: &[f64], params: &GtsParams, grid_m: usize) -> Result<[f64; DIM]> {
    evaluate(returns, params, grid_m, DerivOrder::First)?
        .score
        .ok_or_else(|| GtsError::InvalidArgument("score unavailable".into()))
}

/// `Σ [(∂²f/∂V_k∂V_j)/f − (∂f/∂V_k)(∂f/∂V_j)/f²]` at the observations.
pub fn observed_hessian(returns: &[f64], params: &GtsParams, grid_m: usize) -> Result<SymMatrix7> {
    evaluate(returns, params, grid_m, DerivOrder::Second)?
        .hessian
        .ok_or_else(|| GtsError::InvalidArgument("hessian unavailable".into()))
}

/// Starting point: `μ` at the sample mean, `β± = 1/2`, `λ± = 2/std` and
/// `α±` matching the sample variance.
pub fn heuristic_init(returns: &[f64]) -> Result<GtsParams> {
    check_sample(returns)?;
    if returns.len() < 2 {
        return Err(GtsError::InvalidArgument("need at least two observations".into()));
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) {
        return Err(GtsError::Degenerate("zero variance".into()));
    }
    let lambda = 2.0 / var.sqrt();
    let alpha = var * lambda.powf(1.5) / (2.0 * gamma_fn(1.5)?);
    Ok(GtsParams::new(mean, 0.5, 0.5, alpha, alpha, lambda, lambda))
}

fn norm(v: &[f64; DIM]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Whether `grid` still resolves the law of `params`.
fn grid_adequate(params: &GtsParams, grid: &FourierGrid) -> Result<bool> {
    let ce = crate::model::CharExponent::new(params)?;
    let h = 0.5 * grid.a;
    for y in [h, -h] {
        if ce.eval(num_complex::Complex64::new(y, 0.0))?.re.exp() >= TAIL_TOL {
            return Ok(false);
        }
    }
    let c = crate::model::cumulants(params, 2)?;
    let sd = c.get(2).sqrt();
    let reach = 0.25 * DEFAULT_COVERAGE * sd;
    Ok(c.get(1) - reach >= grid.x_min() && c.get(1) + reach <= grid.x_max())
}

/// Floor on the per-parameter scale used by the step-length control.
const SCALE_FLOOR: f64 = 0.1;
/// Initial and largest trust radius in scaled coordinates.
const INITIAL_RADIUS: f64 = 0.25;
const MAX_RADIUS: f64 = 4.0;

fn dot(a: &[f64; DIM], b: &[f64; DIM]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Step maximizing the quadratic model within `radius`, measured in
/// coordinates scaled by `max(|V_i|, 0.1)`.
///
/// The plain Newton step is used whenever `h` is negative definite and the
/// step fits; otherwise `h` is shifted by `-τI` (in scaled coordinates) with
/// `τ` found by bisection so the step lands on the boundary.
fn model_step(v: &[f64; DIM], g: &[f64; DIM], h: &SymMatrix7, radius: f64) -> Result<[f64; DIM]> {
    let s: [f64; DIM] = std::array::from_fn(|i| v[i].abs().max(SCALE_FLOOR));
    let gs: [f64; DIM] = std::array::from_fn(|i| g[i] * s[i]);
    let hs = SymMatrix7::new(std::array::from_fn(|i| {
        std::array::from_fn(|j| h.get(i, j) * s[i] * s[j])
    }));
    let eig = eigen_sym(&hs)?;
    let unscale = |d: [f64; DIM]| -> [f64; DIM] { std::array::from_fn(|i| d[i] * s[i]) };
    let step = |tau: f64| -> Option<[f64; DIM]> {
        let d = solve_sym(&hs.shifted(-tau), &gs).ok()?.map(|x| -x);
        (d.iter().all(|x| x.is_finite()) && dot(&d, &gs) > 0.0).then_some(d)
    };
    let len = |d: &[f64; DIM]| dot(d, d).sqrt();
    let scale = hs.max_abs().max(f64::MIN_POSITIVE);
    if eig[0] < -1e-12 * scale {
        if let Some(d) = step(0.0) {
            if len(&d) <= radius {
                return Ok(unscale(d));
            }
        }
    }
    let gnorm = len(&gs);
    if gnorm == 0.0 {
        return Ok([0.0; DIM]);
    }
    // ‖d(τ)‖ decreases on τ > max(λ_max, 0); bracket the boundary.
    let mut lo = eig[0].max(0.0) + 1e-12 * scale;
    let mut hi = lo + gnorm / radius + scale;
    let mut best = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match step(mid) {
            Some(d) if len(&d) > radius => lo = mid,
            Some(d) => {
                best = Some(d);
                hi = mid;
            }
            None => lo = mid,
        }
        if hi - lo <= 1e-10 * hi {
            break;
        }
    }
    let d = match best {
        Some(d) => d,
        None => gs.map(|x| x * radius / gnorm),
    };
    Ok(unscale(d))
}

/// Maximizes the log-likelihood from `init`.
///
/// Each row of the trace records the point reached at the start of an
/// iteration; the first row is `init`.
pub fn fit(returns: &[f64], init: &GtsParams, opts: &FitOptions) -> std::result::Result<FitResult, FitFailure> {
    fit_with_progress(returns, init, opts, |_| {})
}

/// As [`fit`], calling `progress` with each trace row as it is recorded.
pub fn fit_with_progress(
    returns: &[f64],
    init: &GtsParams,
    opts: &FitOptions,
    mut progress: impl FnMut(&TraceRow),
) -> std::result::Result<FitResult, FitFailure> {
    let mut trace = FitTrace::default();
    let fail = |error: GtsError, trace: &FitTrace| FitFailure {
        error,
        trace: trace.clone(),
    };
    if let Err(e) = opts
        .validate()
        .and_then(|_| check_sample(returns))
        .and_then(|_| init.validate_with_margin(0.0))
    {
        return Err(fail(e, &trace));
    }

    let mut coverage = DEFAULT_COVERAGE;
    let mut widened = false;
    let mut grid = grid_for(returns, init, opts.grid_m, coverage).map_err(|e| fail(e, &trace))?;
    let mut params = *init;
    let mut radius = INITIAL_RADIUS;

    for iteration in 1..=opts.max_iter {
        if !grid_adequate(&params, &grid).map_err(|e| fail(e, &trace))? {
            grid = grid_for(returns, &params, opts.grid_m, coverage).map_err(|e| fail(e, &trace))?;
        }
        let mut regridded = false;
        let eval = loop {
            match evaluate_on(returns, &params, &grid, DerivOrder::Second) {
                Err(GtsError::OutOfSpan { .. }) if !widened => {
                    widened = true;
                    coverage *= 2.0;
                    grid = grid_for(returns, &params, opts.grid_m, coverage).map_err(|e| fail(e, &trace))?;
                }
                Err(GtsError::GridTooCoarse { .. }) if !regridded => {
                    regridded = true;
                    grid = grid_for(returns, &params, opts.grid_m, coverage).map_err(|e| fail(e, &trace))?;
                }
                other => break other.map_err(|e| fail(e, &trace))?,
            }
        };
        let ll = eval.loglik;
        let g = eval.score.expect("second-order evaluation");
        let h = eval.hessian.expect("second-order evaluation");
        if !ll.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(fail(GtsError::NonFinite { iteration }, &trace));
        }
        let eig = eigen_sym(&h).map_err(|e| fail(e, &trace))?;
        let max_eig = eig[0];
        let grad_norm = norm(&g);
        trace.rows.push(TraceRow {
            iteration,
            params,
            log_ml: ll,
            grad_norm,
            max_eigenvalue: max_eig,
            damping: None,
        });
        progress(trace.rows.last().expect("row pushed"));
        if grad_norm <= opts.grad_tol && max_eig <= 0.0 {
            return Ok(FitResult {
                params,
                trace,
                status: FitStatus::Converged,
                grid,
            });
        }
        if iteration == opts.max_iter {
            break;
        }

        let v = params.to_array();
        let d = model_step(&v, &g, &h, radius).map_err(|e| fail(e, &trace))?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.step_damping {
            let cand = GtsParams::from_array(std::array::from_fn(|i| v[i] + t * d[i]));
            if cand.validate_with_margin(BOUND_MARGIN).is_ok() {
                match evaluate_on(returns, &cand, &grid, DerivOrder::None) {
                    Ok(e) if e.loglik.is_finite() && e.loglik >= ll => {
                        accepted = Some(cand);
                        break;
                    }
                    Ok(_) | Err(GtsError::GridTooCoarse { .. }) | Err(GtsError::OutOfSpan { .. }) => {}
                    Err(e) => return Err(fail(e, &trace)),
                }
            }
            t *= 0.5;
        }
        radius = if t == 1.0 {
            (2.0 * radius).min(MAX_RADIUS)
        } else {
            (t * radius).max(1e-6)
        };
        match accepted {
            Some(next) => {
                trace.rows.last_mut().expect("row pushed").damping = Some(t);
                params = next;
            }
            None => {
                return Ok(FitResult {
                    params,
                    trace,
                    status: FitStatus::Stalled,
                    grid,
                })
            }
        }
    }
    Ok(FitResult {
        params,
        trace,
        status: FitStatus::MaxIter,
        grid,
    })
}
