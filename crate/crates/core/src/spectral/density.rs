//! Density, CDF and parameter-derivative tables by the two-stage FRFT scheme.
//!
//! With frequency nodes `ν = Qp + j` and outputs `k = Ql + f`,
//!
//! ```text
//! f(x_k) = (β/2π) e^{-πiδm(k-m/2)} Σ_j W_j e^{2πiδ(k-m/2)j} S_j(l, f)
//! S_j(l, f) = Σ_p G_{Qp+j} e^{-πiδmQp} e^{2πiδQ²p(l + f/Q)}
//! ```
//!
//! where `G_ν = F(y_ν) e^{i·center·y_ν}`. Each `S_j(·, f)` is an FRFT of
//! length `n` with parameter `-δQ²` and shift `f/Q`; the outer sum over the
//! 13 panel nodes is evaluated directly at each output point.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{GtsError, Result};
use crate::linalg::DIM;
use crate::model::{CharExponent, GtsParams, PARAM_NAMES};
use crate::spectral::frft::FrftPlan;
use crate::spectral::grid::FourierGrid;
use crate::spectral::newton_cotes::{cumulative_integral, integrate, newton_cotes_weights, Q};

/// Largest imaginary residue tolerated in the recovered density.
pub const IMAG_TOL: f64 = 1e-8;
/// Largest tolerated deviation of the total mass from one.
pub const MASS_TOL: f64 = 1e-4;
/// Number of distinct second derivatives.
pub const HESS_LEN: usize = DIM * (DIM + 1) / 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    None,
    First,
    Second,
}

/// Position of `(k, j)` in the packed upper triangle.
pub fn hess_index(k: usize, j: usize) -> usize {
    let (k, j) = if k <= j { (k, j) } else { (j, k) };
    k * DIM - k * (k + 1) / 2 + j
}

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Reusable inverse-Fourier operator for one grid.
pub struct Inverter {
    grid: FourierGrid,
    plans: Vec<FrftPlan>,
    node_phase: Vec<Complex64>,
    outer: Vec<[Complex64; Q + 1]>,
    prefactor: Vec<Complex64>,
}

impl Inverter {
    pub fn new(grid: &FourierGrid) -> Self {
        let (m, n, delta) = (grid.m, grid.n, grid.delta);
        let qf = Q as f64;
        let plans = (0..Q)
            .map(|f| FrftPlan::new(n, -delta * qf * qf, f as f64 / qf))
            .collect();
        let node_phase = (0..n).map(|p| cis(-PI * delta * m as f64 * qf * p as f64)).collect();
        let w = newton_cotes_weights();
        let half = 0.5 * m as f64;
        let outer = (0..m)
            .map(|k| {
                let r = k as f64 - half;
                std::array::from_fn(|j| cis(2.0 * PI * delta * r * j as f64) * w[j])
            })
            .collect();
        let scale = grid.beta_step / (2.0 * PI);
        let prefactor = (0..m)
            .map(|k| cis(-PI * delta * m as f64 * (k as f64 - half)) * scale)
            .collect();
        Self {
            grid: *grid,
            plans,
            node_phase,
            outer,
            prefactor,
        }
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }

    /// `(1/2π)∫ e^{ix_k y} g(y) dy` at all outputs, from `g` sampled at the `m+1`
    /// frequency nodes with the centering phase already applied.
    pub fn invert(&self, g: &[Complex64]) -> Vec<Complex64> {
        let (m, n) = (self.grid.m, self.grid.n);
        assert_eq!(g.len(), m + 1);
        let zero = Complex64::new(0.0, 0.0);
        let mut acc = vec![zero; m];
        let mut xi = vec![zero; n];
        let mut s = vec![zero; n];
        let mut spectrum = Vec::new();
        let mut work = Vec::new();
        for j in 0..=Q {
            for (p, v) in xi.iter_mut().enumerate() {
                *v = g[Q * p + j] * self.node_phase[p];
            }
            self.plans[0].prepare(&xi, &mut spectrum);
            for (f, plan) in self.plans.iter().enumerate() {
                plan.finish(&spectrum, &mut s, &mut work);
                for (l, sv) in s.iter().enumerate() {
                    let k = Q * l + f;
                    acc[k] += self.outer[k][j] * sv;
                }
            }
        }
        for (a, p) in acc.iter_mut().zip(&self.prefactor) {
            *a *= p;
        }
        acc
    }

    /// Samples `cf` at the frequency nodes and applies the centering phase.
    pub fn sample(&self, cf: impl Fn(f64) -> Complex64 + Sync) -> Vec<Complex64> {
        let c = self.grid.center;
        (0..=self.grid.m)
            .into_par_iter()
            .map(|node| {
                let y = self.grid.y(node);
                cf(y) * cis(c * y)
            })
            .collect()
    }
}

/// Real part of the inverse transform of `cf` on `grid`, after checking the
/// imaginary residue.
pub fn invert_char_fn(grid: &FourierGrid, cf: impl Fn(f64) -> Complex64 + Sync) -> Result<Vec<f64>> {
    let inv = Inverter::new(grid);
    let out = inv.invert(&inv.sample(cf));
    real_part(&out, IMAG_TOL)
}

fn real_part(v: &[Complex64], tol: f64) -> Result<Vec<f64>> {
    let worst = v.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if worst >= tol {
        return Err(GtsError::Grid(format!(
            "imaginary residue {worst:e} in recovered density"
        )));
    }
    Ok(v.iter().map(|c| c.re).collect())
}

/// Interpolation weights at one point: four consecutive nodes from `start`.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub start: usize,
    pub weights: [f64; 4],
}

impl Stencil {
    pub fn apply(&self, series: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&series[self.start..self.start + 4])
            .map(|(w, v)| w * v)
            .sum()
    }
}

/// Density, CDF and optional parameter derivatives on the output grid.
#[derive(Debug, Clone)]
pub struct DensityTable {
    pub params: GtsParams,
    pub grid: FourierGrid,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub cdf: Vec<f64>,
    /// `∂f/∂V_j`, empty unless derivatives were requested.
    pub df: Vec<Vec<f64>>,
    /// `∂²f/∂V_k∂V_j` packed by [`hess_index`], empty unless requested.
    pub d2f: Vec<Vec<f64>>,
    /// Newton–Cotes mass before renormalization of the CDF.
    pub mass: f64,
}

/// Builds the density table for `params` on `grid`.
pub fn density_table(params: &GtsParams, grid: &FourierGrid, order: DerivOrder) -> Result<DensityTable> {
    let ce = CharExponent::new(params)?;
    let inv = Inverter::new(grid);
    let width = match order {
        DerivOrder::None => 1,
        DerivOrder::First => 1 + DIM,
        DerivOrder::Second => 1 + DIM + HESS_LEN,
    };
    let nodes = grid.m + 1;
    let c = grid.center;
    let mut values = vec![Complex64::new(0.0, 0.0); nodes * width];
    values
        .par_chunks_mut(width)
        .enumerate()
        .try_for_each(|(node, row)| -> Result<()> {
            let y = grid.y(node);
            let xi = Complex64::new(-y, 0.0);
            let phase = cis(c * y);
            match order {
                DerivOrder::None => row[0] = ce.eval(xi)?.exp() * phase,
                DerivOrder::First => {
                    let (psi, g) = ce.eval_grad(xi)?;
                    let fv = psi.exp() * phase;
                    row[0] = fv;
                    for j in 0..DIM {
                        row[1 + j] = fv * g[j];
                    }
                }
                DerivOrder::Second => {
                    let (psi, g, h) = ce.eval_hess(xi)?;
                    let fv = psi.exp() * phase;
                    row[0] = fv;
                    for j in 0..DIM {
                        row[1 + j] = fv * g[j];
                    }
                    for k in 0..DIM {
                        for j in k..DIM {
                            row[1 + DIM + hess_index(k, j)] = fv * (g[k] * g[j] + h[k][j]);
                        }
                    }
                }
            }
            Ok(())
        })?;

    let mut series: Vec<Vec<Complex64>> = (0..width)
        .into_par_iter()
        .map(|col| {
            let g: Vec<Complex64> = (0..nodes).map(|node| values[node * width + col]).collect();
            inv.invert(&g)
        })
        .collect();
    drop(values);

    let f = real_part(&series[0], IMAG_TOL)?;
    let mut rest = series.split_off(1);
    let to_real = |v: Vec<Complex64>| v.into_iter().map(|c| c.re).collect::<Vec<f64>>();
    let d2f: Vec<Vec<f64>> = if order == DerivOrder::Second {
        rest.split_off(DIM).into_iter().map(to_real).collect()
    } else {
        Vec::new()
    };
    let df: Vec<Vec<f64>> = rest.into_iter().map(to_real).collect();

    let mass = integrate(&f, grid.gamma_step)?;
    if !((mass - 1.0).abs() <= MASS_TOL) {
        return Err(GtsError::GridTooCoarse { mass });
    }
    let cdf = cdf_from_density(&f, grid.gamma_step)?;
    Ok(DensityTable {
        params: *params,
        grid: *grid,
        x: grid.xs(),
        f,
        cdf,
        df,
        d2f,
        mass,
    })
}

fn cdf_from_density(f: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut cdf = cumulative_integral(f, h)?;
    let total = *cdf.last().expect("nonempty");
    let mut running: f64 = 0.0;
    for v in cdf.iter_mut() {
        running = running.max((*v / total).clamp(0.0, 1.0));
        *v = running;
    }
    Ok(cdf)
}

impl DensityTable {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn step(&self) -> f64 {
        self.grid.gamma_step
    }

    pub fn has_derivatives(&self) -> bool {
        !self.df.is_empty()
    }

    fn check_span(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.span();
        if !(x >= lo && x <= hi) {
            return Err(GtsError::OutOfSpan { x, lo, hi });
        }
        Ok(())
    }

    /// Interval index `i` with `x_i ≤ x ≤ x_{i+1}` and the fractional offset.
    fn locate(&self, x: f64) -> Result<(usize, f64)> {
        self.check_span(x)?;
        let u = (x - self.x[0]) / self.step();
        let r = u.round();
        let u = if (u - r).abs() < 1e-9 { r } else { u };
        let i = (u.floor() as usize).min(self.len() - 2);
        Ok((i, u - i as f64))
    }

    /// Cubic Lagrange weights on four nodes around `x`.
    pub fn stencil(&self, x: f64) -> Result<Stencil> {
        let (i, _) = self.locate(x)?;
        let start = i.saturating_sub(1).min(self.len() - 4);
        let u = (x - self.x[start]) / self.step();
        let weights = [
            -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
            u * (u - 2.0) * (u - 3.0) / 2.0,
            -u * (u - 1.0) * (u - 3.0) / 2.0,
            u * (u - 1.0) * (u - 2.0) / 6.0,
        ];
        Ok(Stencil { start, weights })
    }

    pub fn density_at(&self, x: f64) -> Result<f64> {
        Ok(self.stencil(x)?.apply(&self.f))
    }

    /// Monotone cubic (Fritsch–Carlson) interpolation of the CDF.
    pub fn cdf_at(&self, x: f64) -> Result<f64> {
        let (i, t) = self.locate(x)?;
        let h = self.step();
        let c = &self.cdf;
        let secant = |k: usize| (c[k + 1] - c[k]) / h;
        let slope = |k: usize| -> f64 {
            if k == 0 {
                return secant(0);
            }
            if k == c.len() - 1 {
                return secant(k - 1);
            }
            let (d0, d1) = (secant(k - 1), secant(k));
            if d0 * d1 <= 0.0 {
                0.0
            } else {
                2.0 * d0 * d1 / (d0 + d1)
            }
        };
        if t == 0.0 {
            return Ok(c[i]);
        }
        let (m0, m1) = (slope(i), slope(i + 1));
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * c[i] + h10 * h * m0 + h01 * c[i + 1] + h11 * h * m1;
        Ok(v.clamp(c[i], c[i + 1]))
    }

    /// `∫ g(x) f(x) dx` over the table by the composite rule.
    pub fn expectation(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        let v: Vec<f64> = self.x.iter().zip(&self.f).map(|(x, f)| g(*x) * f).collect();
        integrate(&v, self.step())
    }

    pub fn mean(&self) -> Result<f64> {
        self.expectation(|x| x)
    }

    pub fn variance(&self) -> Result<f64> {
        let mu = self.mean()?;
        self.expectation(|x| (x - mu) * (x - mu))
    }

    /// CSV with `x,f,F` and the first-derivative columns when present.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["x".to_string(), "f".to_string(), "F".to_string()];
        if self.has_derivatives() {
            header.extend(PARAM_NAMES.iter().map(|n| format!("df_{n}")));
        }
        w.write_record(&header).map_err(csv_err)?;
        for k in 0..self.len() {
            let mut row = vec![fmt17(self.x[k]), fmt17(self.f[k]), fmt17(self.cdf[k])];
            for d in &self.df {
                row.push(fmt17(d[k]));
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn csv_err(e: csv::Error) -> GtsError {
    GtsError::Io(e.to_string())
}
