//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use gts_core::linalg::{SymMatrix7, DIM};
use gts_core::mle::evaluate_on;
use gts_core::model::{char_fn, char_fn_grad, char_fn_hess};
use gts_core::spectral::{DerivOrder, FourierGrid};
use gts_core::GtsParams;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_params(rng: &mut ChaCha8Rng) -> GtsParams {
    GtsParams::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(0.1..0.9),
        rng.gen_range(0.1..0.9),
        rng.gen_range(0.2..1.5),
        rng.gen_range(0.2..1.5),
        rng.gen_range(0.3..2.0),
        rng.gen_range(0.3..2.0),
    )
}

/// Multiplies every parameter by an independent factor in `[1 - spread, 1 + spread]`.
pub fn perturb(p: &GtsParams, spread: f64, rng: &mut ChaCha8Rng) -> GtsParams {
    GtsParams::from_array(p.to_array().map(|v| v * (1.0 + rng.gen_range(-spread..spread))))
}

fn bumped(p: &GtsParams, j: usize, h: f64) -> GtsParams {
    let mut v = p.to_array();
    v[j] += h;
    GtsParams::from_array(v)
}

fn step_for(v: f64, rel: f64) -> f64 {
    rel * v.abs().max(0.1)
}

fn crel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// Largest relative deviation of `char_fn_grad` from central differences.
pub fn grad_fd_error(p: &GtsParams, xi: f64) -> f64 {
    let g = char_fn_grad(p, xi).unwrap();
    let v = p.to_array();
    (0..DIM)
        .map(|j| {
            let h = step_for(v[j], 1e-6);
            let fd = (char_fn(&bumped(p, j, h), xi).unwrap() - char_fn(&bumped(p, j, -h), xi).unwrap()) / (2.0 * h);
            crel(g[j], fd)
        })
        .fold(0.0, f64::max)
}

/// Largest relative deviation of `char_fn_hess` from central differences of
/// `char_fn_grad` (relative step 1e-6).
pub fn hess_fd_error(p: &GtsParams, xi: f64) -> f64 {
    let h2 = char_fn_hess(p, xi).unwrap();
    let v = p.to_array();
    let mut worst: f64 = 0.0;
    for j in 0..DIM {
        let h = step_for(v[j], 1e-6);
        let up = char_fn_grad(&bumped(p, j, h), xi).unwrap();
        let down = char_fn_grad(&bumped(p, j, -h), xi).unwrap();
        for k in 0..DIM {
            worst = worst.max(crel(h2[k][j], (up[k] - down[k]) / (2.0 * h)));
        }
    }
    worst
}

/// Per-component relative deviation of the score from central differences of
/// the log-likelihood (relative step 1e-5) on a fixed grid.
pub fn score_fd_error(x: &[f64], p: &GtsParams, grid: &FourierGrid) -> f64 {
    let g = evaluate_on(x, p, grid, DerivOrder::First).unwrap().score.unwrap();
    let v = p.to_array();
    let ll = |q: &GtsParams| evaluate_on(x, q, grid, DerivOrder::None).unwrap().loglik;
    (0..DIM)
        .map(|j| {
            let h = 1e-5 * v[j].abs().max(0.1);
            let fd = (ll(&bumped(p, j, h)) - ll(&bumped(p, j, -h))) / (2.0 * h);
            (g[j] - fd).abs() / g[j].abs().max(fd.abs()).max(1.0)
        })
        .fold(0.0, f64::max)
}

/// Relative Frobenius deviation of the observed Hessian from central
/// differences of the score (step 1e-4).
pub fn hessian_fd_error(x: &[f64], p: &GtsParams, grid: &FourierGrid) -> f64 {
    let h = evaluate_on(x, p, grid, DerivOrder::Second).unwrap().hessian.unwrap();
    let v = p.to_array();
    let score = |q: &GtsParams| evaluate_on(x, q, grid, DerivOrder::First).unwrap().score.unwrap();
    let mut fd = [[0.0; DIM]; DIM];
    for j in 0..DIM {
        let step = 1e-4 * v[j].abs().max(0.1);
        let (a, b) = (score(&bumped(p, j, step)), score(&bumped(p, j, -step)));
        for k in 0..DIM {
            fd[k][j] = (a[k] - b[k]) / (2.0 * step);
        }
    }
    let fd = SymMatrix7::new(std::array::from_fn(|i| {
        std::array::from_fn(|j| 0.5 * (fd[i][j] + fd[j][i]))
    }));
    let diff = SymMatrix7::new(std::array::from_fn(|i| {
        std::array::from_fn(|j| h.get(i, j) - fd.get(i, j))
    }));
    diff.frobenius() / h.frobenius()
}

/// Log-likelihood from a direct trapezoidal inverse-Fourier sum at each point.
pub fn direct_loglik(p: &GtsParams, x: &[f64]) -> f64 {
    let h = 0.005;
    let mut cf = Vec::new();
    for k in 0.. {
        let c = char_fn(p, k as f64 * h).unwrap();
        if c.norm() < 1e-16 {
            break;
        }
        cf.push(c);
    }
    x.iter()
        .map(|&t| {
            let mut s = 0.5 * cf[0].re;
            for (k, c) in cf.iter().enumerate().skip(1) {
                let (sn, cs) = (k as f64 * h * t).sin_cos();
                s += c.re * cs - c.im * sn;
            }
            (s * h / PI).ln()
        })
        .sum()
}

/// `(1/α)∫₀^α q(u) du` with `u = α e^{-s}`, by Gauss–Legendre panels in `s`.
pub fn tail_mean_of_quantiles(q: impl Fn(f64) -> f64, alpha: f64, s_max: f64) -> f64 {
    let nodes = [
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.0, 0.568_888_888_888_888_9),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    let panels = 400;
    let w = s_max / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let mid = (i as f64 + 0.5) * w;
        for (t, wt) in nodes {
            let s = mid + 0.5 * w * t;
            total += 0.5 * w * wt * q(alpha * (-s).exp()) * (-s).exp();
        }
    }
    total
}
