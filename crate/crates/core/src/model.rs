//! The seven-parameter generalized tempered stable (GTS) law.
//!
//! Returns and the location `mu` are in percent; `lambda_±` are per percent.
//! The characteristic exponent is
//!
//! ```text
//! Ψ(ξ) = iμξ + α₊Γ(-β₊)[(λ₊ - iξ)^β₊ - λ₊^β₊] + α₋Γ(-β₋)[(λ₋ + iξ)^β₋ - λ₋^β₋]
//! ```
//!
//! and the Fourier transform of the density is `F(ξ) = exp(Ψ(-ξ))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GtsError, Result};
use crate::linalg::DIM;
use crate::special::{digamma_fn, gamma_fn, trigamma_fn};

/// Names of the parameter vector components, in vector order.
pub const PARAM_NAMES: [&str; DIM] = [
    "mu",
    "beta_plus",
    "beta_minus",
    "alpha_plus",
    "alpha_minus",
    "lambda_plus",
    "lambda_minus",
];

pub const MU: usize = 0;
pub const BETA_PLUS: usize = 1;
pub const BETA_MINUS: usize = 2;
pub const ALPHA_PLUS: usize = 3;
pub const ALPHA_MINUS: usize = 4;
pub const LAMBDA_PLUS: usize = 5;
pub const LAMBDA_MINUS: usize = 6;

/// Maximum cumulant order supported by [`cumulants`].
pub const MAX_CUMULANT: usize = 8;

/// GTS parameter vector V = (μ, β₊, β₋, α₊, α₋, λ₊, λ₋).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtsParams {
    pub mu: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl GtsParams {
    pub fn new(
        mu: f64,
        beta_plus: f64,
        beta_minus: f64,
        alpha_plus: f64,
        alpha_minus: f64,
        lambda_plus: f64,
        lambda_minus: f64,
    ) -> Self {
        Self {
            mu,
            beta_plus,
            beta_minus,
            alpha_plus,
            alpha_minus,
            lambda_plus,
            lambda_minus,
        }
    }

    /// Fitted S&P 500 parameters (daily returns, percent).
    pub fn sp500() -> Self {
        Self::new(-0.693477, 0.682290, 0.242579, 0.458582, 0.414443, 0.822222, 0.727607)
    }

    /// Fitted Bitcoin parameters (daily returns, percent).
    pub fn bitcoin() -> Self {
        Self::new(-0.736924, 0.461378, 0.267178, 0.810017, 0.517347, 0.215628, 0.191937)
    }

    pub fn to_array(&self) -> [f64; DIM] {
        [
            self.mu,
            self.beta_plus,
            self.beta_minus,
            self.alpha_plus,
            self.alpha_minus,
            self.lambda_plus,
            self.lambda_minus,
        ]
    }

    pub fn from_array(v: [f64; DIM]) -> Self {
        Self::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6])
    }

    /// Mirror image: the law of `-Y`.
    pub fn mirrored(&self) -> Self {
        Self::new(
            -self.mu,
            self.beta_minus,
            self.beta_plus,
            self.alpha_minus,
            self.alpha_plus,
            self.lambda_minus,
            self.lambda_plus,
        )
    }

    /// Checks the open domain with a margin `eps` on every bound.
    pub fn validate_with_margin(&self, eps: f64) -> Result<()> {
        let v = self.to_array();
        if !v.iter().all(|x| x.is_finite()) {
            let i = v.iter().position(|x| !x.is_finite()).unwrap_or(0);
            return Err(GtsError::Domain {
                field: PARAM_NAMES[i],
                value: v[i],
                bound: "finite",
            });
        }
        for (i, bound) in [(BETA_PLUS, "0 < beta_plus < 1"), (BETA_MINUS, "0 < beta_minus < 1")] {
            if !(v[i] > eps && v[i] < 1.0 - eps) {
                return Err(GtsError::Domain {
                    field: PARAM_NAMES[i],
                    value: v[i],
                    bound,
                });
            }
        }
        for (i, bound) in [
            (ALPHA_PLUS, "alpha_plus > 0"),
            (ALPHA_MINUS, "alpha_minus > 0"),
            (LAMBDA_PLUS, "lambda_plus > 0"),
            (LAMBDA_MINUS, "lambda_minus > 0"),
        ] {
            if v[i] <= eps {
                return Err(GtsError::Domain {
                    field: PARAM_NAMES[i],
                    value: v[i],
                    bound,
                });
            }
        }
        Ok(())
    }
}

/// Returns normally iff every parameter lies in its open domain.
pub fn validate(params: &GtsParams) -> Result<()> {
    params.validate_with_margin(0.0)
}

/// Parameter file layout: the flat parameter object plus a units tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsFile {
    pub units: String,
    #[serde(flatten)]
    pub params: GtsParams,
}

impl ParamsFile {
    pub fn new(params: GtsParams) -> Self {
        Self {
            units: "percent".to_string(),
            params,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }

    pub fn from_json(s: &str) -> Result<GtsParams> {
        let file: ParamsFile = serde_json::from_str(s).map_err(|e| GtsError::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if file.units != "percent" {
            return Err(GtsError::InvalidArgument(format!(
                "unsupported units `{}` (expected `percent`)",
                file.units
            )));
        }
        validate(&file.params)?;
        Ok(file.params)
    }
}

/// Lévy density of the GTS measure at `x ≠ 0`.
pub fn levy_density(params: &GtsParams, x: f64) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return Err(GtsError::InvalidArgument(format!("Lévy density undefined at x = {x}")));
    }
    Ok(if x > 0.0 {
        params.alpha_plus * (-params.lambda_plus * x).exp() / x.powf(1.0 + params.beta_plus)
    } else {
        let ax = -x;
        params.alpha_minus * (-params.lambda_minus * ax).exp() / ax.powf(1.0 + params.beta_minus)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activity {
    FiniteActivity,
    InfiniteActivity,
}

/// Jump activity. Accepts negative stability indexes (compound Poisson case).
pub fn activity_class(params: &GtsParams) -> Activity {
    if params.beta_plus >= 0.0 || params.beta_minus >= 0.0 {
        Activity::InfiniteActivity
    } else {
        Activity::FiniteActivity
    }
}

/// Constants of one tail that depend only on (β, α, λ).
#[derive(Debug, Clone, Copy)]
struct TailConsts {
    beta: f64,
    alpha: f64,
    lambda: f64,
    gamma_neg_beta: f64,
    digamma: f64,
    trigamma: f64,
    ln_lambda: f64,
    lambda_pow: f64,
}

impl TailConsts {
    fn new(beta: f64, alpha: f64, lambda: f64) -> Result<Self> {
        Ok(Self {
            beta,
            alpha,
            lambda,
            gamma_neg_beta: gamma_fn(-beta)?,
            digamma: digamma_fn(-beta)?,
            trigamma: trigamma_fn(-beta)?,
            ln_lambda: lambda.ln(),
            lambda_pow: (beta * lambda.ln()).exp(),
        })
    }
}

/// Per-tail quantities at one frequency, `u = λ ∓ iξ`.
struct TailEval {
    d0: Complex64,
    d1: Complex64,
    d2: Complex64,
    e1: Complex64,
    e1_log: Complex64,
    e2: Complex64,
}

impl TailEval {
    fn new(c: &TailConsts, u: Complex64) -> Self {
        let ln_u = u.ln();
        let u_pow = (ln_u * c.beta).exp();
        let lp = c.lambda_pow;
        let ll = c.ln_lambda;
        let u_pow_m1 = (ln_u * (c.beta - 1.0)).exp();
        let u_pow_m2 = (ln_u * (c.beta - 2.0)).exp();
        let lp_m1 = ((c.beta - 1.0) * ll).exp();
        let lp_m2 = ((c.beta - 2.0) * ll).exp();
        Self {
            d0: u_pow - lp,
            d1: u_pow * ln_u - lp * ll,
            d2: u_pow * ln_u * ln_u - lp * ll * ll,
            e1: u_pow_m1 - lp_m1,
            e1_log: u_pow_m1 * ln_u - lp_m1 * ll,
            e2: u_pow_m2 - lp_m2,
        }
    }

    fn value(&self, c: &TailConsts) -> Complex64 {
        self.d0 * (c.alpha * c.gamma_neg_beta)
    }

    /// (∂/∂β, ∂/∂α, ∂/∂λ)
    fn grad(&self, c: &TailConsts) -> [Complex64; 3] {
        let g = c.gamma_neg_beta;
        [
            (self.d1 - self.d0 * c.digamma) * (c.alpha * g),
            self.d0 * g,
            self.e1 * (c.alpha * g * c.beta),
        ]
    }

    /// Second partials in (β, α, λ) order.
    fn hess(&self, c: &TailConsts) -> [[Complex64; 3]; 3] {
        let g = c.gamma_neg_beta;
        let (a, b, psi, psi1) = (c.alpha, c.beta, c.digamma, c.trigamma);
        let bb = (self.d0 * (psi * psi + psi1) - self.d1 * (2.0 * psi) + self.d2) * (a * g);
        let ba = (self.d1 - self.d0 * psi) * g;
        let bl = (self.e1 * (1.0 - psi * b) + self.e1_log * b) * (a * g);
        let aa = Complex64::new(0.0, 0.0);
        let al = self.e1 * (g * b);
        let ll = self.e2 * (a * g * b * (b - 1.0));
        [[bb, ba, bl], [ba, aa, al], [bl, al, ll]]
    }
}

/// Characteristic exponent with the Γ and ψ constants cached for one parameter vector.
#[derive(Debug, Clone, Copy)]
pub struct CharExponent {
    mu: f64,
    plus: TailConsts,
    minus: TailConsts,
}

/// Positions of (β, α, λ) inside the parameter vector for each tail.
const PLUS_IDX: [usize; 3] = [BETA_PLUS, ALPHA_PLUS, LAMBDA_PLUS];
const MINUS_IDX: [usize; 3] = [BETA_MINUS, ALPHA_MINUS, LAMBDA_MINUS];

impl CharExponent {
    pub fn new(params: &GtsParams) -> Result<Self> {
        validate(params)?;
        Ok(Self {
            mu: params.mu,
            plus: TailConsts::new(params.beta_plus, params.alpha_plus, params.lambda_plus)?,
            minus: TailConsts::new(params.beta_minus, params.alpha_minus, params.lambda_minus)?,
        })
    }

    fn arguments(&self, xi: Complex64) -> Result<(Complex64, Complex64)> {
        let i = Complex64::i();
        let up = self.plus.lambda - i * xi;
        let um = self.minus.lambda + i * xi;
        for u in [up, um] {
            if !(u.re > 0.0) {
                return Err(GtsError::BranchCut { re: u.re, im: u.im });
            }
        }
        Ok((up, um))
    }

    /// Ψ(ξ) for complex ξ.
    pub fn eval(&self, xi: Complex64) -> Result<Complex64> {
        let (up, um) = self.arguments(xi)?;
        let p = TailEval::new(&self.plus, up);
        let m = TailEval::new(&self.minus, um);
        Ok(Complex64::i() * xi * self.mu + p.value(&self.plus) + m.value(&self.minus))
    }

    /// Ψ(ξ) and its seven first partials.
    pub fn eval_grad(&self, xi: Complex64) -> Result<(Complex64, [Complex64; DIM])> {
        let (up, um) = self.arguments(xi)?;
        let p = TailEval::new(&self.plus, up);
        let m = TailEval::new(&self.minus, um);
        let mut g = [Complex64::new(0.0, 0.0); DIM];
        g[MU] = Complex64::i() * xi;
        for (k, v) in PLUS_IDX.iter().zip(p.grad(&self.plus)) {
            g[*k] = v;
        }
        for (k, v) in MINUS_IDX.iter().zip(m.grad(&self.minus)) {
            g[*k] = v;
        }
        let psi = Complex64::i() * xi * self.mu + p.value(&self.plus) + m.value(&self.minus);
        Ok((psi, g))
    }

    /// Ψ(ξ), first partials and second partials.
    #[allow(clippy::type_complexity)]
    pub fn eval_hess(&self, xi: Complex64) -> Result<(Complex64, [Complex64; DIM], [[Complex64; DIM]; DIM])> {
        let (psi, g) = self.eval_grad(xi)?;
        let (up, um) = self.arguments(xi)?;
        let mut h = [[Complex64::new(0.0, 0.0); DIM]; DIM];
        for (idx, consts, u) in [(PLUS_IDX, &self.plus, up), (MINUS_IDX, &self.minus, um)] {
            let local = TailEval::new(consts, u).hess(consts);
            for a in 0..3 {
                for b in 0..3 {
                    h[idx[a]][idx[b]] = local[a][b];
                }
            }
        }
        Ok((psi, g, h))
    }
}

/// Characteristic exponent Ψ(ξ) on the principal branch.
pub fn char_exponent(params: &GtsParams, xi: Complex64) -> Result<Complex64> {
    CharExponent::new(params)?.eval(xi)
}

/// Fourier transform of the density, `F(ξ) = exp(Ψ(-ξ))`.
pub fn char_fn(params: &GtsParams, xi: f64) -> Result<Complex64> {
    Ok(char_exponent(params, Complex64::new(-xi, 0.0))?.exp())
}

/// `dF(ξ)/dV_j = F(ξ) ∂Ψ(-ξ)/∂V_j`.
pub fn char_fn_grad(params: &GtsParams, xi: f64) -> Result<[Complex64; DIM]> {
    let (psi, g) = CharExponent::new(params)?.eval_grad(Complex64::new(-xi, 0.0))?;
    let f = psi.exp();
    Ok(g.map(|v| v * f))
}

/// `d²F/dV_k dV_j = F (∂_kΨ ∂_jΨ + ∂²_kjΨ)`, evaluated at `-ξ`.
pub fn char_fn_hess(params: &GtsParams, xi: f64) -> Result<[[Complex64; DIM]; DIM]> {
    let (psi, g, h) = CharExponent::new(params)?.eval_hess(Complex64::new(-xi, 0.0))?;
    let f = psi.exp();
    let mut out = [[Complex64::new(0.0, 0.0); DIM]; DIM];
    for k in 0..DIM {
        for j in 0..DIM {
            out[k][j] = f * (g[k] * g[j] + h[k][j]);
        }
    }
    Ok(out)
}

/// Cumulants κ₁..κ_k (index 0 holds κ₁).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantSet {
    pub kappa: Vec<f64>,
}

impl CumulantSet {
    /// κ_k with 1-based `k`.
    pub fn get(&self, k: usize) -> f64 {
        self.kappa[k - 1]
    }
}

pub fn cumulants(params: &GtsParams, k_max: usize) -> Result<CumulantSet> {
    if k_max == 0 || k_max > MAX_CUMULANT {
        return Err(GtsError::InvalidArgument(format!(
            "k_max must lie in 1..={MAX_CUMULANT}, got {k_max}"
        )));
    }
    validate(params)?;
    let tail = |k: f64, alpha: f64, beta: f64, lambda: f64| -> Result<f64> {
        Ok(alpha * gamma_fn(k - beta)? / lambda.powf(k - beta))
    };
    let mut kappa = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let kf = k as f64;
        let plus = tail(kf, params.alpha_plus, params.beta_plus, params.lambda_plus)?;
        let minus = tail(kf, params.alpha_minus, params.beta_minus, params.lambda_minus)?;
        kappa.push(if k == 1 {
            params.mu + plus - minus
        } else if k % 2 == 0 {
            plus + minus
        } else {
            plus - minus
        });
    }
    Ok(CumulantSet { kappa })
}

/// Theoretical summary statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentStats {
    pub mean: f64,
    pub std_dev: f64,
    pub cv: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

/// Mean, standard deviation, CV = σ/κ₁, skewness and (non-excess) kurtosis.
pub fn moment_stats(params: &GtsParams) -> Result<MomentStats> {
    let c = cumulants(params, 4)?;
    let (k1, k2, k3, k4) = (c.get(1), c.get(2), c.get(3), c.get(4));
    if k1 == 0.0 {
        return Err(GtsError::CvUndefined);
    }
    let std_dev = k2.sqrt();
    Ok(MomentStats {
        mean: k1,
        std_dev,
        cv: std_dev / k1,
        skewness: k3 / k2.powf(1.5),
        kurtosis: 3.0 + k4 / (k2 * k2),
    })
}
