//! Gamma, digamma and trigamma for real arguments.
//!
//! Gamma uses the Lanczos approximation (g = 7, nine coefficients) with the
//! reflection formula below 1/2. Digamma and trigamma shift the argument above
//! 10 by recurrence and then sum the asymptotic series.

use std::f64::consts::PI;

use crate::error::{GtsError, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Shift threshold for the asymptotic expansions.
const ASYMPTOTIC_MIN: f64 = 10.0;

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Gamma function. Poles at the non-positive integers are reported as errors.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if is_pole(x) {
        return Err(GtsError::Pole { function: "gamma", x });
    }
    if x < 0.5 {
        // Γ(x) Γ(1 - x) = π / sin(πx)
        let s = (PI * x).sin();
        return Ok(PI / (s * gamma_fn(1.0 - x)?));
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // t^(z+1/2) split in two halves so large arguments do not overflow early.
    let half = t.powf(0.5 * (z + 0.5));
    Ok((2.0 * PI).sqrt() * half * (-t).exp() * half * acc)
}

/// Digamma ψ(x) = Γ'(x)/Γ(x).
pub fn digamma_fn(x: f64) -> Result<f64> {
    if is_pole(x) {
        return Err(GtsError::Pole { function: "digamma", x });
    }
    if x < 0.0 {
        // ψ(1 - x) - ψ(x) = π cot(πx)
        return Ok(digamma_fn(1.0 - x)? - PI / (PI * x).tan());
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < ASYMPTOTIC_MIN {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli terms B_2k / (2k x^2k), k = 1..7
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    Ok(shift + x.ln() - 0.5 / x - series)
}

/// Trigamma ψ'(x).
pub fn trigamma_fn(x: f64) -> Result<f64> {
    if is_pole(x) {
        return Err(GtsError::Pole {
            function: "trigamma",
            x,
        });
    }
    if x < 0.0 {
        // ψ'(1 - x) + ψ'(x) = π² / sin²(πx)
        let s = (PI * x).sin();
        return Ok(PI * PI / (s * s) - trigamma_fn(1.0 - x)?);
    }
    let mut x = x;
    let mut shift = 0.0;
    while x < ASYMPTOTIC_MIN {
        shift += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // 1/x + 1/(2x²) + Σ B_2k / x^(2k+1)
    let series = inv
        + 0.5 * inv2
        + inv
            * inv2
            * (1.0 / 6.0
                - inv2
                    * (1.0 / 30.0
                        - inv2
                            * (1.0 / 42.0
                                - inv2
                                    * (1.0 / 30.0
                                        - inv2 * (5.0 / 66.0 - inv2 * (691.0 / 2730.0 - inv2 * 7.0 / 6.0))))));
    Ok(shift + series)
}
