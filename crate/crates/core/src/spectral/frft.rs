//! Fractional Fourier transform `G_k = Σ_j x_j exp(-2πi j (k+s) δ)`.
//!
//! Evaluated as a circular convolution of length `N ≥ 2m` (power of two):
//! `j(k+s) = [j² + (k+s)² - (k+s-j)²] / 2`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Precomputed chirps and kernel spectrum for one `(m, δ, s)`.
#[derive(Clone)]
pub struct FrftPlan {
    m: usize,
    nfft: usize,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    kernel_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

impl FrftPlan {
    pub fn new(m: usize, delta: f64, s: f64) -> Self {
        assert!(m >= 1, "FRFT length must be positive");
        let nfft = (2 * m).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(nfft);
        let inverse = planner.plan_fft_inverse(nfft);
        let pre = (0..m)
            .map(|j| {
                let j = j as f64;
                cis(-PI * delta * j * j)
            })
            .collect();
        let post = (0..m)
            .map(|k| {
                let t = k as f64 + s;
                cis(-PI * delta * t * t)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); nfft];
        for d in 0..m {
            let t = d as f64 + s;
            kernel[d] = cis(PI * delta * t * t);
            if d > 0 {
                let t = s - d as f64;
                kernel[nfft - d] = cis(PI * delta * t * t);
            }
        }
        forward.process(&mut kernel);
        Self {
            m,
            nfft,
            pre,
            post,
            kernel_hat: kernel,
            forward,
            inverse,
        }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Chirped, zero-padded spectrum of `seq`. It depends on `δ` but not on `s`,
    /// so plans that differ only in the shift can share it.
    pub fn prepare(&self, seq: &[Complex64], spectrum: &mut Vec<Complex64>) {
        assert_eq!(seq.len(), self.m);
        spectrum.clear();
        spectrum.extend(seq.iter().zip(&self.pre).map(|(x, p)| x * p));
        spectrum.resize(self.nfft, Complex64::new(0.0, 0.0));
        self.forward.process(spectrum);
    }

    /// Completes the transform from a spectrum produced by [`FrftPlan::prepare`]
    /// on a plan with the same length and `δ`.
    pub fn finish(&self, spectrum: &[Complex64], out: &mut [Complex64], work: &mut Vec<Complex64>) {
        assert_eq!(spectrum.len(), self.nfft);
        assert_eq!(out.len(), self.m);
        work.clear();
        work.extend(spectrum.iter().zip(&self.kernel_hat).map(|(a, k)| a * k));
        self.inverse.process(work);
        let scale = 1.0 / self.nfft as f64;
        for ((o, w), p) in out.iter_mut().zip(work.iter()).zip(&self.post) {
            *o = w * p * scale;
        }
    }

    /// Transforms `seq` (length `m`) into `out` (length `m`).
    pub fn apply_into(&self, seq: &[Complex64], out: &mut [Complex64], work: &mut Vec<Complex64>) {
        let mut spectrum = Vec::with_capacity(self.nfft);
        self.prepare(seq, &mut spectrum);
        self.finish(&spectrum, out, work);
    }

    pub fn apply(&self, seq: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.m];
        let mut work = Vec::with_capacity(self.nfft);
        self.apply_into(seq, &mut out, &mut work);
        out
    }
}

/// One-shot fractional Fourier transform.
pub fn frft(seq: &[Complex64], delta: f64, s: f64) -> Vec<Complex64> {
    if seq.is_empty() {
        return Vec::new();
    }
    FrftPlan::new(seq.len(), delta, s).apply(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct(seq: &[Complex64], delta: f64, s: f64) -> Vec<Complex64> {
        let m = seq.len();
        (0..m)
            .map(|k| {
                seq.iter()
                    .enumerate()
                    .map(|(j, x)| x * cis(-2.0 * PI * j as f64 * (k as f64 + s) * delta))
                    .sum()
            })
            .collect()
    }

    fn random_seq(rng: &mut ChaCha8Rng, m: usize) -> Vec<Complex64> {
        (0..m)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
        let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn single_point() {
        let c = Complex64::new(0.3, -2.0);
        let out = frft(&[c], 0.37, 0.0);
        assert!((out[0] - c).norm() < 1e-15);
    }

    #[test]
    fn zeros_stay_zero() {
        let out = frft(&vec![Complex64::new(0.0, 0.0); 24], 0.1, 0.3);
        assert!(out.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn equals_dft_when_delta_is_reciprocal_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [12, 24, 48] {
            let x = random_seq(&mut rng, m);
            let got = frft(&x, 1.0 / m as f64, 0.0);
            assert!(max_rel(&got, &direct(&x, 1.0 / m as f64, 0.0)) < 1e-10);
            let mut dft = x.clone();
            FftPlanner::new().plan_fft_forward(m).process(&mut dft);
            assert!(max_rel(&got, &dft) < 1e-10);
        }
    }

    #[test]
    fn arbitrary_delta_and_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (m, delta, s) in [(7, 0.013, 0.25), (100, -0.0021, 0.5), (33, 1.7, 0.0)] {
            let x = random_seq(&mut rng, m);
            assert!(max_rel(&frft(&x, delta, s), &direct(&x, delta, s)) < 1e-11);
        }
    }

    #[test]
    fn linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = 50;
        let u = random_seq(&mut rng, m);
        let v = random_seq(&mut rng, m);
        let (a, b) = (Complex64::new(0.7, 0.2), Complex64::new(-1.3, 0.5));
        let w: Vec<Complex64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let plan = FrftPlan::new(m, 0.0123, 0.4);
        let fu = plan.apply(&u);
        let fv = plan.apply(&v);
        let lhs = plan.apply(&w);
        let rhs: Vec<Complex64> = fu.iter().zip(&fv).map(|(x, y)| a * x + b * y).collect();
        assert!(max_rel(&lhs, &rhs) < 1e-12);
    }
}
