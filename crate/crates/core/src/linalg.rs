//! Dense 7×7 symmetric linear algebra for the Newton-Raphson driver.

use serde::{Deserialize, Serialize};

use crate::error::{GtsError, Result};

/// Dimension of the GTS parameter vector.
pub const DIM: usize = 7;

const PIVOT_REL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// A symmetric 7×7 matrix. Entries are symmetrized on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix7 {
    entries: [[f64; DIM]; DIM],
}

impl SymMatrix7 {
    /// Builds the matrix from `a`, replacing each mirrored pair by its mean.
    pub fn new(a: [[f64; DIM]; DIM]) -> Self {
        let mut entries = a;
        for i in 0..DIM {
            for j in (i + 1)..DIM {
                let m = 0.5 * (a[i][j] + a[j][i]);
                entries[i][j] = m;
                entries[j][i] = m;
            }
        }
        Self { entries }
    }

    pub fn identity() -> Self {
        Self::diagonal([1.0; DIM])
    }

    pub fn diagonal(d: [f64; DIM]) -> Self {
        let mut entries = [[0.0; DIM]; DIM];
        for i in 0..DIM {
            entries[i][i] = d[i];
        }
        Self { entries }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn entries(&self) -> &[[f64; DIM]; DIM] {
        &self.entries
    }

    pub fn mul_vec(&self, x: &[f64; DIM]) -> [f64; DIM] {
        let mut y = [0.0; DIM];
        for (yi, row) in y.iter_mut().zip(self.entries.iter()) {
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|r| r.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..DIM).map(|i| self.entries[i][i]).sum()
    }

    /// Returns `self + shift·I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut entries = self.entries;
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] += shift;
        }
        Self { entries }
    }
}

/// Bunch-Kaufman factorization P A Pᵀ = L D Lᵀ with 1×1 and 2×2 pivots.
struct LdlFactor {
    perm: [usize; DIM],
    lower: [[f64; DIM]; DIM],
    /// Block diagonal D, stored densely (only diagonal and first subdiagonal used).
    diag: [[f64; DIM]; DIM],
    /// `true` at k when a 2×2 block starts at k.
    block2: [bool; DIM],
}

fn ldl_factor(a: &SymMatrix7) -> Result<LdlFactor> {
    let alpha = (1.0 + 17.0_f64.sqrt()) / 8.0;
    let threshold = PIVOT_REL_TOL * a.max_abs();
    let mut work = *a.entries();
    let mut perm: [usize; DIM] = std::array::from_fn(|i| i);
    let mut lower = [[0.0; DIM]; DIM];
    let mut diag = [[0.0; DIM]; DIM];
    let mut block2 = [false; DIM];

    let swap = |work: &mut [[f64; DIM]; DIM],
                lower: &mut [[f64; DIM]; DIM],
                perm: &mut [usize; DIM],
                i: usize,
                j: usize,
                k: usize| {
        if i == j {
            return;
        }
        work.swap(i, j);
        for row in work.iter_mut() {
            row.swap(i, j);
        }
        for c in 0..k {
            let t = lower[i][c];
            lower[i][c] = lower[j][c];
            lower[j][c] = t;
        }
        perm.swap(i, j);
    };

    let mut k = 0;
    while k < DIM {
        let akk = work[k][k].abs();
        let (mut r, mut lambda) = (k, 0.0_f64);
        for i in (k + 1)..DIM {
            if work[i][k].abs() > lambda {
                lambda = work[i][k].abs();
                r = i;
            }
        }
        let two_by_two;
        if akk.max(lambda) <= threshold {
            return Err(GtsError::Singular {
                pivot: akk.max(lambda),
                threshold,
            });
        }
        if akk >= alpha * lambda {
            two_by_two = false;
        } else {
            let mut sigma = 0.0_f64;
            for j in k..DIM {
                if j != r {
                    sigma = sigma.max(work[j][r].abs());
                }
            }
            if akk * sigma >= alpha * lambda * lambda {
                two_by_two = false;
            } else if work[r][r].abs() >= alpha * sigma {
                two_by_two = false;
                swap(&mut work, &mut lower, &mut perm, k, r, k);
            } else {
                two_by_two = true;
                swap(&mut work, &mut lower, &mut perm, k + 1, r, k);
            }
        }

        if !two_by_two {
            let d = work[k][k];
            if d.abs() <= threshold {
                return Err(GtsError::Singular {
                    pivot: d.abs(),
                    threshold,
                });
            }
            diag[k][k] = d;
            lower[k][k] = 1.0;
            for i in (k + 1)..DIM {
                lower[i][k] = work[i][k] / d;
            }
            for i in (k + 1)..DIM {
                for j in (k + 1)..DIM {
                    work[i][j] -= lower[i][k] * lower[j][k] * d;
                }
            }
            k += 1;
        } else {
            let (d11, d21, d22) = (work[k][k], work[k + 1][k], work[k + 1][k + 1]);
            let det = d11 * d22 - d21 * d21;
            let scale = d11.abs().max(d21.abs()).max(d22.abs());
            if det.abs() / scale <= threshold {
                return Err(GtsError::Singular {
                    pivot: det.abs() / scale,
                    threshold,
                });
            }
            let (i11, i21, i22) = (d22 / det, -d21 / det, d11 / det);
            diag[k][k] = d11;
            diag[k + 1][k] = d21;
            diag[k][k + 1] = d21;
            diag[k + 1][k + 1] = d22;
            block2[k] = true;
            lower[k][k] = 1.0;
            lower[k + 1][k + 1] = 1.0;
            for i in (k + 2)..DIM {
                let (c0, c1) = (work[i][k], work[i][k + 1]);
                lower[i][k] = c0 * i11 + c1 * i21;
                lower[i][k + 1] = c0 * i21 + c1 * i22;
            }
            for i in (k + 2)..DIM {
                for j in (k + 2)..DIM {
                    work[i][j] -= lower[i][k] * work[j][k] + lower[i][k + 1] * work[j][k + 1];
                }
            }
            k += 2;
        }
    }
    Ok(LdlFactor {
        perm,
        lower,
        diag,
        block2,
    })
}

impl LdlFactor {
    fn solve(&self, b: &[f64; DIM]) -> [f64; DIM] {
        let mut y: [f64; DIM] = std::array::from_fn(|i| b[self.perm[i]]);
        for i in 0..DIM {
            for j in 0..i {
                y[i] -= self.lower[i][j] * y[j];
            }
        }
        let mut k = 0;
        while k < DIM {
            if self.block2[k] {
                let (d11, d21, d22) = (self.diag[k][k], self.diag[k + 1][k], self.diag[k + 1][k + 1]);
                let det = d11 * d22 - d21 * d21;
                let (z0, z1) = (y[k], y[k + 1]);
                y[k] = (d22 * z0 - d21 * z1) / det;
                y[k + 1] = (d11 * z1 - d21 * z0) / det;
                k += 2;
            } else {
                y[k] /= self.diag[k][k];
                k += 1;
            }
        }
        for i in (0..DIM).rev() {
            for j in (i + 1)..DIM {
                y[i] -= self.lower[j][i] * y[j];
            }
        }
        let mut x = [0.0; DIM];
        for i in 0..DIM {
            x[self.perm[i]] = y[i];
        }
        x
    }
}

/// Solves `A x = b` by symmetric-pivoted LDLᵀ followed by one refinement pass.
pub fn solve_sym(a: &SymMatrix7, b: &[f64; DIM]) -> Result<[f64; DIM]> {
    let factor = ldl_factor(a)?;
    let mut x = factor.solve(b);
    let ax = a.mul_vec(&x);
    let residual: [f64; DIM] = std::array::from_fn(|i| b[i] - ax[i]);
    let dx = factor.solve(&residual);
    for (xi, d) in x.iter_mut().zip(dx) {
        *xi += d;
    }
    Ok(x)
}

/// Eigenvalues by cyclic Jacobi rotations, sorted descending.
pub fn eigen_sym(a: &SymMatrix7) -> Result<[f64; DIM]> {
    let mut m = *a.entries();
    let norm = a.frobenius();
    if norm == 0.0 {
        return Ok([0.0; DIM]);
    }
    let tol = 1e-12 * norm;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off = (0..DIM)
            .flat_map(|i| ((i + 1)..DIM).map(move |j| (i, j)))
            .fold(0.0_f64, |acc, (i, j)| acc.max(m[i][j].abs()));
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..DIM {
            for q in (p + 1)..DIM {
                let apq = m[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..DIM {
                    let (mrp, mrq) = (m[r][p], m[r][q]);
                    m[r][p] = c * mrp - s * mrq;
                    m[r][q] = s * mrp + c * mrq;
                }
                for r in 0..DIM {
                    let (mpr, mqr) = (m[p][r], m[q][r]);
                    m[p][r] = c * mpr - s * mqr;
                    m[q][r] = s * mpr + c * mqr;
                }
                m[p][q] = 0.0;
                m[q][p] = 0.0;
            }
        }
    }
    if !converged {
        return Err(GtsError::NoConvergence { sweeps: MAX_SWEEPS });
    }
    let mut eig: [f64; DIM] = std::array::from_fn(|i| m[i][i]);
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}
