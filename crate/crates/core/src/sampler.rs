//! Seeded inverse-CDF sampling from a density table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GtsError, Result};
use crate::risk::quantile::var;
use crate::spectral::DensityTable;

/// Levels the quantile routine can bracket.
fn sampling_range(table: &DensityTable) -> Result<(f64, f64)> {
    let c = &table.cdf;
    if c.len() < 8 {
        return Err(GtsError::Grid(format!(
            "table of {} nodes is too short to sample",
            c.len()
        )));
    }
    let lo = c[2].next_up();
    let hi = c[c.len() - 3].min(1.0 - f64::EPSILON);
    if !(lo < hi) {
        return Err(GtsError::Grid("table CDF is flat over the samplable range".into()));
    }
    Ok((lo, hi))
}

/// Draws `n` variates as `var(table, u)` with `u` uniform, reproducible for a given seed.
///
/// Uniforms are clamped to the part of the CDF the quantile routine can
/// bracket, which cuts off at most a few nodes of tail mass on each side.
pub fn sample_inverse_cdf(table: &DensityTable, n: usize, seed: u64) -> Result<Vec<f64>> {
    let (lo, hi) = sampling_range(table)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            var(table, u.clamp(lo, hi))
        })
        .collect()
}

/// Deterministic stratified sample: the quantiles at `(i + 1/2)/n`.
pub fn quantile_sample(table: &DensityTable, n: usize) -> Result<Vec<f64>> {
    let (lo, hi) = sampling_range(table)?;
    (0..n)
        .map(|i| var(table, ((i as f64 + 0.5) / n as f64).clamp(lo, hi)))
        .collect()
}
