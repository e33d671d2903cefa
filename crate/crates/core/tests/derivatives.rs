mod common;

use common::*;
use gts_core::mle::grid_for;
use gts_core::sampler::sample_inverse_cdf;
use gts_core::spectral::{choose_grid, density_table, DerivOrder, DEFAULT_COVERAGE};
use gts_core::GtsParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn char_fn_gradient_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..60 {
        let p = random_params(&mut rng);
        let xi = rng.gen_range(-4.0..4.0);
        let e = grad_fd_error(&p, xi);
        assert!(e < 1e-6, "{p:?} at {xi}: {e:e}");
    }
}

#[test]
fn char_fn_hessian_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for _ in 0..60 {
        let p = random_params(&mut rng);
        let xi = rng.gen_range(-4.0..4.0);
        let e = hess_fd_error(&p, xi);
        assert!(e < 1e-4, "{p:?} at {xi}: {e:e}");
    }
}

fn fixture(truth: &GtsParams, n: usize, seed: u64) -> Vec<f64> {
    let grid = choose_grid(truth, 8192, DEFAULT_COVERAGE).unwrap();
    let table = density_table(truth, &grid, DerivOrder::None).unwrap();
    sample_inverse_cdf(&table, n, seed).unwrap()
}

#[test]
fn score_and_hessian_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for (truth, seed) in [(GtsParams::sp500(), 7), (GtsParams::bitcoin(), 8)] {
        let x = fixture(&truth, 500, seed);
        for _ in 0..3 {
            let p = perturb(&truth, 0.1, &mut rng);
            let grid = grid_for(&x, &p, 8192, DEFAULT_COVERAGE).unwrap();
            let es = score_fd_error(&x, &p, &grid);
            assert!(es < 1e-4, "score at {p:?}: {es:e}");
            let eh = hessian_fd_error(&x, &p, &grid);
            assert!(eh < 1e-3, "hessian at {p:?}: {eh:e}");
        }
    }
}
