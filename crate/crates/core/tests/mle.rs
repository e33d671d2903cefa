mod common;

use common::direct_loglik;
use gts_core::linalg::eigen_sym;
use gts_core::mle::*;
use gts_core::model::cumulants;
use gts_core::sampler::quantile_sample;
use gts_core::spectral::{choose_grid, density_table, DerivOrder, DEFAULT_COVERAGE};
use gts_core::{GtsError, GtsParams};

fn normal_like() -> GtsParams {
    // Many small symmetric jumps with unit variance.
    let lambda: f64 = 10.0;
    let alpha = lambda.powf(1.5) / (2.0 * gts_core::special::gamma_fn(1.5).unwrap());
    GtsParams::new(0.0, 0.5, 0.5, alpha, alpha, lambda, lambda)
}

fn stored_sample() -> Vec<f64> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/normal_like_sample.csv");
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records().map(|r| r.unwrap()[0].parse().unwrap()).collect()
}

fn stratified(truth: &GtsParams, n: usize) -> Vec<f64> {
    let grid = choose_grid(truth, 8192, DEFAULT_COVERAGE).unwrap();
    let table = density_table(truth, &grid, DerivOrder::None).unwrap();
    quantile_sample(&table, n).unwrap()
}

#[test]
fn loglik_matches_direct_inversion() {
    let p = normal_like();
    assert!((cumulants(&p, 2).unwrap().get(2) - 1.0).abs() < 1e-12);
    let x = stored_sample();
    let table = loglik(&x, &p, 8192).unwrap();
    let direct = direct_loglik(&p, &x);
    assert!((table - direct).abs() < 1e-6, "{table} vs {direct}");
}

#[test]
fn loglik_matches_direct_inversion_for_skewed_laws() {
    let x: Vec<f64> = stored_sample().iter().map(|v| 2.0 * v).collect();
    for p in [GtsParams::sp500(), GtsParams::bitcoin()] {
        let table = loglik(&x, &p, 8192).unwrap();
        let direct = direct_loglik(&p, &x);
        assert!((table - direct).abs() < 1e-6, "{table} vs {direct}");
    }
}

#[test]
fn symmetric_sample_has_small_location_score() {
    let p = GtsParams::new(0.0, 0.5, 0.5, 0.6, 0.6, 0.8, 0.8);
    let half = stratified(&p, 1000);
    let mut x: Vec<f64> = half.iter().map(|v| v.abs()).collect();
    x.extend(half.iter().map(|v| -v.abs()));
    let g = score(&x, &p, 8192).unwrap();
    assert!(g[0].abs() < 1e-2 * x.len() as f64, "{}", g[0]);
}

#[test]
fn hessian_is_symmetric_and_negative_at_the_optimum_of_a_stratified_sample() {
    let truth = GtsParams::sp500();
    let x = stratified(&truth, 4000);
    let r = fit(&x, &truth, &FitOptions::default()).unwrap();
    assert_eq!(r.status, FitStatus::Converged);
    let h = observed_hessian(&x, &r.params, 8192).unwrap();
    for i in 0..7 {
        for j in 0..7 {
            assert_eq!(h.get(i, j), h.get(j, i));
        }
    }
    assert!(eigen_sym(&h).unwrap()[0] < 0.0);
}

#[test]
fn starting_at_truth_converges_quadratically() {
    for truth in [GtsParams::sp500(), GtsParams::bitcoin()] {
        let x = stratified(&truth, 4000);
        let r = fit(&x, &truth, &FitOptions::default()).unwrap();
        assert_eq!(r.status, FitStatus::Converged);
        let rows = &r.trace.rows;
        assert!(rows.len() <= 4, "{} rows", rows.len());
        let last = rows.last().unwrap();
        assert!(last.grad_norm <= 1e-6 && last.max_eigenvalue <= 0.0);
        for w in rows[1..].windows(2) {
            assert!(w[1].grad_norm < w[0].grad_norm);
        }
        for w in rows.windows(2) {
            assert!(w[1].log_ml >= w[0].log_ml);
            assert_eq!(w[1].iteration, w[0].iteration + 1);
        }
        let v = r.params.to_array();
        for (a, b) in v.iter().zip(truth.to_array()) {
            assert!(((a - b) / b).abs() < 0.05, "{v:?}");
        }
    }
}

#[test]
fn heuristic_start_reaches_the_same_optimum() {
    let truth = GtsParams::sp500();
    let x = stratified(&truth, 4000);
    let init = heuristic_init(&x).unwrap();
    let from_truth = fit(&x, &truth, &FitOptions::default()).unwrap();
    let from_init = fit(&x, &init, &FitOptions::default()).unwrap();
    assert_eq!(from_init.status, FitStatus::Converged);
    for w in from_init.trace.rows.windows(2) {
        assert!(w[1].log_ml >= w[0].log_ml);
    }
    for (a, b) in from_init.params.to_array().iter().zip(from_truth.params.to_array()) {
        assert!((a - b).abs() < 1e-4 * b.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn trace_csv_columns() {
    let truth = GtsParams::sp500();
    let x = stratified(&truth, 1000);
    let opts = FitOptions {
        max_iter: 2,
        ..FitOptions::default()
    };
    let r = fit(&x, &heuristic_init(&x).unwrap(), &opts).unwrap();
    assert_eq!(r.status, FitStatus::MaxIter);
    let mut buf = Vec::new();
    r.trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iteration,mu,beta_plus,beta_minus,alpha_plus,alpha_minus,lambda_plus,lambda_minus,log_ml,grad_norm,max_eigenvalue"
    );
    assert_eq!(lines.count(), 2);
}

#[test]
fn invalid_inputs_fail_with_the_trace_so_far() {
    let bad = GtsParams::new(0.0, 1.2, 0.5, 1.0, 1.0, 1.0, 1.0);
    let e = fit(&[0.1, 0.2], &bad, &FitOptions::default()).unwrap_err();
    assert!(matches!(e.error, GtsError::Domain { field: "beta_plus", .. }));
    assert!(e.trace.rows.is_empty());
    let e = fit(&[], &GtsParams::sp500(), &FitOptions::default()).unwrap_err();
    assert_eq!(e.error, GtsError::EmptySample);
    let opts = FitOptions {
        grad_tol: 0.0,
        ..FitOptions::default()
    };
    assert!(fit(&[0.1], &GtsParams::sp500(), &opts).is_err());
}
