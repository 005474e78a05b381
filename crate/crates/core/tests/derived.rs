//! Worked examples whose expected values come from independent oracles in
//! `common`, frozen here after being computed.

mod common;

use approx::assert_relative_eq;
use kriging_mean::*;
use nalgebra::{DMatrix, SymmetricEigen};

use common::*;

fn halving() -> CorrelationModel {
    CorrelationModel::exponential(1.0 / 2f64.ln()).unwrap()
}

#[test]
fn acf_matches_double_loop() {
    let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
    // frozen from brute_acf: 26.25/42 and 11.5/42
    let frozen = [1.0, 0.625, 0.2738095238095238];
    let oracle = brute_acf(&v, 2);
    assert_eq!(oracle.len(), 3);
    for (o, f) in oracle.iter().zip(frozen) {
        assert_relative_eq!(*o, f, epsilon = 1e-15);
    }
    let acf = sample_acf(&v, 2).unwrap();
    for (a, f) in acf.values().iter().zip(frozen) {
        assert_relative_eq!(*a, f, epsilon = 1e-15);
    }
}

#[test]
fn fit_recovers_exact_exponential() {
    let truth = CorrelationModel::exponential(3.0).unwrap();
    let values: Vec<f64> = (0..=12).map(|h| truth.eval(h as f64)).collect();
    let acf = EmpiricalAcf::from_values(values, 200).unwrap();
    let fitted = fit_model(&acf, Family::Exponential).unwrap();
    assert_relative_eq!(fitted.range(), 3.0, max_relative = 0.01);
}

#[test]
fn fit_recovers_other_families() {
    for truth in [
        CorrelationModel::gaussian(2.5).unwrap(),
        CorrelationModel::spherical(7.0).unwrap(),
        CorrelationModel::damped_cosine(4.0, 0.15).unwrap(),
    ] {
        let values: Vec<f64> = (0..=15).map(|h| truth.eval(h as f64)).collect();
        let acf = EmpiricalAcf::from_values(values, 200).unwrap();
        let fitted = fit_model(&acf, truth.family()).unwrap();
        assert_relative_eq!(fitted.range(), truth.range(), max_relative = 0.01);
        if let Some(d) = truth.damping() {
            assert_relative_eq!(fitted.damping().unwrap(), d, max_relative = 0.01);
        }
    }
}

#[test]
fn fit_ar1_acf_gives_log_range() {
    let series = generate_ar1(&Ar1Spec {
        phi: 0.5,
        mean: 0.0,
        sigma: 1.0,
        length: 20_000,
        seed: 5,
    })
    .unwrap();
    let acf = sample_acf(series.values(), 10).unwrap();
    let fitted = fit_model(&acf, Family::Exponential).unwrap();
    let expected = -1.0 / 0.5f64.ln();
    assert_relative_eq!(fitted.range(), expected, max_relative = 0.10);
}

#[test]
fn fit_white_noise_sample_has_tiny_range() {
    let series = generate_ar1(&Ar1Spec {
        phi: 0.0,
        mean: 0.0,
        sigma: 1.0,
        length: 5000,
        seed: 3,
    })
    .unwrap();
    let acf = sample_acf(series.values(), 20).unwrap();
    let fitted = fit_model(&acf, Family::Exponential).unwrap();
    assert!(fitted.range() < 0.5, "{fitted}");
    assert!(fitted.eval(1.0) < 0.15);
}

#[test]
fn weakly_damped_cosine_is_rejected_as_not_pd() {
    let model = CorrelationModel::damped_cosine(7.0, 1e-16).unwrap();
    let n = 40;
    let dense = lambda_dense(&model, n);
    let m = DMatrix::from_fn(n, n, |i, k| dense[i][k]);
    let eig = SymmetricEigen::new(m);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    // numerically rank 2: all but two eigenvalues are at rounding level
    assert!(min < (n as f64) * f64::EPSILON, "min eigenvalue {min}");
    assert!(matches!(
        KrigingSystem::new(model, n),
        Err(Error::CorrelationNotPd { .. })
    ));

    // the same family with real damping is accepted
    let ok = CorrelationModel::damped_cosine(7.0, 0.2).unwrap();
    let dense = lambda_dense(&ok, n);
    let eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, k| dense[i][k]));
    assert!(eig.eigenvalues.iter().all(|&e| e > 1e-3));
    assert!(KrigingSystem::new(ok, n).is_ok());
}

#[test]
fn toeplitz_solve_matches_elimination() {
    let model = halving();
    let sys = KrigingSystem::new(model, 3).unwrap();
    let rhs = assemble_rhs(&model, 3, 5).unwrap();
    let (w_oracle, mu_oracle) = oracle_kriging(&model, 3, &rhs);
    // frozen from the oracle: ω = (0.3, 0.15, 0.55), μ = -0.45
    let frozen_w = [0.3, 0.15, 0.55];
    assert!(max_abs_diff(&w_oracle, &frozen_w) < 1e-14);
    assert_relative_eq!(mu_oracle, -0.45, epsilon = 1e-14);

    let sol = solve_kriging(&sys, &rhs, 5).unwrap();
    assert!(max_abs_diff(&sol.weights, &frozen_w) < 1e-14);
    assert_relative_eq!(sol.multiplier, -0.45, epsilon = 1e-14);
    assert_eq!(sol.j, 5);
}

#[test]
fn toeplitz_classic_weights_and_xi() {
    let model = halving();
    let sys = assemble_lambda(&model, 3).unwrap();
    let x = oracle_inv_ones(&model, 3);
    assert!(max_abs_diff(&x, &[2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]) < 1e-14);
    let s: f64 = x.iter().sum();
    assert_relative_eq!(s, 5.0 / 3.0, epsilon = 1e-14);

    let w = classic_ls_weights(&sys);
    assert!(max_abs_diff(&w, &[0.4, 0.2, 0.4]) < 1e-12);
    assert_relative_eq!(asymptotic_xi(&sys), 0.3, epsilon = 1e-14);

    let est = estimate_mean(&w, &[1.0, 2.0, 3.0]).unwrap();
    let by_hand = 0.4 * 1.0 + 0.2 * 2.0 + 0.4 * 3.0;
    assert_relative_eq!(est, by_hand, epsilon = 1e-14);
    assert_relative_eq!(est, 2.0, epsilon = 1e-12);
}

#[test]
fn residual_vanishes_at_constant_root_rhs() {
    let model = CorrelationModel::gaussian(1.3).unwrap().with_nugget(0.2).unwrap();
    let n = 12;
    let sys = KrigingSystem::new(model, n).unwrap();
    let s: f64 = oracle_inv_ones(&model, n).iter().sum();
    let xi = 1.0 / (2.0 * s);
    let rhs = vec![xi; n];
    let sol = sys.solve(&rhs, n + 1).unwrap();
    assert!(constraint_residual(&sol, &rhs).abs() < 1e-10);
}

#[test]
fn weighted_variance_is_quadratic_form() {
    let model = halving();
    let sys = KrigingSystem::new(model, 3).unwrap();
    let (rhs, sol) = sys.solve_at(5).unwrap();
    let q = oracle_quadratic_form(&model, &sol.weights);
    let stats = SeriesStats::normalized(0.0);
    assert_relative_eq!(weighted_variance(&sol, &rhs, &stats), q, epsilon = 1e-10);
    let scaled = SeriesStats {
        sigma2: 2.5,
        classic_mean: 0.0,
    };
    assert_relative_eq!(weighted_variance(&sol, &rhs, &scaled), 2.5 * q, epsilon = 1e-10);
}

#[test]
fn kriging_variance_far_limit() {
    let model = CorrelationModel::exponential(3.0).unwrap();
    let stats = SeriesStats::normalized(0.0);
    let mut previous = f64::INFINITY;
    for n in [5, 20, 80, 200] {
        let sys = KrigingSystem::new(model, n).unwrap();
        let (rhs, sol) = sys.solve_at(n + 2000).unwrap();
        let s: f64 = oracle_inv_ones(&model, n).iter().sum();
        let expected = 1.0 + 1.0 / s;
        assert_relative_eq!(kriging_variance(&sol, &rhs, &stats), expected, epsilon = 1e-10);
        // direct form 1 - 2ω·ρ + ωᵀΛω
        let direct = 1.0 - 2.0 * sol.weighted_correlation(&rhs) + oracle_quadratic_form(&model, &sol.weights);
        assert_relative_eq!(kriging_variance(&sol, &rhs, &stats), direct, epsilon = 1e-10);
        assert!(expected < previous);
        previous = expected;
    }
}

#[test]
fn exponential_scan_matches_dense_oracle() {
    let model = CorrelationModel::exponential(60.0).unwrap();
    let n = 20;
    let sys = KrigingSystem::new(model, n).unwrap();
    let window: Vec<f64> = (0..n).map(|i| 100.0 + (i as f64 * 0.7).cos()).collect();
    let scan = scan_residuals(&sys, &window, n + 1, 10 * n, 1.0).unwrap();
    assert_eq!(scan.len(), 10 * n - n);
    let s: f64 = oracle_inv_ones(&model, n).iter().sum();

    for p in &scan {
        let rhs: Vec<f64> = (1..=n).map(|i| model.eval((p.j - i) as f64)).collect();
        let (w, mu) = oracle_kriging(&model, n, &rhs);
        let residual: f64 = w.iter().zip(&rhs).map(|(a, b)| a * b).sum::<f64>() + mu;
        let estimate: f64 = w.iter().zip(&window).map(|(a, b)| a * b).sum();
        assert_relative_eq!(p.residual, residual, epsilon = 1e-10);
        assert_relative_eq!(p.estimate, estimate, epsilon = 1e-8);
        assert_relative_eq!(p.multiplier, mu, epsilon = 1e-10);
    }
    // decreasing through zero towards -1/s
    assert!(scan.windows(2).all(|w| w[1].residual < w[0].residual));
    assert!(scan[0].residual > 0.0);
    let tail = scan.last().unwrap().residual;
    assert!(tail < 0.0);
    assert!(tail > -1.0 / s);
    let far = scan_point(&sys, &window, 100_000, 1.0).unwrap();
    assert_relative_eq!(far.residual, -1.0 / s, epsilon = 1e-10);
}

#[test]
fn root_matches_exhaustive_rescan() {
    let model = CorrelationModel::exponential(5.0).unwrap();
    let n = 50;
    let sys = KrigingSystem::new(model, n).unwrap();
    let window: Vec<f64> = (0..n).map(|i| (i % 7) as f64).collect();
    let scan = scan_residuals(&sys, &window, n + 1, 500, 1.0).unwrap();
    let root = find_root_j(&scan, 1e-3).unwrap();

    let mut best = (0, f64::INFINITY);
    for j in n + 1..=500 {
        let rhs: Vec<f64> = (1..=n).map(|i| model.eval((j - i) as f64)).collect();
        let (w, mu) = oracle_kriging(&model, n, &rhs);
        let r = (w.iter().zip(&rhs).map(|(a, b)| a * b).sum::<f64>() + mu).abs();
        if r < best.1 {
            best = (j, r);
        }
    }
    assert_eq!(root.j_star, best.0);
    assert!(root.bracketed);
}

#[test]
fn white_noise_scan_residual_is_minus_one_over_n() {
    let model = CorrelationModel::exponential(1e-9).unwrap();
    for n in [1, 4, 9] {
        let sys = KrigingSystem::new(model, n).unwrap();
        let window = vec![1.0; n];
        for p in scan_residuals(&sys, &window, n + 1, n + 30, 1.0).unwrap() {
            assert_relative_eq!(p.residual, -1.0 / n as f64, epsilon = 1e-14);
        }
    }
}
