//! Independent reference computations shared by the integration tests.
//! None of these go through the library's factorization or scan code.

#![allow(clippy::needless_range_loop)]

#![allow(dead_code)]

use kriging_mean::{CorrelationModel, Family};
use rand::Rng;

/// Gaussian elimination with partial pivoting on a dense row-major system.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let m = b.len();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        assert!(p != 0.0, "singular oracle system");
        for row in col + 1..m {
            let f = a[row][col] / p;
            if f == 0.0 {
                continue;
            }
            for k in col..m {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let s: f64 = (row + 1..m).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Correlation matrix built directly from the model, element by element.
pub fn lambda_dense(model: &CorrelationModel, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|k| model.eval((i as f64 - k as f64).abs())).collect())
        .collect()
}

/// Weights and multiplier from elimination on the full `(n+1)×(n+1)`
/// bordered matrix.
pub fn oracle_kriging(model: &CorrelationModel, n: usize, rhs: &[f64]) -> (Vec<f64>, f64) {
    let mut a = lambda_dense(model, n);
    for row in a.iter_mut() {
        row.push(1.0);
    }
    let mut border = vec![1.0; n];
    border.push(0.0);
    a.push(border);
    let mut b = rhs.to_vec();
    b.push(1.0);
    let mut x = dense_solve(a, b);
    let mu = x.pop().unwrap();
    (x, mu)
}

/// `Λ⁻¹F` by elimination.
pub fn oracle_inv_ones(model: &CorrelationModel, n: usize) -> Vec<f64> {
    dense_solve(lambda_dense(model, n), vec![1.0; n])
}

pub fn oracle_quadratic_form(model: &CorrelationModel, w: &[f64]) -> f64 {
    let n = w.len();
    let mut total = 0.0;
    for i in 0..n {
        for k in 0..n {
            total += w[i] * model.eval((i as f64 - k as f64).abs()) * w[k];
        }
    }
    total
}

/// Biased ACF by a literal double loop.
pub fn brute_acf(v: &[f64], max_lag: usize) -> Vec<f64> {
    let n = v.len();
    let mut mean = 0.0;
    for x in v {
        mean += x;
    }
    mean /= n as f64;
    let mut c0 = 0.0;
    for t in 0..n {
        c0 += (v[t] - mean) * (v[t] - mean);
    }
    let mut out = Vec::new();
    for h in 0..=max_lag {
        let mut c = 0.0;
        for t in 0..n {
            if t + h < n {
                c += (v[t] - mean) * (v[t + h] - mean);
            }
        }
        out.push(c / c0);
    }
    out
}

/// A random model from a parameter box where `Λ` stays well conditioned.
pub fn random_model<R: Rng>(rng: &mut R) -> CorrelationModel {
    let family = Family::ALL[rng.random_range(0..4)];
    let nugget = if rng.random_bool(0.3) {
        rng.random_range(0.0..0.5)
    } else {
        0.0
    };
    let model = match family {
        Family::Exponential => CorrelationModel::exponential(rng.random_range(0.2..60.0)),
        Family::Gaussian => CorrelationModel::gaussian(rng.random_range(0.2..1.5)),
        Family::Spherical => CorrelationModel::spherical(rng.random_range(0.5..40.0)),
        Family::DampedCosine => {
            CorrelationModel::damped_cosine(rng.random_range(1.0..20.0), rng.random_range(0.05..1.0))
        }
    };
    model.unwrap().with_nugget(nugget).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
