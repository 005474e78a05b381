//! The ordinary-kriging system for a window of `n` consecutive observations.
//!
//! Unknowns are the weights `ω` and the Lagrange multiplier `μ`:
//!
//! ```text
//! [ Λ  F ] [ω]   [ρ]
//! [ Fᵀ 0 ] [μ] = [1]
//! ```
//!
//! with `Λ[i][k] = ρ(|i-k|)`, `F` the ones vector and `ρ[i] = ρ(|i-j|)` for
//! the extrapolation index `j`. The augmented matrix does not depend on `j`,
//! so `Λ` is factored once and the border is eliminated through the cached
//! vector `Λ⁻¹F`:
//!
//! ```text
//! b = Λ⁻¹ρ,   μ = (Fᵀb − 1) / (FᵀΛ⁻¹F),   ω = b − μ Λ⁻¹F
//! ```
//!
//! Indices follow the 1-based convention of the observation window:
//! `i = 1..=n` and `j ≥ n + 1`.

use crate::correlation::CorrelationModel;
use crate::error::{Error, Result};
use crate::linalg::Cholesky;

/// Tolerance on `Σω − 1` accepted by [`estimate_mean`].
const WEIGHT_SUM_TOLERANCE: f64 = 1e-8;

/// Correlation matrix of an `n`-point window with its cached factorization.
///
/// Immutable after construction; solves only read the factor, so one system
/// can be shared across threads.
#[derive(Debug, Clone)]
pub struct KrigingSystem {
    model: CorrelationModel,
    n: usize,
    lambda: Vec<f64>,
    chol: Cholesky,
    inv_ones: Vec<f64>,
    ones_quad: f64,
}

impl KrigingSystem {
    /// Assembles `Λ` from `model` and factors it.
    pub fn new(model: CorrelationModel, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidRange("window size n must be at least 1".into()));
        }
        // Toeplitz: one evaluation per lag
        let by_lag: Vec<f64> = (0..n).map(|h| model.eval(h as f64)).collect();
        let mut lambda = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                lambda[i * n + k] = by_lag[i.abs_diff(k)];
            }
        }
        let chol = Cholesky::factor(&lambda, n)?;
        let inv_ones = chol.solve(&vec![1.0; n]);
        let ones_quad: f64 = inv_ones.iter().sum();
        if !(ones_quad.is_finite() && ones_quad > 0.0) {
            return Err(Error::SingularSystem);
        }
        Ok(Self {
            model,
            n,
            lambda,
            chol,
            inv_ones,
            ones_quad,
        })
    }

    pub fn model(&self) -> &CorrelationModel {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `Λ[i][k]` (0-based).
    pub fn lambda(&self, i: usize, k: usize) -> f64 {
        self.lambda[i * self.n + k]
    }

    /// Row-major `n×n` correlation matrix.
    pub fn lambda_matrix(&self) -> &[f64] {
        &self.lambda
    }

    /// `FᵀΛ⁻¹F`.
    pub fn ones_quadratic_form(&self) -> f64 {
        self.ones_quad
    }

    /// `Λ⁻¹F`.
    pub fn inv_ones(&self) -> &[f64] {
        &self.inv_ones
    }

    /// Cross-correlation vector for extrapolation index `j`.
    pub fn rhs(&self, j: usize) -> Result<Vec<f64>> {
        assemble_rhs(&self.model, self.n, j)
    }

    /// Solves the augmented system for the right-hand side `rhs`.
    pub fn solve(&self, rhs: &[f64], j: usize) -> Result<KrigingSolution> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: rhs.len(),
            });
        }
        debug_assert_eq!(self.chol.dim(), self.n);
        let b = self.chol.solve(rhs);
        let multiplier = (b.iter().sum::<f64>() - 1.0) / self.ones_quad;
        let weights = b
            .iter()
            .zip(&self.inv_ones)
            .map(|(bi, ai)| bi - multiplier * ai)
            .collect();
        Ok(KrigingSolution {
            j,
            weights,
            multiplier,
        })
    }

    /// Assembles the right-hand side for `j` and solves.
    pub fn solve_at(&self, j: usize) -> Result<(Vec<f64>, KrigingSolution)> {
        let rhs = self.rhs(j)?;
        let solution = self.solve(&rhs, j)?;
        Ok((rhs, solution))
    }

    /// Classic least-squares weights `Λ⁻¹F / (FᵀΛ⁻¹F)`, renormalized to sum to one.
    pub fn classic_ls_weights(&self) -> Vec<f64> {
        let total: f64 = self.inv_ones.iter().sum();
        self.inv_ones.iter().map(|a| a / total).collect()
    }

    /// Max-norm residual of the augmented system `[Λ F; Fᵀ 0][ω; μ] − [ρ; 1]`.
    pub fn augmented_residual(&self, solution: &KrigingSolution, rhs: &[f64]) -> f64 {
        let n = self.n;
        let w = &solution.weights;
        let mut worst: f64 = (w.iter().sum::<f64>() - 1.0).abs();
        for (row, r) in self.lambda.chunks_exact(n).zip(rhs) {
            let lw: f64 = row.iter().zip(w).map(|(l, x)| l * x).sum();
            worst = worst.max((lw + solution.multiplier - r).abs());
        }
        worst
    }

    /// `ωᵀΛω`.
    pub fn quadratic_form(&self, weights: &[f64]) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| {
                let row = &self.lambda[i * n..(i + 1) * n];
                weights[i] * row.iter().zip(weights).map(|(l, x)| l * x).sum::<f64>()
            })
            .sum()
    }
}

/// Weights `ω_j` and multiplier `μ_j` for one extrapolation index.
#[derive(Debug, Clone, PartialEq)]
pub struct KrigingSolution {
    pub j: usize,
    pub weights: Vec<f64>,
    pub multiplier: f64,
}

impl KrigingSolution {
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `ω·ρ`.
    pub fn weighted_correlation(&self, rhs: &[f64]) -> f64 {
        dot(&self.weights, rhs)
    }
}

/// Variance scale and the classic plug-in center of a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesStats {
    pub sigma2: f64,
    pub classic_mean: f64,
}

impl SeriesStats {
    /// `σ² = 1`, for reporting in correlation units.
    pub fn normalized(classic_mean: f64) -> Self {
        Self {
            sigma2: 1.0,
            classic_mean,
        }
    }

    /// Classic least-squares mean of `window` and the biased variance around it.
    pub fn from_window(system: &KrigingSystem, window: &[f64]) -> Result<Self> {
        let weights = system.classic_ls_weights();
        let classic_mean = estimate_mean(&weights, window)?;
        let sigma2 =
            window.iter().map(|v| (v - classic_mean).powi(2)).sum::<f64>() / window.len() as f64;
        Ok(Self {
            sigma2,
            classic_mean,
        })
    }
}

pub fn assemble_lambda(model: &CorrelationModel, n: usize) -> Result<KrigingSystem> {
    KrigingSystem::new(*model, n)
}

/// `ρ(|i − j|)` for `i = 1..=n`.
pub fn assemble_rhs(model: &CorrelationModel, n: usize, j: usize) -> Result<Vec<f64>> {
    if j <= n {
        return Err(Error::InvalidRange(format!(
            "extrapolation index j = {j} must exceed n = {n}"
        )));
    }
    Ok((1..=n).map(|i| model.eval((j - i) as f64)).collect())
}

pub fn solve_kriging(system: &KrigingSystem, rhs: &[f64], j: usize) -> Result<KrigingSolution> {
    system.solve(rhs, j)
}

pub fn classic_ls_weights(system: &KrigingSystem) -> Vec<f64> {
    system.classic_ls_weights()
}

/// Weighted average `ω·v`.
pub fn estimate_mean(weights: &[f64], values: &[f64]) -> Result<f64> {
    if weights.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            got: values.len(),
        });
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::WeightsNotNormalized(total));
    }
    Ok(dot(weights, values))
}

/// `ω·ρ + μ`; the numerical estimator sits where this vanishes.
pub fn constraint_residual(solution: &KrigingSolution, rhs: &[f64]) -> f64 {
    solution.weighted_correlation(rhs) + solution.multiplier
}

/// Minimized variance of the weighted estimator, `σ²(ω·ρ − μ)`.
///
/// Equals `σ² ωᵀΛω` because `Λω = ρ − μF` and `Fᵀω = 1`.
pub fn weighted_variance(solution: &KrigingSolution, rhs: &[f64], stats: &SeriesStats) -> f64 {
    stats.sigma2 * (solution.weighted_correlation(rhs) - solution.multiplier)
}

/// Prediction error variance `E[(V_j − ω·V)²] = σ²(1 − (ω·ρ + μ))`.
pub fn kriging_variance(solution: &KrigingSolution, rhs: &[f64], stats: &SeriesStats) -> f64 {
    stats.sigma2 * (1.0 - constraint_residual(solution, rhs))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
