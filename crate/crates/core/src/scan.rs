//! Scan of extrapolation indices for the root of the constraint residual.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::format_number;
use crate::kriging::{constraint_residual, dot, KrigingSystem};

pub const SCAN_HEADER: &str = "j,residual,estimate,mu,xi_hat,min_sq_error";

/// One evaluated extrapolation index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub j: usize,
    /// `ω·ρ + μ`
    pub residual: f64,
    /// `ω·v`
    pub estimate: f64,
    pub multiplier: f64,
    /// Mean of the cross-correlation vector.
    pub xi_hat: f64,
    /// `σ²(ω·ρ − μ)`
    pub min_sq_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub j_star: usize,
    pub point: ScanPoint,
    /// The residual changes sign between `j_star` and a scanned neighbour.
    pub bracketed: bool,
}

/// Root value `ξ* = 1 / (2 FᵀΛ⁻¹F)` of the constant-correlation limit.
pub fn asymptotic_xi(system: &KrigingSystem) -> f64 {
    0.5 / system.ones_quadratic_form()
}

/// Evaluates a single extrapolation index.
pub fn scan_point(system: &KrigingSystem, window: &[f64], j: usize, sigma2: f64) -> Result<ScanPoint> {
    let (rhs, solution) = system.solve_at(j)?;
    let wr = solution.weighted_correlation(&rhs);
    Ok(ScanPoint {
        j,
        residual: constraint_residual(&solution, &rhs),
        estimate: dot(&solution.weights, window),
        multiplier: solution.multiplier,
        xi_hat: rhs.iter().sum::<f64>() / rhs.len() as f64,
        min_sq_error: sigma2 * (wr - solution.multiplier),
    })
}

fn check_range(system: &KrigingSystem, window: &[f64], j_from: usize, j_to: usize) -> Result<()> {
    let n = system.n();
    if window.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: window.len(),
        });
    }
    if j_from <= n || j_to < j_from {
        return Err(Error::InvalidRange(format!(
            "need n + 1 <= j_from <= j_to, got n = {n}, j_from = {j_from}, j_to = {j_to}"
        )));
    }
    Ok(())
}

/// Evaluates every `j` in `j_from..=j_to` against the cached factorization.
pub fn scan_residuals(
    system: &KrigingSystem,
    window: &[f64],
    j_from: usize,
    j_to: usize,
    sigma2: f64,
) -> Result<Vec<ScanPoint>> {
    check_range(system, window, j_from, j_to)?;
    (j_from..=j_to)
        .map(|j| scan_point(system, window, j, sigma2))
        .collect()
}

/// Same output as [`scan_residuals`], evaluated on the current rayon pool.
pub fn par_scan_residuals(
    system: &KrigingSystem,
    window: &[f64],
    j_from: usize,
    j_to: usize,
    sigma2: f64,
) -> Result<Vec<ScanPoint>> {
    check_range(system, window, j_from, j_to)?;
    (j_from..=j_to)
        .into_par_iter()
        .map(|j| scan_point(system, window, j, sigma2))
        .collect()
}

fn sign_change(a: f64, b: f64) -> bool {
    a == 0.0 || b == 0.0 || (a < 0.0) != (b < 0.0)
}

/// Picks the scanned index with the smallest `|residual|`, ties toward the
/// smaller `j`.
///
/// Fails with [`Error::NoRootInRange`] when the best residual exceeds
/// `tolerance` and does not sit next to a sign change; the error carries the
/// best point found.
pub fn find_root_j(scan: &[ScanPoint], tolerance: f64) -> Result<RootResult> {
    if scan.is_empty() {
        return Err(Error::EmptyScan);
    }
    let mut best = 0;
    for (k, p) in scan.iter().enumerate() {
        if p.residual.abs() < scan[best].residual.abs() {
            best = k;
        }
    }
    let point = scan[best];
    let r = point.residual;
    let bracketed = r == 0.0
        || (best > 0 && sign_change(scan[best - 1].residual, r))
        || (best + 1 < scan.len() && sign_change(r, scan[best + 1].residual));
    let result = RootResult {
        j_star: point.j,
        point,
        bracketed,
    };
    if !bracketed && r.abs() > tolerance {
        return Err(Error::NoRootInRange {
            best: Box::new(result),
        });
    }
    Ok(result)
}

/// Writes the scan CSV with header [`SCAN_HEADER`].
pub fn write_scan_csv<W: Write>(scan: &[ScanPoint], mut out: W) -> Result<()> {
    writeln!(out, "{SCAN_HEADER}")?;
    for p in scan {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.j,
            format_number(p.residual),
            format_number(p.estimate),
            format_number(p.multiplier),
            format_number(p.xi_hat),
            format_number(p.min_sq_error),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::CorrelationModel;
    use approx::assert_relative_eq;

    fn point(j: usize, residual: f64) -> ScanPoint {
        ScanPoint {
            j,
            residual,
            estimate: 0.0,
            multiplier: 0.0,
            xi_hat: 0.0,
            min_sq_error: 0.0,
        }
    }

    #[test]
    fn picks_point_next_to_sign_change() {
        let scan: Vec<_> = [0.2, 0.05, -0.01, -0.3]
            .iter()
            .enumerate()
            .map(|(k, &r)| point(10 + k, r))
            .collect();
        let root = find_root_j(&scan, 0.02).unwrap();
        assert_eq!(root.j_star, 12);
        assert!(root.bracketed);
    }

    #[test]
    fn ties_go_to_smaller_j() {
        let scan = vec![point(5, 0.1), point(6, -0.1), point(7, 0.1)];
        assert_eq!(find_root_j(&scan, 1.0).unwrap().j_star, 5);
    }

    #[test]
    fn unbracketed_within_tolerance_is_accepted() {
        let scan = vec![point(5, 0.3), point(6, 0.0005), point(7, 0.001)];
        let root = find_root_j(&scan, 1e-3).unwrap();
        assert_eq!(root.j_star, 6);
        assert!(!root.bracketed);
    }

    #[test]
    fn empty_scan_is_an_error() {
        assert!(matches!(find_root_j(&[], 1e-3), Err(Error::EmptyScan)));
    }

    #[test]
    fn white_noise_has_no_root() {
        let model = CorrelationModel::exponential(1e-9).unwrap();
        let sys = KrigingSystem::new(model, 4).unwrap();
        let window = [1.0, 2.0, 3.0, 4.0];
        let scan = scan_residuals(&sys, &window, 5, 40, 1.0).unwrap();
        for p in &scan {
            assert_relative_eq!(p.residual, -0.25, epsilon = 1e-15);
        }
        match find_root_j(&scan, 1e-3) {
            Err(Error::NoRootInRange { best }) => {
                assert_eq!(best.j_star, 5);
                assert!(!best.bracketed);
            }
            other => panic!("expected NoRootInRange, got {other:?}"),
        }
    }

    #[test]
    fn asymptotic_xi_examples() {
        let white = KrigingSystem::new(CorrelationModel::exponential(1e-9).unwrap(), 4).unwrap();
        assert_relative_eq!(asymptotic_xi(&white), 0.125, epsilon = 1e-15);
        let single = KrigingSystem::new(CorrelationModel::gaussian(2.0).unwrap(), 1).unwrap();
        assert_relative_eq!(asymptotic_xi(&single), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn range_validation() {
        let sys = KrigingSystem::new(CorrelationModel::exponential(2.0).unwrap(), 3).unwrap();
        let w = [1.0, 2.0, 3.0];
        assert!(scan_residuals(&sys, &w, 3, 10, 1.0).is_err());
        assert!(scan_residuals(&sys, &w, 8, 7, 1.0).is_err());
        assert!(scan_residuals(&sys, &w[..2], 4, 7, 1.0).is_err());
        assert_eq!(scan_residuals(&sys, &w, 4, 4, 1.0).unwrap().len(), 1);
    }

    #[test]
    fn parallel_scan_matches_serial() {
        let sys = KrigingSystem::new(CorrelationModel::exponential(30.0).unwrap(), 20).unwrap();
        let w: Vec<f64> = (0..20).map(|i| (i as f64).sqrt()).collect();
        let a = scan_residuals(&sys, &w, 21, 300, 2.0).unwrap();
        let b = par_scan_residuals(&sys, &w, 21, 300, 2.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scan_csv_header() {
        let mut buf = Vec::new();
        write_scan_csv(&[point(3, -0.5)], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "j,residual,estimate,mu,xi_hat,min_sq_error\n3,-0.5,0,0,0,0\n"
        );
    }
}
