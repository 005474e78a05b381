//! Ordinary-kriging estimation of the unknown constant mean of a stationary
//! series.
//!
//! The estimator scans extrapolation indices `j = n+1, n+2, …` beyond an
//! observed window of `n` values, solves the ordinary-kriging system for
//! each `j` against one cached factorization, and picks the index where the
//! constraint residual `ω·ρ + μ` vanishes. At that index the kriging
//! weights give a numerical least-squares estimate of the mean together
//! with its minimized square error. The classic least-squares weights
//! `Λ⁻¹F / (F′Λ⁻¹F)` are reported alongside as the baseline.
//!
//! ```
//! use kriging_mean::{CorrelationModel, KrigingSystem, scan_residuals, find_root_j};
//!
//! let model = CorrelationModel::exponential(400.0).unwrap();
//! let system = KrigingSystem::new(model, 100).unwrap();
//! let window: Vec<f64> = (0..100).map(|i| 10.0 + (i as f64 * 0.3).sin()).collect();
//! let scan = scan_residuals(&system, &window, 101, 2000, 1.0).unwrap();
//! let root = find_root_j(&scan, 1e-3).unwrap();
//! assert!(root.bracketed);
//! ```

mod correlation;
mod error;
mod format;
mod kriging;
mod linalg;
pub mod pipeline;
mod scan;
mod series;
mod synthetic;

pub use correlation::{
    fit_model, fit_model_with_nugget, sample_acf, write_acf_csv, CorrelationModel, EmpiricalAcf,
    Family,
};
pub use error::{Error, Result};
pub use format::format_number;
pub use kriging::{
    assemble_lambda, assemble_rhs, classic_ls_weights, constraint_residual, estimate_mean,
    kriging_variance, solve_kriging, weighted_variance, KrigingSolution, KrigingSystem,
    SeriesStats,
};
pub use scan::{
    asymptotic_xi, find_root_j, par_scan_residuals, scan_point, scan_residuals, write_scan_csv,
    RootResult, ScanPoint, SCAN_HEADER,
};
pub use series::{
    load_series, load_series_path, write_outputs, write_plot_csv, write_report_csv, write_series,
    OutputPaths, ReportRow, TimeSeries, PLOT_HEADER, REPORT_HEADER,
};
pub use synthetic::{
    generate_ar1, mc_asymptotics, write_convergence_csv, Ar1Spec, ConvergenceRow,
    CONVERGENCE_HEADER,
};
