//! End-to-end run on an observed series: fit the correlation model on the
//! first `n` values, freeze it, scan `j = n+1..=j_max` and pick the root.

use std::fmt;
use std::str::FromStr;

use crate::correlation::{fit_model_with_nugget, sample_acf, CorrelationModel, EmpiricalAcf, Family};
use crate::error::{Error, Result};
use crate::kriging::{estimate_mean, KrigingSystem, SeriesStats};
use crate::scan::{find_root_j, par_scan_residuals, scan_residuals, RootResult, ScanPoint};
use crate::series::{ReportRow, TimeSeries};

pub const DEFAULT_TOLERANCE: f64 = 1e-3;

/// Scale in which `min_sq_error` is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Units {
    /// `σ² = 1`: correlation units.
    #[default]
    Normalized,
    /// Multiplied by the window's estimated `σ²`.
    Absolute,
}

impl FromStr for Units {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normalized" => Ok(Units::Normalized),
            "absolute" => Ok(Units::Absolute),
            other => Err(Error::InvalidRange(format!("unknown units `{other}`"))),
        }
    }
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Units::Normalized => "normalized",
            Units::Absolute => "absolute",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub index_name: String,
    pub n: usize,
    pub family: Family,
    pub nugget: f64,
    /// Largest ACF lag used for fitting; defaults to `max(1, n / 4)`.
    pub max_lag: Option<usize>,
    /// Last scanned index; defaults to `10 n`.
    pub j_max: Option<usize>,
    pub tolerance: f64,
    pub units: Units,
    pub parallel: bool,
}

impl PipelineConfig {
    pub fn new(n: usize) -> Self {
        Self {
            index_name: "series".into(),
            n,
            family: Family::default(),
            nugget: 0.0,
            max_lag: None,
            j_max: None,
            tolerance: DEFAULT_TOLERANCE,
            units: Units::default(),
            parallel: false,
        }
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag.unwrap_or((self.n / 4).max(1))
    }

    pub fn j_max(&self) -> usize {
        self.j_max.unwrap_or(10 * self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::InvalidRange(format!(
                "window size n must be at least 4 to fit a model, got {}",
                self.n
            )));
        }
        if self.j_max() <= self.n {
            return Err(Error::InvalidRange(format!(
                "j_max = {} must exceed n = {}",
                self.j_max(),
                self.n
            )));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidRange(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub n: usize,
    pub acf: EmpiricalAcf,
    pub model: CorrelationModel,
    pub stats: SeriesStats,
    /// Classic least-squares estimate of the mean over the window.
    pub classic_estimate: f64,
    pub scan: Vec<ScanPoint>,
    /// Best scanned index; an accepted root only when `root_found`.
    pub root: RootResult,
    pub root_found: bool,
}

impl PipelineOutput {
    pub fn report_row(&self, index_name: &str) -> Option<ReportRow> {
        self.root_found.then(|| ReportRow {
            index_name: index_name.to_string(),
            n: self.n,
            j_star: self.root.j_star,
            estimate: self.root.point.estimate,
            min_sq_error: self.root.point.min_sq_error,
            residual: self.root.point.residual,
        })
    }
}

/// Fits the model on the window.
pub fn fit_window(window: &[f64], config: &PipelineConfig) -> Result<(EmpiricalAcf, CorrelationModel)> {
    let acf = sample_acf(window, config.max_lag())?;
    let model = fit_model_with_nugget(&acf, config.family, config.nugget)?;
    Ok((acf, model))
}

pub fn run_pipeline(series: &TimeSeries, config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate()?;
    let window = series.window(config.n)?;
    let (acf, model) = fit_window(window, config)?;
    let system = KrigingSystem::new(model, config.n)?;
    let stats = SeriesStats::from_window(&system, window)?;
    let classic_estimate = estimate_mean(&system.classic_ls_weights(), window)?;
    let sigma2 = match config.units {
        Units::Normalized => 1.0,
        Units::Absolute => stats.sigma2,
    };
    let scan = if config.parallel {
        par_scan_residuals(&system, window, config.n + 1, config.j_max(), sigma2)?
    } else {
        scan_residuals(&system, window, config.n + 1, config.j_max(), sigma2)?
    };
    let (root, root_found) = match find_root_j(&scan, config.tolerance) {
        Ok(root) => (root, true),
        Err(Error::NoRootInRange { best }) => (*best, false),
        Err(e) => return Err(e),
    };
    Ok(PipelineOutput {
        n: config.n,
        acf,
        model,
        stats,
        classic_estimate,
        scan,
        root,
        root_found,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate_ar1, Ar1Spec};

    #[test]
    fn defaults() {
        let c = PipelineConfig::new(132);
        assert_eq!(c.max_lag(), 33);
        assert_eq!(c.j_max(), 1320);
        assert_eq!(c.tolerance, 1e-3);
        assert_eq!(c.units, Units::Normalized);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(PipelineConfig::new(3).validate().is_err());
        let mut c = PipelineConfig::new(10);
        c.j_max = Some(10);
        assert!(c.validate().is_err());
        let mut c = PipelineConfig::new(10);
        c.tolerance = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn units_scale_min_sq_error_only() {
        let series = generate_ar1(&Ar1Spec {
            phi: 0.95,
            mean: 50.0,
            sigma: 3.0,
            length: 200,
            seed: 11,
        })
        .unwrap();
        let mut config = PipelineConfig::new(80);
        let a = run_pipeline(&series, &config).unwrap();
        config.units = Units::Absolute;
        let b = run_pipeline(&series, &config).unwrap();
        assert_eq!(a.root.j_star, b.root.j_star);
        for (p, q) in a.scan.iter().zip(&b.scan) {
            assert_eq!(p.residual, q.residual);
            assert_eq!(p.estimate, q.estimate);
            assert_eq!(p.min_sq_error * a.stats.sigma2, q.min_sq_error);
        }
    }
}
