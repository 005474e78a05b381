//! Stationary correlation functions and their fit to an empirical ACF.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::format::format_number;

/// Shape of a stationary correlation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Family {
    /// `exp(-h / range)`; the exact ACF of an AR(1) process.
    #[default]
    Exponential,
    /// `exp(-(h / range)^2)`.
    Gaussian,
    /// `1 - 1.5 h/range + 0.5 (h/range)^3` inside the range, zero beyond.
    Spherical,
    /// `exp(-damping h) cos(pi h / range)`; `range` is the half-period.
    DampedCosine,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Exponential,
        Family::Gaussian,
        Family::Spherical,
        Family::DampedCosine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Exponential => "exponential",
            Family::Gaussian => "gaussian",
            Family::Spherical => "spherical",
            Family::DampedCosine => "damped-cosine",
        }
    }

    /// Nonnegative and nonincreasing in the lag.
    pub fn is_monotone(self) -> bool {
        !matches!(self, Family::DampedCosine)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "exponential" | "exp" => Ok(Family::Exponential),
            "gaussian" | "gauss" => Ok(Family::Gaussian),
            "spherical" => Ok(Family::Spherical),
            "damped-cosine" | "dampedcosine" => Ok(Family::DampedCosine),
            other => Err(Error::InvalidModel(format!("unknown family `{other}`"))),
        }
    }
}

/// A parametric stationary correlation function `ρ(h)`, validated on
/// construction.
///
/// For lags `h > 0` the family shape is scaled by `1 - nugget`, so the
/// nugget is the jump of `ρ` at the origin while `ρ(0)` stays exactly 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationModel {
    family: Family,
    range: f64,
    nugget: f64,
    damping: Option<f64>,
}

impl CorrelationModel {
    pub fn new(family: Family, range: f64, nugget: f64, damping: Option<f64>) -> Result<Self> {
        if !(range.is_finite() && range > 0.0) {
            return Err(Error::InvalidModel(format!("range must be positive, got {range}")));
        }
        if !(0.0..1.0).contains(&nugget) {
            return Err(Error::InvalidModel(format!("nugget must lie in [0, 1), got {nugget}")));
        }
        let damping = match (family, damping) {
            (Family::DampedCosine, Some(d)) if d.is_finite() && d > 0.0 => Some(d),
            (Family::DampedCosine, Some(d)) => {
                return Err(Error::InvalidModel(format!("damping must be positive, got {d}")))
            }
            (Family::DampedCosine, None) => {
                return Err(Error::InvalidModel("damped-cosine requires a damping".into()))
            }
            (_, Some(_)) => {
                return Err(Error::InvalidModel(format!("{family} takes no damping parameter")))
            }
            (_, None) => None,
        };
        Ok(Self {
            family,
            range,
            nugget,
            damping,
        })
    }

    pub fn exponential(range: f64) -> Result<Self> {
        Self::new(Family::Exponential, range, 0.0, None)
    }

    pub fn gaussian(range: f64) -> Result<Self> {
        Self::new(Family::Gaussian, range, 0.0, None)
    }

    pub fn spherical(range: f64) -> Result<Self> {
        Self::new(Family::Spherical, range, 0.0, None)
    }

    pub fn damped_cosine(range: f64, damping: f64) -> Result<Self> {
        Self::new(Family::DampedCosine, range, 0.0, Some(damping))
    }

    pub fn with_nugget(self, nugget: f64) -> Result<Self> {
        Self::new(self.family, self.range, nugget, self.damping)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    pub fn damping(&self) -> Option<f64> {
        self.damping
    }

    /// `ρ(lag)`. Negative lags are folded onto `|lag|`.
    pub fn eval(&self, lag: f64) -> f64 {
        let h = lag.abs();
        if h == 0.0 {
            return 1.0;
        }
        let x = h / self.range;
        let shape = match self.family {
            Family::Exponential => (-x).exp(),
            Family::Gaussian => (-x * x).exp(),
            Family::Spherical => {
                if x < 1.0 {
                    // 1 - 1.5x + 0.5x³, factored so it cannot round below zero
                    0.5 * (1.0 - x) * (1.0 - x) * (2.0 + x)
                } else {
                    0.0
                }
            }
            Family::DampedCosine => {
                let damping = self.damping.unwrap_or_default();
                (-damping * h).exp() * (std::f64::consts::PI * x).cos()
            }
        };
        (1.0 - self.nugget) * shape
    }

    /// `ρ(|i - k|)` for integer indices.
    pub fn eval_lag(&self, i: usize, k: usize) -> f64 {
        self.eval(i.abs_diff(k) as f64)
    }
}

impl fmt::Display for CorrelationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} range={} nugget={}",
            self.family,
            format_number(self.range),
            format_number(self.nugget)
        )?;
        if let Some(d) = self.damping {
            write!(f, " damping={}", format_number(d))?;
        }
        Ok(())
    }
}

/// Sample autocorrelation at lags `0..=max_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalAcf {
    values: Vec<f64>,
    n_used: usize,
}

impl EmpiricalAcf {
    /// Wraps precomputed ACF values. `values[0]` must be 1.
    pub fn from_values(values: Vec<f64>, n_used: usize) -> Result<Self> {
        if values.is_empty() || values[0] != 1.0 {
            return Err(Error::InvalidModel("ACF must start with 1 at lag 0".into()));
        }
        if values.len() > n_used {
            return Err(Error::LagOutOfRange {
                max_lag: values.len() - 1,
                len: n_used,
            });
        }
        Ok(Self { values, n_used })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    pub fn n_used(&self) -> usize {
        self.n_used
    }

    pub fn lags(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().copied().enumerate()
    }
}

/// Biased (1/N) sample autocorrelation, centered on the plain sample mean.
pub fn sample_acf(values: &[f64], max_lag: usize) -> Result<EmpiricalAcf> {
    let len = values.len();
    if len < 4 {
        return Err(Error::SeriesTooShort { len, min: 4 });
    }
    if max_lag >= len {
        return Err(Error::LagOutOfRange { max_lag, len });
    }
    let mean = values.iter().sum::<f64>() / len as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let c0: f64 = centered.iter().map(|d| d * d).sum();
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if c0 <= (len as f64) * (f64::EPSILON * scale).powi(2) * 16.0 {
        return Err(Error::DegenerateSeries);
    }
    let mut acf = Vec::with_capacity(max_lag + 1);
    acf.push(1.0);
    for h in 1..=max_lag {
        let ch: f64 = centered[..len - h]
            .iter()
            .zip(&centered[h..])
            .map(|(a, b)| a * b)
            .sum();
        acf.push(ch / c0);
    }
    Ok(EmpiricalAcf {
        values: acf,
        n_used: len,
    })
}

/// Writes the `lag,acf` CSV.
pub fn write_acf_csv<W: Write>(acf: &EmpiricalAcf, mut out: W) -> Result<()> {
    writeln!(out, "lag,acf")?;
    for (lag, v) in acf.lags() {
        writeln!(out, "{lag},{}", format_number(v))?;
    }
    Ok(())
}

const RANGE_MIN: f64 = 0.1;
const GRID_POINTS: usize = 241;
const DAMPING_MIN: f64 = 1e-3;
const DAMPING_MAX: f64 = 10.0;
// half-periods below one lag alias onto longer ones at integer lags
const HALF_PERIOD_MIN: f64 = 1.0;

fn range_max(acf: &EmpiricalAcf) -> f64 {
    100.0 * acf.max_lag().max(1) as f64
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Minimizes `f` on `[lo, hi]` by golden-section search.
fn golden_section(mut lo: f64, mut hi: f64, iters: usize, f: impl Fn(f64) -> f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

fn sse(model: &CorrelationModel, acf: &EmpiricalAcf) -> f64 {
    acf.lags()
        .skip(1)
        .map(|(h, v)| {
            let d = model.eval(h as f64) - v;
            d * d
        })
        .sum()
}

/// Least-squares fit of `family` to the ACF at lags `1..=L`, nugget fixed at 0.
pub fn fit_model(acf: &EmpiricalAcf, family: Family) -> Result<CorrelationModel> {
    fit_model_with_nugget(acf, family, 0.0)
}

/// Least-squares fit of `family` to the ACF at lags `1..=L` with a fixed
/// nugget.
///
/// A log-spaced grid over the parameter box is searched first; the best
/// grid point is then refined by golden-section search inside its
/// neighbouring grid cells (one coordinate at a time for the two-parameter
/// damped cosine). The result is never worse than the best grid point.
pub fn fit_model_with_nugget(
    acf: &EmpiricalAcf,
    family: Family,
    nugget: f64,
) -> Result<CorrelationModel> {
    let hi = range_max(acf);
    match family {
        Family::DampedCosine => fit_damped_cosine(acf, nugget, hi),
        _ => {
            let build = |r: f64| CorrelationModel::new(family, r, nugget, None);
            let cost = |r: f64| build(r).map(|m| sse(&m, acf)).unwrap_or(f64::INFINITY);
            let grid = log_grid(RANGE_MIN, hi, GRID_POINTS);
            let best = argmin(grid.iter().map(|&r| cost(r)));
            let (lo_cell, hi_cell) = neighbours(&grid, best);
            let refined = golden_section(lo_cell.ln(), hi_cell.ln(), 80, |x| cost(x.exp())).exp();
            let r = if cost(refined) <= cost(grid[best]) {
                refined
            } else {
                grid[best]
            };
            build(r)
        }
    }
}

fn fit_damped_cosine(acf: &EmpiricalAcf, nugget: f64, hi: f64) -> Result<CorrelationModel> {
    let build = |r: f64, d: f64| CorrelationModel::new(Family::DampedCosine, r, nugget, Some(d));
    let cost = |r: f64, d: f64| build(r, d).map(|m| sse(&m, acf)).unwrap_or(f64::INFINITY);
    let ranges = log_grid(HALF_PERIOD_MIN, hi, 121);
    let dampings = log_grid(DAMPING_MIN, DAMPING_MAX, 81);

    let mut best = (0, 0, f64::INFINITY);
    for (a, &r) in ranges.iter().enumerate() {
        for (b, &d) in dampings.iter().enumerate() {
            let c = cost(r, d);
            if c < best.2 {
                best = (a, b, c);
            }
        }
    }
    let (r_lo, r_hi) = neighbours(&ranges, best.0);
    let (d_lo, d_hi) = neighbours(&dampings, best.1);
    let (mut r, mut d) = (ranges[best.0], dampings[best.1]);
    let mut c = best.2;
    for _ in 0..8 {
        let r_new = golden_section(r_lo.ln(), r_hi.ln(), 60, |x| cost(x.exp(), d)).exp();
        if cost(r_new, d) <= c {
            r = r_new;
            c = cost(r, d);
        }
        let d_new = golden_section(d_lo.ln(), d_hi.ln(), 60, |x| cost(r, x.exp())).exp();
        if cost(r, d_new) <= c {
            d = d_new;
            c = cost(r, d);
        }
    }
    build(r, d)
}

fn argmin(costs: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (k, c) in costs.enumerate() {
        if c < best.1 {
            best = (k, c);
        }
    }
    best.0
}

fn neighbours(grid: &[f64], k: usize) -> (f64, f64) {
    (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)])
}
