//! Series ingestion and report/plot CSV output.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::format::format_number;
use crate::scan::ScanPoint;

pub const REPORT_HEADER: &str = "index,n,j,estimate,min_sq_error,residual";
pub const PLOT_HEADER: &str = "i,value,classic_mean,numerical_estimate";

/// Ordered observations with optional calendar labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    labels: Option<Vec<NaiveDate>>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::build(values, None)
    }

    pub fn with_labels(values: Vec<f64>, labels: Vec<NaiveDate>) -> Result<Self> {
        Self::build(values, Some(labels))
    }

    fn build(values: Vec<f64>, labels: Option<Vec<NaiveDate>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::MalformedCsv {
                line: k + 2,
                message: format!("non-finite value {}", values[k]),
            });
        }
        if let Some(labels) = &labels {
            if labels.len() != values.len() {
                return Err(Error::DimensionMismatch {
                    expected: values.len(),
                    got: labels.len(),
                });
            }
            if let Some(k) = labels.windows(2).position(|w| w[1] <= w[0]) {
                return Err(Error::MalformedCsv {
                    line: k + 3,
                    message: format!("date {} does not follow {}", labels[k + 1], labels[k]),
                });
            }
        }
        Ok(Self { values, labels })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[NaiveDate]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First `n` observations.
    pub fn window(&self, n: usize) -> Result<&[f64]> {
        if n == 0 || n > self.values.len() {
            return Err(Error::InvalidRange(format!(
                "window size {n} outside 1..={}",
                self.values.len()
            )));
        }
        Ok(&self.values[..n])
    }

    /// Median spacing of the labels in days, if labelled.
    pub fn median_spacing_days(&self) -> Option<i64> {
        let labels = self.labels.as_ref()?;
        let mut gaps: Vec<i64> = labels
            .windows(2)
            .map(|w| (w[1] - w[0]).num_days())
            .collect();
        if gaps.is_empty() {
            return None;
        }
        gaps.sort_unstable();
        Some(gaps[gaps.len() / 2])
    }
}

/// Parses a `date,close` or `close` CSV. Blank lines are skipped.
pub fn load_series<R: Read>(source: R) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let header = reader.headers().map_err(|e| malformed(1, e))?.clone();
    let columns: Vec<&str> = header.iter().collect();
    let dated = match columns.as_slice() {
        ["date", "close"] => true,
        ["close"] => false,
        [] | [""] => return Err(Error::EmptyInput),
        other => {
            return Err(Error::MalformedCsv {
                line: 1,
                message: format!("expected header `date,close` or `close`, got `{}`", other.join(",")),
            })
        }
    };

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            malformed(line, e)
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let close = if dated {
            let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|_| {
                Error::MalformedCsv {
                    line,
                    message: format!("invalid date `{}`", &record[0]),
                }
            })?;
            if let Some(prev) = labels.last() {
                if date <= *prev {
                    return Err(Error::MalformedCsv {
                        line,
                        message: format!("date {date} does not follow {prev}"),
                    });
                }
            }
            labels.push(date);
            &record[1]
        } else {
            &record[0]
        };
        let value: f64 = close.parse().map_err(|_| Error::MalformedCsv {
            line,
            message: format!("non-numeric close `{close}`"),
        })?;
        if !value.is_finite() {
            return Err(Error::MalformedCsv {
                line,
                message: format!("non-finite close `{close}`"),
            });
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let series = if dated {
        TimeSeries::with_labels(values, labels)?
    } else {
        TimeSeries::new(values)?
    };
    if let Some(days) = series.median_spacing_days() {
        if days < 25 {
            log::warn!("median spacing of {days} days suggests finer than monthly data");
        }
    }
    Ok(series)
}

pub fn load_series_path(path: &Path) -> Result<TimeSeries> {
    load_series(File::open(path)?)
}

fn malformed(line: usize, e: impl std::fmt::Display) -> Error {
    Error::MalformedCsv {
        line,
        message: e.to_string(),
    }
}

/// Writes a series in the same CSV layout [`load_series`] reads.
pub fn write_series<W: Write>(series: &TimeSeries, mut out: W) -> Result<()> {
    match series.labels() {
        Some(labels) => {
            writeln!(out, "date,close")?;
            for (d, v) in labels.iter().zip(series.values()) {
                writeln!(out, "{},{}", d.format("%Y-%m-%d"), format_number(*v))?;
            }
        }
        None => {
            writeln!(out, "close")?;
            for v in series.values() {
                writeln!(out, "{}", format_number(*v))?;
            }
        }
    }
    Ok(())
}

/// One run summarized in the columns of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub index_name: String,
    pub n: usize,
    pub j_star: usize,
    pub estimate: f64,
    pub min_sq_error: f64,
    pub residual: f64,
}

impl ReportRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            csv_field(&self.index_name),
            self.n,
            self.j_star,
            format_number(self.estimate),
            format_number(self.min_sq_error),
            format_number(self.residual),
        )
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_report_csv<W: Write>(rows: &[ReportRow], mut out: W) -> Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.to_csv_line())?;
    }
    Ok(())
}

/// Plot data: the series, the constant classic mean, and the numerical
/// estimate at every scanned index. Rows run over `1..=max(len, last j)`.
pub fn write_plot_csv<W: Write>(
    series: &TimeSeries,
    scan: &[ScanPoint],
    classic_estimate: f64,
    mut out: W,
) -> Result<()> {
    writeln!(out, "{PLOT_HEADER}")?;
    let last_j = scan.iter().map(|p| p.j).max().unwrap_or(0);
    let rows = series.len().max(last_j);
    let mut estimates = vec![None; rows + 1];
    for p in scan {
        estimates[p.j] = Some(p.estimate);
    }
    let classic = format_number(classic_estimate);
    for (i, est) in estimates.iter().enumerate().skip(1) {
        let value = series
            .values()
            .get(i - 1)
            .map(|v| format_number(*v))
            .unwrap_or_default();
        let est = est.map(format_number).unwrap_or_default();
        writeln!(out, "{i},{value},{classic},{est}")?;
    }
    Ok(())
}

/// Destinations for [`write_outputs`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub report: PathBuf,
    pub plot: PathBuf,
}

impl OutputPaths {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            report: dir.join("report.csv"),
            plot: dir.join("plot.csv"),
        }
    }
}

/// Writes the report CSV and the plot-data CSV.
pub fn write_outputs(
    rows: &[ReportRow],
    series: &TimeSeries,
    scan: &[ScanPoint],
    classic_estimate: f64,
    paths: &OutputPaths,
) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut report = BufWriter::new(File::create(&paths.report)?);
    write_report_csv(rows, &mut report)?;
    report.flush()?;
    let mut plot = BufWriter::new(File::create(&paths.plot)?);
    write_plot_csv(series, scan, classic_estimate, &mut plot)?;
    plot.flush()?;
    Ok(())
}
