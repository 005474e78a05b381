use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use kriging_mean::pipeline::{fit_window, run_pipeline, PipelineConfig, Units, DEFAULT_TOLERANCE};
use kriging_mean::{
    format_number, generate_ar1, load_series_path, mc_asymptotics, sample_acf, write_acf_csv,
    write_convergence_csv, write_outputs, write_scan_csv, write_series, Ar1Spec, Error, Family,
    OutputPaths,
};

const EXIT_INPUT: u8 = 1;
const EXIT_NO_ROOT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "kriging-mean", version, about = "Ordinary-kriging estimate of a stationary mean")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample autocorrelation of the series (or its first n values).
    Acf {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        max_lag: usize,
        #[arg(long)]
        n: Option<usize>,
        /// Defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit a correlation model on the first n values.
    Fit(ModelArgs),
    /// Residual scan over j = n+1..=j_max.
    Scan {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        scan: ScanArgs,
        /// Defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Full pipeline: fit, scan, root, report and plot data.
    Report {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        scan: ScanArgs,
        /// Index name written in the report row.
        #[arg(long, default_value = "series")]
        name: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Generate an AR(1) series, or the Monte Carlo convergence table.
    Simulate {
        #[arg(long, allow_negative_numbers = true)]
        phi: f64,
        #[arg(long, default_value_t = 240)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mean: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Run the Monte Carlo study with this many replicates.
        #[arg(long)]
        replicates: Option<usize>,
        /// Window sizes for the Monte Carlo study.
        #[arg(long, value_delimiter = ',', default_value = "25,50,100,200")]
        n_grid: Vec<usize>,
        #[arg(long)]
        threads: Option<usize>,
        /// Defaults to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long)]
    input: PathBuf,
    /// Window size: the first n observations.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "exponential")]
    family: Family,
    #[arg(long, default_value_t = 0.0)]
    nugget: f64,
    /// Largest ACF lag used for fitting (default n/4).
    #[arg(long)]
    max_lag: Option<usize>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Last scanned index (default 10 n).
    #[arg(long)]
    j_max: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long, default_value = "normalized")]
    units: Units,
    /// Evaluate the scan on this many threads; output is unchanged.
    #[arg(long)]
    threads: Option<usize>,
}

impl ModelArgs {
    fn config(&self, scan: Option<&ScanArgs>) -> PipelineConfig {
        let mut c = PipelineConfig::new(self.n);
        c.family = self.family;
        c.nugget = self.nugget;
        c.max_lag = self.max_lag;
        if let Some(s) = scan {
            c.j_max = s.j_max;
            c.tolerance = s.tolerance;
            c.units = s.units;
            c.parallel = s.threads.is_some_and(|t| t > 1);
        }
        c
    }
}

fn sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn install_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    Ok(())
}

enum Outcome {
    Done,
    NoRoot(Error),
}

fn dispatch(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Acf {
            input,
            max_lag,
            n,
            output,
        } => {
            let series = load_series_path(&input)?;
            let values = match n {
                Some(n) => series.window(n)?,
                None => series.values(),
            };
            let acf = sample_acf(values, max_lag)?;
            let mut out = sink(output.as_deref())?;
            write_acf_csv(&acf, &mut out)?;
            out.flush()?;
        }
        Command::Fit(args) => {
            let series = load_series_path(&args.input)?;
            let config = args.config(None);
            config.validate()?;
            let (_, model) = fit_window(series.window(config.n)?, &config)?;
            println!("family,range,nugget,damping");
            println!(
                "{},{},{},{}",
                model.family(),
                format_number(model.range()),
                format_number(model.nugget()),
                model.damping().map(format_number).unwrap_or_default()
            );
        }
        Command::Scan {
            model,
            scan,
            output,
        } => {
            install_threads(scan.threads)?;
            let series = load_series_path(&model.input)?;
            let run = run_pipeline(&series, &model.config(Some(&scan)))?;
            let mut out = sink(output.as_deref())?;
            write_scan_csv(&run.scan, &mut out)?;
            out.flush()?;
        }
        Command::Report {
            model,
            scan,
            name,
            out_dir,
        } => {
            install_threads(scan.threads)?;
            let series = load_series_path(&model.input)?;
            let run = run_pipeline(&series, &model.config(Some(&scan)))?;
            fs::create_dir_all(&out_dir)
                .with_context(|| format!("cannot create {}", out_dir.display()))?;
            let mut scan_out = BufWriter::new(File::create(out_dir.join("scan.csv"))?);
            write_scan_csv(&run.scan, &mut scan_out)?;
            scan_out.flush()?;
            let paths = OutputPaths::in_dir(&out_dir);
            match run.report_row(&name) {
                Some(row) => {
                    write_outputs(
                        std::slice::from_ref(&row),
                        &series,
                        &run.scan,
                        run.classic_estimate,
                        &paths,
                    )?;
                    println!("{}", row.to_csv_line());
                }
                None => {
                    let mut plot = BufWriter::new(File::create(&paths.plot)?);
                    kriging_mean::write_plot_csv(&series, &run.scan, run.classic_estimate, &mut plot)?;
                    plot.flush()?;
                    return Ok(Outcome::NoRoot(Error::NoRootInRange {
                        best: Box::new(run.root),
                    }));
                }
            }
        }
        Command::Simulate {
            phi,
            length,
            seed,
            mean,
            sigma,
            replicates,
            n_grid,
            threads,
            output,
        } => {
            install_threads(threads)?;
            let spec = Ar1Spec {
                phi,
                mean,
                sigma,
                length,
                seed,
            };
            let mut out = sink(output.as_deref())?;
            match replicates {
                Some(r) => write_convergence_csv(&mc_asymptotics(&spec, &n_grid, r)?, &mut out)?,
                None => write_series(&generate_ar1(&spec)?, &mut out)?,
            }
            out.flush()?;
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NoRoot(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NO_ROOT)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
