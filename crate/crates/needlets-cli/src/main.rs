//! Command line front end: window diagnostics, fitting scattered data, and
//! the Monte Carlo experiment harness.
//!
//! Thread count is controlled by the `RAYON_NUM_THREADS` environment
//! variable; all randomness is seeded (`--seed` / the config's
//! `base_seed`), and reports are reproducible byte for byte.

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use needlets::estimator::fit_global;
use needlets::sim::{run_experiment_with_progress, ExperimentConfig, RiskReport};
use needlets::{Error, FrameBuilder, WindowFunction, WindowVariant};
use serde::Deserialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "needlets",
    about = "Needlet frames and adaptive global-thresholding regression on the circle",
    long_about = None,
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    SmoothBump,
    Bspline,
}

impl From<VariantArg> for WindowVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::SmoothBump => WindowVariant::SmoothBump,
            VariantArg::Bspline => WindowVariant::BSpline,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the partition-of-unity defect of a window function.
    WindowCheck {
        /// Scale parameter (> 1).
        #[arg(long = "B")]
        b_scale: f64,
        /// Highest integer frequency to check.
        #[arg(long)]
        ell_max: u32,
        #[arg(long, value_enum, default_value = "smooth-bump")]
        variant: VariantArg,
        /// Defect above which the check fails.
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Fit the global thresholding estimator to scattered circle data.
    Fit {
        /// JSON config (keys: b_scale, p, j_upper?; an experiment config
        /// file works as well).
        #[arg(long)]
        config: PathBuf,
        /// Input CSV with columns x,y (header row optional).
        #[arg(long)]
        data: PathBuf,
        /// Output CSV of coefficients (j,k,beta_hat,tau); stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional path for the threshold report JSON.
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Run a seeded Monte Carlo experiment and write a risk report.
    Simulate {
        /// Built-in preset: example-4.1, example-4.2 or example-4.3.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Experiment config JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the replicate count.
        #[arg(long)]
        replicates: Option<usize>,
        /// Report JSON path (falls back to the config's `output`, then stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the per-cell CSV summary here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Suppress per-cell progress lines on stderr.
        #[arg(long)]
        quiet: bool,
    },
    /// Convert a stored risk report to another format.
    Report {
        /// Risk report JSON produced by `simulate`.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: ReportFormat,
        /// Output path; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
}

/// Subset of the experiment config that `fit` needs; unknown keys are
/// ignored so a full experiment config file can be reused.
#[derive(Deserialize)]
struct FitConfig {
    b_scale: f64,
    p: u32,
    #[serde(default)]
    j_upper: Option<u32>,
}

fn write_or_stdout(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, contents).with_context(|| format!("writing {}", p.display()))?
        }
        None => print!("{contents}"),
    }
    Ok(())
}

fn read_xy_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            bail!("row {} has {} columns, expected x,y", idx + 1, record.len());
        }
        let parse = |s: &str| s.parse::<f64>();
        match (parse(&record[0]), parse(&record[1])) {
            (Ok(x), Ok(y)) => {
                xs.push(x);
                ys.push(y);
            }
            _ if idx == 0 => continue, // header row
            _ => bail!("row {} is not numeric: {:?}", idx + 1, record),
        }
    }
    if xs.is_empty() {
        bail!("no data rows in {}", path.display());
    }
    Ok((xs, ys))
}

fn run_window_check(b_scale: f64, ell_max: u32, variant: VariantArg, tolerance: f64) -> Result<()> {
    let window = WindowFunction::build(b_scale, variant.into(), 128)?;
    let defect = window.partition_defect(ell_max);
    println!("B = {b_scale}, ell_max = {ell_max}");
    println!("partition-of-unity defect = {defect:.3e}");
    if defect > tolerance {
        bail!("defect {defect:.3e} exceeds tolerance {tolerance:.1e}");
    }
    println!("ok (tolerance {tolerance:.1e})");
    Ok(())
}

fn run_fit(
    config_path: &Path,
    data_path: &Path,
    out: Option<&Path>,
    report_out: Option<&Path>,
) -> Result<()> {
    let config: FitConfig = serde_json::from_str(
        &fs::read_to_string(config_path)
            .with_context(|| format!("reading {}", config_path.display()))?,
    )
    .context("parsing fit config")?;
    let (xs, ys) = read_xy_csv(data_path)?;
    let data = needlets::estimator::Dataset::from_xy(&xs, &ys)?;

    let j_upper = match config.j_upper {
        Some(j) => j,
        None => needlets::estimator::truncation_level(data.len(), config.b_scale, 1)?,
    };
    let frame = FrameBuilder::new(1, config.b_scale, j_upper).build()?;
    let estimate = fit_global(&frame, &data, config.p, Some(j_upper))?;

    let mut csv_buf = Vec::new();
    estimate.write_csv(&mut csv_buf)?;
    write_or_stdout(out, std::str::from_utf8(&csv_buf).expect("ascii"))?;

    let report = estimate
        .report
        .as_ref()
        .ok_or_else(|| Error::Config("fit produced no threshold report".into()))?;
    if let Some(path) = report_out {
        fs::write(path, report.to_json()?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!(
        "n = {}, J = {}, kept levels: {:?}",
        data.len(),
        j_upper,
        report.kept_levels()
    );
    Ok(())
}

fn run_simulate(
    preset: Option<&str>,
    config: Option<&Path>,
    seed: Option<u64>,
    replicates: Option<usize>,
    out: Option<&Path>,
    csv: Option<&Path>,
    quiet: bool,
) -> Result<()> {
    let mut cfg = match (preset, config) {
        (Some(name), None) => ExperimentConfig::preset(name)
            .ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))?,
        (None, Some(path)) => ExperimentConfig::from_json(
            &fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        )?,
        _ => bail!("exactly one of --preset or --config is required"),
    };
    if let Some(seed) = seed {
        cfg.base_seed = seed;
    }
    if let Some(r) = replicates {
        cfg.replicates = r;
    }

    let report = run_experiment_with_progress(&cfg, |cell| {
        if !quiet {
            eprintln!(
                "cell n={} J_n={} sigma={:.3}: global {:.4} (se {:.4}), linear {:.4} (se {:.4}), mode {:?} [{:.1}s]",
                cell.n,
                cell.j_n,
                cell.sigma_abs,
                cell.global_mean,
                cell.global_se,
                cell.linear_mean,
                cell.linear_se,
                cell.levels_selected_mode,
                cell.wall_clock_secs,
            );
        }
    })?;

    let json = report.to_json()?;
    let out_path = out
        .map(Path::to_path_buf)
        .or_else(|| report.config.output.as_ref().map(PathBuf::from));
    write_or_stdout(out_path.as_deref(), &json)?;
    if out_path.is_some() && !quiet {
        eprintln!("report written to {}", out_path.as_ref().unwrap().display());
    }
    if let Some(path) = csv {
        fs::write(path, report.to_csv_string()?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run_report(input: &Path, format: ReportFormat, out: Option<&Path>) -> Result<()> {
    let report = RiskReport::from_json(
        &fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?,
    )?;
    let text = match format {
        ReportFormat::Csv => report.to_csv_string()?,
        ReportFormat::Json => report.to_json()?,
    };
    write_or_stdout(out, &text)?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::WindowCheck { b_scale, ell_max, variant, tolerance } => {
            run_window_check(b_scale, ell_max, variant, tolerance)
        }
        Command::Fit { config, data, out, report_out } => {
            run_fit(&config, &data, out.as_deref(), report_out.as_deref())
        }
        Command::Simulate { preset, config, seed, replicates, out, csv, quiet } => run_simulate(
            preset.as_deref(),
            config.as_deref(),
            seed,
            replicates,
            out.as_deref(),
            csv.as_deref(),
            quiet,
        ),
        Command::Report { input, format, out } => run_report(&input, format, out.as_deref()),
    }
}
