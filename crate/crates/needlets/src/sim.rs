//! Seeded Monte Carlo experiment harness and report emission.
//!
//! An experiment sweeps a grid of sample sizes and noise amplitudes; each
//! cell runs `R` replicates of: draw a fresh dataset, fit the global
//! thresholding estimator and the linear estimator, and evaluate both
//! losses against the truth. Replicate `r` of cell `c` draws from the
//! ChaCha stream `(c << 32) | r` of the base seed, so no two replicates
//! share a random stream, cells are independent of sweep order, and the
//! whole report is reproducible bit for bit from `(config, seed)`.

use crate::besov::{lp_risk, LossOrder, TestFunction};
use crate::error::{Error, Result};
use crate::estimator::{fit_both, truncation_level, Dataset};
use crate::frame::{FrameBuilder, Point};
use crate::par;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

/// Sub-Gaussian observational-noise families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    /// Gaussian with standard deviation `σ`.
    #[default]
    Gaussian,
    /// Uniform on `[-σ√3, σ√3]` (bounded, SD `σ`).
    UniformBounded,
    /// `±σ` with equal probability.
    RademacherScaled,
}

/// Draw `(X_i, Y_i = f(X_i) + ε_i)` with `X_i` uniform on `Sᵈ` and `ε_i`
/// mean-zero with SD `sigma_abs` from the chosen family. Deterministic in
/// `(base_seed, stream)`: all locations are drawn first, then all noise.
pub fn generate_dataset<F>(
    f: F,
    d: u32,
    n: usize,
    sigma_abs: f64,
    family: NoiseFamily,
    base_seed: u64,
    stream: u64,
) -> Result<Dataset>
where
    F: Fn(&Point) -> f64,
{
    if n == 0 {
        return Err(Error::domain("dataset size must be positive"));
    }
    if sigma_abs < 0.0 {
        return Err(Error::domain("noise SD must be nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(stream);

    let points: Vec<Point> = match d {
        1 => (0..n)
            .map(|_| Point::Circle(rng.gen::<f64>() * 2.0 * std::f64::consts::PI))
            .collect(),
        2 => (0..n)
            .map(|_| {
                let z: f64 = 2.0 * rng.gen::<f64>() - 1.0;
                let phi = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
                let s = (1.0 - z * z).max(0.0).sqrt();
                Point::Sphere([s * phi.cos(), s * phi.sin(), z])
            })
            .collect(),
        _ => return Err(Error::domain("supported dimensions are 1 and 2")),
    };

    let noise: Vec<f64> = if sigma_abs == 0.0 {
        vec![0.0; n]
    } else {
        match family {
            NoiseFamily::Gaussian => {
                let dist = Normal::new(0.0, sigma_abs)
                    .map_err(|e| Error::domain(format!("noise setup: {e}")))?;
                (0..n).map(|_| dist.sample(&mut rng)).collect()
            }
            NoiseFamily::UniformBounded => {
                let half_width = sigma_abs * 3.0f64.sqrt();
                (0..n)
                    .map(|_| (2.0 * rng.gen::<f64>() - 1.0) * half_width)
                    .collect()
            }
            NoiseFamily::RademacherScaled => (0..n)
                .map(|_| if rng.gen::<bool>() { sigma_abs } else { -sigma_abs })
                .collect(),
        }
    };

    let responses: Vec<f64> =
        points.iter().zip(&noise).map(|(x, e)| f(x) + e).collect();
    Dataset::new(points, responses, sigma_abs)
}

/// Circle convenience wrapper of [`generate_dataset`].
pub fn generate_circle_dataset<F>(
    f: F,
    n: usize,
    sigma_abs: f64,
    family: NoiseFamily,
    base_seed: u64,
    stream: u64,
) -> Result<Dataset>
where
    F: Fn(f64) -> f64,
{
    generate_dataset(
        |p| {
            let Point::Circle(a) = p else { unreachable!("circle sampling") };
            f(*a)
        },
        1,
        n,
        sigma_abs,
        family,
        base_seed,
        stream,
    )
}

fn default_d() -> u32 {
    1
}

fn default_grid() -> usize {
    4096
}

/// Full description of one experiment sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub test_function: TestFunction,
    #[serde(default = "default_d")]
    pub d: u32,
    pub b_scale: f64,
    pub n_values: Vec<usize>,
    /// Order of the selection statistic (even).
    pub p: u32,
    #[serde(default)]
    pub noise: NoiseFamily,
    /// Noise SDs as fractions of `M = sup|f|`.
    pub sigma_fracs: Vec<f64>,
    pub replicates: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    /// Override for the truncation level (default: `J_n` per sample size).
    #[serde(default)]
    pub j_upper: Option<u32>,
    /// Default report path, used by the CLI when no explicit path is given.
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentConfig {
    /// The benchmark presets: `B = 2`, `d = 1`, `p = 2`,
    /// `n ∈ {2⁶, 2⁷, 2⁸}`, `σ ∈ {0.25, 0.5, 0.75}·M`, Gaussian noise,
    /// 200 replicates.
    pub fn preset(name: &str) -> Option<Self> {
        let test_function = match name {
            "example-4.1" => TestFunction::F1,
            "example-4.2" => TestFunction::F2,
            "example-4.3" => TestFunction::F3,
            _ => return None,
        };
        Some(ExperimentConfig {
            test_function,
            d: 1,
            b_scale: 2.0,
            n_values: vec![64, 128, 256],
            p: 2,
            noise: NoiseFamily::Gaussian,
            sigma_fracs: vec![0.25, 0.5, 0.75],
            replicates: 200,
            base_seed: 0,
            grid_size: 4096,
            j_upper: None,
            output: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.d != 1 {
            return Err(Error::Config(
                "the experiment harness runs on the circle (d = 1)".into(),
            ));
        }
        if self.b_scale <= 1.0 {
            return Err(Error::Config("b_scale must exceed 1".into()));
        }
        if self.n_values.is_empty() || self.n_values.iter().any(|&n| n < 2) {
            return Err(Error::Config("n_values must be nonempty with n >= 2".into()));
        }
        if self.p == 0 || self.p % 2 != 0 {
            return Err(Error::Config("statistic order p must be even".into()));
        }
        if self.sigma_fracs.is_empty() || self.sigma_fracs.iter().any(|&s| s < 0.0) {
            return Err(Error::Config("sigma_fracs must be nonempty and nonnegative".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be positive".into()));
        }
        if self.grid_size < 256 {
            return Err(Error::Config("grid_size must be at least 256".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One observed selection pattern and how many replicates produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauPattern {
    pub levels: Vec<u32>,
    pub count: usize,
}

/// Aggregates of one `(n, σ)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub n: usize,
    pub j_n: u32,
    pub sigma_frac: f64,
    pub sigma_abs: f64,
    pub replicates: usize,
    pub global_mean: f64,
    pub global_se: f64,
    pub linear_mean: f64,
    pub linear_se: f64,
    /// Selection patterns sorted by frequency (descending), then levels.
    pub tau_histogram: Vec<TauPattern>,
    /// Most frequent selection pattern.
    pub levels_selected_mode: Vec<u32>,
    pub wall_clock_secs: f64,
}

/// Whole-experiment report: config echo plus per-cell aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub config: ExperimentConfig,
    pub sup_norm: f64,
    pub cells: Vec<CellReport>,
}

impl RiskReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// CSV, one row per cell. Wall-clock is deliberately excluded so the
    /// bytes depend only on `(config, seed)`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "test_fn,n,J_n,sigma_frac,p,R,global_mean,global_se,linear_mean,linear_se,levels_selected_mode"
        )?;
        for cell in &self.cells {
            let mode = cell
                .levels_selected_mode
                .iter()
                .map(|j| j.to_string())
                .collect::<Vec<_>>()
                .join("|");
            writeln!(
                out,
                "{},{},{},{},{},{},{:.10e},{:.10e},{:.10e},{:.10e},{}",
                self.config.test_function.name(),
                cell.n,
                cell.j_n,
                cell.sigma_frac,
                self.config.p,
                cell.replicates,
                cell.global_mean,
                cell.global_se,
                cell.linear_mean,
                cell.linear_se,
                mode,
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv is ascii"))
    }
}

fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = kahan_sum(values.iter().copied()) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Run the experiment, invoking `on_cell` as each cell completes (for
/// progress reporting / partial flushing).
pub fn run_experiment_with_progress<C>(
    config: &ExperimentConfig,
    mut on_cell: C,
) -> Result<RiskReport>
where
    C: FnMut(&CellReport),
{
    config.validate()?;
    let sup_norm = config.test_function.sup_norm(1 << 14);

    let mut j_needed = 0u32;
    for &n in &config.n_values {
        let j = match config.j_upper {
            Some(j) => j,
            None => truncation_level(n, config.b_scale, config.d)?,
        };
        j_needed = j_needed.max(j);
    }
    let frame = FrameBuilder::new(config.d, config.b_scale, j_needed).build()?;

    let tf = config.test_function;
    let truth = move |p: &Point| {
        let Point::Circle(a) = p else { unreachable!("circle harness") };
        tf.eval(*a)
    };

    let mut cells = Vec::new();
    let mut cell_index: u64 = 0;
    for &n in &config.n_values {
        let j_used = match config.j_upper {
            Some(j) => j,
            None => truncation_level(n, config.b_scale, config.d)?,
        };
        for &sigma_frac in &config.sigma_fracs {
            let sigma_abs = sigma_frac * sup_norm;
            let started = Instant::now();
            let ci = cell_index;
            let results: Vec<Result<(f64, f64, Vec<u32>)>> =
                par::map_indexed(config.replicates, |rep| {
                    let data = generate_dataset(
                        truth,
                        config.d,
                        n,
                        sigma_abs,
                        config.noise,
                        config.base_seed,
                        (ci << 32) | rep as u64,
                    )?;
                    let (global, linear) = fit_both(&frame, &data, config.p, Some(j_used))?;
                    let order = LossOrder::Power(config.p as f64);
                    let g_loss = lp_risk(&global, truth, order, config.grid_size)?;
                    let l_loss = lp_risk(&linear, truth, order, config.grid_size)?;
                    Ok((g_loss, l_loss, global.kept_levels()))
                });

            let mut g_losses = Vec::with_capacity(config.replicates);
            let mut l_losses = Vec::with_capacity(config.replicates);
            let mut histogram: HashMap<Vec<u32>, usize> = HashMap::new();
            for r in results {
                let (g, l, kept) = r?;
                g_losses.push(g);
                l_losses.push(l);
                *histogram.entry(kept).or_insert(0) += 1;
            }
            let mut tau_histogram: Vec<TauPattern> = histogram
                .into_iter()
                .map(|(levels, count)| TauPattern { levels, count })
                .collect();
            tau_histogram.sort_by(|a, b| b.count.cmp(&a.count).then(a.levels.cmp(&b.levels)));
            let mode = tau_histogram.first().map(|p| p.levels.clone()).unwrap_or_default();

            let (global_mean, global_se) = mean_and_se(&g_losses);
            let (linear_mean, linear_se) = mean_and_se(&l_losses);
            let cell = CellReport {
                n,
                j_n: j_used,
                sigma_frac,
                sigma_abs,
                replicates: config.replicates,
                global_mean,
                global_se,
                linear_mean,
                linear_se,
                tau_histogram,
                levels_selected_mode: mode,
                wall_clock_secs: started.elapsed().as_secs_f64(),
            };
            on_cell(&cell);
            cells.push(cell);
            cell_index += 1;
        }
    }

    Ok(RiskReport { config: config.clone(), sup_norm, cells })
}

/// Run the experiment described by `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RiskReport> {
    run_experiment_with_progress(config, |_| {})
}
