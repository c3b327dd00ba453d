//! Empirical needlet coefficients, the level statistics `Θ̂_j(p)`, hard
//! level thresholding, and the global/linear regression estimators.
//!
//! For data `(X_i, Y_i)` with `X_i` uniform on `Sᵈ`, the per-observation
//! needlet values are
//!
//! ```text
//! Z_{i;j,k} = ω_d · Y_i · ψ_{j,k}(X_i),
//! ```
//!
//! where the factor `ω_d` is the reciprocal of the uniform design density
//! with respect to the surface measure. It makes `β̂_{j,k} = mean_i Z_{i;j,k}`
//! unbiased for the frame coefficient `β_{j,k} = ∫ f ψ_{j,k} dx`, so
//! empirical and exact coefficients live on the same scale.
//!
//! The level statistic is the U-statistic over size-`p` observation
//! subsets,
//!
//! ```text
//! Θ̂_j(p) = C(n,p)⁻¹ Σ_k Σ_{|S|=p} Π_{i∈S} Z_{i;j,k}
//!        = C(n,p)⁻¹ Σ_k e_p(Z_{1;j,k}, …, Z_{n;j,k}),
//! ```
//!
//! an unbiased estimator of `Θ_j(p) = Σ_k |β_{j,k}|^p` for even `p`. The
//! inner sum is the degree-`p` elementary symmetric polynomial, computed
//! from power sums via Newton's identities in `O(np)` per center; a
//! literal subset enumeration is kept as an oracle. A level is retained
//! when `Θ̂_j(p) ≥ B^{dj} n^{-p/2}`.

use crate::error::{Error, Result};
use crate::frame::{CoefficientKind, CoefficientSet, NeedletFrame, Point};
use crate::par;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Regression sample on the manifold.
#[derive(Debug, Clone)]
pub struct Dataset {
    points: Vec<Point>,
    responses: Vec<f64>,
    noise_sd: f64,
}

impl Dataset {
    pub fn new(points: Vec<Point>, responses: Vec<f64>, noise_sd: f64) -> Result<Self> {
        if points.len() != responses.len() {
            return Err(Error::Mismatch(format!(
                "{} locations vs {} responses",
                points.len(),
                responses.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::domain("dataset must not be empty"));
        }
        let d = points[0].dim();
        if points.iter().any(|p| p.dim() != d) {
            return Err(Error::Mismatch("mixed point dimensions in dataset".into()));
        }
        Ok(Dataset { points, responses, noise_sd })
    }

    /// Circle dataset from raw angle/response columns.
    pub fn from_xy(angles: &[f64], responses: &[f64]) -> Result<Self> {
        Self::new(
            angles.iter().map(|&a| Point::circle(a)).collect(),
            responses.to_vec(),
            0.0,
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }
}

/// Truncation level `J_n = ⌊log_B(n^{1/d})⌋`. On the lattice `n = B^{dJ}`
/// this is exact; off it, flooring keeps `B^{dJ_n} ≤ n`.
pub fn truncation_level(n: usize, b_scale: f64, d: u32) -> Result<u32> {
    if n < 2 {
        return Err(Error::domain("truncation level needs n >= 2"));
    }
    if b_scale <= 1.0 || d == 0 {
        return Err(Error::domain("truncation level needs B > 1 and d >= 1"));
    }
    let t = (n as f64).ln() / (d as f64 * b_scale.ln());
    Ok((t + 1e-9).floor() as u32)
}

/// Per-observation needlet values of one level, center-major:
/// `center(k)[i] = Z_{i;j,k}`.
#[derive(Debug, Clone)]
pub struct ZLevel {
    pub j: u32,
    n: usize,
    values: Vec<f64>,
}

impl ZLevel {
    pub fn from_columns(j: u32, columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.first().map(|c| c.len()).unwrap_or(0);
        if n == 0 || columns.iter().any(|c| c.len() != n) {
            return Err(Error::Mismatch("ragged or empty Z columns".into()));
        }
        Ok(ZLevel { j, n, values: columns.concat() })
    }

    pub fn observation_count(&self) -> usize {
        self.n
    }

    pub fn center_count(&self) -> usize {
        self.values.len() / self.n
    }

    pub fn center(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }
}

/// Empirical coefficients plus the retained per-observation matrices the
/// U-statistics are built from.
#[derive(Debug, Clone)]
pub struct EmpiricalCoefficients {
    pub coeffs: CoefficientSet,
    pub z: Vec<ZLevel>,
    pub n: usize,
}

impl EmpiricalCoefficients {
    pub fn z_level(&self, j: u32) -> Option<&ZLevel> {
        self.z.iter().find(|z| z.j == j)
    }
}

/// Empirical needlet coefficients `β̂_{j,k}` for all levels `j ≤ j_upper`,
/// together with the `Z` matrices (retained, not recomputed). The mean
/// term is `(√ω_d/n) Σ Y_i`, the density-corrected estimate of the
/// coefficient of the constant `1/√ω_d`.
pub fn empirical_coefficients(
    frame: &NeedletFrame,
    data: &Dataset,
    j_upper: u32,
) -> Result<EmpiricalCoefficients> {
    if data.is_empty() {
        return Err(Error::domain("empty dataset"));
    }
    if data.points()[0].dim() != frame.d() {
        return Err(Error::Mismatch("dataset dimension does not match frame".into()));
    }
    frame.level(j_upper)?;
    let n = data.len();
    let inv_n = 1.0 / n as f64;
    let omega = frame.omega();
    let spec = *frame.kernel_spec();

    let mut z_levels = Vec::with_capacity(j_upper as usize + 1);
    let mut coeff_levels = Vec::with_capacity(j_upper as usize + 1);
    for level in &frame.levels()[..=j_upper as usize] {
        let columns: Vec<(Vec<f64>, f64)> = par::map_indexed(level.center_count(), |k| {
            let node = &level.nodes[k];
            let scale = omega * level.weights[k].sqrt();
            let mut column = Vec::with_capacity(n);
            let mut sum = 0.0;
            for (x, y) in data.points().iter().zip(data.responses()) {
                let z = scale * y * level.band_kernel(&spec, x, node);
                sum += z;
                column.push(z);
            }
            (column, sum * inv_n)
        });
        let mut betas = Vec::with_capacity(columns.len());
        let mut flat = Vec::with_capacity(columns.len() * n);
        for (column, beta) in columns {
            flat.extend_from_slice(&column);
            betas.push(beta);
        }
        z_levels.push(ZLevel { j: level.j, n, values: flat });
        coeff_levels.push((level.j, betas));
    }

    let mean_term = if frame.include_mean() {
        omega.sqrt() * inv_n * data.responses().iter().sum::<f64>()
    } else {
        0.0
    };

    Ok(EmpiricalCoefficients {
        coeffs: CoefficientSet::from_levels(CoefficientKind::Empirical, mean_term, coeff_levels),
        z: z_levels,
        n,
    })
}

/// `C(n, p)` as an f64 (exact for every size used here).
pub fn binomial(n: usize, p: usize) -> f64 {
    if p > n {
        return 0.0;
    }
    let p = p.min(n - p);
    let mut acc = 1.0;
    for i in 0..p {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn check_order(p: u32, n: usize) -> Result<()> {
    if p == 0 || p % 2 != 0 {
        return Err(Error::domain(format!("statistic order p = {p} must be even and positive")));
    }
    if p as usize > n {
        return Err(Error::domain(format!("statistic order p = {p} exceeds sample size {n}")));
    }
    Ok(())
}

/// Elementary symmetric polynomial `e_p` of the values, from power sums
/// via Newton's identities: `m e_m = Σ_{r=1}^{m} (-1)^{r-1} p_r e_{m-r}`.
fn elementary_symmetric(values: &[f64], p: u32) -> f64 {
    let p = p as usize;
    let mut power_sums = vec![0.0; p + 1];
    for &v in values {
        let mut vp = v;
        for ps in power_sums.iter_mut().skip(1) {
            *ps += vp;
            vp *= v;
        }
    }
    let mut e = vec![0.0; p + 1];
    e[0] = 1.0;
    for m in 1..=p {
        let mut acc = 0.0;
        let mut sign = 1.0;
        for r in 1..=m {
            acc += sign * power_sums[r] * e[m - r];
            sign = -sign;
        }
        e[m] = acc / m as f64;
    }
    e[p]
}

/// `Θ̂_j(p) = Σ_k e_p(Z_{·,k}) / C(n,p)` for even `p`.
pub fn ustat_theta(level: &ZLevel, p: u32) -> Result<f64> {
    let n = level.observation_count();
    check_order(p, n)?;
    let per_center: Vec<f64> =
        par::map_indexed(level.center_count(), |k| elementary_symmetric(level.center(k), p));
    Ok(per_center.iter().sum::<f64>() / binomial(n, p as usize))
}

/// Literal enumeration over all size-`p` index subsets; the oracle for
/// [`ustat_theta`]. Refuses to enumerate more than `10^7` subsets.
pub fn ustat_theta_bruteforce(level: &ZLevel, p: u32) -> Result<f64> {
    let n = level.observation_count();
    check_order(p, n)?;
    let count = binomial(n, p as usize);
    if count > 1e7 {
        return Err(Error::Resource(format!(
            "{count:.0} subsets exceed the brute-force cap of 1e7"
        )));
    }
    fn subsets(values: &[f64], start: usize, remaining: u32, product: f64, acc: &mut f64) {
        if remaining == 0 {
            *acc += product;
            return;
        }
        for i in start..=values.len() - remaining as usize {
            subsets(values, i + 1, remaining - 1, product * values[i], acc);
        }
    }
    let mut total = 0.0;
    for k in 0..level.center_count() {
        let mut acc = 0.0;
        subsets(level.center(k), 0, p, 1.0, &mut acc);
        total += acc;
    }
    Ok(total / count)
}

/// Geometric interpolation of the statistic to non-even orders
/// `p ∈ (2, ∞)`: with `p₀` the largest even integer below `p` and
/// `p₀' = p₀ + 2`, `δ` solves `p = δp₀ + (1-δ)p₀'` and
///
/// ```text
/// Θ̂_j(p) = Θ̂_j(p₀)^δ · Θ̂_j(p₀')^{1-δ}.
/// ```
///
/// Finite-sample even-order statistics can dip negative; they are clamped
/// at zero before exponentiation. A negative value could never pass the
/// positive threshold anyway, so clamping never flips a keep decision on.
pub fn ustat_theta_interpolated(level: &ZLevel, p: f64) -> Result<f64> {
    if p.fract() == 0.0 && (p as u64) % 2 == 0 {
        return Err(Error::domain(format!(
            "p = {p} is even; call the exact statistic instead"
        )));
    }
    if p <= 2.0 {
        return Err(Error::domain(format!(
            "interpolation needs p > 2 (largest even order below {p} would vanish)"
        )));
    }
    let p_lo = 2.0 * (p / 2.0).floor();
    let p_hi = p_lo + 2.0;
    let delta = (p_hi - p) / 2.0;
    let theta_lo = ustat_theta(level, p_lo as u32)?.max(0.0);
    let theta_hi = ustat_theta(level, p_hi as u32)?.max(0.0);
    Ok(theta_lo.powf(delta) * theta_hi.powf(1.0 - delta))
}

/// `Θ̂_j^∞ = Σ_k |β̂_{j,k}|`, the sup-norm selection statistic.
pub fn theta_infty(coeffs: &CoefficientSet, j: u32) -> Result<f64> {
    let values = coeffs
        .level(j)
        .ok_or_else(|| Error::index(format!("coefficients carry no level {j}")))?;
    Ok(values.iter().map(|v| v.abs()).sum())
}

/// Which statistic a threshold decision was made with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatOrder {
    /// Even-order U-statistic; threshold `B^{dj} n^{-p/2}`.
    Even(u32),
    /// Interpolated non-even order; threshold `B^{dj} n^{-p/2}`.
    Fractional(f64),
    /// Sup-norm statistic `Θ̂^∞`; threshold `B^{dj} n^{-1/2}`.
    Sup,
}

impl StatOrder {
    fn threshold_exponent(&self) -> f64 {
        match self {
            StatOrder::Even(p) => *p as f64 / 2.0,
            StatOrder::Fractional(p) => p / 2.0,
            StatOrder::Sup => 0.5,
        }
    }
}

/// One keep-or-kill decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDecision {
    pub j: u32,
    pub theta: f64,
    pub threshold: f64,
    pub keep: bool,
}

/// Per-level statistics, thresholds and decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub order: StatOrder,
    pub n: usize,
    pub b_scale: f64,
    pub d: u32,
    pub j_upper: u32,
    pub levels: Vec<LevelDecision>,
}

impl ThresholdReport {
    pub fn kept_levels(&self) -> Vec<u32> {
        self.levels.iter().filter(|l| l.keep).map(|l| l.j).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Apply the hard threshold `τ_j = 1{Θ̂_j ≥ B^{dj} n^{-p/2}}` to per-level
/// statistics (`n^{-1/2}` for the sup-norm rule).
pub fn threshold_levels(
    stats: &[(u32, f64)],
    n: usize,
    b_scale: f64,
    d: u32,
    order: StatOrder,
) -> ThresholdReport {
    let n_factor = (n as f64).powf(-order.threshold_exponent());
    let levels: Vec<LevelDecision> = stats
        .iter()
        .map(|&(j, theta)| {
            let threshold = b_scale.powi((d * j) as i32) * n_factor;
            LevelDecision { j, theta, threshold, keep: theta >= threshold }
        })
        .collect();
    ThresholdReport {
        order,
        n,
        b_scale,
        d,
        j_upper: stats.iter().map(|&(j, _)| j).max().unwrap_or(0),
        levels,
    }
}

/// A fitted estimator: empirical coefficients, the level mask, and (for
/// thresholded fits) the decision report. Levels with `tau = false`
/// contribute exactly zero to evaluation; the mean term is always kept.
#[derive(Debug, Clone)]
pub struct Estimate<'a> {
    frame: &'a NeedletFrame,
    pub coeffs: CoefficientSet,
    pub tau: Vec<bool>,
    pub report: Option<ThresholdReport>,
}

impl Estimate<'_> {
    pub fn keeps(&self, j: u32) -> bool {
        self.tau.get(j as usize).copied().unwrap_or(false)
    }

    pub fn kept_levels(&self) -> Vec<u32> {
        (0..self.tau.len() as u32).filter(|&j| self.tau[j as usize]).collect()
    }

    /// Coefficients with discarded levels zeroed out.
    pub fn masked_coefficients(&self) -> CoefficientSet {
        let mut masked = self.coeffs.clone();
        for j in 0..self.tau.len() as u32 {
            if !self.tau[j as usize] {
                if let Some(values) = masked.level_mut(j) {
                    values.fill(0.0);
                }
            }
        }
        masked
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        self.frame.synthesize(&self.masked_coefficients(), x)
    }

    /// Fast evaluation on a grid of circle angles.
    pub fn eval_grid(&self, angles: &[f64]) -> Result<Vec<f64>> {
        self.frame.synthesize_grid(&self.masked_coefficients(), angles)
    }

    /// CSV with columns `j,k,beta_hat,tau`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "j,k,beta_hat,tau")?;
        for (j, values) in self.coeffs.iter_levels() {
            let tau = if self.keeps(j) { 1 } else { 0 };
            for (k, v) in values.iter().enumerate() {
                writeln!(out, "{},{},{:.17e},{}", j, k, v, tau)?;
            }
        }
        Ok(())
    }
}

/// Global and linear estimators from one shared coefficient computation.
/// The two differ only in the level mask, so their coefficients are
/// bitwise identical.
pub fn fit_both<'a>(
    frame: &'a NeedletFrame,
    data: &Dataset,
    p: u32,
    j_upper: Option<u32>,
) -> Result<(Estimate<'a>, Estimate<'a>)> {
    let j_upper = match j_upper {
        Some(j) => j,
        None => {
            let j_n = truncation_level(data.len(), frame.b_scale(), frame.d())?;
            if j_n > frame.j_max() {
                return Err(Error::index(format!(
                    "truncation level J_n = {j_n} exceeds the frame's j_max = {}; build a deeper frame",
                    frame.j_max()
                )));
            }
            j_n
        }
    };
    let emp = empirical_coefficients(frame, data, j_upper)?;
    let stats: Vec<(u32, f64)> = emp
        .z
        .iter()
        .map(|z| Ok((z.j, ustat_theta(z, p)?)))
        .collect::<Result<_>>()?;
    let report = threshold_levels(&stats, data.len(), frame.b_scale(), frame.d(), StatOrder::Even(p));
    let tau: Vec<bool> = report.levels.iter().map(|l| l.keep).collect();
    let global = Estimate { frame, coeffs: emp.coeffs.clone(), tau, report: Some(report) };
    let linear = Estimate {
        frame,
        coeffs: emp.coeffs,
        tau: vec![true; j_upper as usize + 1],
        report: None,
    };
    Ok((global, linear))
}

/// The global thresholding estimator
/// `f̂ = mean/√ω_d + Σ_{j ≤ J} τ_j Σ_k β̂_{j,k} ψ_{j,k}`.
pub fn fit_global<'a>(
    frame: &'a NeedletFrame,
    data: &Dataset,
    p: u32,
    j_upper: Option<u32>,
) -> Result<Estimate<'a>> {
    Ok(fit_both(frame, data, p, j_upper)?.0)
}

/// The linear estimator: every level up to `J` retained.
pub fn fit_linear<'a>(
    frame: &'a NeedletFrame,
    data: &Dataset,
    j_upper: Option<u32>,
) -> Result<Estimate<'a>> {
    let j = match j_upper {
        Some(j) => j,
        None => truncation_level(data.len(), frame.b_scale(), frame.d())?,
    };
    if j > frame.j_max() {
        return Err(Error::index(format!(
            "level {j} exceeds the frame's j_max = {}",
            frame.j_max()
        )));
    }
    let emp = empirical_coefficients(frame, data, j)?;
    Ok(Estimate {
        frame,
        coeffs: emp.coeffs,
        tau: vec![true; j as usize + 1],
        report: None,
    })
}
