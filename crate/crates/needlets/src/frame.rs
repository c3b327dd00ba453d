//! Needlet frames: per-level cubature, needlet evaluation, and exact
//! analysis/synthesis.
//!
//! A needlet at resolution level `j` and center `ξ_{j,k}` is
//!
//! ```text
//! ψ_{j,k}(x) = √λ_{j,k} Σ_{ℓ ∈ Λ_j} b(ℓ/Bʲ) P_{ℓ,d}(x, ξ_{j,k}),
//! ```
//!
//! with frequency band `Λ_j = {ℓ ≥ 1 : B^{j-1} < ℓ < B^{j+1}}` (the open
//! interval; boundary integers are excluded exactly where `b` vanishes) and
//! `(ξ_{j,k}, λ_{j,k})` a positive cubature rule exact to polynomial degree
//! `2⌊B^{j+1}⌋`, so coefficients of band-limited functions computed by
//! quadrature are exact and the system is a tight frame.
//!
//! The constant function is not covered by any `Λ_j`; the frame carries an
//! explicit mean term (coefficient of `1/√ω_d`) instead, which estimators
//! always retain.

use crate::error::{Error, Result};
use crate::par;
use crate::quadrature::{circle_grid, sphere_product_grid};
use crate::special::{projector_sweep, KernelSpec};
use crate::window::{WindowDescriptor, WindowFunction};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// A point on the supported manifolds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    /// Angle on the circle, reduced to `[0, 2π)`.
    Circle(f64),
    /// Unit vector on the 2-sphere.
    Sphere([f64; 3]),
}

impl Point {
    pub fn circle(angle: f64) -> Self {
        Point::Circle(angle.rem_euclid(2.0 * std::f64::consts::PI))
    }

    /// A sphere point; the vector must be unit length within `1e-12`.
    pub fn sphere(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("sphere point has norm {norm}, expected 1")));
        }
        Ok(Point::Sphere(v))
    }

    pub fn dim(&self) -> u32 {
        match self {
            Point::Circle(_) => 1,
            Point::Sphere(_) => 2,
        }
    }

    /// Cosine of the angle between two points.
    pub fn cos_angle_to(&self, other: &Point) -> f64 {
        match (self, other) {
            (Point::Circle(a), Point::Circle(b)) => (a - b).cos(),
            (Point::Sphere(u), Point::Sphere(v)) => {
                (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).clamp(-1.0, 1.0)
            }
            _ => f64::NAN,
        }
    }

    /// Geodesic distance in `[0, π]`.
    pub fn geodesic_distance(&self, other: &Point) -> f64 {
        self.cos_angle_to(other).clamp(-1.0, 1.0).acos()
    }
}

/// One resolution level: its frequency band and cubature.
#[derive(Debug, Clone)]
pub struct Level {
    pub j: u32,
    /// Frequencies `Λ_j`, ascending.
    pub freqs: Vec<u32>,
    /// `b(ℓ/Bʲ)` for each frequency, precomputed at build time.
    pub band_weights: Vec<f64>,
    /// Cubature nodes `ξ_{j,k}`.
    pub nodes: Vec<Point>,
    /// Cubature weights `λ_{j,k}`, positive, summing to `ω_d`.
    pub weights: Vec<f64>,
}

impl Level {
    pub fn center_count(&self) -> usize {
        self.nodes.len()
    }

    fn max_freq(&self) -> u32 {
        self.freqs.last().copied().unwrap_or(0)
    }

    /// `Σ_ℓ b(ℓ/Bʲ) P_{ℓ,d}(x, y)` — the needlet without its `√λ` factor.
    pub(crate) fn band_kernel(&self, spec: &KernelSpec, x: &Point, y: &Point) -> f64 {
        if self.freqs.is_empty() {
            return 0.0;
        }
        match (x, y) {
            (Point::Circle(a), Point::Circle(b)) => {
                // Fourier projectors: Σ b_ℓ cos(ℓδ)/π with a Chebyshev
                // recurrence seeded at the first band frequency.
                let delta = a - b;
                let c = delta.cos();
                let lo = self.freqs[0] as f64;
                let mut prev = ((lo - 1.0) * delta).cos();
                let mut cur = (lo * delta).cos();
                let mut acc = 0.0;
                for bw in &self.band_weights {
                    acc += bw * cur;
                    let next = 2.0 * c * cur - prev;
                    prev = cur;
                    cur = next;
                }
                acc / std::f64::consts::PI
            }
            _ => {
                let t = x.cos_angle_to(y);
                let kernels = projector_sweep(spec, self.max_freq(), t)
                    .expect("cosine of an angle is always in range");
                self.freqs
                    .iter()
                    .zip(&self.band_weights)
                    .map(|(&ell, bw)| bw * kernels[ell as usize])
                    .sum()
            }
        }
    }
}

/// Whether coefficients came from exact quadrature or from data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientKind {
    Exact,
    Empirical,
}

/// Needlet coefficients `β_{j,k}` for `j ≤ J` plus the mean term (the
/// coefficient of the constant `1/√ω_d`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    pub kind: CoefficientKind,
    pub mean_term: f64,
    levels: Vec<LevelCoefficients>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LevelCoefficients {
    j: u32,
    values: Vec<f64>,
}

impl CoefficientSet {
    /// All-zero coefficients matching `frame` up to level `j_upper`.
    pub fn zeros(frame: &NeedletFrame, j_upper: u32, kind: CoefficientKind) -> Result<Self> {
        frame.check_level(j_upper)?;
        Ok(CoefficientSet {
            kind,
            mean_term: 0.0,
            levels: frame.levels[..=j_upper as usize]
                .iter()
                .map(|level| LevelCoefficients {
                    j: level.j,
                    values: vec![0.0; level.center_count()],
                })
                .collect(),
        })
    }

    pub fn from_levels(
        kind: CoefficientKind,
        mean_term: f64,
        levels: Vec<(u32, Vec<f64>)>,
    ) -> Self {
        CoefficientSet {
            kind,
            mean_term,
            levels: levels
                .into_iter()
                .map(|(j, values)| LevelCoefficients { j, values })
                .collect(),
        }
    }

    /// Highest level stored.
    pub fn j_upper(&self) -> u32 {
        self.levels.last().map(|l| l.j).unwrap_or(0)
    }

    pub fn level(&self, j: u32) -> Option<&[f64]> {
        self.levels.iter().find(|l| l.j == j).map(|l| l.values.as_slice())
    }

    pub fn level_mut(&mut self, j: u32) -> Option<&mut [f64]> {
        self.levels.iter_mut().find(|l| l.j == j).map(|l| l.values.as_mut_slice())
    }

    pub fn iter_levels(&self) -> impl Iterator<Item = (u32, &[f64])> {
        self.levels.iter().map(|l| (l.j, l.values.as_slice()))
    }

    /// `mean² + Σ_{j,k} β²` — the left side of the Parseval identity.
    pub fn l2_energy(&self) -> f64 {
        self.mean_term * self.mean_term
            + self
                .levels
                .iter()
                .map(|l| l.values.iter().map(|v| v * v).sum::<f64>())
                .sum::<f64>()
    }

    /// Verify the `(j, k)` layout matches the frame.
    pub fn check_layout(&self, frame: &NeedletFrame) -> Result<()> {
        if self.j_upper() > frame.j_max {
            return Err(Error::Mismatch(format!(
                "coefficients reach level {} but frame stops at {}",
                self.j_upper(),
                frame.j_max
            )));
        }
        for l in &self.levels {
            let expected = frame.levels[l.j as usize].center_count();
            if l.values.len() != expected {
                return Err(Error::Mismatch(format!(
                    "level {} holds {} coefficients, frame has {} centers",
                    l.j,
                    l.values.len(),
                    expected
                )));
            }
        }
        Ok(())
    }

    /// CSV with columns `j,k,value`; the mean term is emitted first with
    /// `j = -1, k = 0`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "j,k,value")?;
        writeln!(out, "-1,0,{:.17e}", self.mean_term)?;
        for l in &self.levels {
            for (k, v) in l.values.iter().enumerate() {
                writeln!(out, "{},{},{:.17e}", l.j, k, v)?;
            }
        }
        Ok(())
    }
}

/// Serializable frame summary (enough to rebuild the frame).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameDescriptor {
    pub d: u32,
    pub b: f64,
    pub j_max: u32,
    pub window: WindowDescriptor,
    pub levels: Vec<LevelDescriptor>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelDescriptor {
    pub j: u32,
    pub center_count: usize,
    pub freq_lo: u32,
    pub freq_hi: u32,
}

impl FrameDescriptor {
    /// Rebuild the frame this descriptor summarizes.
    pub fn build(&self) -> Result<NeedletFrame> {
        let window = WindowFunction::build(self.window.b, self.window.variant, 128)?;
        NeedletFrame::build(self.d, self.b, self.j_max, window)
    }
}

/// Builder with the optional knobs (mean term, per-level point cap).
#[derive(Debug)]
pub struct FrameBuilder {
    d: u32,
    b_scale: f64,
    j_max: u32,
    window: Option<WindowFunction>,
    include_mean: bool,
    points_cap: usize,
}

impl FrameBuilder {
    pub fn new(d: u32, b_scale: f64, j_max: u32) -> Self {
        FrameBuilder {
            d,
            b_scale,
            j_max,
            window: None,
            include_mean: true,
            points_cap: 1 << 24,
        }
    }

    pub fn window(mut self, window: WindowFunction) -> Self {
        self.window = Some(window);
        self
    }

    pub fn include_mean(mut self, flag: bool) -> Self {
        self.include_mean = flag;
        self
    }

    /// Cap on the number of cubature points of any single level.
    pub fn points_cap(mut self, cap: usize) -> Self {
        self.points_cap = cap;
        self
    }

    pub fn build(self) -> Result<NeedletFrame> {
        if self.d != 1 && self.d != 2 {
            return Err(Error::domain(format!(
                "supported dimensions are 1 and 2, got d = {}",
                self.d
            )));
        }
        let window = match self.window {
            Some(w) => {
                if (w.b_scale() - self.b_scale).abs() > 1e-12 {
                    return Err(Error::Mismatch(format!(
                        "window scale {} does not match frame scale {}",
                        w.b_scale(),
                        self.b_scale
                    )));
                }
                w
            }
            None => WindowFunction::smooth_bump(self.b_scale)?,
        };
        let spec = KernelSpec::new(self.d)?;
        let b = self.b_scale;

        let mut levels = Vec::with_capacity(self.j_max as usize + 1);
        for j in 0..=self.j_max {
            // Λ_j: integers strictly inside (B^{j-1}, B^{j+1}).
            let lo = b.powi(j as i32 - 1);
            let hi = b.powi(j as i32 + 1);
            let first = (lo.floor() as u32 + 1).max(1);
            let mut freqs = Vec::new();
            let mut band_weights = Vec::new();
            let mut ell = first;
            while (ell as f64) < hi {
                if (ell as f64) > lo {
                    freqs.push(ell);
                    band_weights.push(window.eval(ell as f64 / b.powi(j as i32))?);
                }
                ell += 1;
            }

            let degree = 2 * (hi + 1e-9).floor() as usize;
            let (nodes, weights) = match self.d {
                1 => {
                    let count = degree + 1;
                    if count > self.points_cap {
                        return Err(Error::Resource(format!(
                            "level {j} needs {count} cubature points, cap is {}",
                            self.points_cap
                        )));
                    }
                    let (angles, w) = circle_grid(count);
                    (
                        angles.into_iter().map(Point::Circle).collect::<Vec<_>>(),
                        vec![w; count],
                    )
                }
                _ => {
                    let grid = sphere_product_grid(degree as u32);
                    if grid.len() > self.points_cap {
                        return Err(Error::Resource(format!(
                            "level {j} needs {} cubature points, cap is {}",
                            grid.len(),
                            self.points_cap
                        )));
                    }
                    let mut nodes = Vec::with_capacity(grid.len());
                    let mut ws = Vec::with_capacity(grid.len());
                    for (v, w) in grid {
                        nodes.push(Point::Sphere(v));
                        ws.push(w);
                    }
                    (nodes, ws)
                }
            };
            levels.push(Level { j, freqs, band_weights, nodes, weights });
        }

        Ok(NeedletFrame {
            d: self.d,
            b_scale: b,
            j_max: self.j_max,
            window,
            spec,
            levels,
            include_mean: self.include_mean,
        })
    }
}

/// A built needlet frame on `S¹` or `S²`.
#[derive(Debug, Clone)]
pub struct NeedletFrame {
    d: u32,
    b_scale: f64,
    j_max: u32,
    window: WindowFunction,
    spec: KernelSpec,
    levels: Vec<Level>,
    include_mean: bool,
}

impl NeedletFrame {
    pub fn build(d: u32, b_scale: f64, j_max: u32, window: WindowFunction) -> Result<Self> {
        FrameBuilder::new(d, b_scale, j_max).window(window).build()
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn b_scale(&self) -> f64 {
        self.b_scale
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn window(&self) -> &WindowFunction {
        self.window_ref()
    }

    fn window_ref(&self) -> &WindowFunction {
        &self.window
    }

    pub fn kernel_spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// Surface measure `ω_d` of the underlying sphere.
    pub fn omega(&self) -> f64 {
        self.spec.omega
    }

    pub fn include_mean(&self) -> bool {
        self.include_mean
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    fn check_level(&self, j: u32) -> Result<()> {
        if j > self.j_max {
            return Err(Error::index(format!("level {j} exceeds j_max = {}", self.j_max)));
        }
        Ok(())
    }

    pub fn level(&self, j: u32) -> Result<&Level> {
        self.check_level(j)?;
        Ok(&self.levels[j as usize])
    }

    /// Number of needlets at level `j`.
    pub fn center_count(&self, j: u32) -> Result<usize> {
        Ok(self.level(j)?.center_count())
    }

    /// Evaluate `ψ_{j,k}` at `x` (centers are 0-indexed).
    pub fn needlet_eval(&self, j: u32, k: usize, x: &Point) -> Result<f64> {
        let level = self.level(j)?;
        if k >= level.center_count() {
            return Err(Error::index(format!(
                "center {k} out of range at level {j} (K_j = {})",
                level.center_count()
            )));
        }
        if x.dim() != self.d {
            return Err(Error::Mismatch("point dimension does not match frame".into()));
        }
        Ok(level.weights[k].sqrt() * level.band_kernel(&self.spec, x, &level.nodes[k]))
    }

    /// The highest frequency any level up to `j_upper` touches.
    fn max_band_freq(&self, j_upper: u32) -> u32 {
        self.levels[..=j_upper as usize]
            .iter()
            .map(|l| l.max_freq())
            .max()
            .unwrap_or(0)
    }

    /// Exact needlet coefficients `β_{j,k} = ∫ f ψ_{j,k} dx` for `j ≤ J`,
    /// computed on a shared quadrature grid exact to degree `2⌊B^{J+1}⌋`,
    /// plus the mean term `∫ f/√ω_d dx`.
    pub fn analyze<F>(&self, f: F, j_upper: u32) -> Result<CoefficientSet>
    where
        F: Fn(&Point) -> f64 + Sync,
    {
        self.check_level(j_upper)?;
        match self.d {
            1 => self.analyze_circle(&f, j_upper),
            _ => self.analyze_sphere(&f, j_upper),
        }
    }

    /// Circle analysis through per-frequency amplitudes: with Fourier
    /// projectors, `β_{j,k} = √λ_k Σ_ℓ b_ℓ (A_ℓ cos ℓξ_k + C_ℓ sin ℓξ_k)`
    /// where `A_ℓ, C_ℓ` are the quadrature sums `Σ_q w f(x_q) cos(ℓx_q)/π`.
    /// This is an exact rearrangement of the shared-grid quadrature of
    /// `f·ψ_{j,k}`.
    fn analyze_circle<F>(&self, f: &F, j_upper: u32) -> Result<CoefficientSet>
    where
        F: Fn(&Point) -> f64 + Sync,
    {
        let degree = 2 * (self.b_scale.powi(j_upper as i32 + 1) + 1e-9).floor() as usize;
        let (angles, w) = circle_grid(degree + 1);
        let samples: Vec<f64> =
            par::map_slice(&angles, |&a| f(&Point::Circle(a)));

        let ell_max = self.max_band_freq(j_upper) as usize;
        let inv_pi = 1.0 / std::f64::consts::PI;
        let amp: Vec<(f64, f64)> = par::map_indexed(ell_max + 1, |ell| {
            if ell == 0 {
                return (0.0, 0.0);
            }
            let mut a = 0.0;
            let mut c = 0.0;
            for (angle, fv) in angles.iter().zip(&samples) {
                let (s, co) = (ell as f64 * angle).sin_cos();
                a += fv * co;
                c += fv * s;
            }
            (a * w * inv_pi, c * w * inv_pi)
        });

        let mean_term =
            samples.iter().sum::<f64>() * w / self.spec.omega.sqrt();

        let mut levels = Vec::with_capacity(j_upper as usize + 1);
        for level in &self.levels[..=j_upper as usize] {
            let values: Vec<f64> = par::map_indexed(level.center_count(), |k| {
                let Point::Circle(xi) = level.nodes[k] else { unreachable!() };
                let mut acc = 0.0;
                for (&ell, bw) in level.freqs.iter().zip(&level.band_weights) {
                    let (s, co) = (ell as f64 * xi).sin_cos();
                    let (a, c) = amp[ell as usize];
                    acc += bw * (a * co + c * s);
                }
                level.weights[k].sqrt() * acc
            });
            levels.push((level.j, values));
        }
        Ok(CoefficientSet::from_levels(
            CoefficientKind::Exact,
            if self.include_mean { mean_term } else { 0.0 },
            levels,
        ))
    }

    fn analyze_sphere<F>(&self, f: &F, j_upper: u32) -> Result<CoefficientSet>
    where
        F: Fn(&Point) -> f64 + Sync,
    {
        let degree = 2 * (self.b_scale.powi(j_upper as i32 + 1) + 1e-9).floor() as u32;
        let grid: Vec<(Point, f64)> = sphere_product_grid(degree)
            .into_iter()
            .map(|(v, w)| (Point::Sphere(v), w))
            .collect();
        let samples: Vec<f64> = par::map_slice(&grid, |(p, _)| f(p));

        let mean_term = grid
            .iter()
            .zip(&samples)
            .map(|((_, w), fv)| w * fv)
            .sum::<f64>()
            / self.spec.omega.sqrt();

        let mut levels = Vec::with_capacity(j_upper as usize + 1);
        for level in &self.levels[..=j_upper as usize] {
            let spec = &self.spec;
            let values: Vec<f64> = par::map_indexed(level.center_count(), |k| {
                let node = &level.nodes[k];
                let sum: f64 = grid
                    .iter()
                    .zip(&samples)
                    .map(|((p, w), fv)| w * fv * level.band_kernel(spec, p, node))
                    .sum();
                level.weights[k].sqrt() * sum
            });
            levels.push((level.j, values));
        }
        Ok(CoefficientSet::from_levels(
            CoefficientKind::Exact,
            if self.include_mean { mean_term } else { 0.0 },
            levels,
        ))
    }

    /// Pointwise reconstruction `mean/√ω_d + Σ_{j,k} β_{j,k} ψ_{j,k}(x)`.
    pub fn synthesize(&self, coeffs: &CoefficientSet, x: &Point) -> Result<f64> {
        coeffs.check_layout(self)?;
        let mut acc = coeffs.mean_term / self.spec.omega.sqrt();
        for (j, values) in coeffs.iter_levels() {
            let level = &self.levels[j as usize];
            for (k, beta) in values.iter().enumerate() {
                if *beta != 0.0 {
                    acc += beta
                        * level.weights[k].sqrt()
                        * level.band_kernel(&self.spec, x, &level.nodes[k]);
                }
            }
        }
        Ok(acc)
    }

    /// Reconstruction on a grid of circle angles. Collapses the needlet sum
    /// into per-frequency cosine/sine amplitudes first, which is an exact
    /// rearrangement of [`Self::synthesize`] and far cheaper on large
    /// grids.
    pub fn synthesize_grid(&self, coeffs: &CoefficientSet, angles: &[f64]) -> Result<Vec<f64>> {
        if self.d != 1 {
            return Err(Error::domain("synthesize_grid is a circle-only fast path"));
        }
        coeffs.check_layout(self)?;
        let amp = self.collapse_to_fourier(coeffs);
        let mean = coeffs.mean_term / self.spec.omega.sqrt();
        Ok(par::map_slice(angles, |&x| {
            let mut acc = mean;
            // cos/sin of ℓx by angle addition up the frequency ladder.
            let (sx, cx) = x.sin_cos();
            let mut c_ell = cx;
            let mut s_ell = sx;
            for (a, c) in amp.iter().skip(1) {
                acc += a * c_ell + c * s_ell;
                let c_next = c_ell * cx - s_ell * sx;
                s_ell = s_ell * cx + c_ell * sx;
                c_ell = c_next;
            }
            acc
        }))
    }

    /// Per-frequency amplitudes `(a_ℓ, c_ℓ)` of `Σ β ψ` on the circle:
    /// `Σ_{j,k} β_{j,k} ψ_{j,k}(x) = Σ_ℓ a_ℓ cos ℓx + c_ℓ sin ℓx`.
    fn collapse_to_fourier(&self, coeffs: &CoefficientSet) -> Vec<(f64, f64)> {
        let ell_max = self.max_band_freq(coeffs.j_upper()) as usize;
        let inv_pi = 1.0 / std::f64::consts::PI;
        let mut amp = vec![(0.0, 0.0); ell_max + 1];
        for (j, values) in coeffs.iter_levels() {
            let level = &self.levels[j as usize];
            let contributions: Vec<(usize, f64, f64)> =
                par::map_indexed(level.freqs.len(), |idx| {
                    let ell = level.freqs[idx];
                    let bw = level.band_weights[idx];
                    let mut a = 0.0;
                    let mut c = 0.0;
                    for (k, beta) in values.iter().enumerate() {
                        if *beta == 0.0 {
                            continue;
                        }
                        let Point::Circle(xi) = level.nodes[k] else { unreachable!() };
                        let scale = beta * level.weights[k].sqrt();
                        let (s, co) = (ell as f64 * xi).sin_cos();
                        a += scale * co;
                        c += scale * s;
                    }
                    (ell as usize, a * bw * inv_pi, c * bw * inv_pi)
                });
            for (ell, a, c) in contributions {
                amp[ell].0 += a;
                amp[ell].1 += c;
            }
        }
        amp
    }

    pub fn descriptor(&self) -> FrameDescriptor {
        FrameDescriptor {
            d: self.d,
            b: self.b_scale,
            j_max: self.j_max,
            window: self.window.descriptor(),
            levels: self
                .levels
                .iter()
                .map(|l| LevelDescriptor {
                    j: l.j,
                    center_count: l.center_count(),
                    freq_lo: l.freqs.first().copied().unwrap_or(0),
                    freq_hi: l.max_freq(),
                })
                .collect(),
        }
    }
}
