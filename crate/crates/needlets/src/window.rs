//! Weight (window) functions `b` on `(0, ∞)`.
//!
//! A valid window satisfies
//!
//! 1. compact support in `[1/B, B]`,
//! 2. the partition of unity `Σ_{j≥0} b²(ℓ/Bʲ) = 1` for every integer
//!    frequency `ℓ ≥ 1`,
//! 3. membership in `C^ρ` for some `ρ ≥ 1`.
//!
//! The default construction integrates the scaled exponential bump
//! `t ↦ exp(-1/(1-t²))` into a smooth step `ψ`, flattens it into
//!
//! ```text
//! φ(t) = 1 on [0, 1/B],   φ(t) = ψ(1 - 2B/(B-1)·(t - 1/B)) on (1/B, 1],   φ(t) = 0 beyond 1,
//! ```
//!
//! and sets `b²(ξ) = φ(ξ/B) - φ(ξ)`. The sum over levels then telescopes,
//! which is what makes property 2 exact for every `ℓ ≥ 1` rather than only
//! `ℓ ≥ B`. A cubic Bernstein smoothstep replaces `ψ` in the finite-
//! smoothness variant.

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use serde::{Deserialize, Serialize};

/// Absolute tolerance for the one-off `ψ` integrals.
const PSI_TOL: f64 = 1e-11;
/// Partition-of-unity defect allowed at build time.
const BUILD_DEFECT_TOL: f64 = 1e-6;

/// Which smooth step the window is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowVariant {
    /// `C^∞` step from the primitive of `exp(-1/(1-t²))`.
    SmoothBump,
    /// `C¹` cubic Bernstein (smoothstep) polynomial.
    BSpline,
}

/// Smoothness class `ρ` of the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Finite(u32),
    Infinite,
}

/// Serializable summary of a window, enough to rebuild it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowDescriptor {
    pub b: f64,
    pub variant: WindowVariant,
    pub normalizer: f64,
}

#[derive(Debug, Clone)]
struct Tabulation {
    values: Vec<f64>,
    step: f64,
}

/// A built window function.
#[derive(Debug, Clone)]
pub struct WindowFunction {
    b_scale: f64,
    variant: WindowVariant,
    rho: Smoothness,
    normalizer: f64,
    table: Option<Tabulation>,
}

fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

impl WindowFunction {
    /// Build a window for scale `B > 1`.
    ///
    /// `quadrature_nodes` (≥ 64) pre-partitions the normalizer integral;
    /// adaptive refinement below `1e-11` happens inside each panel, so the
    /// parameter only affects speed.
    pub fn build(b_scale: f64, variant: WindowVariant, quadrature_nodes: usize) -> Result<Self> {
        if !(b_scale > 1.0) || !b_scale.is_finite() {
            return Err(Error::domain(format!("window scale B = {b_scale} must exceed 1")));
        }
        if quadrature_nodes < 64 {
            return Err(Error::domain("quadrature_nodes must be at least 64"));
        }
        let normalizer = match variant {
            WindowVariant::SmoothBump => {
                let panels = quadrature_nodes;
                let h = 2.0 / panels as f64;
                let mut total = 0.0;
                for i in 0..panels {
                    let a = -1.0 + i as f64 * h;
                    total += adaptive_simpson(bump, a, a + h, PSI_TOL / panels as f64);
                }
                total
            }
            WindowVariant::BSpline => 1.0,
        };
        let rho = match variant {
            WindowVariant::SmoothBump => Smoothness::Infinite,
            WindowVariant::BSpline => Smoothness::Finite(1),
        };
        let window = WindowFunction { b_scale, variant, rho, normalizer, table: None };
        let defect = window.partition_defect(64);
        if !(defect <= BUILD_DEFECT_TOL) {
            return Err(Error::Construction(format!(
                "partition-of-unity defect {defect:e} exceeds {BUILD_DEFECT_TOL:e}"
            )));
        }
        Ok(window)
    }

    /// The default `C^∞` window at scale `B`.
    pub fn smooth_bump(b_scale: f64) -> Result<Self> {
        Self::build(b_scale, WindowVariant::SmoothBump, 128)
    }

    pub fn b_scale(&self) -> f64 {
        self.b_scale
    }

    pub fn variant(&self) -> WindowVariant {
        self.variant
    }

    pub fn rho(&self) -> Smoothness {
        self.rho
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn descriptor(&self) -> WindowDescriptor {
        WindowDescriptor { b: self.b_scale, variant: self.variant, normalizer: self.normalizer }
    }

    /// Smooth step `ψ: [-1, 1] → [0, 1]`, monotone, `ψ(-1) = 0`, `ψ(1) = 1`.
    fn psi(&self, u: f64) -> f64 {
        if u <= -1.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        match self.variant {
            WindowVariant::SmoothBump => {
                if let Some(table) = &self.table {
                    let pos = (u + 1.0) / table.step;
                    let idx = (pos.floor() as usize).min(table.values.len() - 2);
                    let frac = pos - idx as f64;
                    return table.values[idx] * (1.0 - frac) + table.values[idx + 1] * frac;
                }
                // Integrate from the nearer endpoint; the bump is symmetric.
                if u <= 0.0 {
                    adaptive_simpson(bump, -1.0, u, PSI_TOL) / self.normalizer
                } else {
                    1.0 - adaptive_simpson(bump, u, 1.0, PSI_TOL) / self.normalizer
                }
            }
            WindowVariant::BSpline => {
                let v = (u + 1.0) / 2.0;
                v * v * (3.0 - 2.0 * v)
            }
        }
    }

    /// The flattened step `φ`.
    fn phi(&self, t: f64) -> f64 {
        let b = self.b_scale;
        if t <= 1.0 / b {
            1.0
        } else if t > 1.0 {
            0.0
        } else {
            self.psi(1.0 - (2.0 * b / (b - 1.0)) * (t - 1.0 / b))
        }
    }

    /// `b²(u)`; exact zero outside the open support `(1/B, B)`.
    pub fn eval_squared(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(Error::domain(format!("window argument u = {u} must be positive")));
        }
        if u <= 1.0 / self.b_scale || u >= self.b_scale {
            return Ok(0.0);
        }
        // Quadrature noise can leave a ~1e-11 negative residue near the edges.
        Ok((self.phi(u / self.b_scale) - self.phi(u)).max(0.0))
    }

    /// `b(u)`.
    pub fn eval(&self, u: f64) -> Result<f64> {
        Ok(self.eval_squared(u)?.sqrt())
    }

    /// Max over `ℓ ∈ [1, ell_max]` of `|Σ_{j≥0} b²(ℓ/Bʲ) - 1|`. The inner
    /// sum truncates itself: at most two levels overlap any frequency.
    pub fn partition_defect(&self, ell_max: u32) -> f64 {
        partition_defect_of(|u| self.eval_squared(u).unwrap_or(0.0), self.b_scale, ell_max)
    }

    /// Tabulate `ψ` for fast evaluation (linear interpolation). With 2^14
    /// samples the interpolation error on `ψ` (and `b²`) stays below 1e-8;
    /// for `b` itself an error `ε` in `b²` becomes `√ε` where `b²` is
    /// smaller than `ε`, unavoidable near the support endpoints.
    pub fn with_tabulation(mut self, samples: usize) -> Self {
        if self.variant != WindowVariant::SmoothBump {
            return self; // polynomial step is already cheap
        }
        let samples = samples.max(1024);
        let step = 2.0 / samples as f64;
        // One sweep of panel integrals, accumulated.
        let mut values = Vec::with_capacity(samples + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for i in 0..samples {
            let a = -1.0 + i as f64 * step;
            acc += adaptive_simpson(bump, a, a + step, PSI_TOL / samples as f64);
            values.push(acc / self.normalizer);
        }
        self.table = Some(Tabulation { values, step });
        self
    }
}

/// Partition-of-unity defect for an arbitrary squared window evaluator.
/// Exists separately from [`WindowFunction::partition_defect`] so tests can
/// probe deliberately corrupted windows.
pub fn partition_defect_of<F: Fn(f64) -> f64>(b_squared: F, b_scale: f64, ell_max: u32) -> f64 {
    let mut worst: f64 = 0.0;
    for ell in 1..=ell_max {
        let ell_f = ell as f64;
        // b²(ℓ/Bʲ) ≠ 0 only for log_B ℓ - 1 < j < log_B ℓ + 1.
        let center = ell_f.ln() / b_scale.ln();
        let j_lo = (center - 1.0).ceil().max(0.0) as u32;
        let j_hi = (center + 1.0).floor() as u32;
        let mut sum = 0.0;
        for j in j_lo..=j_hi {
            sum += b_squared(ell_f / b_scale.powi(j as i32));
        }
        worst = worst.max((sum - 1.0).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn support_endpoints_are_zero() {
        let w = WindowFunction::smooth_bump(2.0).unwrap();
        assert_eq!(w.eval(0.5).unwrap(), 0.0);
        assert_eq!(w.eval(2.0).unwrap(), 0.0);
        assert_eq!(w.eval(6.0).unwrap(), 0.0);
        assert_eq!(w.eval(1e-9).unwrap(), 0.0);
        assert!(w.eval(0.0).is_err());
        assert!(w.eval(-1.0).is_err());
    }

    #[test]
    fn unit_value_at_one_for_b_two() {
        // φ(1/2) - φ(1) = 1 - ψ(-1) = 1 exactly by construction.
        let w = WindowFunction::smooth_bump(2.0).unwrap();
        assert_eq!(w.eval(1.0).unwrap(), 1.0);
    }

    #[test]
    fn interior_values_are_strictly_between_zero_and_one() {
        let w = WindowFunction::smooth_bump(2.0).unwrap();
        let v = w.eval(2.0_f64.sqrt()).unwrap();
        assert!(v > 0.0 && v < 1.0, "b(sqrt(B)) = {v}");
    }

    #[test]
    fn partition_sum_at_frequency_four() {
        let w = WindowFunction::smooth_bump(2.0).unwrap();
        let sum: f64 =
            (0..=10).map(|j| w.eval_squared(4.0 / 2.0_f64.powi(j)).unwrap()).sum();
        assert_relative_eq!(sum, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn partition_defect_small_for_both_variants() {
        let w = WindowFunction::smooth_bump(2.0).unwrap();
        assert!(w.partition_defect(512) <= 1e-6);
        let w = WindowFunction::build(2.0, WindowVariant::BSpline, 64).unwrap();
        assert!(w.partition_defect(512) <= 1e-9);
    }

    #[test]
    fn partition_defect_single_frequency() {
        // ℓ = 1 is covered by j = 0 alone when B = 2.
        let w = WindowFunction::smooth_bump(2.0).unwrap();
        assert!(w.partition_defect(1) <= 1e-6);
    }

    #[test]
    fn corrupted_window_is_detected() {
        let w = WindowFunction::smooth_bump(2.0).unwrap();
        let defect =
            partition_defect_of(|u| 0.81 * w.eval_squared(u).unwrap(), 2.0, 64);
        assert!(defect >= 0.1, "defect = {defect}");
    }

    #[test]
    fn at_most_two_levels_overlap_each_frequency() {
        let w = WindowFunction::smooth_bump(2.0).unwrap();
        for ell in 1..=256u32 {
            let active = (0..=12)
                .filter(|&j| w.eval_squared(ell as f64 / 2.0_f64.powi(j)).unwrap() > 0.0)
                .count();
            assert!(active >= 1 && active <= 2, "ell = {ell}: {active} levels");
        }
    }

    #[test]
    fn monotone_on_each_side_of_one() {
        let w = WindowFunction::smooth_bump(2.0).unwrap();
        let mut prev = 0.0;
        for i in 0..=200 {
            let u = 0.5 + 0.5 * i as f64 / 200.0;
            let v = w.eval(u).unwrap();
            assert!(v + 1e-12 >= prev, "not non-decreasing at u = {u}");
            prev = v;
        }
        for i in 0..=200 {
            let u = 1.0 + i as f64 / 200.0;
            let v = w.eval(u).unwrap();
            assert!(v <= prev + 1e-12, "not non-increasing at u = {u}");
            prev = v;
        }
    }

    fn max_fourth_difference(samples: &[f64], h: f64) -> f64 {
        let mut max4: f64 = 0.0;
        for i in 2..samples.len() - 2 {
            let d4 = (samples[i - 2] - 4.0 * samples[i - 1] + 6.0 * samples[i]
                - 4.0 * samples[i + 1]
                + samples[i + 2])
                / h.powi(4);
            max4 = max4.max(d4.abs());
        }
        max4
    }

    #[test]
    fn finite_difference_derivatives_stay_bounded() {
        // Fourth-order central differences on a 10⁴-point grid; a
        // non-smooth join at 1/B, 1 or B would blow these up by orders of
        // magnitude. b² is probed across the whole support including the
        // endpoints; b itself on the interior, since b = √(b²) amplifies
        // quadrature noise ε to √ε where b² < ε.
        let w = WindowFunction::smooth_bump(2.0).unwrap();
        let n = 10_000;
        let h = 1.5 / n as f64;
        let b2: Vec<f64> = (0..=n)
            .map(|i| w.eval_squared(0.5 + i as f64 * h).unwrap())
            .collect();
        let max4 = max_fourth_difference(&b2, h);
        assert!(max4 < 1e8, "fourth difference of b² blow-up: {max4:e}");

        let h = 1.2 / n as f64;
        let b: Vec<f64> = (0..=n).map(|i| w.eval(0.6 + i as f64 * h).unwrap()).collect();
        let max4 = max_fourth_difference(&b, h);
        assert!(max4 < 1e8, "fourth difference of b blow-up: {max4:e}");
    }

    #[test]
    fn tabulation_error_within_budget() {
        // The 1e-8 budget holds for the tabulated quantity (the step ψ and
        // hence b²). For b itself it necessarily degrades to √ε near the
        // support edges.
        let exact = WindowFunction::smooth_bump(2.0).unwrap();
        let fast = exact.clone().with_tabulation(1 << 14);
        let mut worst: f64 = 0.0;
        for i in 1..2000 {
            let u = 0.5 + 1.5 * i as f64 / 2000.0;
            worst = worst
                .max((exact.eval_squared(u).unwrap() - fast.eval_squared(u).unwrap()).abs());
        }
        assert!(worst <= 1e-8, "tabulation error on b²: {worst:e}");
    }

    #[test]
    fn build_rejects_bad_parameters() {
        assert!(WindowFunction::smooth_bump(1.0).is_err());
        assert!(WindowFunction::smooth_bump(0.5).is_err());
        assert!(WindowFunction::build(2.0, WindowVariant::SmoothBump, 8).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn partition_of_unity_for_random_scales(b_scale in 1.3f64..3.5) {
            let w = WindowFunction::smooth_bump(b_scale).unwrap();
            prop_assert!(w.partition_defect(64) <= 1e-6);
        }
    }
}
