//! Gegenbauer polynomials and projector kernels.
//!
//! The kernel of the orthogonal projector onto the degree-`ℓ` harmonic
//! subspace of `L²(Sᵈ)` is, for `d ≥ 2`,
//!
//! ```text
//! P_{ℓ,d}(x, y) = (ℓ + η_d) / (η_d ω_d) · C_ℓ^{(η_d)}(⟨x, y⟩),   η_d = (d-1)/2,
//! ```
//!
//! where `ω_d` is the surface measure of `Sᵈ`. On the circle (`d = 1`) the
//! Gegenbauer parameter degenerates to `η = 0` and the projector is the
//! Fourier one, handled as a hard special case: `cos(ℓθ)/π` for `ℓ ≥ 1` and
//! `1/(2π)` for `ℓ = 0`.

use crate::error::{Error, Result};

/// Slack accepted around `|t| = 1` before declaring a domain error; inner
/// products of unit vectors land slightly outside `[-1, 1]` by rounding.
pub const COS_ANGLE_SLACK: f64 = 1e-12;

/// Gamma function at half-integer arguments, `Γ(m/2)` for integer `m ≥ 1`.
/// Exact up to f64 rounding: built from `Γ(1/2) = √π`, `Γ(1) = 1` and the
/// recurrence `Γ(x+1) = x Γ(x)`.
fn gamma_half_integer(twice_arg: u32) -> f64 {
    assert!(twice_arg >= 1);
    let mut value = if twice_arg % 2 == 0 {
        1.0 // Γ(1)
    } else {
        std::f64::consts::PI.sqrt() // Γ(1/2)
    };
    let mut twice_x = if twice_arg % 2 == 0 { 2 } else { 1 };
    while twice_x < twice_arg {
        value *= twice_x as f64 / 2.0;
        twice_x += 2;
    }
    value
}

/// Surface measure of the unit sphere `Sᵈ ⊂ R^{d+1}`:
/// `ω_d = 2 π^{(d+1)/2} / Γ((d+1)/2)`.
pub fn surface_measure(d: u32) -> f64 {
    let half_exp = (d + 1) as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half_exp) / gamma_half_integer(d + 1)
}

/// Dimension of the space of degree-`ℓ` spherical harmonics on `Sᵈ`.
///
/// For `d ≥ 2` this is `((ℓ+η)/η)·C(ℓ+2η-1, ℓ)`; on the circle it is 2 for
/// `ℓ ≥ 1` (cosine and sine) and 1 for the constant.
pub fn harmonic_dimension(d: u32, ell: u32) -> f64 {
    if d == 1 {
        return if ell == 0 { 1.0 } else { 2.0 };
    }
    let eta = (d as f64 - 1.0) / 2.0;
    let ell_f = ell as f64;
    // C(ℓ + 2η - 1, ℓ) as a running product; 2η - 1 = d - 2 is an integer.
    let mut binom = 1.0;
    for i in 1..=ell {
        binom *= ((d - 2) as f64 + i as f64) / i as f64;
    }
    (ell_f + eta) / eta * binom
}

/// Dimension plus normalization data for projector kernels on `Sᵈ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    /// Sphere dimension `d ≥ 1`.
    pub d: u32,
    /// Gegenbauer parameter `η_d = (d-1)/2`.
    pub eta: f64,
    /// Surface measure `ω_d`.
    pub omega: f64,
}

impl KernelSpec {
    pub fn new(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("kernel dimension must satisfy d >= 1"));
        }
        Ok(KernelSpec {
            d,
            eta: (d as f64 - 1.0) / 2.0,
            omega: surface_measure(d),
        })
    }
}

fn clamp_cos_angle(t: f64) -> Result<f64> {
    if !t.is_finite() || t.abs() > 1.0 + COS_ANGLE_SLACK {
        return Err(Error::domain(format!(
            "cos(angle) = {t} outside [-1, 1] (+{COS_ANGLE_SLACK:e} slack)"
        )));
    }
    Ok(t.clamp(-1.0, 1.0))
}

/// Gegenbauer polynomial `C_ℓ^{(η)}(t)` by the three-term recurrence
///
/// ```text
/// C_0 = 1,  C_1 = 2ηt,  ℓ C_ℓ = 2t(ℓ+η-1) C_{ℓ-1} - (ℓ+2η-2) C_{ℓ-2},
/// ```
///
/// stable well past `ℓ = 200` for the parameters used here. Requires
/// `η > 0`; the degenerate circle case must go through
/// [`projector_kernel`] instead.
pub fn gegenbauer(eta: f64, ell: u32, t: f64) -> Result<f64> {
    let all = gegenbauer_sweep(eta, ell, t)?;
    Ok(all[ell as usize])
}

/// All of `C_0^{(η)}(t) ..= C_{ℓmax}^{(η)}(t)` in one recurrence sweep.
pub fn gegenbauer_sweep(eta: f64, ell_max: u32, t: f64) -> Result<Vec<f64>> {
    if eta <= 0.0 {
        return Err(Error::domain(
            "gegenbauer parameter must be positive (d = 1 routes through the Fourier projector)",
        ));
    }
    let t = clamp_cos_angle(t)?;
    let mut values = Vec::with_capacity(ell_max as usize + 1);
    values.push(1.0);
    if ell_max == 0 {
        return Ok(values);
    }
    values.push(2.0 * eta * t);
    for ell in 2..=ell_max as usize {
        let ell_f = ell as f64;
        let next = (2.0 * t * (ell_f + eta - 1.0) * values[ell - 1]
            - (ell_f + 2.0 * eta - 2.0) * values[ell - 2])
            / ell_f;
        values.push(next);
    }
    Ok(values)
}

/// Projector kernel `P_{ℓ,d}` evaluated at `cos(angle between x and y)`.
pub fn projector_kernel(spec: &KernelSpec, ell: u32, cos_angle: f64) -> Result<f64> {
    let t = clamp_cos_angle(cos_angle)?;
    if spec.d == 1 {
        if ell == 0 {
            return Ok(0.5 / std::f64::consts::PI);
        }
        let theta = t.acos();
        return Ok((ell as f64 * theta).cos() / std::f64::consts::PI);
    }
    let c = gegenbauer(spec.eta, ell, t)?;
    Ok((ell as f64 + spec.eta) / (spec.eta * spec.omega) * c)
}

/// `P_{0,d} ..= P_{ℓmax,d}` at a single `cos(angle)`, sharing one
/// recurrence sweep.
pub fn projector_sweep(spec: &KernelSpec, ell_max: u32, cos_angle: f64) -> Result<Vec<f64>> {
    let t = clamp_cos_angle(cos_angle)?;
    if spec.d == 1 {
        let theta = t.acos();
        let inv_pi = 1.0 / std::f64::consts::PI;
        let mut values = Vec::with_capacity(ell_max as usize + 1);
        values.push(0.5 * inv_pi);
        // cos(ℓθ) by the Chebyshev two-term recurrence.
        let c1 = theta.cos();
        let mut prev = 1.0;
        let mut cur = c1;
        for _ell in 1..=ell_max {
            values.push(cur * inv_pi);
            let next = 2.0 * c1 * cur - prev;
            prev = cur;
            cur = next;
        }
        return Ok(values);
    }
    let sweep = gegenbauer_sweep(spec.eta, ell_max, t)?;
    Ok(sweep
        .iter()
        .enumerate()
        .map(|(ell, c)| (ell as f64 + spec.eta) / (spec.eta * spec.omega) * c)
        .collect())
}

/// Legendre polynomial `P_n(x)` together with its derivative, used by the
/// Gauss–Legendre node solver.
pub(crate) fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut prev = 1.0;
    let mut cur = x;
    for k in 2..=n {
        let k_f = k as f64;
        let next = ((2.0 * k_f - 1.0) * x * cur - (k_f - 1.0) * prev) / k_f;
        prev = cur;
        cur = next;
    }
    // (1 - x²) P'_n = n (P_{n-1} - x P_n)
    let deriv = if (1.0 - x * x).abs() < 1e-14 {
        let sign: f64 = if x > 0.0 { 1.0 } else { -1.0 };
        let n_f = n as f64;
        sign.powi(n as i32 + 1) * n_f * (n_f + 1.0) / 2.0
    } else {
        n as f64 * (prev - x * cur) / (1.0 - x * x)
    };
    (cur, deriv)
}
