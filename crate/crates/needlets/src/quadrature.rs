//! Quadrature rules: Gauss–Legendre on `[-1, 1]`, equispaced rules on the
//! circle, product cubature on the sphere, and adaptive Simpson for
//! one-off smooth integrals.

use crate::special::legendre_pair;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, exact for polynomials of
/// degree `≤ 2n - 1`. Newton iteration from the Chebyshev initial guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, dp) = legendre_pair(n, 0.0);
        weights[n / 2] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}

/// Equispaced angles on the circle with the uniform weight `2π/count`;
/// integrates trigonometric polynomials of degree `≤ count - 1` exactly.
pub fn circle_grid(count: usize) -> (Vec<f64>, f64) {
    assert!(count >= 1);
    let step = 2.0 * std::f64::consts::PI / count as f64;
    ((0..count).map(|k| k as f64 * step).collect(), step)
}

/// Product cubature on `S²`: Gauss–Legendre in `cos θ` times equispaced
/// longitudes. Exact (up to rounding) for spherical polynomials of degree
/// `≤ degree`. Returns unit vectors with positive weights summing to `4π`.
pub fn sphere_product_grid(degree: u32) -> Vec<([f64; 3], f64)> {
    let n_theta = (degree as usize) / 2 + 1;
    let n_phi = degree as usize + 1;
    let (t_nodes, t_weights) = gauss_legendre(n_theta);
    let phi_weight = 2.0 * std::f64::consts::PI / n_phi as f64;
    let mut grid = Vec::with_capacity(n_theta * n_phi);
    for (t, wt) in t_nodes.iter().zip(&t_weights) {
        let sin_theta = (1.0 - t * t).max(0.0).sqrt();
        for q in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * q as f64 / n_phi as f64;
            grid.push((
                [sin_theta * phi.cos(), sin_theta * phi.sin(), *t],
                wt * phi_weight,
            ));
        }
    }
    grid
}

/// Adaptive Simpson integration of a smooth function to absolute
/// tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 48)
}
