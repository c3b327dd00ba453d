//! Acceptance suite: every advertised numerical guarantee of the crate,
//! one test per criterion, each printing a PASS/FAIL line with its
//! measurements. Run with
//!
//! ```text
//! cargo test -p needlets --test acceptance -- --nocapture
//! ```
//!
//! The statistical checks are seeded and deterministic.

use needlets::besov::{lp_risk, theta_true, LossOrder, TestFunction};
use needlets::estimator::{
    binomial, empirical_coefficients, fit_both, truncation_level, ustat_theta,
    ustat_theta_bruteforce, ZLevel,
};
use needlets::frame::Point;
use needlets::sim::{
    generate_circle_dataset, run_experiment, ExperimentConfig, NoiseFamily,
};
use needlets::{FrameBuilder, NeedletFrame, WindowFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

fn circle_frame(j_max: u32) -> NeedletFrame {
    FrameBuilder::new(1, 2.0, j_max).build().unwrap()
}

fn f2(p: &Point) -> f64 {
    let Point::Circle(a) = p else { unreachable!() };
    (4.0 * a).cos()
}

/// 1. Partition of unity: defect of the built window over all integer
///    frequencies up to 512 stays below 1e-6, in under a second.
#[test]
fn criterion_01_partition_of_unity() {
    let started = Instant::now();
    let window = WindowFunction::smooth_bump(2.0).unwrap();
    let defect = window.partition_defect(512);
    let elapsed = started.elapsed().as_secs_f64();
    println!("criterion 01: partition-of-unity defect {defect:.2e} in {elapsed:.3}s");
    assert!(defect <= 1e-6, "FAIL criterion 01: defect {defect:e}");
    assert!(elapsed < 1.0, "FAIL criterion 01: took {elapsed:.3}s (budget 1s)");
    println!("PASS criterion 01");
}

/// 2. Tight frame: for cos(4x), mean² + Σβ² equals ‖f‖² = π to relative
///    1e-6, and analyze→synthesize reconstructs to 1e-6 sup error on 1000
///    points.
#[test]
fn criterion_02_tight_frame_parseval_and_reconstruction() {
    let frame = circle_frame(4);
    let coeffs = frame.analyze(f2, 4).unwrap();
    let energy = coeffs.l2_energy();
    let rel = (energy - PI).abs() / PI;
    println!("criterion 02: coefficient energy {energy:.12} vs pi (rel err {rel:.2e})");
    assert!(rel <= 1e-6, "FAIL criterion 02: Parseval relative error {rel:e}");

    let angles: Vec<f64> = (0..1000).map(|i| 2.0 * PI * i as f64 / 1000.0).collect();
    let values = frame.synthesize_grid(&coeffs, &angles).unwrap();
    let sup = angles
        .iter()
        .zip(&values)
        .map(|(&a, v)| (v - (4.0 * a).cos()).abs())
        .fold(0.0f64, f64::max)
        ;
    println!("criterion 02: reconstruction sup error {sup:.2e} on 1000 points");
    assert!(sup <= 1e-6, "FAIL criterion 02: sup error {sup:e}");
    println!("PASS criterion 02");
}

/// 3. L^p norm scaling: ‖ψ_{j,k}‖_p · B^{-j(1/2 - 1/p)} stays inside
///    [0.2, 5] for p ∈ {1, 2, 4, ∞} and j ≤ 8, in under 10 seconds.
#[test]
fn criterion_03_needlet_lp_norm_scaling() {
    let started = Instant::now();
    let frame = circle_frame(8);
    let grid_size = 8192usize;
    let step = 2.0 * PI / grid_size as f64;
    for j in 0..=8u32 {
        let values: Vec<f64> = (0..grid_size)
            .map(|i| {
                frame
                    .needlet_eval(j, 0, &Point::Circle(i as f64 * step))
                    .unwrap()
            })
            .collect();
        for &p in &[1.0f64, 2.0, 4.0] {
            let norm = (values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * step)
                .powf(1.0 / p);
            let ratio = norm * 2.0f64.powf(-(j as f64) * (0.5 - 1.0 / p));
            assert!(
                (0.2..=5.0).contains(&ratio),
                "FAIL criterion 03: p = {p}, j = {j}: ratio {ratio}"
            );
        }
        let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ratio = sup * 2.0f64.powf(-(j as f64) * 0.5);
        assert!(
            (0.2..=5.0).contains(&ratio),
            "FAIL criterion 03: p = inf, j = {j}: ratio {ratio}"
        );
    }
    let elapsed = started.elapsed().as_secs_f64();
    println!("criterion 03: norm scaling ratios within [0.2, 5] in {elapsed:.2}s");
    assert!(elapsed < 10.0, "FAIL criterion 03: took {elapsed:.2}s (budget 10s)");
    println!("PASS criterion 03");
}

/// 4. U-statistic oracle: the Newton-identity fast path and the literal
///    subset enumeration agree to 1e-10 relative over 100 random cases
///    (n ≤ 12, p ∈ {2, 4}), in under 5 seconds; the pair count at n = 64
///    is exactly 2016 per center.
#[test]
fn criterion_04_ustat_oracle_equivalence_and_pair_count() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..100 {
        let p = if case % 2 == 0 { 2 } else { 4 };
        let n = rng.gen_range(p as usize..=12);
        let centers = rng.gen_range(1..=3);
        let columns: Vec<Vec<f64>> = (0..centers)
            .map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let z = ZLevel::from_columns(0, columns).unwrap();
        let fast = ustat_theta(&z, p).unwrap();
        let brute = ustat_theta_bruteforce(&z, p).unwrap();
        let rel = (fast - brute).abs() / brute.abs().max(1e-12);
        assert!(
            rel <= 1e-10,
            "FAIL criterion 04: case {case} (n={n}, p={p}): rel diff {rel:e}"
        );
    }

    // Subset count at n = 64, p = 2: exactly C(64,2) = 2016 per center.
    fn count_subsets(n: usize, p: u32) -> u64 {
        fn rec(start: usize, n: usize, remaining: u32) -> u64 {
            if remaining == 0 {
                return 1;
            }
            (start..=n - remaining as usize)
                .map(|i| rec(i + 1, n, remaining - 1))
                .sum()
        }
        rec(0, n, p)
    }
    let pairs = count_subsets(64, 2);
    assert_eq!(pairs, 2016, "FAIL criterion 04: pair count {pairs}");
    assert_eq!(binomial(64, 2), 2016.0);
    assert_eq!(binomial(128, 2), 8128.0);
    assert_eq!(binomial(256, 2), 32640.0);

    // And the enumeration path agrees with the fast path at that size.
    let column: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let z = ZLevel::from_columns(0, vec![column]).unwrap();
    let fast = ustat_theta(&z, 2).unwrap();
    let brute = ustat_theta_bruteforce(&z, 2).unwrap();
    let rel = (fast - brute).abs() / brute.abs().max(1e-12);
    assert!(rel <= 1e-10, "FAIL criterion 04: n=64 rel diff {rel:e}");

    let elapsed = started.elapsed().as_secs_f64();
    println!("criterion 04: oracle equivalence on 100 cases, 2016 pairs at n=64, in {elapsed:.2}s");
    assert!(elapsed < 5.0, "FAIL criterion 04: took {elapsed:.2}s (budget 5s)");
    println!("PASS criterion 04");
}

/// 5. Unbiasedness: over 2000 replicates (cos(4x), n = 256, σ = 0.5M),
///    the Monte Carlo means of β̂_{2,k} and Θ̂₂(2) match the exact
///    frame-analyzed β_{2,k} and Σβ² = π within 3 standard errors, in
///    under 2 minutes.
#[test]
fn criterion_05_estimator_unbiasedness() {
    let started = Instant::now();
    let frame = circle_frame(6);
    let exact = frame.analyze(f2, 2).unwrap();
    let beta_true = exact.level(2).unwrap().to_vec();
    let theta2_true = theta_true(&exact, 2, 2.0).unwrap();

    let replicates = 2000usize;
    let n = 256usize;
    let sigma = 0.5; // M = sup|cos 4x| = 1
    let k_count = beta_true.len();
    let tracked = [0usize, 3, 11];

    let mut beta_samples: Vec<Vec<f64>> = vec![Vec::with_capacity(replicates); tracked.len()];
    let mut theta_samples = Vec::with_capacity(replicates);
    for rep in 0..replicates {
        let data = generate_circle_dataset(
            |x| (4.0 * x).cos(),
            n,
            sigma,
            NoiseFamily::Gaussian,
            5,
            rep as u64,
        )
        .unwrap();
        let emp = empirical_coefficients(&frame, &data, 2).unwrap();
        let level = emp.coeffs.level(2).unwrap();
        assert_eq!(level.len(), k_count);
        for (slot, &k) in tracked.iter().enumerate() {
            beta_samples[slot].push(level[k]);
        }
        theta_samples.push(ustat_theta(emp.z_level(2).unwrap(), 2).unwrap());
    }

    let mean_se = |samples: &[f64]| {
        let m = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
            / (samples.len() - 1) as f64;
        (m, (var / samples.len() as f64).sqrt())
    };

    for (slot, &k) in tracked.iter().enumerate() {
        let (mean, se) = mean_se(&beta_samples[slot]);
        let dev = (mean - beta_true[k]).abs();
        println!(
            "criterion 05: E[beta_hat_2_{k}] = {mean:.5} vs {:.5} ({:.2} SE)",
            beta_true[k],
            dev / se
        );
        assert!(
            dev <= 3.0 * se,
            "FAIL criterion 05: beta bias at k = {k}: {dev:e} vs 3 SE {:e}",
            3.0 * se
        );
    }
    let (mean, se) = mean_se(&theta_samples);
    let dev = (mean - theta2_true).abs();
    println!(
        "criterion 05: E[Theta_2(2)] = {mean:.5} vs {theta2_true:.5} ({:.2} SE)",
        dev / se
    );
    assert!(dev <= 3.0 * se, "FAIL criterion 05: Theta bias {dev:e} vs 3 SE {:e}", 3.0 * se);

    let elapsed = started.elapsed().as_secs_f64();
    println!("criterion 05: {replicates} replicates in {elapsed:.1}s");
    assert!(elapsed < 120.0, "FAIL criterion 05: took {elapsed:.1}s (budget 120s)");
    println!("PASS criterion 05");
}

fn selection_config(tf: TestFunction, n_values: Vec<usize>, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        test_function: tf,
        d: 1,
        b_scale: 2.0,
        n_values,
        p: 2,
        noise: NoiseFamily::Gaussian,
        sigma_fracs: vec![0.25, 0.5, 0.75],
        replicates: 100,
        base_seed: seed,
        grid_size: 512,
        j_upper: None,
        output: None,
    }
}

/// 6. Selection pattern for the pure mode cos(4x): in every one of the 9
///    benchmark cells, the kept-level set should equal {2} in at least 90%
///    of replicates.
///
/// This criterion is in tension with criterion 5: the unbiased
/// (surface-measure) statistic forced by criteria 2 and 5 has noise at
/// inactive levels of order ω_d²·E[Y²]·√(Σb⁴)/n, well above the pinned
/// threshold B^j/n, so spurious levels fire in a large fraction of
/// replicates. No rescaling of the statistic satisfies both criteria; the
/// measured per-cell rates are printed and the criterion is allowed to
/// fail rather than silently loosening the threshold.
#[test]
fn criterion_06_single_mode_selection_pattern() {
    let report =
        run_experiment(&selection_config(TestFunction::F2, vec![64, 128, 256], 6)).unwrap();
    let mut failures = Vec::new();
    for cell in &report.cells {
        let exact: usize = cell
            .tau_histogram
            .iter()
            .filter(|p| p.levels == vec![2])
            .map(|p| p.count)
            .sum();
        let rate = exact as f64 / cell.replicates as f64;
        println!(
            "criterion 06: cell (n={}, sigma={:.2}M): exact-pattern rate {rate:.2}, mode {:?}",
            cell.n, cell.sigma_frac, cell.levels_selected_mode
        );
        if rate < 0.9 {
            failures.push(format!(
                "(n={}, sigma={:.2}M): {rate:.2}",
                cell.n, cell.sigma_frac
            ));
        }
    }
    assert!(
        failures.is_empty(),
        "FAIL criterion 06: exact-pattern rate below 0.90 in cells {failures:?}"
    );
    println!("PASS criterion 06");
}

/// 7. Selection pattern for the uniform function: all levels rejected in
///    at least 90% of replicates, in each of the 9 cells.
#[test]
fn criterion_07_uniform_function_selects_no_levels() {
    let report =
        run_experiment(&selection_config(TestFunction::F1, vec![64, 128, 256], 7)).unwrap();
    for cell in &report.cells {
        let empty: usize = cell
            .tau_histogram
            .iter()
            .filter(|p| p.levels.is_empty())
            .map(|p| p.count)
            .sum();
        let rate = empty as f64 / cell.replicates as f64;
        println!(
            "criterion 07: cell (n={}, sigma={:.2}M): all-rejected rate {rate:.2}",
            cell.n, cell.sigma_frac
        );
        assert!(
            rate >= 0.9,
            "FAIL criterion 07: all-rejected rate {rate:.2} in cell (n={}, sigma={:.2}M)",
            cell.n,
            cell.sigma_frac
        );
    }
    println!("PASS criterion 07");
}

/// 8. Global beats linear: with 200 replicates per cell across the 9
///    benchmark cells, the mean L² loss of the thresholded estimator is
///    below the linear estimator's in every cell, within 15 minutes.
#[test]
fn criterion_08_global_beats_linear_in_every_cell() {
    let started = Instant::now();
    let mut config = ExperimentConfig::preset("example-4.2").unwrap();
    config.base_seed = 8;
    config.replicates = 200;
    config.grid_size = 4096;
    let report = run_experiment(&config).unwrap();
    for cell in &report.cells {
        println!(
            "criterion 08: cell (n={}, sigma={:.2}M): global {:.3} (se {:.3}) vs linear {:.3} (se {:.3})",
            cell.n, cell.sigma_frac, cell.global_mean, cell.global_se, cell.linear_mean, cell.linear_se
        );
        assert!(
            cell.global_mean < cell.linear_mean,
            "FAIL criterion 08: global {:.3} >= linear {:.3} in cell (n={}, sigma={:.2}M)",
            cell.global_mean,
            cell.linear_mean,
            cell.n,
            cell.sigma_frac
        );
    }
    let elapsed = started.elapsed().as_secs_f64();
    println!("criterion 08: 9 cells x 200 replicates in {elapsed:.0}s");
    assert!(elapsed < 900.0, "FAIL criterion 08: took {elapsed:.0}s (budget 900s)");
    println!("PASS criterion 08");
}

/// 9. For the bump-mixture function at (n = 64, σ = 0.25M) the modal
///    selected-level set includes level 1; higher-noise cells are
///    reported without assertion.
#[test]
fn criterion_09_bump_mixture_modal_selection_includes_level_one() {
    let report =
        run_experiment(&selection_config(TestFunction::F3, vec![64], 9)).unwrap();
    for cell in &report.cells {
        println!(
            "criterion 09: cell (n={}, sigma={:.2}M): modal selection {:?}",
            cell.n, cell.sigma_frac, cell.levels_selected_mode
        );
    }
    let low_noise = &report.cells[0];
    assert_eq!(low_noise.sigma_frac, 0.25);
    assert!(
        low_noise.levels_selected_mode.contains(&1),
        "FAIL criterion 09: modal set {:?} misses level 1",
        low_noise.levels_selected_mode
    );
    println!("PASS criterion 09");
}

/// 10. Risk decreases with sample size: for cos(4x) at σ = 0.25M over
///     n ∈ {2⁶, …, 2¹⁰}, the least-squares slope of log mean loss against
///     log n is below -0.3.
#[test]
fn criterion_10_risk_decreases_with_sample_size() {
    let n_values = [64usize, 128, 256, 512, 1024];
    let replicates = 20usize;
    let frame = circle_frame(10);
    let mut points = Vec::new();
    for (ci, &n) in n_values.iter().enumerate() {
        let j_n = truncation_level(n, 2.0, 1).unwrap();
        let mut losses = Vec::with_capacity(replicates);
        for rep in 0..replicates {
            let data = generate_circle_dataset(
                |x| (4.0 * x).cos(),
                n,
                0.25,
                NoiseFamily::Gaussian,
                10,
                ((ci as u64) << 32) | rep as u64,
            )
            .unwrap();
            let (global, _) = fit_both(&frame, &data, 2, Some(j_n)).unwrap();
            losses.push(lp_risk(&global, f2, LossOrder::Power(2.0), 4096).unwrap());
        }
        let mean = losses.iter().sum::<f64>() / replicates as f64;
        println!("criterion 10: n = {n}: mean loss {mean:.4}");
        points.push(((n as f64).ln(), mean.ln()));
    }
    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let slope: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum::<f64>()
        / points.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();
    println!("criterion 10: log-log slope {slope:.3}");
    assert!(slope < -0.3, "FAIL criterion 10: slope {slope:.3} not below -0.3");
    println!("PASS criterion 10");
}

/// 11. Moment bound: n^{p/2}·E|β̂_{2,0} - β_{2,0}|^p stays bounded across
///     n ∈ {2⁶, …, 2¹⁰} (largest/smallest ratio under 5) for p ∈ {2, 4},
///     500 replicates each.
#[test]
fn criterion_11_coefficient_moment_bound() {
    let frame = circle_frame(6);
    let exact = frame.analyze(f2, 2).unwrap();
    let beta_true = exact.level(2).unwrap()[0];
    let n_values = [64usize, 128, 256, 512, 1024];
    let replicates = 500usize;

    for p in [2.0f64, 4.0] {
        let mut normalized = Vec::new();
        for (ci, &n) in n_values.iter().enumerate() {
            let mut acc = 0.0;
            for rep in 0..replicates {
                let data = generate_circle_dataset(
                    |x| (4.0 * x).cos(),
                    n,
                    0.5,
                    NoiseFamily::Gaussian,
                    11,
                    ((ci as u64) << 40) | ((p as u64) << 32) | rep as u64,
                )
                .unwrap();
                let emp = empirical_coefficients(&frame, &data, 2).unwrap();
                let beta_hat = emp.coeffs.level(2).unwrap()[0];
                acc += (beta_hat - beta_true).abs().powf(p);
            }
            let moment = acc / replicates as f64;
            normalized.push((n as f64).powf(p / 2.0) * moment);
        }
        let max = normalized.iter().cloned().fold(f64::MIN, f64::max);
        let min = normalized.iter().cloned().fold(f64::MAX, f64::min);
        let ratio = max / min;
        println!(
            "criterion 11: p = {p}: normalized moments {:?}, max/min {ratio:.2}",
            normalized.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>()
        );
        assert!(ratio < 5.0, "FAIL criterion 11: p = {p} ratio {ratio:.2}");
    }
    println!("PASS criterion 11");
}

/// 12. Coefficient-norm embeddings across within-level norms hold on 1000
///     random vectors per (p, r) pair in {(1,2), (2,4)}.
#[test]
fn criterion_12_coefficient_norm_embeddings() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (p, r) in [(1.0f64, 2.0f64), (2.0, 4.0)] {
        for _ in 0..1000 {
            let k = rng.gen_range(2..64);
            let values: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let kf = k as f64;
            let sum_p: f64 = values.iter().map(|v| v.abs().powf(p)).sum();
            let sum_r: f64 = values.iter().map(|v| v.abs().powf(r)).sum();
            // ‖β‖_r ≤ ‖β‖_p and ‖β‖_p ≤ K^{1/p-1/r} ‖β‖_r (Hölder), exact.
            assert!(
                sum_r.powf(1.0 / r) <= sum_p.powf(1.0 / p) + 1e-12,
                "FAIL criterion 12: lower embedding (p={p}, r={r})"
            );
            assert!(
                sum_p.powf(1.0 / p) <= kf.powf(1.0 / p - 1.0 / r) * sum_r.powf(1.0 / r) + 1e-12,
                "FAIL criterion 12: upper embedding (p={p}, r={r})"
            );
            // Sum forms at this |β| ≤ 1 scale.
            assert!(sum_r <= sum_p + 1e-12);
            assert!(sum_p <= sum_r.powf(p / r) * kf.powf(1.0 - p / r) + 1e-12);
        }
    }
    println!("PASS criterion 12");
}
