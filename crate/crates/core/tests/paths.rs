mod common;

use wavesim::coeffs::CoefficientSource;
use wavesim::sampler::{evaluate_plan, power_path, product_path, uniform_grid, CounterDraws, Draws, SamplePath};
use wavesim::verify::{empirical_covariance, model_covariance, moment_inequality_check, variance_deficit};

/// Mean of x² and its standard error (the model is centered).
fn second_moment(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    let m = sq.iter().sum::<f64>() / n;
    let var = sq.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// X̂(t) summed index by index through the scalar coefficient interface.
fn slow_value(e: &common::Example1, draws: &impl Draws, t: f64) -> f64 {
    let cache = &e.cache;
    let mut v = 0.0;
    let (lo, hi) = cache.a_k_range(t).unwrap();
    for k in lo..=hi {
        v += draws.xi(k) * cache.a0k(t, k).unwrap();
    }
    for j in 0..e.plan.n {
        if let Some((lo, hi)) = cache.b_k_range(t, j) {
            for k in lo..=hi {
                v += draws.eta(j, k) * cache.bjk(t, j, k).unwrap();
            }
        }
    }
    v
}

#[test]
fn example1_variance_matches_coefficient_energy() {
    let e = common::example1();
    let t = [0.5];
    let x: Vec<f64> = (0..2000)
        .map(|r| evaluate_plan(&e.plan, &CounterDraws::new(101, r, 0), &e.cache, &t).unwrap().values[0])
        .collect();
    let (m, se) = second_moment(&x);
    let energy = e.cache.energy(&e.plan, 0.5).unwrap();
    assert!((m - energy).abs() <= 3.0 * se, "{m} vs {energy} ± {se}");
}

#[test]
fn example1_cube_matches_recomputation() {
    let e = common::example1();
    let times = uniform_grid(1.0, 33).unwrap();
    let draws = CounterDraws::new(5, 0, 0);
    let base = evaluate_plan(&e.plan, &draws, &e.cache, &times).unwrap();
    let cube = power_path(&base, 3).unwrap();
    for (&t, &c) in times.iter().zip(&cube.values) {
        let v = slow_value(&e, &draws, t);
        assert!((c - v * v * v).abs() <= 1e-12 * (1.0 + v.abs().powi(3)), "{c} {v}");
    }
}

#[test]
fn example2_product_matches_pointwise_oracle() {
    let e = common::example2();
    let times = uniform_grid(1.0, 512).unwrap();
    let plans = [&e.plans.plan1, &e.plans.plan2];
    let bases: Vec<SamplePath> = (0..2)
        .map(|i| evaluate_plan(plans[i], &CounterDraws::new(9, 0, i as u32), &e.caches[i], &times).unwrap())
        .collect();
    let z = product_path(&bases[0], &bases[1]).unwrap();
    for i in 0..times.len() {
        assert_eq!(z.values[i], bases[0].values[i] * bases[1].values[i]);
    }
    // The factors use independent draws.
    assert_ne!(bases[0].values[0], bases[1].values[0]);
}

#[test]
fn stationarity_proxy() {
    let e = common::example1();
    let times = uniform_grid(1.0, 17).unwrap();
    let paths: Vec<SamplePath> = (0..2000)
        .map(|r| evaluate_plan(&e.plan, &CounterDraws::new(202, r, 0), &e.cache, &times).unwrap())
        .collect();
    let budget = e.plan.variance_budget;
    for i in 1..times.len() {
        // Paired differences x(tᵢ)² − x(t₀)².
        let d: Vec<f64> = paths.iter().map(|p| p.values[i].powi(2) - p.values[0].powi(2)).collect();
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let se = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        assert!(mean.abs() <= 3.0 * se + budget, "t = {}: {mean} ± {se}", times[i]);
    }
}

#[test]
fn sub_gaussian_moment_of_squared_path() {
    // p = 2, s = 2: E|X̂(t)|⁴ ≤ 4·4·Γ(2)·R(0)².
    let e = common::example1();
    let t = [0.37];
    let x: Vec<f64> = (0..10_000)
        .map(|r| evaluate_plan(&e.plan, &CounterDraws::new(303, r, 0), &e.cache, &t).unwrap().values[0])
        .collect();
    let q = x.iter().map(|v| v.powi(4)).collect::<Vec<_>>();
    let n = q.len() as f64;
    let m = q.iter().sum::<f64>() / n;
    let se = (q.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let r0 = e.plan.constants.r0;
    assert!(m <= 16.0 * r0 * r0 + 3.0 * se, "{m}");
    // Gaussian fourth moment 3σ⁴ as a sharper oracle.
    let var = e.cache.energy(&e.plan, 0.37).unwrap();
    assert!((m - 3.0 * var * var).abs() <= 4.0 * se, "{m} vs {}", 3.0 * var * var);
}

#[test]
fn example1_covariance_oracles() {
    let e = common::example1();
    let times = uniform_grid(1.0, 129).unwrap();
    let paths: Vec<SamplePath> = (0..2000)
        .map(|r| evaluate_plan(&e.plan, &CounterDraws::new(404, r, 0), &e.cache, &times).unwrap())
        .collect();
    let est = empirical_covariance(&paths, &[0.0, 0.25, 1.0]).unwrap();
    let r0 = e.plan.constants.r0;
    let deficit = variance_deficit(&e.plan, &e.cache, r0, &times).unwrap();

    let lag0 = est[0];
    assert!((lag0.estimate - (r0 - deficit)).abs() <= 3.0 * lag0.standard_error, "{lag0:?}");

    let lag = est[1];
    let oracle = model_covariance(&e.plan, &e.cache, &times, 0.25).unwrap();
    assert!((lag.estimate - oracle).abs() <= 3.0 * lag.standard_error, "{lag:?} {oracle}");

    let end = est[2];
    assert!(end.estimate.is_finite());
    assert!(end.estimate.abs() <= r0 + 3.0 * end.standard_error);
}

#[test]
fn model_path_fourth_moment() {
    let e = common::example1();
    let t = [0.5];
    let x: Vec<f64> = (0..2000)
        .map(|r| evaluate_plan(&e.plan, &CounterDraws::new(505, r, 0), &e.cache, &t).unwrap().values[0])
        .collect();
    let tau = e.cache.energy(&e.plan, 0.5).unwrap().sqrt();
    assert!(moment_inequality_check(&x, tau, 4.0).unwrap().pass);
}

#[test]
fn example1_deficit_within_budget() {
    let e = common::example1();
    let t = uniform_grid(1.0, 64).unwrap();
    let d = variance_deficit(&e.plan, &e.cache, e.plan.constants.r0, &t).unwrap();
    assert!(d <= e.plan.variance_budget, "{d}");
    let _ = (&e.model, &e.wavelet, &e.spec);
}
