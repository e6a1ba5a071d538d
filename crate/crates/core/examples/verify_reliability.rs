//! Full verification of the s = 2 plan: variance deficit, Monte Carlo
//! reliability against a 2×/4× reference, covariance and moments.
//! Also shows how an undersized plan is caught.
//!
//!     cargo run --release --example verify_reliability

use wavesim::coeffs::build_cache;
use wavesim::planner::{plan_power, AccuracySpec, PlanOptions, TruncationPlan};
use wavesim::spectra::{make_density, DensityFamily};
use wavesim::verify::{empirical_reliability, run_verification, Factor, Transform, VerifySettings};
use wavesim::wavelets::build_meyer;

fn main() -> wavesim::Result<()> {
    let spec = AccuracySpec::for_power(0.5, 0.05, 2.0, 1.0)?;
    let model = make_density(DensityFamily::Rational { n: 2 })?;
    let w = build_meyer();
    let plan = plan_power(&spec, 2, &model, &w, &PlanOptions { max_terms: u128::MAX, ..Default::default() })?;
    let reference = plan.grown(2, 4);
    let cache = build_cache(&reference, &model, &w, spec.t, 0.01)?;
    let f = Factor { plan: &plan, reference: &reference, cache: &cache };

    let settings = VerifySettings {
        transform: Transform::Power { s: 2 },
        spec,
        replications: 200,
        seed: 11,
        grid_points: 512,
        deficit_points: 64,
        lags: vec![0.0, 0.25, 0.5],
        moment_orders: vec![2.0, 4.0],
    };
    let report = run_verification(&[f], &settings)?;
    for c in &report.checks {
        println!("{} {:<22} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }

    for n in [2u64, 4, 8, 16] {
        let small = TruncationPlan { n0: n, n: 3, m: vec![n; 3], ..plan.clone() };
        let out = empirical_reliability(&[Factor { plan: &small, ..f }], Transform::Power { s: 2 }, &spec, 200, 11, 512)?;
        println!(
            "N0 = M = {n:>2}: {:>3}/200 exceed ε, Wilson upper {:.3}, mean ‖Ŷ_ref − Ŷ‖₂ = {:.3e}",
            out.exceedance_count, out.wilson_upper_95, out.mean_norm
        );
    }
    Ok(())
}
