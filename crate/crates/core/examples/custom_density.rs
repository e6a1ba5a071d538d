//! A user-supplied density through `SpectralModel::custom`: g = √f with a
//! declared decay, no analytic derivative (central differences are used).
//!
//!     cargo run --release --example custom_density

use wavesim::numerics::Decay;
use wavesim::planner::{plan_power, AccuracySpec, PlanOptions};
use wavesim::spectra::{check_admissibility, SpectralModel};
use wavesim::wavelets::build_meyer;

fn main() -> wavesim::Result<()> {
    // f(y) = exp(−y²)·(1 + y²)⁻¹, so g(y) = exp(−y²/2)·(1 + y²)^{−1/2}.
    let g = |y: f64| (-0.5 * y * y).exp() / (1.0 + y * y).sqrt();
    let model = SpectralModel::custom(
        "gauss-lorentz",
        g,
        None,
        Decay::Exponential { rate: 0.5, constant: 1.0, from: 0.0 },
        Decay::Exponential { rate: 0.4, constant: 2.0, from: 0.0 },
    );
    let w = build_meyer();
    let report = check_admissibility(&model, &w);
    println!("admissible: {} ({} conditions)", report.passed(), report.conditions.len());

    let spec = AccuracySpec::for_power(0.5, 0.1, 2.0, 1.0)?;
    let opts = PlanOptions { max_terms: 1 << 40, ..PlanOptions::default() };
    let plan = plan_power(&spec, 1, &model, &w, &opts)?;
    println!("R(0) = {:.10}", plan.constants.r0);
    println!("N0 = {}, N = {}, M = {}, budget δ1 = {:.3e}", plan.n0, plan.n, plan.m[0], plan.variance_budget);
    Ok(())
}
