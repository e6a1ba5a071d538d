//! Truncation plan for the power Y = Xˢ: f = (1+y⁴)⁻², Meyer wavelet,
//! p = 2, T = 1, ε = 0.5, δ = 0.05, for s = 1, 2, 3.
//!
//!     cargo run --release --example plan_power

use wavesim::planner::{delta1_for_power, plan_power, AccuracySpec, PlanOptions};
use wavesim::spectra::{make_density, DensityFamily};
use wavesim::wavelets::build_meyer;

fn main() -> wavesim::Result<()> {
    let spec = AccuracySpec::for_power(0.5, 0.05, 2.0, 1.0)?;
    let model = make_density(DensityFamily::Rational { n: 2 })?;
    let w = build_meyer();
    let opts = PlanOptions { max_terms: u128::MAX, ..PlanOptions::default() };

    for s in 1..=3 {
        let plan = plan_power(&spec, s, &model, &w, &opts)?;
        println!(
            "s = {s}: δ1 = {:.4e}  N0 = {}  N = {}  M = {}  terms = {}",
            delta1_for_power(&spec, s, plan.constants.r0)?,
            plan.n0,
            plan.n,
            plan.m[0],
            plan.total_terms()
        );
    }

    // The default cap refuses plans above 10⁷ coefficients.
    match plan_power(&spec, 2, &model, &w, &PlanOptions::default()) {
        Ok(p) => println!("within default cap: {} terms", p.total_terms()),
        Err(e) => println!("default cap: {e}"),
    }

    // A safety margin divides the budget.
    let wide = PlanOptions { max_terms: u128::MAX, safety_margin: 2.0 };
    let p = plan_power(&spec, 2, &model, &w, &wide)?;
    println!("margin 2: N0 = {}, N = {}, M = {}", p.n0, p.n, p.m[0]);
    Ok(())
}
