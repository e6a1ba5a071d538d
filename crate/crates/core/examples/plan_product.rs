//! Plans for the product Z = X₁X₂ of independent processes:
//! f₁ = (1+y²)⁻⁴, f₂ two-bump (m = 2, a = 3), Daubechies order 4.
//!
//!     cargo run --release --example plan_product

use wavesim::planner::{plan_product, AccuracySpec, PlanOptions};
use wavesim::spectra::{make_density, DensityFamily};
use wavesim::wavelets::build_daubechies;

fn main() -> wavesim::Result<()> {
    let spec = AccuracySpec::for_product(0.5, 0.05, 2.0, 1.0)?;
    let f1 = make_density(DensityFamily::Lorentzian { n: 2 })?;
    let f2 = make_density(DensityFamily::TwoBump { m: 2, a: 3.0 })?;
    let w = build_daubechies(4, 24)?;
    let opts = PlanOptions { max_terms: u128::MAX, ..PlanOptions::default() };

    let pp = plan_product(&spec, &f1, &w, &f2, &w, &opts)?;
    println!("δ̂ = {:.6e}", pp.delta_hat);
    for (i, (plan, star)) in [(&pp.plan1, pp.delta1_star), (&pp.plan2, pp.delta2_star)].into_iter().enumerate() {
        println!(
            "factor {}: δ* = {star:.4e}  R(0) = {:.6}  N0 = {}  N = {}  M = {}  terms = {}",
            i + 1,
            plan.constants.r0,
            plan.n0,
            plan.n,
            plan.m[0],
            plan.total_terms()
        );
    }
    println!("{}", serde_json::to_string_pretty(&pp)?);
    Ok(())
}
