//! Built-in spectral densities: correlation R(τ), the planner constants
//! A, B, A₁, B₁, R(0), and the admissibility conditions.
//!
//!     cargo run --release --example spectral_constants

use wavesim::spectra::{check_admissibility, correlation, make_density, plan_constants, DensityFamily};
use wavesim::wavelets::{build_daubechies, build_meyer};

fn main() -> wavesim::Result<()> {
    let meyer = build_meyer();
    let db4 = build_daubechies(4, 24)?;
    let cases = [
        (DensityFamily::Rational { n: 2 }, &meyer, "meyer"),
        (DensityFamily::Lorentzian { n: 2 }, &db4, "db4"),
        (DensityFamily::TwoBump { m: 2, a: 3.0 }, &db4, "db4"),
    ];
    for (family, w, wname) in cases {
        let model = make_density(family)?;
        let c = plan_constants(&model, w)?;
        println!("{} with {wname}", model.name());
        println!("  A = {:.6}  B = {:.6}  A1 = {:.6}  B1 = {:.6}  R(0) = {:.12}", c.a, c.b, c.a1, c.b1, c.r0);
        for tau in [0.0, 0.5, 1.0, 2.0] {
            println!("  R({tau}) = {:.10}", correlation(&model, tau)?);
        }
        let report = check_admissibility(&model, w);
        for cond in &report.conditions {
            println!("  {:<14} {:?}", cond.name, cond.value);
        }
        println!("  admissible: {}", report.passed());
    }
    Ok(())
}
