//! One path of Ŷ = X̂² on 512 points over [0, 1], written as CSV to stdout.
//!
//!     cargo run --release --example simulate_power > path.csv

use std::io::Write;

use wavesim::coeffs::build_cache;
use wavesim::planner::{plan_power, AccuracySpec, PlanOptions};
use wavesim::sampler::{evaluate_plan, power_path, uniform_grid, CounterDraws};
use wavesim::spectra::{make_density, DensityFamily};
use wavesim::wavelets::build_meyer;

fn main() -> wavesim::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let spec = AccuracySpec::for_power(0.5, 0.05, 2.0, 1.0)?;
    let model = make_density(DensityFamily::Rational { n: 2 })?;
    let w = build_meyer();
    let plan = plan_power(&spec, 2, &model, &w, &PlanOptions { max_terms: u128::MAX, ..Default::default() })?;
    let cache = build_cache(&plan, &model, &w, spec.t, 0.01)?;

    let times = uniform_grid(spec.t, 512)?;
    let base = evaluate_plan(&plan, &CounterDraws::new(seed, 0, 0), &cache, &times)?;
    let y = power_path(&base, 2)?;
    let mut out = std::io::BufWriter::new(std::io::stdout().lock());
    writeln!(out, "t,x,y")?;
    for i in 0..times.len() {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", times[i], base.values[i], y.values[i])?;
    }
    Ok(())
}
