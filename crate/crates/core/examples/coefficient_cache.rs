//! Coefficient cache for a full plan: build, probe against direct
//! quadrature, check the decay bounds, and round-trip through a file.
//!
//!     cargo run --release --example coefficient_cache

use std::time::Instant;

use wavesim::coeffs::{build_cache, verify_decay, CacheOptions, CoefficientCache, CoefficientSource, DirectCoefficients};
use wavesim::planner::{plan_power, AccuracySpec, PlanOptions};
use wavesim::spectra::{make_density, DensityFamily};
use wavesim::wavelets::build_meyer;

fn main() -> wavesim::Result<()> {
    let spec = AccuracySpec::for_power(0.5, 0.05, 2.0, 1.0)?;
    let model = make_density(DensityFamily::Rational { n: 2 })?;
    let w = build_meyer();
    let plan = plan_power(&spec, 2, &model, &w, &PlanOptions { max_terms: u128::MAX, ..Default::default() })?;

    let start = Instant::now();
    let cache = build_cache(&plan, &model, &w, spec.t, 0.01)?;
    println!(
        "built in {:?}: {} stored samples for {} coefficients, floor {:.1e}",
        start.elapsed(),
        cache.stored_samples(),
        plan.total_terms(),
        cache.amp_floor()
    );
    for j in 0..cache.levels() as u32 {
        let p = cache.level_profile(j).unwrap();
        println!("  level {j:>2}: sup ≤ {:.3e}, window {:?}", cache.level_sup(j).unwrap(), p.window());
    }

    let direct = DirectCoefficients::new(&model, &w).with_abs_floor(1e-10);
    println!("probe error vs quadrature: {:.2e}", cache.probe_error(&direct, 40, 1)?);
    println!("b_3,5(0.4): cache {:.12}, direct {:.12}", cache.bjk(0.4, 3, 5)?, direct.bjk(0.4, 3, 5)?);

    let t: Vec<f64> = (0..16).map(|i| i as f64 / 15.0).collect();
    let rep = verify_decay(&cache, &plan, &plan.constants, &t)?;
    println!("decay bounds: worst ratio {:.3}, {} checked, {} certified by floor", rep.worst(), rep.checked, rep.certified_by_floor);

    let dir = std::env::temp_dir().join("wavesim-cache-example.bin");
    let key = CoefficientCache::key(&model, &w, &plan, spec.t, &CacheOptions::default());
    cache.save(&dir, &key)?;
    let back = CoefficientCache::load(&dir, &key)?.expect("same key");
    println!("reloaded: a00(0.25) = {:.12}", back.a0k(0.25, 0)?);
    std::fs::remove_file(&dir)?;
    Ok(())
}
