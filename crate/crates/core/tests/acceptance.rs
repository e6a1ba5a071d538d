//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

mod common;

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use wavesim::cli::{cmd_plan, cmd_verify, RunConfig};
use wavesim::coeffs::{build_cache, verify_decay, CoefficientSource, DirectCoefficients};
use wavesim::numerics::{gamma, integrate_line, Integrand};
use wavesim::planner::TruncationPlan;
use wavesim::sampler::uniform_grid;
use wavesim::spectra::{make_density, DensityFamily};
use wavesim::verify::{
    empirical_reliability, moment_inequality_check, variance_deficit, Factor, Transform,
};
use wavesim::wavelets::{build_daubechies, build_meyer};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Deterministic uniform stream for the random test arguments.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn deficit_certification() -> Outcome {
    let start = Instant::now();
    let e = common::example1();
    let f = |y: f64| e.model.f(y);
    let h = Integrand::new(|y| Complex64::new(f(y), 0.0), e.model.g_decay().squared());
    let r0 = integrate_line(&h, 1e-8).map_err(|x| x.to_string())?.value.re;
    let t = uniform_grid(1.0, 64).map_err(|x| x.to_string())?;
    let d = variance_deficit(&e.plan, &e.cache, r0, &t).map_err(|x| x.to_string())?;
    let delta1 = e.plan.variance_budget;
    let took = start.elapsed();
    ensure(d <= delta1, || format!("deficit {d:e} > δ₁ = {delta1:e}"))?;
    ensure(took <= Duration::from_secs(300), || format!("took {took:?}"))?;
    Ok(format!(
        "max deficit {d:.3e} ≤ δ₁ = {delta1:.3e} (N0 = {}, N = {}, M = {}), {took:.1?}",
        e.plan.n0, e.plan.n, e.plan.m[0]
    ))
}

fn decay_bounds() -> Outcome {
    let e = common::example1();
    let t: Vec<f64> = (0..16).map(|i| i as f64 / 15.0).collect();
    let rep = verify_decay(&e.cache, &e.plan, &e.plan.constants, &t).map_err(|x| x.to_string())?;
    ensure(rep.worst() <= 1.0, || format!("worst ratio {}", rep.worst()))?;
    Ok(format!(
        "0 violations over {} t; {} tabulated checks, {} certified by the floor; worst ratio {:.3}",
        t.len(),
        rep.checked,
        rep.certified_by_floor,
        rep.worst()
    ))
}

fn shift_identity() -> Outcome {
    let model = make_density(DensityFamily::Rational { n: 2 }).map_err(|x| x.to_string())?;
    let w = build_meyer();
    let d = DirectCoefficients::new(&model, &w);
    let mut rng = Lcg(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let t = rng.next() * 1.0;
        let j = (rng.next() * 5.0) as u32;
        let k = (rng.next() * 41.0) as i64 - 20;
        let err = |e: wavesim::Error| e.to_string();
        let da = (d.a0k_from_definition(t, k).map_err(err)? - d.a0k(t - k as f64, 0).map_err(err)?).abs();
        let shifted = t - k as f64 / 2f64.powi(j as i32);
        let db = (d.bjk_from_definition(t, j, k).map_err(err)? - d.bjk(shifted, j, 0).map_err(err)?).abs();
        worst = worst.max(da).max(db);
    }
    ensure(worst <= 1e-8, || format!("worst shift mismatch {worst:e}"))?;
    Ok(format!("200 random (t, j, k): worst |difference| {worst:.2e}"))
}

fn realness() -> Outcome {
    let densities = [
        DensityFamily::Rational { n: 2 },
        DensityFamily::Lorentzian { n: 2 },
        DensityFamily::TwoBump { m: 2, a: 3.0 },
    ];
    let meyer = build_meyer();
    let db4 = build_daubechies(4, 24).map_err(|x| x.to_string())?;
    let mut rng = Lcg(77);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for fam in densities {
        let model = make_density(fam).map_err(|x| x.to_string())?;
        for (w, probes) in [(&meyer, 12), (&db4, 6)] {
            let d = DirectCoefficients::new(&model, w).with_abs_floor(1e-10);
            for _ in 0..probes {
                let t = rng.next();
                let k = (rng.next() * 13.0) as i64 - 6;
                let j = (rng.next() * 4.0) as u32;
                for z in [d.a0k_raw(t, k), d.bjk_raw(t, j, k)] {
                    let z = z.map_err(|x| x.to_string())?;
                    worst = worst.max(z.im.abs() / (1.0 + z.re.abs()));
                    count += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-9, || format!("imaginary residue {worst:e}"))?;
    Ok(format!("{count} raw integrals (Meyer and db4, 3 densities): worst |Im|/(1+|Re|) {worst:.2e}"))
}

fn parseval_exhaustion() -> Outcome {
    let e = common::example1();
    let plans: Vec<TruncationPlan> = [1u32, 2, 4].iter().map(|&f| e.plan.grown(f, f as u64)).collect();
    let cache = build_cache(&plans[2], &e.model, &e.wavelet, 1.0, 0.01).map_err(|x| x.to_string())?;
    let r0 = e.plan.constants.r0;
    let delta1 = e.plan.variance_budget;
    let mut worst_gap: f64 = 0.0;
    for i in 0..16 {
        let t = i as f64 / 15.0;
        let en: Vec<f64> = plans
            .iter()
            .map(|p| cache.energy(p, t))
            .collect::<Result<_, _>>()
            .map_err(|x| x.to_string())?;
        ensure(en[0] <= en[1] && en[1] <= en[2], || format!("energies not monotone at t = {t}: {en:?}"))?;
        ensure(en[2] <= r0 + 1e-6, || format!("energy {} exceeds R(0) + 1e-6", en[2]))?;
        worst_gap = worst_gap.max(r0 - en[2]);
    }
    ensure(worst_gap <= delta1 / 10.0, || format!("final gap {worst_gap:e} > δ₁/10"))?;
    Ok(format!("energies nondecreasing over ×1, ×2, ×4 at 16 t; final gap {worst_gap:.2e} ≤ δ₁/10 = {:.2e}", delta1 / 10.0))
}

fn monte_carlo_reliability() -> Outcome {
    let start = Instant::now();
    let e = common::example1();
    let reference = e.plan.grown(2, 4);
    let cache = build_cache(&reference, &e.model, &e.wavelet, 1.0, 0.01).map_err(|x| x.to_string())?;
    let f = Factor {
        plan: &e.plan,
        reference: &reference,
        cache: &cache,
    };
    let out = empirical_reliability(&[f], Transform::Power { s: 2 }, &e.spec, 200, 20240611, 512)
        .map_err(|x| x.to_string())?;
    let took = start.elapsed();
    ensure(out.wilson_upper_95 <= e.spec.delta, || format!("Wilson upper {} > δ", out.wilson_upper_95))?;
    ensure(took <= Duration::from_secs(600), || format!("took {took:?}"))?;
    // Control: a two-term-per-family plan against the same reference must be caught.
    let tiny = TruncationPlan {
        n0: 2,
        n: 2,
        m: vec![2, 2],
        ..e.plan.clone()
    };
    let control = Factor { plan: &tiny, ..f };
    let c = empirical_reliability(&[control], Transform::Power { s: 2 }, &e.spec, 200, 20240611, 512)
        .map_err(|x| x.to_string())?;
    ensure(c.exceedance_count > 0, || "control plan produced no exceedances".into())?;
    Ok(format!(
        "{}/{} exceedances, Wilson upper {:.4} ≤ δ = {}, max ‖Ŷ_ref − Ŷ‖₂ = {:.2e}, {took:.1?}; control plan (N0 = N = M = 2): {}/200",
        out.exceedance_count, out.replications, out.wilson_upper_95, e.spec.delta, out.max_norm, c.exceedance_count
    ))
}

fn product_certification() -> Outcome {
    let e = common::example2();
    let t = uniform_grid(1.0, 64).map_err(|x| x.to_string())?;
    let plans = [&e.plans.plan1, &e.plans.plan2];
    let stars = [e.plans.delta1_star, e.plans.delta2_star];
    let mut parts = Vec::new();
    for i in 0..2 {
        ensure(plans[i].variance_budget == stars[i], || "plan budget differs from δ_s*".into())?;
        let r0 = e.models[i].variance(1e-8).map_err(|x| x.to_string())?;
        let d = variance_deficit(plans[i], &e.caches[i], r0, &t).map_err(|x| x.to_string())?;
        ensure(d <= stars[i], || format!("factor {}: deficit {d:e} > δ* = {:e}", i + 1, stars[i]))?;
        parts.push(format!("deficit_{} {d:.2e} ≤ {:.3e}", i + 1, stars[i]));
    }
    Ok(parts.join(", "))
}

fn moment_inequality() -> Outcome {
    // 10⁵ standard Gaussians from the simulation's own draw stream.
    let draws = wavesim::sampler::CounterDraws::new(8, 0, 0);
    let mut x = Vec::new();
    wavesim::sampler::Draws::xi_range(&draws, 0, 99_999, &mut x);
    let mut parts = Vec::new();
    for p in [2.0, 4.0, 6.0] {
        let m = moment_inequality_check(&x, 1.0, p).map_err(|e| e.to_string())?;
        ensure(m.pass, || format!("p = {p}: {} > {} + 3·{}", m.empirical, m.bound, m.standard_error))?;
        parts.push(format!("p={p}: {:.3} ≤ {:.3}", m.empirical, m.bound));
    }
    Ok(parts.join(", "))
}

fn gamma_accuracy() -> Outcome {
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let g = |x: f64| gamma(x).map_err(|e| e.to_string());
    let fixed = [(1.0, 1.0), (0.5, PI.sqrt()), (5.0, 24.0)];
    let mut worst: f64 = 0.0;
    for (x, want) in fixed {
        worst = worst.max(rel(g(x)?, want));
    }
    let mut rng = Lcg(99);
    for _ in 0..100 {
        let x = 0.5 + rng.next() * 24.5;
        worst = worst.max(rel(g(x + 1.0)?, x * g(x)?));
    }
    ensure(worst <= 1e-10, || format!("relative error {worst:e}"))?;
    Ok(format!("Γ(1), Γ(1/2), Γ(5) and 100 recurrence checks: worst relative error {worst:.2e}"))
}

fn reproducibility() -> Outcome {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/example1.json");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let plan = dir.path().join("plan.json");
    let bin = env!("CARGO_BIN_EXE_wavesim");
    let ok = Command::new(bin)
        .args(["plan", "--config", root.to_str().unwrap(), "--out", plan.to_str().unwrap()])
        .status()
        .map_err(|e| e.to_string())?
        .success();
    ensure(ok, || "plan command failed".into())?;
    let mut csv = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let ok = Command::new(bin)
            .args(["simulate", "--config", root.to_str().unwrap(), "--plan", plan.to_str().unwrap()])
            .args(["--out", out.to_str().unwrap()])
            .status()
            .map_err(|e| e.to_string())?
            .success();
        ensure(ok, || "simulate command failed".into())?;
        csv.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(csv[0] == csv[1], || "CSV files differ".into())?;

    let cfg = RunConfig::load(&root).map_err(|e| e.to_string())?;
    let pf = cmd_plan(&cfg).map_err(|e| e.to_string())?;
    let first = cmd_verify(&cfg, &pf).map_err(|e| e.to_string())?;
    // Second run on a different worker count.
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().map_err(|e| e.to_string())?;
    let second = pool.install(|| cmd_verify(&cfg, &pf)).map_err(|e| e.to_string())?;
    let (a, b) = (&first.report, &second.report);
    ensure(a.exceedance_count == b.exceedance_count, || "exceedance counts differ".into())?;
    ensure(a.covariance_errors == b.covariance_errors, || "covariance estimates differ".into())?;
    ensure(a.moments == b.moments, || "moment estimates differ".into())?;
    Ok(format!(
        "{} CSV bytes identical across runs; verify counts identical ({} exceedances, 1 vs 3 workers)",
        csv[0].len(),
        a.exceedance_count
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("variance-deficit certification", deficit_certification),
        ("decay bounds", decay_bounds),
        ("shift identity", shift_identity),
        ("realness", realness),
        ("Parseval exhaustion", parseval_exhaustion),
        ("Monte Carlo reliability", monte_carlo_reliability),
        ("product-process certification", product_certification),
        ("moment inequality", moment_inequality),
        ("gamma accuracy", gamma_accuracy),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match res {
            Ok(detail) => println!("criterion {:>2} {name}: PASS [{:.1?}] {detail}", i + 1, start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL [{:.1?}] {why}", i + 1, start.elapsed());
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
