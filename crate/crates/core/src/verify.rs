//! Numerical checks of the accuracy guarantees: the deterministic variance
//! deficit, Monte Carlo reliability against a reference model, covariance
//! and moment checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::CoefficientCache;
use crate::error::{Error, Result};
use crate::numerics::gamma;
use crate::planner::{AccuracySpec, TruncationPlan};
use crate::sampler::{evaluate_plan, power_path, product_path, uniform_grid, CounterDraws, SamplePath};

/// Deficits below this are treated as quadrature noise rather than a
/// contradiction of Bessel's inequality.
pub const NEGATIVE_DEFICIT_TOL: f64 = 1e-6;

/// R(0) minus the included coefficient energy at each of `t_samples`.
pub fn deficits(plan: &TruncationPlan, cache: &CoefficientCache, r0: f64, t_samples: &[f64]) -> Result<Vec<f64>> {
    t_samples
        .iter()
        .map(|&t| {
            let d = r0 - cache.energy(plan, t)?;
            if d < -NEGATIVE_DEFICIT_TOL {
                return Err(Error::NegativeDeficit { t, deficit: d });
            }
            Ok(d)
        })
        .collect()
}

/// Largest deficit over `t_samples`.
pub fn variance_deficit(plan: &TruncationPlan, cache: &CoefficientCache, r0: f64, t_samples: &[f64]) -> Result<f64> {
    Ok(deficits(plan, cache, r0, t_samples)?.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Upper end of the 95% Wilson score interval for x successes in n trials.
pub fn wilson_upper_95(x: usize, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = x as f64 / n;
    let z2 = z * z;
    let centre = p + z2 / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre + spread) / (1.0 + z2 / n)).min(1.0)
}

/// (∫|x|ᵖ)^{1/p} over the grid by the composite trapezoid rule.
pub fn lp_norm(times: &[f64], values: &[f64], p: f64) -> f64 {
    let f: Vec<f64> = values.iter().map(|v| v.abs().powf(p)).collect();
    let s: f64 = times.windows(2).zip(f.windows(2)).map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1])).sum();
    s.powf(1.0 / p)
}

/// p·2^{p/2}·τᵖ·Γ(p/2), the sub-Gaussian bound on E|ξ|ᵖ.
pub fn sub_gaussian_moment_bound(p: f64, tau: f64) -> Result<f64> {
    Ok(p * 2f64.powf(p / 2.0) * tau.powf(p) * gamma(p / 2.0)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub p: f64,
    pub tau: f64,
    pub empirical: f64,
    pub standard_error: f64,
    pub bound: f64,
    pub pass: bool,
}

/// PASS iff the sample mean of |ξ|ᵖ is at most the bound plus 3 standard errors.
pub fn moment_inequality_check(samples: &[f64], tau: f64, p: f64) -> Result<MomentCheck> {
    if samples.len() < 2 {
        return Err(Error::Domain("moment check needs at least 2 samples".into()));
    }
    let (empirical, standard_error) = mean_and_se(samples.iter().map(|x| x.abs().powf(p)));
    let bound = sub_gaussian_moment_bound(p, tau)?;
    Ok(MomentCheck {
        p,
        tau,
        empirical,
        standard_error,
        bound,
        pass: empirical <= bound + 3.0 * standard_error,
    })
}

fn mean_and_se(x: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = x.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub lag: f64,
    pub estimate: f64,
    pub standard_error: f64,
}

/// Minimum number of paths for [`empirical_covariance`].
pub const MIN_COVARIANCE_PATHS: usize = 100;

/// Time-averaged E X(t)X(t+τ) across paths (the model is centered, so no
/// mean is removed), with jackknife standard errors over paths. Lags are
/// rounded to the nearest multiple of the grid step.
pub fn empirical_covariance(paths: &[SamplePath], lags: &[f64]) -> Result<Vec<CovarianceEstimate>> {
    if paths.len() < MIN_COVARIANCE_PATHS {
        return Err(Error::Domain(format!(
            "covariance needs at least {MIN_COVARIANCE_PATHS} paths, got {}",
            paths.len()
        )));
    }
    let times = &paths[0].times;
    if paths.iter().any(|p| p.times != *times) {
        return Err(Error::GridMismatch);
    }
    let step = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    lags.iter()
        .map(|&lag| {
            let h = (lag.abs() / step).round() as usize;
            if h >= times.len() {
                return Err(Error::Domain(format!("lag {lag} exceeds the grid")));
            }
            let stats: Vec<f64> = paths
                .iter()
                .map(|p| {
                    let n = p.values.len() - h;
                    (0..n).map(|i| p.values[i] * p.values[i + h]).sum::<f64>() / n as f64
                })
                .collect();
            let (estimate, standard_error) = jackknife_mean(&stats);
            Ok(CovarianceEstimate {
                lag: h as f64 * step,
                estimate,
                standard_error,
            })
        })
        .collect()
}

/// Mean and its leave-one-out jackknife standard error.
fn jackknife_mean(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let total: f64 = x.iter().sum();
    let mean = total / n;
    let loo: Vec<f64> = x.iter().map(|v| (total - v) / (n - 1.0)).collect();
    let loo_mean = loo.iter().sum::<f64>() / n;
    let var = (n - 1.0) / n * loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>();
    (mean, var.sqrt())
}

/// Model covariance at lag τ averaged over the grid starts t with t + τ ≤ T.
pub fn model_covariance(plan: &TruncationPlan, cache: &CoefficientCache, times: &[f64], lag: f64) -> Result<f64> {
    let step = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let h = (lag.abs() / step).round() as usize;
    let n = times.len() - h;
    let mut s = 0.0;
    for i in 0..n {
        s += cache.cross_energy(plan, times[i], times[i + h])?;
    }
    Ok(s / n as f64)
}

/// One factor of the simulated process: the plan under test, the reference
/// standing in for the true process, and a cache covering the reference.
#[derive(Clone, Copy)]
pub struct Factor<'a> {
    pub plan: &'a TruncationPlan,
    pub reference: &'a TruncationPlan,
    pub cache: &'a CoefficientCache,
}

/// Plug-in transform applied to the base paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    Power { s: u32 },
    Product,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityOutcome {
    pub exceedance_count: usize,
    pub replications: usize,
    pub wilson_upper_95: f64,
    pub max_norm: f64,
    pub mean_norm: f64,
    /// Grid size of the finest L_p evaluation used.
    pub grid_points: usize,
}

/// Most grid doublings tried for the L_p norm.
const MAX_DOUBLINGS: u32 = 6;

/// Model and reference paths of one replication, on `times`.
fn replication_paths(
    factors: &[Factor<'_>],
    transform: Transform,
    seed: u64,
    replication: u64,
    times: &[f64],
) -> Result<(SamplePath, SamplePath, SamplePath)> {
    let mut model = Vec::new();
    let mut reference = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        let draws = CounterDraws::new(seed, replication, i as u32);
        model.push(evaluate_plan(f.plan, &draws, f.cache, times)?);
        reference.push(evaluate_plan(f.reference, &draws, f.cache, times)?);
    }
    let base = model[0].clone();
    let combine = |p: &[SamplePath]| match transform {
        Transform::Power { s } => power_path(&p[0], s),
        Transform::Product => product_path(&p[0], &p[1]),
    };
    Ok((combine(&model)?, combine(&reference)?, base))
}

fn check_factors(factors: &[Factor<'_>], transform: Transform) -> Result<()> {
    let want = match transform {
        Transform::Power { .. } => 1,
        Transform::Product => 2,
    };
    if factors.len() != want {
        return Err(Error::Domain(format!("{transform:?} needs {want} factor(s), got {}", factors.len())));
    }
    for f in factors {
        if !f.plan.dominated_by(f.reference) {
            return Err(Error::Domain("reference plan must dominate the plan".into()));
        }
        if !f.cache.covers_plan(f.reference) {
            return Err(Error::CacheMiss {
                profile: "plan".into(),
                arg: f.reference.n as f64,
                lo: 0.0,
                hi: f.cache.levels() as f64,
            });
        }
    }
    Ok(())
}

/// L_p distance between two transformed paths with grid doubling until the
/// norm moves by less than 1% (or is far below ε).
fn converged_distance(
    factors: &[Factor<'_>],
    transform: Transform,
    spec: &AccuracySpec,
    seed: u64,
    replication: u64,
    grid_points: usize,
) -> Result<(f64, usize, SamplePath)> {
    let dist = |times: &[f64]| -> Result<(f64, SamplePath)> {
        let (m, r, base) = replication_paths(factors, transform, seed, replication, times)?;
        let d: Vec<f64> = r.values.iter().zip(&m.values).map(|(a, b)| a - b).collect();
        Ok((lp_norm(times, &d, spec.p), base))
    };
    let mut n = grid_points;
    let (mut prev, base) = dist(&uniform_grid(spec.t, n)?)?;
    for _ in 0..MAX_DOUBLINGS {
        let fine = 2 * n - 1;
        let (cur, _) = dist(&uniform_grid(spec.t, fine)?)?;
        let settled = (cur - prev).abs() <= 0.01 * cur || cur.max(prev) < 1e-3 * spec.epsilon;
        n = fine;
        prev = cur;
        if settled {
            return Ok((cur, n, base));
        }
    }
    Err(Error::Numerical(format!("L_p norm did not settle after refining to {n} points")))
}

/// Exceedance frequency of ‖Ŷ_ref − Ŷ‖_p > ε over `replications` runs with
/// shared draws, plus the base paths of the first factor on the
/// `grid_points` grid.
pub fn empirical_reliability_with_paths(
    factors: &[Factor<'_>],
    transform: Transform,
    spec: &AccuracySpec,
    replications: usize,
    seed: u64,
    grid_points: usize,
) -> Result<(ReliabilityOutcome, Vec<SamplePath>)> {
    check_factors(factors, transform)?;
    let runs: Vec<(f64, usize, SamplePath)> = (0..replications as u64)
        .into_par_iter()
        .map(|r| converged_distance(factors, transform, spec, seed, r, grid_points))
        .collect::<Result<_>>()?;
    let exceedance_count = runs.iter().filter(|r| r.0 > spec.epsilon).count();
    let max_norm = runs.iter().map(|r| r.0).fold(0.0, f64::max);
    let mean_norm = if runs.is_empty() {
        0.0
    } else {
        runs.iter().map(|r| r.0).sum::<f64>() / runs.len() as f64
    };
    let grid = runs.iter().map(|r| r.1).max().unwrap_or(grid_points);
    let outcome = ReliabilityOutcome {
        exceedance_count,
        replications,
        wilson_upper_95: wilson_upper_95(exceedance_count, replications),
        max_norm,
        mean_norm,
        grid_points: grid,
    };
    Ok((outcome, runs.into_iter().map(|r| r.2).collect()))
}

pub fn empirical_reliability(
    factors: &[Factor<'_>],
    transform: Transform,
    spec: &AccuracySpec,
    replications: usize,
    seed: u64,
    grid_points: usize,
) -> Result<ReliabilityOutcome> {
    Ok(empirical_reliability_with_paths(factors, transform, spec, replications, seed, grid_points)?.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeficitCheck {
    pub factor: usize,
    pub max: f64,
    pub budget: f64,
    pub reference_max: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Deficit of the factor closest to its budget.
    pub variance_deficit_max: f64,
    pub budget: f64,
    pub deficits: Vec<DeficitCheck>,
    pub exceedance_count: usize,
    pub replications: usize,
    pub wilson_upper_95: f64,
    pub reliability: Option<ReliabilityOutcome>,
    /// (lag, estimate − model covariance, standard error).
    pub covariance_errors: Vec<(f64, f64, f64)>,
    pub moments: Vec<MomentCheck>,
    pub checks: Vec<CheckOutcome>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }
}

/// Everything [`run_verification`] needs besides the factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    pub transform: Transform,
    pub spec: AccuracySpec,
    pub replications: usize,
    pub seed: u64,
    pub grid_points: usize,
    pub deficit_points: usize,
    pub lags: Vec<f64>,
    pub moment_orders: Vec<f64>,
}

/// Deficit, reliability, covariance and moment checks in one report.
pub fn run_verification(factors: &[Factor<'_>], settings: &VerifySettings) -> Result<VerificationReport> {
    check_factors(factors, settings.transform)?;
    let spec = &settings.spec;
    let t_samples = uniform_grid(spec.t, settings.deficit_points.max(2))?;
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    let mut deficit_checks = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        let r0 = f.plan.constants.r0;
        let max = variance_deficit(f.plan, f.cache, r0, &t_samples)?;
        let reference_max = variance_deficit(f.reference, f.cache, r0, &t_samples)?;
        let budget = f.plan.variance_budget;
        let pass = max <= budget;
        checks.push(CheckOutcome {
            name: format!("variance_deficit[{i}]"),
            pass,
            detail: format!("max {max:e} vs budget {budget:e} at {} points", t_samples.len()),
        });
        checks.push(CheckOutcome {
            name: format!("reference_deficit[{i}]"),
            pass: reference_max <= budget / 100.0,
            detail: format!("reference max {reference_max:e} vs budget/100 {:e}", budget / 100.0),
        });
        deficit_checks.push(DeficitCheck {
            factor: i,
            max,
            budget,
            reference_max,
            pass,
        });
    }
    let worst = deficit_checks
        .iter()
        .max_by(|a, b| (a.max / a.budget).total_cmp(&(b.max / b.budget)))
        .expect("at least one factor");

    let mut report = VerificationReport {
        variance_deficit_max: worst.max,
        budget: worst.budget,
        deficits: deficit_checks.clone(),
        exceedance_count: 0,
        replications: settings.replications,
        wilson_upper_95: wilson_upper_95(0, settings.replications),
        reliability: None,
        covariance_errors: Vec::new(),
        moments: Vec::new(),
        checks: Vec::new(),
        notes: Vec::new(),
    };

    if settings.replications == 0 {
        notes.push("replications = 0: only deterministic checks ran".into());
        report.checks = checks;
        report.notes = notes;
        return Ok(report);
    }

    let (outcome, paths) = empirical_reliability_with_paths(
        factors,
        settings.transform,
        spec,
        settings.replications,
        settings.seed,
        settings.grid_points,
    )?;
    checks.push(CheckOutcome {
        name: "reliability".into(),
        pass: outcome.wilson_upper_95 <= spec.delta,
        detail: format!(
            "{} of {} exceed ε = {}; Wilson upper {:.4} vs δ = {}",
            outcome.exceedance_count, outcome.replications, spec.epsilon, outcome.wilson_upper_95, spec.delta
        ),
    });
    report.exceedance_count = outcome.exceedance_count;
    report.wilson_upper_95 = outcome.wilson_upper_95;
    report.reliability = Some(outcome);

    let f0 = &factors[0];
    if paths.len() >= MIN_COVARIANCE_PATHS {
        let est = empirical_covariance(&paths, &settings.lags)?;
        let mut ok = true;
        for e in &est {
            let model = model_covariance(f0.plan, f0.cache, &paths[0].times, e.lag)?;
            let err = e.estimate - model;
            ok &= err.abs() <= 3.0 * e.standard_error + 1e-9;
            report.covariance_errors.push((e.lag, err, e.standard_error));
        }
        checks.push(CheckOutcome {
            name: "covariance".into(),
            pass: ok,
            detail: format!("{} lags within 3 standard errors of the model covariance", est.len()),
        });
    } else {
        notes.push(format!(
            "covariance skipped: {} paths, at least {MIN_COVARIANCE_PATHS} needed",
            paths.len()
        ));
    }

    // Base-path values at mid-interval against the sub-Gaussian bound with τ² = model variance.
    let grid = &paths[0].times;
    let mid = grid.len() / 2;
    let tau = f0.cache.energy(f0.plan, grid[mid])?.sqrt();
    let samples: Vec<f64> = paths.iter().map(|p| p.values[mid]).collect();
    for &p in &settings.moment_orders {
        let m = moment_inequality_check(&samples, tau, p)?;
        checks.push(CheckOutcome {
            name: format!("moment[p={p}]"),
            pass: m.pass,
            detail: format!("E|X|^p ≈ {:.6} ± {:.1e} vs bound {:.6}", m.empirical, m.standard_error, m.bound),
        });
        report.moments.push(m);
    }

    report.checks = checks;
    report.notes = notes;
    Ok(report)
}
