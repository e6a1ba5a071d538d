//! Config-driven commands behind the `wavesim` binary: plan, simulate,
//! verify and constants.
//!
//! Every output embeds the SHA-256 of the parsed config, and simulate/verify
//! refuse a plan file written for a different config.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coeffs::{build_cache_with, CacheOptions, CoefficientCache};
use crate::error::Error;
use crate::planner::{plan_power, plan_product, AccuracySpec, PlanOptions, ProductPlan, TruncationPlan};
use crate::sampler::{evaluate_plan, power_path, product_path, uniform_grid, CounterDraws, SamplePath};
use crate::spectra::{check_admissibility, make_density, plan_constants, AdmissibilityReport, DensitySpec, PlanConstants};
use crate::verify::{run_verification, Factor, Transform, VerificationReport, VerifySettings};
use crate::wavelets::WaveletSpec;

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "WAVESIM_THREADS";

fn default_grid_points() -> usize {
    512
}
fn default_replications() -> usize {
    200
}
fn default_max_terms() -> u128 {
    PlanOptions::default().max_terms
}
fn default_margin() -> f64 {
    1.0
}
fn default_reference() -> ReferenceGrowth {
    ReferenceGrowth { levels: 2, terms: 4 }
}
fn default_lags() -> Vec<f64> {
    vec![0.0, 0.25]
}
fn default_grid_step() -> f64 {
    0.01
}
fn default_deficit_points() -> usize {
    64
}

/// Growth factors of the reference plan used as the stand-in for the true process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceGrowth {
    pub levels: u32,
    pub terms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub process: Transform,
    pub density: DensitySpec,
    pub wavelet: WaveletSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density2: Option<DensitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelet2: Option<WaveletSpec>,
    pub epsilon: f64,
    pub delta: f64,
    pub p: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub seed: u64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_max_terms")]
    pub max_terms: u128,
    #[serde(default = "default_margin")]
    pub safety_margin: f64,
    #[serde(default = "default_reference")]
    pub reference: ReferenceGrowth,
    #[serde(default = "default_lags")]
    pub lags: Vec<f64>,
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    #[serde(default = "default_deficit_points")]
    pub deficit_points: usize,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let min_p = match self.process {
            Transform::Power { s } => {
                if s < 1 {
                    return Err(CliError::Config("power s must be ≥ 1".into()));
                }
                2.0
            }
            Transform::Product => {
                if self.density2.is_none() || self.wavelet2.is_none() {
                    return Err(CliError::Config("product process needs density2 and wavelet2".into()));
                }
                1.0
            }
        };
        self.accuracy().check(min_p).map_err(CliError::from)?;
        if self.grid_points < 512 {
            return Err(CliError::Config(format!("grid_points must be ≥ 512, got {}", self.grid_points)));
        }
        if self.reference.levels < 1 || self.reference.terms < 1 {
            return Err(CliError::Config("reference growth factors must be ≥ 1".into()));
        }
        if !(self.safety_margin >= 1.0) {
            return Err(CliError::Config(format!("safety_margin must be ≥ 1, got {}", self.safety_margin)));
        }
        make_density(self.density).map_err(CliError::from)?;
        if let Some(d) = self.density2 {
            make_density(d).map_err(CliError::from)?;
        }
        Ok(())
    }

    pub fn accuracy(&self) -> AccuracySpec {
        AccuracySpec {
            epsilon: self.epsilon,
            delta: self.delta,
            p: self.p,
            t: self.t,
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    fn options(&self) -> PlanOptions {
        PlanOptions {
            max_terms: self.max_terms,
            safety_margin: self.safety_margin,
        }
    }

    /// (density, wavelet) per factor.
    fn factors(&self) -> Vec<(DensitySpec, WaveletSpec)> {
        let mut v = vec![(self.density, self.wavelet)];
        if let (Transform::Product, Some(d), Some(w)) = (self.process, self.density2, self.wavelet2) {
            v.push((d, w));
        }
        v
    }
}

/// Contents of a plan file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub config_hash: String,
    pub process: Transform,
    pub accuracy: AccuracySpec,
    /// One plan per factor.
    pub plans: Vec<TruncationPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<ProductBudgets>,
    pub total_terms: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductBudgets {
    pub delta_hat: f64,
    pub delta1_star: f64,
    pub delta2_star: f64,
}

impl PlanFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("plan file: {e}")))
    }

    /// SHA-256 of the plan file's JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("plan serializes")))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("plan file was written for config {found}, this config hashes to {expected}")]
    Provenance { expected: String, found: String },
    #[error("verification failed: {}", .0.join(", "))]
    Verification(Vec<String>),
    #[error(transparent)]
    Core(Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(m) => CliError::Config(m),
            Error::Inadmissible { .. } | Error::BudgetTooTight { .. } => CliError::Config(e.to_string()),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Provenance { .. } => 3,
            CliError::Verification(_) => 4,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

/// Plans for the configured process.
pub fn cmd_plan(cfg: &RunConfig) -> Result<PlanFile, CliError> {
    let spec = cfg.accuracy();
    let opts = cfg.options();
    let built: Vec<_> = cfg
        .factors()
        .into_iter()
        .map(|(d, w)| Ok((make_density(d)?, w.build()?)))
        .collect::<Result<_, Error>>()?;
    let (plans, product) = match cfg.process {
        Transform::Power { s } => (vec![plan_power(&spec, s, &built[0].0, &built[0].1, &opts)?], None),
        Transform::Product => {
            let ProductPlan {
                plan1,
                plan2,
                delta_hat,
                delta1_star,
                delta2_star,
            } = plan_product(&spec, &built[0].0, &built[0].1, &built[1].0, &built[1].1, &opts)?;
            (
                vec![plan1, plan2],
                Some(ProductBudgets {
                    delta_hat,
                    delta1_star,
                    delta2_star,
                }),
            )
        }
    };
    Ok(PlanFile {
        config_hash: cfg.hash(),
        process: cfg.process,
        accuracy: spec,
        total_terms: plans.iter().map(|p| p.total_terms().to_string()).collect(),
        plans,
        product,
    })
}

fn check_provenance(cfg: &RunConfig, plan: &PlanFile) -> Result<(), CliError> {
    let expected = cfg.hash();
    if plan.config_hash != expected {
        return Err(CliError::Provenance {
            expected,
            found: plan.config_hash.clone(),
        });
    }
    let want = cfg.factors().len();
    if plan.plans.len() != want {
        return Err(CliError::Config(format!("plan file has {} plans, config needs {want}", plan.plans.len())));
    }
    Ok(())
}

fn caches_for(cfg: &RunConfig, plans: &[TruncationPlan]) -> Result<Vec<CoefficientCache>, CliError> {
    let opts = CacheOptions {
        grid_step: cfg.grid_step,
        ..CacheOptions::default()
    };
    cfg.factors()
        .into_iter()
        .zip(plans)
        .map(|((d, w), plan)| {
            let model = make_density(d)?;
            let w = w.build()?;
            Ok(build_cache_with(plan, &model, &w, cfg.t, &opts)?)
        })
        .collect()
}

/// Simulated path plus the base paths it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    pub path: SamplePath,
    pub bases: Vec<SamplePath>,
    pub seed: u64,
    pub plan_hash: String,
    pub config_hash: String,
}

/// One realization of the configured process on `grid_points` points.
pub fn cmd_simulate(cfg: &RunConfig, plan: &PlanFile, seed: Option<u64>) -> Result<Simulation, CliError> {
    check_provenance(cfg, plan)?;
    let seed = seed.unwrap_or(cfg.seed);
    let caches = caches_for(cfg, &plan.plans)?;
    let times = uniform_grid(cfg.t, cfg.grid_points)?;
    let bases = plan
        .plans
        .iter()
        .zip(&caches)
        .enumerate()
        .map(|(i, (p, c))| evaluate_plan(p, &CounterDraws::new(seed, 0, i as u32), c, &times))
        .collect::<Result<Vec<_>, Error>>()?;
    let path = match cfg.process {
        Transform::Power { s } => power_path(&bases[0], s)?,
        Transform::Product => product_path(&bases[0], &bases[1])?,
    };
    Ok(Simulation {
        path,
        bases,
        seed,
        plan_hash: plan.hash(),
        config_hash: cfg.hash(),
    })
}

impl Simulation {
    /// CSV with a comment header; numbers carry 17 significant digits.
    pub fn to_csv(&self, emit_base: bool) -> String {
        let mut out = String::new();
        let kind = serde_json::to_string(&self.path.kind).expect("kind serializes");
        let _ = writeln!(
            out,
            "# seed={} plan_hash={} config_hash={} kind={kind}",
            self.seed, self.plan_hash, self.config_hash
        );
        out.push_str("t,value");
        if emit_base {
            for i in 0..self.bases.len() {
                let _ = write!(out, ",base{}", i + 1);
            }
        }
        out.push('\n');
        for (i, (&t, &v)) in self.path.times.iter().zip(&self.path.values).enumerate() {
            let _ = write!(out, "{t:.16e},{v:.16e}");
            if emit_base {
                for b in &self.bases {
                    let _ = write!(out, ",{:.16e}", b.values[i]);
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Report written by `verify`: the checks plus every input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub config: RunConfig,
    pub config_hash: String,
    pub plan_hash: String,
    pub plans: Vec<TruncationPlan>,
    pub references: Vec<TruncationPlan>,
    pub settings: VerifySettings,
    pub passed: bool,
    pub report: VerificationReport,
}

/// Deficit, reliability, covariance and moment checks for the plan file.
/// Returns the output even when checks fail; the caller maps that to exit 4.
pub fn cmd_verify(cfg: &RunConfig, plan: &PlanFile) -> Result<VerifyOutput, CliError> {
    check_provenance(cfg, plan)?;
    let references: Vec<TruncationPlan> = plan
        .plans
        .iter()
        .map(|p| p.grown(cfg.reference.levels, cfg.reference.terms))
        .collect();
    let caches = caches_for(cfg, &references)?;
    let factors: Vec<Factor<'_>> = plan
        .plans
        .iter()
        .zip(&references)
        .zip(&caches)
        .map(|((plan, reference), cache)| Factor { plan, reference, cache })
        .collect();
    let settings = VerifySettings {
        transform: cfg.process,
        spec: cfg.accuracy(),
        replications: cfg.replications,
        seed: cfg.seed,
        grid_points: cfg.grid_points,
        deficit_points: cfg.deficit_points,
        lags: cfg.lags.clone(),
        moment_orders: vec![cfg.p, 4.0],
    };
    let report = run_verification(&factors, &settings)?;
    Ok(VerifyOutput {
        config: cfg.clone(),
        config_hash: cfg.hash(),
        plan_hash: plan.hash(),
        plans: plan.plans.clone(),
        references,
        settings,
        passed: report.passed(),
        report,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorConstants {
    pub density: DensitySpec,
    pub wavelet: WaveletSpec,
    pub c1: f64,
    pub c2: f64,
    pub constants: PlanConstants,
    pub admissibility: AdmissibilityReport,
}

/// Planner constants and admissibility diagnostics per factor.
pub fn cmd_constants(cfg: &RunConfig) -> Result<Vec<FactorConstants>, CliError> {
    cfg.factors()
        .into_iter()
        .map(|(d, w)| {
            let model = make_density(d)?;
            let tr = w.build()?;
            let (c1, c2) = tr.sup_bounds()?;
            Ok(FactorConstants {
                density: d,
                wavelet: w,
                c1,
                c2,
                constants: plan_constants(&model, &tr)?,
                admissibility: check_admissibility(&model, &tr),
            })
        })
        .collect::<Result<_, Error>>()
        .map_err(CliError::from)
}

#[derive(Debug, Parser)]
#[command(name = "wavesim", version, about = "Wavelet-expansion models of sub-Gaussian processes with L_p accuracy plans")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the truncation plan and write it as JSON.
    Plan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate one path and write it as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Add the base path column(s).
        #[arg(long)]
        emit_base: bool,
    },
    /// Run the deficit and Monte Carlo checks and write a JSON report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the planner constants for the config's densities and wavelets.
    Constants {
        #[arg(long)]
        config: PathBuf,
    },
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Core(e.into()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Runs one command; `Ok` carries text for stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Plan { config, out } => {
            let cfg = RunConfig::load(config)?;
            let plan = cmd_plan(&cfg)?;
            write_json(out, &plan)?;
            Ok(format!("plan written to {} ({} terms)", out.display(), plan.total_terms.join(" + ")))
        }
        Command::Simulate {
            config,
            plan,
            out,
            seed,
            emit_base,
        } => {
            let cfg = RunConfig::load(config)?;
            let plan = PlanFile::load(plan)?;
            let sim = cmd_simulate(&cfg, &plan, *seed)?;
            std::fs::write(out, sim.to_csv(*emit_base))?;
            Ok(format!("{} rows written to {}", sim.path.values.len(), out.display()))
        }
        Command::Verify { config, plan, out } => {
            let cfg = RunConfig::load(config)?;
            let plan = PlanFile::load(plan)?;
            let res = cmd_verify(&cfg, &plan)?;
            write_json(out, &res)?;
            let mut text = String::new();
            for c in &res.report.checks {
                let _ = writeln!(text, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            for n in &res.report.notes {
                let _ = writeln!(text, "note: {n}");
            }
            if res.passed {
                Ok(text)
            } else {
                eprint!("{text}");
                Err(CliError::Verification(
                    res.report.failed_checks().into_iter().map(String::from).collect(),
                ))
            }
        }
        Command::Constants { config } => {
            let cfg = RunConfig::load(config)?;
            let c = cmd_constants(&cfg)?;
            serde_json::to_string_pretty(&c).map_err(|e| CliError::Core(e.into()))
        }
    }
}

/// Worker count from [`THREADS_ENV`], if set and valid.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}
