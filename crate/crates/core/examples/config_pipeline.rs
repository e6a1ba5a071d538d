//! The config-file pipeline used by the `wavesim` binary, driven in-process:
//! plan, simulate, verify.
//!
//!     cargo run --release --example config_pipeline -- configs/example1.json

use std::path::PathBuf;

use wavesim::cli::{cmd_plan, cmd_simulate, cmd_verify, RunConfig};

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/example1.json"));
    if let Err(e) = run(&path) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(path: &std::path::Path) -> Result<(), wavesim::cli::CliError> {
    let cfg = RunConfig::load(path)?;
    println!("config {} hash {}", path.display(), cfg.hash());

    let plan = cmd_plan(&cfg)?;
    for (i, p) in plan.plans.iter().enumerate() {
        println!("plan {i}: N0 = {}, N = {}, M = {}, budget {:.3e}", p.n0, p.n, p.m[0], p.variance_budget);
    }

    let sim = cmd_simulate(&cfg, &plan, None)?;
    let csv = sim.to_csv(true);
    for line in csv.lines().take(4) {
        println!("{line}");
    }

    let out = cmd_verify(&cfg, &plan)?;
    println!("verification passed: {}", out.passed);
    for c in &out.report.checks {
        println!("  {} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    Ok(())
}
