use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge after {panels} panels (error estimate {error:e}, tolerance {tolerance:e})")]
    NonConvergence {
        panels: usize,
        error: f64,
        tolerance: f64,
    },

    #[error("integrand violates its decay declaration at y = {at}: |h| = {value:e} > bound {bound:e}")]
    DecayViolation { at: f64, value: f64, bound: f64 },

    #[error("sup-bound scan radius {radius} too narrow: |psi_hat| = {boundary_value:e} near the boundary")]
    ScanTooNarrow { radius: f64, boundary_value: f64 },

    #[error("admissibility conditions failed: {}", failed.join(", "))]
    Inadmissible { failed: Vec<String> },

    #[error("truncation plan needs {terms} terms, cap is {cap}")]
    BudgetTooTight { terms: u128, cap: u128 },

    #[error("decay bound violated by {kind} at j = {j:?}, k = {k}, t = {t}: |c| = {value:e} > {bound:e}")]
    BoundViolation {
        kind: &'static str,
        j: Option<u32>,
        k: i64,
        t: f64,
        value: f64,
        bound: f64,
    },

    #[error("argument {arg} outside cached range [{lo}, {hi}] for {profile}")]
    CacheMiss {
        profile: String,
        arg: f64,
        lo: f64,
        hi: f64,
    },

    #[error("time grids differ")]
    GridMismatch,

    #[error("negative variance deficit {deficit:e} at t = {t}")]
    NegativeDeficit { t: f64, deficit: f64 },

    #[error("numerical instability: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
