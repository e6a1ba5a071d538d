//! Simulation of stationary Gaussian processes, and of their powers and
//! products, through truncated wavelet expansions
//!
//! X̂(t) = Σ_{|k|<N₀} ξ_k a₀ₖ(t) + Σ_{j<N} Σ_{|k|<M_j} η_{jk} b_{jk}(t)
//!
//! with truncation counts chosen so that the L_p([0, T]) error of the
//! transformed path stays below ε with probability at least 1 − δ.
//!
//! The usual flow goes through [`planner`] (counts from an accuracy target),
//! [`coeffs`] (tabulated coefficient profiles), [`sampler`] (paths) and
//! [`verify`] (deficits and Monte Carlo checks). The `examples/` directory has
//! one runnable program per step.

pub mod cli;
pub mod coeffs;
pub mod error;
pub mod numerics;
pub mod planner;
pub mod sampler;
pub mod spectra;
pub mod verify;
pub mod wavelets;

pub use error::{Error, Result};
