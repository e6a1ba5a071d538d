//! Real-line quadrature and the gamma function.

mod gamma;
mod quadrature;

pub use gamma::{gamma, ln_gamma};
pub use quadrature::{
    composite_nodes, integrate_line, integrate_oscillatory, integrate_with, real_integrand,
    segments, Decay, Integrand, QuadOptions, QuadratureResult,
};
