//! Frequency-domain scaling functions (f-wavelets) and mother wavelets
//! (m-wavelets).
//!
//! Transforms use the convention `φ̂(y) = ∫ φ(x) e^{-ixy} dx`, so that
//! `φ̂(y) = m₀(y/2) φ̂(y/2)` and the mother wavelet is
//! `ψ̂(y) = conj(m₀(y/2 + π)) e^{-iy/2} φ̂(y/2)`.

pub mod daubechies;

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use daubechies::LowPass;

/// Which wavelet family to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WaveletFamily {
    Meyer,
    Daubechies { order: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WaveletSpec {
    #[serde(flatten)]
    pub family: WaveletFamily,
    #[serde(default = "default_depth")]
    pub product_depth: u32,
}

fn default_depth() -> u32 {
    24
}

impl WaveletSpec {
    pub fn meyer() -> Self {
        Self {
            family: WaveletFamily::Meyer,
            product_depth: default_depth(),
        }
    }

    pub fn daubechies(order: u32) -> Self {
        Self {
            family: WaveletFamily::Daubechies { order },
            product_depth: default_depth(),
        }
    }

    pub fn build(&self) -> Result<WaveletTransforms> {
        match self.family {
            WaveletFamily::Meyer => Ok(build_meyer()),
            WaveletFamily::Daubechies { order } => build_daubechies(order, self.product_depth),
        }
    }
}

#[derive(Clone, Debug)]
enum Kind {
    Meyer,
    Daubechies { filter: LowPass, depth: u32 },
}

/// Evaluators for φ̂, ψ̂ and their derivatives, plus the sup bounds
/// `C₁ ≥ sup|ψ̂|` and `C₂ ≥ sup|ψ̂′|`.
///
/// The sup bounds are computed on first use since for slowly decaying
/// families (Haar) the scan is the expensive part.
#[derive(Debug)]
pub struct WaveletTransforms {
    spec: WaveletSpec,
    kind: Kind,
    bounds: OnceLock<std::result::Result<(f64, f64), (f64, f64)>>,
}

impl Clone for WaveletTransforms {
    fn clone(&self) -> Self {
        let bounds = OnceLock::new();
        if let Some(b) = self.bounds.get() {
            let _ = bounds.set(*b);
        }
        Self {
            spec: self.spec,
            kind: self.kind.clone(),
            bounds,
        }
    }
}

/// Meyer's orthonormal wavelet with the degree-7 transition polynomial.
pub fn build_meyer() -> WaveletTransforms {
    WaveletTransforms {
        spec: WaveletSpec::meyer(),
        kind: Kind::Meyer,
        bounds: OnceLock::new(),
    }
}

/// Daubechies wavelet with `order` vanishing moments, φ̂ evaluated as a
/// truncated infinite product.
pub fn build_daubechies(order: u32, product_depth: u32) -> Result<WaveletTransforms> {
    if product_depth < 8 {
        return Err(Error::Domain(format!(
            "product_depth must be ≥ 8, got {product_depth}"
        )));
    }
    let filter = daubechies::design(order)?;
    Ok(WaveletTransforms {
        spec: WaveletSpec {
            family: WaveletFamily::Daubechies { order },
            product_depth,
        },
        kind: Kind::Daubechies {
            filter,
            depth: product_depth,
        },
        bounds: OnceLock::new(),
    })
}

/// Finite-difference step for the Daubechies derivatives.
const FD_STEP: f64 = 1e-5;

impl WaveletTransforms {
    pub fn spec(&self) -> &WaveletSpec {
        &self.spec
    }

    /// The 2π-periodic low-pass filter m₀.
    pub fn m0(&self, xi: f64) -> Complex64 {
        match &self.kind {
            Kind::Meyer => {
                // m₀(ξ) = Σ_l φ̂(2(ξ + 2πl)); at most two terms are nonzero.
                let base = xi.rem_euclid(2.0 * PI);
                let mut s = 0.0;
                for l in -2..=1 {
                    s += meyer_phi(2.0 * (base + 2.0 * PI * l as f64));
                }
                Complex64::new(s, 0.0)
            }
            Kind::Daubechies { filter, .. } => filter.m0(xi),
        }
    }

    pub fn phi_hat(&self, y: f64) -> Complex64 {
        match &self.kind {
            Kind::Meyer => Complex64::new(meyer_phi(y), 0.0),
            Kind::Daubechies { filter, depth } => product_phi(filter, *depth, y),
        }
    }

    pub fn psi_hat(&self, y: f64) -> Complex64 {
        match &self.kind {
            Kind::Meyer => Complex64::cis(-0.5 * y) * meyer_psi_amplitude(y.abs()),
            Kind::Daubechies { filter, depth } => {
                filter.m0(0.5 * y + PI).conj()
                    * Complex64::cis(-0.5 * y)
                    * product_phi(filter, *depth, 0.5 * y)
            }
        }
    }

    pub fn phi_hat_deriv(&self, y: f64) -> Complex64 {
        match &self.kind {
            Kind::Meyer => Complex64::new(y.signum() * meyer_phi_deriv(y.abs()), 0.0),
            Kind::Daubechies { .. } => {
                (self.phi_hat(y + FD_STEP) - self.phi_hat(y - FD_STEP)) / (2.0 * FD_STEP)
            }
        }
    }

    pub fn psi_hat_deriv(&self, y: f64) -> Complex64 {
        match &self.kind {
            Kind::Meyer => {
                let a = y.abs();
                let amp = meyer_psi_amplitude(a);
                let damp = y.signum() * meyer_psi_amplitude_deriv(a);
                Complex64::cis(-0.5 * y) * Complex64::new(damp, -0.5 * amp)
            }
            Kind::Daubechies { .. } => {
                (self.psi_hat(y + FD_STEP) - self.psi_hat(y - FD_STEP)) / (2.0 * FD_STEP)
            }
        }
    }

    /// A bound on sup|φ̂′|.
    ///
    /// Meyer: (3/4)·max ν′ = 105/64. Daubechies: φ lives on [0, 2N−1], so
    /// |φ̂′| ≤ ∫|xφ(x)| ≤ (2N−1)·√(2N−1)·‖φ‖₂.
    pub fn phi_deriv_bound(&self) -> f64 {
        match self.spec.family {
            WaveletFamily::Meyer => 105.0 / 64.0,
            WaveletFamily::Daubechies { order } => (2.0 * order as f64 - 1.0).powf(1.5),
        }
    }

    /// `Some(r)` when φ̂ vanishes for |y| > r.
    pub fn phi_support(&self) -> Option<f64> {
        match self.kind {
            Kind::Meyer => Some(4.0 * PI / 3.0),
            Kind::Daubechies { .. } => None,
        }
    }

    /// `Some((lo, hi))` when ψ̂ vanishes outside lo ≤ |y| ≤ hi.
    pub fn psi_band(&self) -> Option<(f64, f64)> {
        match self.kind {
            Kind::Meyer => Some((2.0 * PI / 3.0, 8.0 * PI / 3.0)),
            Kind::Daubechies { .. } => None,
        }
    }

    /// Points (y ≥ 0) where φ̂ is only finitely smooth.
    pub fn phi_breakpoints(&self) -> Vec<f64> {
        match self.kind {
            Kind::Meyer => vec![2.0 * PI / 3.0, 4.0 * PI / 3.0],
            Kind::Daubechies { .. } => Vec::new(),
        }
    }

    /// Points (y ≥ 0) where ψ̂ is only finitely smooth.
    pub fn psi_breakpoints(&self) -> Vec<f64> {
        match self.kind {
            Kind::Meyer => vec![2.0 * PI / 3.0, 4.0 * PI / 3.0, 8.0 * PI / 3.0],
            Kind::Daubechies { .. } => Vec::new(),
        }
    }

    /// `C₁`, with the default scan.
    pub fn c1(&self) -> Result<f64> {
        self.sup_bounds().map(|b| b.0)
    }

    /// `C₂`, with the default scan.
    pub fn c2(&self) -> Result<f64> {
        self.sup_bounds().map(|b| b.1)
    }

    /// `(C₁, C₂)` with the default scan radius and density.
    pub fn sup_bounds(&self) -> Result<(f64, f64)> {
        let cached = self.bounds.get_or_init(|| {
            let (radius, points) = self.default_scan();
            match estimate_sup_bounds(self, radius, points) {
                Ok(b) => Ok(b),
                Err(Error::ScanTooNarrow {
                    radius,
                    boundary_value,
                }) => Err((radius, boundary_value)),
                Err(e) => unreachable!("sup scan only fails on narrow radius: {e}"),
            }
        });
        cached.map_err(|(radius, boundary_value)| Error::ScanTooNarrow {
            radius,
            boundary_value,
        })
    }

    fn default_scan(&self) -> (f64, usize) {
        match self.kind {
            Kind::Meyer => (3.0 * PI, 8192),
            Kind::Daubechies { .. } => {
                let mut radius = 16.0 * PI;
                while radius < 1.6e7 && boundary_max(self, radius) >= SCAN_BOUNDARY_LEVEL {
                    radius *= 2.0;
                }
                let points = (radius.ceil() as usize).clamp(8192, 1 << 22);
                (radius, points)
            }
        }
    }
}

const SCAN_BOUNDARY_LEVEL: f64 = 1e-6;
const SUP_SAFETY: f64 = 1.05;

/// Largest |ψ̂| over the outer 5% of `[0, radius]`.
fn boundary_max(w: &WaveletTransforms, radius: f64) -> f64 {
    (0..=64)
        .map(|i| w.psi_hat(radius * (0.95 + 0.05 * i as f64 / 64.0)).norm())
        .fold(0.0, f64::max)
}

/// Grid scan of `|ψ̂|` and `|ψ̂′|` over `[0, scan_radius]` (both are even in y
/// for real wavelets), refined around the best grid points and inflated by
/// the safety factor 1.05.
pub fn estimate_sup_bounds(
    transforms: &WaveletTransforms,
    scan_radius: f64,
    scan_points: usize,
) -> Result<(f64, f64)> {
    if !(scan_radius > 0.0) || scan_points < 16 {
        return Err(Error::Domain("scan needs a positive radius and ≥ 16 points".into()));
    }
    let edge = boundary_max(transforms, scan_radius);
    if edge >= SCAN_BOUNDARY_LEVEL {
        return Err(Error::ScanTooNarrow {
            radius: scan_radius,
            boundary_value: edge,
        });
    }
    let step = scan_radius / (scan_points - 1) as f64;
    let psi = |y: f64| transforms.psi_hat(y).norm();
    let dpsi = |y: f64| transforms.psi_hat_deriv(y).norm();
    let c1 = refined_max(&psi, scan_points, step);
    let c2 = refined_max(&dpsi, scan_points, step);
    Ok((SUP_SAFETY * c1, SUP_SAFETY * c2))
}

fn refined_max<F: Fn(f64) -> f64>(f: &F, points: usize, step: f64) -> f64 {
    let mut top: Vec<(f64, f64)> = Vec::with_capacity(4);
    for i in 0..points {
        let y = i as f64 * step;
        let v = f(y);
        if top.len() < 3 || v > top[top.len() - 1].1 {
            top.push((y, v));
            top.sort_by(|a, b| b.1.total_cmp(&a.1));
            top.truncate(3);
        }
    }
    top.iter()
        .map(|&(y, v)| golden_max(f, (y - step).max(0.0), y + step).max(v))
        .fold(0.0, f64::max)
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

fn product_phi(filter: &LowPass, depth: u32, y: f64) -> Complex64 {
    // Factors below unit scale are counted by `depth`; larger |y| gets
    // proportionally more factors so the residual argument stays ≤ 2^-depth.
    let extra = if y.abs() > 1.0 {
        y.abs().log2().ceil() as u32
    } else {
        0
    };
    let mut x = y;
    let mut prod = Complex64::new(1.0, 0.0);
    for _ in 0..depth + extra {
        x *= 0.5;
        prod *= filter.m0(x);
    }
    prod * Complex64::cis(-filter.centroid * x)
}

/// ν(x) = x⁴(35 − 84x + 70x² − 20x³), clamped to [0, 1].
fn nu(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x.powi(3))
    }
}

fn nu_deriv(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        140.0 * (x * (1.0 - x)).powi(3)
    }
}

fn meyer_phi(y: f64) -> f64 {
    let a = y.abs();
    if a <= 2.0 * PI / 3.0 {
        1.0
    } else if a <= 4.0 * PI / 3.0 {
        (0.5 * PI * nu(3.0 * a / (2.0 * PI) - 1.0)).cos()
    } else {
        0.0
    }
}

fn meyer_phi_deriv(a: f64) -> f64 {
    if a > 2.0 * PI / 3.0 && a < 4.0 * PI / 3.0 {
        let x = 3.0 * a / (2.0 * PI) - 1.0;
        -(0.5 * PI * nu(x)).sin() * 0.5 * PI * nu_deriv(x) * 3.0 / (2.0 * PI)
    } else {
        0.0
    }
}

fn meyer_psi_amplitude(a: f64) -> f64 {
    if a <= 2.0 * PI / 3.0 || a >= 8.0 * PI / 3.0 {
        0.0
    } else if a <= 4.0 * PI / 3.0 {
        (0.5 * PI * nu(3.0 * a / (2.0 * PI) - 1.0)).sin()
    } else {
        (0.5 * PI * nu(3.0 * a / (4.0 * PI) - 1.0)).cos()
    }
}

fn meyer_psi_amplitude_deriv(a: f64) -> f64 {
    if a <= 2.0 * PI / 3.0 || a >= 8.0 * PI / 3.0 {
        0.0
    } else if a <= 4.0 * PI / 3.0 {
        let x = 3.0 * a / (2.0 * PI) - 1.0;
        (0.5 * PI * nu(x)).cos() * 0.5 * PI * nu_deriv(x) * 3.0 / (2.0 * PI)
    } else {
        let x = 3.0 * a / (4.0 * PI) - 1.0;
        -(0.5 * PI * nu(x)).sin() * 0.5 * PI * nu_deriv(x) * 3.0 / (4.0 * PI)
    }
}
