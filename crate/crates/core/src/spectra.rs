//! Spectral densities, their square roots, correlation functions and the
//! constants A, B, A₁, B₁ that drive the truncation planner.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate_line, integrate_oscillatory, integrate_with, Decay, Integrand, QuadOptions};
use crate::wavelets::WaveletTransforms;

/// Built-in density families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DensityFamily {
    /// f(y) = (1 + y^{2n})⁻², n ≥ 2.
    Rational { n: u32 },
    /// f(y) = (1 + y²)^{−2n}, n ≥ 1.
    Lorentzian { n: u32 },
    /// f(y) = ((1+(y−a)²)^{−m} + (1+(y+a)²)^{−m})², m ≥ 2.
    TwoBump { m: u32, a: f64 },
    /// f ≡ 0.
    Zero,
}

/// A density family plus an optional amplitude `c` (the density becomes c²·f).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    #[serde(flatten)]
    pub family: DensityFamily,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

impl From<DensityFamily> for DensitySpec {
    fn from(family: DensityFamily) -> Self {
        Self {
            family,
            amplitude: 1.0,
        }
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Finite-difference step used when a custom density omits g′.
pub const G_DERIV_STEP: f64 = 1e-6;

/// A stationary spectral density given through g = √f.
#[derive(Clone)]
pub struct SpectralModel {
    name: String,
    spec: Option<DensitySpec>,
    g: RealFn,
    g_deriv: RealFn,
    g_decay: Decay,
    g_deriv_decay: Decay,
    breakpoints: Vec<f64>,
    admissibility_declared: bool,
}

impl fmt::Debug for SpectralModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralModel")
            .field("name", &self.name)
            .field("spec", &self.spec)
            .field("g_decay", &self.g_decay)
            .field("g_deriv_decay", &self.g_deriv_decay)
            .finish()
    }
}

/// Builds one of the built-in densities with closed-form g and g′.
pub fn make_density(spec: impl Into<DensitySpec>) -> Result<SpectralModel> {
    let spec = spec.into();
    if !(spec.amplitude >= 0.0 && spec.amplitude.is_finite()) {
        return Err(Error::Domain(format!("amplitude must be ≥ 0, got {}", spec.amplitude)));
    }
    let model = match spec.family {
        DensityFamily::Rational { n } => {
            if n < 2 {
                return Err(Error::Domain(format!("(1+y^2n)^-2 requires n ≥ 2, got {n}")));
            }
            let e = 2 * n as i32;
            let nf = n as f64;
            SpectralModel {
                name: format!("(1+y^{e})^-2"),
                spec: Some(spec),
                g: Arc::new(move |y: f64| 1.0 / (1.0 + y.powi(e))),
                g_deriv: Arc::new(move |y: f64| {
                    let d = 1.0 + y.powi(e);
                    -2.0 * nf * y.powi(e - 1) / (d * d)
                }),
                g_decay: poly(2.0 * nf, 1.0, 1.0),
                g_deriv_decay: poly(2.0 * nf + 1.0, 2.0 * nf, 1.0),
                breakpoints: vec![0.0],
                admissibility_declared: true,
            }
        }
        DensityFamily::Lorentzian { n } => {
            if n < 1 {
                return Err(Error::Domain(format!("(1+y^2)^-2n requires n ≥ 1, got {n}")));
            }
            let ni = n as i32;
            let nf = n as f64;
            SpectralModel {
                name: format!("(1+y^2)^-{}", 2 * n),
                spec: Some(spec),
                g: Arc::new(move |y: f64| (1.0 + y * y).powi(-ni)),
                g_deriv: Arc::new(move |y: f64| -2.0 * nf * y * (1.0 + y * y).powi(-ni - 1)),
                g_decay: poly(2.0 * nf, 1.0, 1.0),
                g_deriv_decay: poly(2.0 * nf + 1.0, 2.0 * nf, 1.0),
                breakpoints: vec![0.0],
                admissibility_declared: true,
            }
        }
        DensityFamily::TwoBump { m, a } => {
            if m < 2 {
                return Err(Error::Domain(format!("two-bump density requires m ≥ 2, got {m}")));
            }
            if !a.is_finite() {
                return Err(Error::Domain(format!("two-bump centre must be finite, got {a}")));
            }
            let mi = m as i32;
            let mf = m as f64;
            // Past |y| ≥ 2|a| + 1 both |y ∓ a| ≥ |y|/2.
            let from = 2.0 * a.abs() + 1.0;
            let two_m = 2.0 * mf;
            SpectralModel {
                name: format!("two-bump m={m} a={a}"),
                spec: Some(spec),
                g: Arc::new(move |y: f64| {
                    (1.0 + (y - a).powi(2)).powi(-mi) + (1.0 + (y + a).powi(2)).powi(-mi)
                }),
                g_deriv: Arc::new(move |y: f64| {
                    let (u, v) = (y - a, y + a);
                    -2.0 * mf * (u * (1.0 + u * u).powi(-mi - 1) + v * (1.0 + v * v).powi(-mi - 1))
                }),
                g_decay: poly(two_m, 2.0 * 2f64.powf(two_m), from),
                g_deriv_decay: poly(two_m + 1.0, 4.0 * mf * 2f64.powf(two_m + 1.0), from),
                breakpoints: vec![-a.abs(), 0.0, a.abs()],
                admissibility_declared: true,
            }
        }
        DensityFamily::Zero => SpectralModel {
            name: "zero".into(),
            spec: Some(spec),
            g: Arc::new(|_| 0.0),
            g_deriv: Arc::new(|_| 0.0),
            g_decay: Decay::Compact { radius: 1.0 },
            g_deriv_decay: Decay::Compact { radius: 1.0 },
            breakpoints: Vec::new(),
            admissibility_declared: true,
        },
    };
    Ok(if spec.amplitude == 1.0 {
        model
    } else {
        model.scaled(spec.amplitude)
    })
}

fn poly(order: f64, constant: f64, from: f64) -> Decay {
    Decay::Polynomial {
        order,
        constant,
        from,
    }
}

impl SpectralModel {
    /// A user density given by g = √f. Without `g_deriv`, g′ is taken by
    /// central differences with step [`G_DERIV_STEP`]; the caller then has
    /// to declare the decay of g′ all the same.
    pub fn custom(
        name: impl Into<String>,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_deriv: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
        g_decay: Decay,
        g_deriv_decay: Decay,
    ) -> Self {
        let g: RealFn = Arc::new(g);
        let g_deriv: RealFn = match g_deriv {
            Some(d) => Arc::from(d),
            None => {
                let g = g.clone();
                Arc::new(move |y| (g(y + G_DERIV_STEP) - g(y - G_DERIV_STEP)) / (2.0 * G_DERIV_STEP))
            }
        };
        Self {
            name: name.into(),
            spec: None,
            g,
            g_deriv,
            g_decay,
            g_deriv_decay,
            breakpoints: vec![0.0],
            admissibility_declared: false,
        }
    }

    /// Same shape with density c²·f (so g becomes c·g).
    pub fn scaled(&self, c: f64) -> Self {
        let (g, gd) = (self.g.clone(), self.g_deriv.clone());
        Self {
            name: format!("{}·{c}²", self.name),
            spec: self.spec.map(|s| DensitySpec {
                amplitude: s.amplitude * c,
                ..s
            }),
            g: Arc::new(move |y| c * g(y)),
            g_deriv: Arc::new(move |y| c * gd(y)),
            g_decay: self.g_decay.scaled(c),
            g_deriv_decay: self.g_deriv_decay.scaled(c),
            breakpoints: self.breakpoints.clone(),
            admissibility_declared: self.admissibility_declared,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> Option<&DensitySpec> {
        self.spec.as_ref()
    }

    #[inline]
    pub fn f(&self, y: f64) -> f64 {
        let g = (self.g)(y);
        g * g
    }

    #[inline]
    pub fn g(&self, y: f64) -> f64 {
        (self.g)(y)
    }

    #[inline]
    pub fn g_deriv(&self, y: f64) -> f64 {
        (self.g_deriv)(y)
    }

    pub fn g_decay(&self) -> Decay {
        self.g_decay
    }

    pub fn g_deriv_decay(&self) -> Decay {
        self.g_deriv_decay
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn admissibility_declared(&self) -> bool {
        self.admissibility_declared
    }

    /// Largest |y| at which g may still exceed `level`, from the declared decay.
    pub fn g_radius(&self, level: f64) -> f64 {
        match self.g_decay {
            Decay::Compact { radius } => radius,
            Decay::Polynomial {
                order,
                constant,
                from,
            } => (constant / level).powf(1.0 / order).max(from),
            Decay::Exponential {
                rate,
                constant,
                from,
            } => ((constant / level).ln() / rate).max(from),
        }
    }

    /// R(0) = ∫ f.
    pub fn variance(&self, rel_tol: f64) -> Result<f64> {
        let h = Integrand::new(|y| Complex64::new(self.f(y), 0.0), self.g_decay.squared())
            .with_breakpoints(self.breakpoints.clone());
        Ok(integrate_line(&h, rel_tol)?.value.re)
    }
}

/// R(τ) = ∫ f(y) e^{−iyτ} dy, real for even f.
pub fn correlation(model: &SpectralModel, tau: f64) -> Result<f64> {
    correlation_tol(model, tau, 1e-10)
}

pub fn correlation_tol(model: &SpectralModel, tau: f64, rel_tol: f64) -> Result<f64> {
    if !tau.is_finite() {
        return Err(Error::Domain(format!("lag must be finite, got {tau}")));
    }
    let h = Integrand::new(|y| Complex64::new(model.f(y), 0.0), model.g_decay.squared())
        .with_breakpoints(model.breakpoints.clone());
    Ok(integrate_oscillatory(&h, tau, rel_tol)?.value.re)
}

/// Planner constants for one (density, wavelet) pair, plus R(0).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanConstants {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
}

pub const CONSTANTS_REL_TOL: f64 = 1e-8;

fn integrand_breakpoints(model: &SpectralModel, wavelet: &[f64]) -> Vec<f64> {
    let mut b = model.breakpoints.clone();
    b.extend(wavelet.iter().flat_map(|&p| [p, -p]));
    b
}

fn line(h: impl Fn(f64) -> f64, decay: Decay, breakpoints: Vec<f64>) -> Result<f64> {
    line_tol(h, decay, breakpoints, CONSTANTS_REL_TOL)
}

fn line_tol(h: impl Fn(f64) -> f64, decay: Decay, breakpoints: Vec<f64>, rel_tol: f64) -> Result<f64> {
    let integrand = Integrand::new(|y| Complex64::new(h(y), 0.0), decay).with_breakpoints(breakpoints);
    Ok(integrate_line(&integrand, rel_tol)?.value.re)
}

/// A, B, A₁, B₁ and R(0), each integral at relative tolerance 1e−8.
pub fn plan_constants(model: &SpectralModel, transforms: &WaveletTransforms) -> Result<PlanConstants> {
    let c2 = transforms.c2()?;
    let norm = 1.0 / (2.0 * PI).sqrt();
    let bp = integrand_breakpoints(model, &[]);
    let phi_bp = integrand_breakpoints(model, &transforms.phi_breakpoints());
    let g_decay = model.g_decay;
    let gd_decay = model.g_deriv_decay;

    let a_int = line(
        |y| model.g_deriv(y).abs() * y.abs() + model.g(y),
        gd_decay.times_abs_y().plus(g_decay),
        bp.clone(),
    )?;
    let b_int = line(|y| model.g(y) * y.abs(), g_decay.times_abs_y(), bp.clone())?;

    // |φ̂| ≤ 1 for any orthonormal scaling function.
    let phi_decay = match transforms.phi_support() {
        Some(r) => Decay::Compact { radius: r },
        None => gd_decay.plus(g_decay.scaled(transforms.phi_deriv_bound())),
    };
    let a1_int = line(
        |y| {
            model.g_deriv(y).abs() * transforms.phi_hat(y).norm()
                + model.g(y) * transforms.phi_hat_deriv(y).norm()
        },
        phi_decay,
        phi_bp.clone(),
    )?;
    let b1_decay = match transforms.phi_support() {
        Some(r) => Decay::Compact { radius: r },
        None => g_decay,
    };
    let b1_int = line(|y| model.g(y) * transforms.phi_hat(y).norm(), b1_decay, phi_bp)?;

    // R(0) enters deficits that are compared against small budgets.
    let r0 = line_tol(|y| model.f(y), g_decay.squared(), bp, 1e-12)?;
    Ok(PlanConstants {
        a: c2 * norm * a_int,
        b: c2 * norm * b_int,
        a1: norm * a1_int,
        b1: norm * b1_int,
        r0,
    })
}

/// One integrability or boundedness condition behind the power plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    /// Computed integral or supremum; `None` when divergence was detected.
    pub value: Option<f64>,
    pub finite: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub conditions: Vec<Condition>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.finite)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.conditions
            .iter()
            .filter(|c| !c.finite)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Certifies the integrability and boundedness conditions by growing
/// partial integrals: the mass on dyadic rings R < |y| ≤ 2R must shrink
/// geometrically.
pub fn check_admissibility(model: &SpectralModel, transforms: &WaveletTransforms) -> AdmissibilityReport {
    let mut bp = integrand_breakpoints(model, &transforms.phi_breakpoints());
    let start = 16.0 + bp.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    bp.retain(|p| p.abs() < start);

    let g = |y: f64| model.g(y);
    let gd = |y: f64| model.g_deriv(y).abs();
    let phi = |y: f64| transforms.phi_hat(y).norm();
    let dphi = |y: f64| transforms.phi_hat_deriv(y).norm();

    let mut conditions = vec![
        growing("∫ g", &g, start, &bp),
        growing("∫ |g′|·|y|", &|y: f64| gd(y) * y.abs(), start, &bp),
        growing("∫ g·|y|", &|y: f64| g(y) * y.abs(), start, &bp),
        growing("∫ |g′|·|φ̂|", &|y: f64| gd(y) * phi(y), start, &bp),
        growing("∫ g·|φ̂′|", &|y: f64| g(y) * dphi(y), start, &bp),
    ];
    for (name, f) in [("sup |φ̂|", &phi as &dyn Fn(f64) -> f64), ("sup g", &g)] {
        let sup = (0..=20_000)
            .map(|i| {
                let y = -start + 2.0 * start * i as f64 / 20_000.0;
                f(y)
            })
            .fold(0.0f64, |m, v| if v.is_finite() { m.max(v) } else { f64::INFINITY });
        conditions.push(Condition {
            name: name.into(),
            value: sup.is_finite().then_some(sup),
            finite: sup.is_finite(),
        });
    }
    AdmissibilityReport { conditions }
}

fn ring<H: Fn(f64) -> f64>(h: &H, lo: f64, hi: f64, breakpoints: &[f64]) -> Result<f64> {
    let mut bp = breakpoints.to_vec();
    if lo > 0.0 {
        bp.extend([-lo, lo]);
    }
    let integrand = Integrand::new(
        |y: f64| {
            if y.abs() > lo && y.abs() <= hi {
                Complex64::new(h(y), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        },
        Decay::Compact { radius: hi },
    )
    .with_breakpoints(bp);
    let opts = QuadOptions {
        abs_floor: 1e-14,
        ..QuadOptions::default()
    };
    Ok(integrate_with(&integrand, 0.0, 1e-7, &opts)?.value.re)
}

const MAX_RINGS: usize = 40;

fn growing<H: Fn(f64) -> f64>(name: &str, h: &H, start: f64, bp: &[f64]) -> Condition {
    let diverged = Condition {
        name: name.into(),
        value: None,
        finite: false,
    };
    let Ok(mut total) = ring(h, 0.0, start, bp) else {
        return diverged;
    };
    if !total.is_finite() {
        return diverged;
    }
    let mut r = start;
    let mut prev = f64::INFINITY;
    let mut slow = 0;
    for _ in 0..MAX_RINGS {
        let Ok(mass) = ring(h, r, 2.0 * r, &[]) else {
            return diverged;
        };
        if !mass.is_finite() {
            return diverged;
        }
        total += mass;
        if mass <= 1e-12 * total.abs() || mass < 1e-15 {
            return Condition {
                name: name.into(),
                value: Some(total),
                finite: true,
            };
        }
        slow = if mass >= 0.95 * prev { slow + 1 } else { 0 };
        if slow >= 3 {
            return diverged;
        }
        prev = mass;
        r *= 2.0;
    }
    // Still shrinking geometrically but slowly; the tail beyond r is at most
    // mass·q/(1−q) with q the last ratio, which is finite.
    Condition {
        name: name.into(),
        value: Some(total),
        finite: true,
    }
}
