//! Adaptive Gauss-Kronrod quadrature over the real line.
//!
//! Every integral in the crate has the form `∫_R h(y) e^{-iωy} dy` with a
//! complex integrand whose tail behaviour is declared up front. The declared
//! [`Decay`] fixes a truncation radius whose analytic tail mass sits below a
//! tenth of the requested tolerance; the finite interval is then split at
//! the integrand's breakpoints (and into sub-period panels when the
//! oscillation is fast) and refined adaptively with a 21-point Kronrod rule.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Kronrod abscissae on [-1, 1] (positive half, descending; last is 0).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_626_368_842,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Weights of the embedded 10-point Gauss rule (nodes are XGK[1], XGK[3], ...).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Declared tail behaviour of an integrand.
///
/// `Polynomial` and `Exponential` promise `|h(y)| ≤ bound(|y|)` for
/// `|y| ≥ from`; `Compact` promises `h(y) = 0` for `|y| > radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Decay {
    Compact { radius: f64 },
    Polynomial { order: f64, constant: f64, from: f64 },
    Exponential { rate: f64, constant: f64, from: f64 },
}

impl Decay {
    /// Pointwise bound on `|h(y)|`, or `None` inside the region where the
    /// declaration says nothing.
    pub fn bound(&self, y: f64) -> Option<f64> {
        let a = y.abs();
        match *self {
            Decay::Compact { radius } => (a > radius).then_some(0.0),
            Decay::Polynomial {
                order,
                constant,
                from,
            } => (a >= from && a > 0.0).then(|| constant * a.powf(-order)),
            Decay::Exponential {
                rate,
                constant,
                from,
            } => (a >= from).then(|| constant * (-rate * a).exp()),
        }
    }

    /// Analytic mass of `|h|` outside `[-radius, radius]` (both tails).
    pub fn tail(&self, radius: f64) -> f64 {
        match *self {
            Decay::Compact { radius: r } => {
                if radius >= r {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Decay::Polynomial {
                order,
                constant,
                from,
            } => {
                if order <= 1.0 || radius < from || radius <= 0.0 {
                    f64::INFINITY
                } else {
                    2.0 * constant * radius.powf(1.0 - order) / (order - 1.0)
                }
            }
            Decay::Exponential {
                rate,
                constant,
                from,
            } => {
                if radius < from {
                    f64::INFINITY
                } else {
                    2.0 * constant * (-rate * radius).exp() / rate
                }
            }
        }
    }

    /// Smallest radius (not below the declaration's start) with tail mass ≤ `target`.
    pub fn radius_for(&self, target: f64) -> f64 {
        match *self {
            Decay::Compact { radius } => radius,
            Decay::Polynomial {
                order,
                constant,
                from,
            } => {
                if order <= 1.0 {
                    return f64::INFINITY;
                }
                let r = (2.0 * constant / ((order - 1.0) * target)).powf(1.0 / (order - 1.0));
                r.max(from).max(f64::MIN_POSITIVE)
            }
            Decay::Exponential {
                rate,
                constant,
                from,
            } => {
                let r = (2.0 * constant / (rate * target)).ln() / rate;
                r.max(from)
            }
        }
    }

    /// The same shape scaled by a nonnegative factor.
    pub fn scaled(self, factor: f64) -> Decay {
        match self {
            Decay::Compact { .. } => self,
            Decay::Polynomial {
                order,
                constant,
                from,
            } => Decay::Polynomial {
                order,
                constant: constant * factor,
                from,
            },
            Decay::Exponential {
                rate,
                constant,
                from,
            } => Decay::Exponential {
                rate,
                constant: constant * factor,
                from,
            },
        }
    }
}

impl Decay {
    /// Decay of `|y|·h(y)`.
    pub fn times_abs_y(self) -> Decay {
        match self {
            Decay::Compact { .. } => self,
            Decay::Polynomial {
                order,
                constant,
                from,
            } => Decay::Polynomial {
                order: order - 1.0,
                constant,
                from,
            },
            // y·e^{-ry} ≤ (2/(e·r))·e^{-ry/2}
            Decay::Exponential {
                rate,
                constant,
                from,
            } => Decay::Exponential {
                rate: 0.5 * rate,
                constant: constant * 2.0 / (std::f64::consts::E * rate),
                from,
            },
        }
    }

    /// Decay of `h(y)²`.
    pub fn squared(self) -> Decay {
        match self {
            Decay::Compact { .. } => self,
            Decay::Polynomial {
                order,
                constant,
                from,
            } => Decay::Polynomial {
                order: 2.0 * order,
                constant: constant * constant,
                from,
            },
            Decay::Exponential {
                rate,
                constant,
                from,
            } => Decay::Exponential {
                rate: 2.0 * rate,
                constant: constant * constant,
                from,
            },
        }
    }

    /// Decay of `h₁ + h₂`.
    pub fn plus(self, other: Decay) -> Decay {
        use Decay::*;
        match (self, other) {
            (Compact { radius: a }, Compact { radius: b }) => Compact { radius: a.max(b) },
            (Compact { radius }, d) | (d, Compact { radius }) => d.starting_at(radius),
            (
                Polynomial {
                    order: p,
                    constant: c,
                    from: f,
                },
                Polynomial {
                    order: q,
                    constant: d,
                    from: g,
                },
            ) => {
                // For |y| ≥ 1 the slower power dominates the faster one.
                let from = f.max(g).max(1.0);
                Polynomial {
                    order: p.min(q),
                    constant: c + d,
                    from,
                }
            }
            (
                Exponential {
                    rate: r,
                    constant: c,
                    from: f,
                },
                Exponential {
                    rate: s,
                    constant: d,
                    from: g,
                },
            ) => Exponential {
                rate: r.min(s),
                constant: c + d,
                from: f.max(g),
            },
            (
                Exponential {
                    rate,
                    constant: c,
                    from: f,
                },
                Polynomial {
                    order,
                    constant: d,
                    from: g,
                },
            )
            | (
                Polynomial {
                    order,
                    constant: d,
                    from: g,
                },
                Exponential {
                    rate,
                    constant: c,
                    from: f,
                },
            ) => {
                // e^{-ry} ≤ (k/(e·r))^k·y^{-k}
                let k = order.max(0.0);
                let as_poly = c * (k / (std::f64::consts::E * rate)).powf(k);
                Polynomial {
                    order,
                    constant: d + as_poly,
                    from: f.max(g),
                }
            }
        }
    }

    fn starting_at(self, start: f64) -> Decay {
        match self {
            Decay::Compact { radius } => Decay::Compact {
                radius: radius.max(start),
            },
            Decay::Polynomial {
                order,
                constant,
                from,
            } => Decay::Polynomial {
                order,
                constant,
                from: from.max(start),
            },
            Decay::Exponential {
                rate,
                constant,
                from,
            } => Decay::Exponential {
                rate,
                constant,
                from: from.max(start),
            },
        }
    }
}

/// A complex integrand on the real line together with its decay class.
pub struct Integrand<F> {
    f: F,
    decay: Decay,
    breakpoints: Vec<f64>,
}

impl<F> Integrand<F>
where
    F: Fn(f64) -> Complex64,
{
    pub fn new(f: F, decay: Decay) -> Self {
        Self {
            f,
            decay,
            breakpoints: Vec::new(),
        }
    }

    /// Points where the integrand is less smooth; panels never straddle them.
    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.retain(|p| p.is_finite());
        points.sort_by(|a, b| a.total_cmp(b));
        points.dedup();
        self.breakpoints = points;
        self
    }

    #[inline]
    pub fn eval(&self, y: f64) -> Complex64 {
        (self.f)(y)
    }

    pub fn decay(&self) -> Decay {
        self.decay
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

/// Wraps a real-valued function as an [`Integrand`].
pub fn real_integrand<G>(g: G, decay: Decay) -> Integrand<impl Fn(f64) -> Complex64>
where
    G: Fn(f64) -> f64,
{
    Integrand::new(move |y| Complex64::new(g(y), 0.0), decay)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub panels_used: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    /// Absolute error floor; refinement stops once the error estimate is below it.
    pub abs_floor: f64,
    pub max_panels: usize,
    /// Largest initial panel width as a fraction of the oscillation period.
    pub period_fraction: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_floor: 1e-12,
            max_panels: 2_000_000,
            period_fraction: 0.5,
        }
    }
}

/// `∫_R h(y) dy` to relative tolerance `rel_tol` (plus the default absolute floor).
pub fn integrate_line<F>(integrand: &Integrand<F>, rel_tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    integrate_with(integrand, 0.0, rel_tol, &QuadOptions::default())
}

/// `∫_R h(y) e^{-i·frequency·y} dy`.
pub fn integrate_oscillatory<F>(
    envelope: &Integrand<F>,
    frequency: f64,
    rel_tol: f64,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    integrate_with(envelope, frequency, rel_tol, &QuadOptions::default())
}

/// General entry point behind [`integrate_line`] and [`integrate_oscillatory`].
pub fn integrate_with<F>(
    integrand: &Integrand<F>,
    frequency: f64,
    rel_tol: f64,
    opts: &QuadOptions,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::Domain(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
    }
    if !frequency.is_finite() {
        return Err(Error::Domain("frequency must be finite".into()));
    }
    let h = |y: f64| {
        let v = integrand.eval(y);
        if frequency == 0.0 {
            v
        } else {
            v * Complex64::cis(-frequency * y)
        }
    };
    let max_width = if frequency.abs() > 1.0 {
        opts.period_fraction * 2.0 * std::f64::consts::PI / frequency.abs()
    } else {
        f64::INFINITY
    };

    let decay = integrand.decay();
    let radius = match decay {
        Decay::Compact { radius } => radius,
        _ => {
            let start = match decay {
                Decay::Polynomial { from, .. } | Decay::Exponential { from, .. } => from,
                Decay::Compact { .. } => unreachable!(),
            };
            let core = start.max(1.0);
            let probe = segments(-core, core, integrand.breakpoints(), max_width.max(core / 4.0));
            let scale: Complex64 = probe.iter().map(|&(a, b)| gk21(&h, a, b).0).sum();
            let target = opts.abs_floor.max(rel_tol * scale.norm()) / 10.0;
            let r = decay.radius_for(target).max(core);
            if !r.is_finite() {
                return Err(Error::NonConvergence {
                    panels: 0,
                    error: f64::INFINITY,
                    tolerance: target,
                });
            }
            check_decay(integrand, r)?;
            r
        }
    };
    let tail = match decay {
        Decay::Compact { .. } => 0.0,
        _ => decay.tail(radius),
    };

    let initial = segments(-radius, radius, integrand.breakpoints(), max_width);
    if initial.len() > opts.max_panels {
        return Err(Error::NonConvergence {
            panels: initial.len(),
            error: f64::INFINITY,
            tolerance: opts.abs_floor,
        });
    }
    adaptive(&h, &initial, rel_tol, tail, opts)
}

fn check_decay<F>(integrand: &Integrand<F>, radius: f64) -> Result<()>
where
    F: Fn(f64) -> Complex64,
{
    let decay = integrand.decay();
    for frac in [1.0, 0.875, 0.75, 0.625, 0.5] {
        for sign in [-1.0, 1.0] {
            let y = sign * radius * frac;
            if let Some(bound) = decay.bound(y) {
                let value = integrand.eval(y).norm();
                if value > bound * (1.0 + 1e-6) + 1e-300 {
                    return Err(Error::DecayViolation { at: y, value, bound });
                }
            }
        }
    }
    Ok(())
}

/// Splits `[lo, hi]` at the interior breakpoints and then into equal pieces no wider than `max_width`.
pub fn segments(lo: f64, hi: f64, breakpoints: &[f64], max_width: f64) -> Vec<(f64, f64)> {
    let mut cuts = vec![lo];
    cuts.extend(breakpoints.iter().copied().filter(|&p| p > lo && p < hi));
    cuts.push(hi);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = if max_width.is_finite() {
            ((b - a) / max_width).ceil().max(1.0) as usize
        } else {
            1
        };
        let step = (b - a) / n as f64;
        for i in 0..n {
            let x0 = a + step * i as f64;
            let x1 = if i + 1 == n { b } else { a + step * (i + 1) as f64 };
            out.push((x0, x1));
        }
    }
    out
}

/// One 21-point Kronrod panel: returns the Kronrod value and `|K21 - G10|`.
fn gk21<H>(h: &H, a: f64, b: f64) -> (Complex64, f64)
where
    H: Fn(f64) -> Complex64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = h(center);
    let mut kron = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for i in 0..10 {
        let dx = half * XGK[i];
        let s = h(center - dx) + h(center + dx);
        kron += s * WGK[i];
        if i % 2 == 1 {
            gauss += s * WG[i / 2];
        }
    }
    (kron * half, ((kron - gauss) * half).norm())
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn adaptive<H>(
    h: &H,
    initial: &[(f64, f64)],
    rel_tol: f64,
    tail: f64,
    opts: &QuadOptions,
) -> Result<QuadratureResult>
where
    H: Fn(f64) -> Complex64,
{
    let mut heap = BinaryHeap::with_capacity(initial.len() * 2);
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for &(a, b) in initial {
        let (value, e) = gk21(h, a, b);
        total += value;
        err += e;
        heap.push(Panel { a, b, value, err: e });
    }
    let tolerance = |total: Complex64| (rel_tol * total.norm()).max(opts.abs_floor);
    let mut refreshes = 0usize;
    while err > tolerance(total) {
        if heap.len() >= opts.max_panels {
            return Err(Error::NonConvergence {
                panels: heap.len(),
                error: err,
                tolerance: tolerance(total),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel collapsed to machine resolution; nothing left to refine.
            return Err(Error::NonConvergence {
                panels: heap.len() + 1,
                error: err,
                tolerance: tolerance(total),
            });
        }
        let (v1, e1) = gk21(h, worst.a, mid);
        let (v2, e2) = gk21(h, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });

        // Incremental updates drift; resum periodically.
        refreshes += 1;
        if refreshes % 4096 == 0 {
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.err).sum();
        }
    }
    let panels_used = heap.len();
    let value: Complex64 = heap.iter().map(|p| p.value).sum();
    let quad_err: f64 = heap.iter().map(|p| p.err).sum();
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Numerical("quadrature produced a non-finite value".into()));
    }
    Ok(QuadratureResult {
        value,
        abs_error_estimate: quad_err + tail,
        panels_used,
    })
}

/// Composite Kronrod nodes and weights over the given segments.
///
/// Used where many integrals share one integrand and differ only in a
/// bounded-frequency factor, so the nodes can be laid down once.
pub fn composite_nodes(segs: &[(f64, f64)]) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::with_capacity(segs.len() * 21);
    let mut ws = Vec::with_capacity(segs.len() * 21);
    for &(a, b) in segs {
        let c = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for i in 0..10 {
            xs.push(c - half * XGK[i]);
            ws.push(half * WGK[i]);
        }
        xs.push(c);
        ws.push(half * WGK[10]);
        for i in (0..10).rev() {
            xs.push(c + half * XGK[i]);
            ws.push(half * WGK[i]);
        }
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn poly(order: f64, constant: f64) -> Decay {
        Decay::Polynomial {
            order,
            constant,
            from: 1.0,
        }
    }

    #[test]
    fn gaussian_integral() {
        let h = real_integrand(
            |y| (-y * y).exp(),
            Decay::Exponential {
                rate: 1.0,
                constant: 1.0,
                from: 1.0,
            },
        );
        let r = integrate_line(&h, 1e-10).unwrap();
        assert!((r.value.re - PI.sqrt()).abs() < 1e-10);
        assert!(r.value.im.abs() < 1e-14);
        assert!(r.abs_error_estimate >= 0.0);
    }

    #[test]
    fn rational_integral() {
        let h = real_integrand(|y| (1.0 + y * y).powi(-2), poly(4.0, 1.0));
        let r = integrate_line(&h, 1e-10).unwrap();
        assert!((r.value.re - PI / 2.0).abs() < 1e-9, "{}", r.value.re);
    }

    #[test]
    fn quartic_rational_against_residues() {
        // ∫ (1+y⁴)⁻² dy = 3π/(4√2) by residues.
        let exact = 3.0 * PI / (4.0 * 2f64.sqrt());
        let h = real_integrand(|y| (1.0 + y.powi(4)).powi(-2), poly(8.0, 1.0));
        let r = integrate_line(&h, 1e-10).unwrap();
        assert!((r.value.re - exact).abs() < 1e-9);
        assert!((exact - 1.666_081).abs() < 1e-6);
    }

    #[test]
    fn gaussian_fourier_transform() {
        let h = real_integrand(
            |y| (-y * y).exp(),
            Decay::Exponential {
                rate: 1.0,
                constant: 1.0,
                from: 1.0,
            },
        );
        let r = integrate_oscillatory(&h, 2.0, 1e-10).unwrap();
        let exact = PI.sqrt() * (-1.0f64).exp();
        assert!((r.value.re - exact).abs() < 1e-10);
        assert!(r.value.im.abs() < 1e-12);
    }

    #[test]
    fn zero_frequency_matches_line() {
        let h = real_integrand(|y| (1.0 + y * y).powi(-2), poly(4.0, 1.0));
        let a = integrate_line(&h, 1e-9).unwrap();
        let b = integrate_oscillatory(&h, 0.0, 1e-9).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn compact_bump_at_high_frequency() {
        // C∞ bump on (-1, 1); brute-force oracle is a fine midpoint sum.
        let bump = |y: f64| {
            if y.abs() < 1.0 {
                (-1.0 / (1.0 - y * y)).exp()
            } else {
                0.0
            }
        };
        let h = real_integrand(bump, Decay::Compact { radius: 1.0 });
        let r = integrate_oscillatory(&h, 50.0, 1e-10).unwrap();
        let n = 400_000;
        let dx = 2.0 / n as f64;
        let oracle: f64 = (0..n)
            .map(|i| {
                let y = -1.0 + (i as f64 + 0.5) * dx;
                bump(y) * (50.0 * y).cos() * dx
            })
            .sum();
        assert!((r.value.re - oracle).abs() < 1e-9, "{} vs {}", r.value.re, oracle);
        let r0 = integrate_line(&h, 1e-10).unwrap();
        assert!(r.value.norm() < 1e-3 * r0.value.norm());
    }

    #[test]
    fn decay_violation_is_reported() {
        // Claims y⁻⁴ decay with constant 1e-6, which (1+y²)⁻¹ does not satisfy.
        let h = real_integrand(|y| 1.0 / (1.0 + y * y), poly(4.0, 1e-6));
        assert!(matches!(
            integrate_line(&h, 1e-8),
            Err(Error::DecayViolation { .. })
        ));
    }

    #[test]
    fn panel_limit_gives_nonconvergence() {
        let h = real_integrand(|y| (1.0 + y * y).powi(-2), poly(4.0, 1.0));
        let opts = QuadOptions {
            max_panels: 4,
            ..QuadOptions::default()
        };
        assert!(matches!(
            integrate_with(&h, 40.0, 1e-10, &opts),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn rejects_bad_tolerance() {
        let h = real_integrand(|y| (-y * y).exp(), Decay::Compact { radius: 10.0 });
        assert!(integrate_line(&h, 0.0).is_err());
        assert!(integrate_line(&h, 1.0).is_err());
    }

    #[test]
    fn composite_nodes_integrate_polynomials() {
        let segs = segments(0.0, 3.0, &[1.0], 0.7);
        let (xs, ws) = composite_nodes(&segs);
        let v: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(5)).sum();
        assert!((v - 3f64.powi(6) / 6.0).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn linearity(alpha in -50.0f64..50.0, shift in -2.0f64..2.0) {
                let tol = 1e-9;
                let base = real_integrand(move |y| (1.0 + (y - shift).powi(2)).powi(-2), Decay::Polynomial { order: 4.0, constant: 16.0, from: 4.0 });
                let scaled = real_integrand(move |y| alpha * (1.0 + (y - shift).powi(2)).powi(-2), Decay::Polynomial { order: 4.0, constant: 16.0 * alpha.abs().max(1e-12), from: 4.0 });
                let a = integrate_line(&base, tol).unwrap().value.re;
                let b = integrate_line(&scaled, tol).unwrap().value.re;
                prop_assert!((b - alpha * a).abs() <= 2.0 * (tol * (alpha * a).abs() + 1e-12));
            }

            #[test]
            fn conjugate_symmetry(omega in 0.1f64..30.0, shift in -1.0f64..1.0) {
                let env = real_integrand(move |y| (1.0 + (y - shift).powi(4)).powi(-1), Decay::Polynomial { order: 4.0, constant: 16.0, from: 2.0 });
                let plus = integrate_oscillatory(&env, omega, 1e-9).unwrap().value;
                let minus = integrate_oscillatory(&env, -omega, 1e-9).unwrap().value;
                prop_assert!((plus - minus.conj()).norm() <= 2e-9 * plus.norm().max(1.0));
            }
        }
    }
}
