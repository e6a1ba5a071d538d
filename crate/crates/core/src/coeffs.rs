//! Expansion coefficients a₀ₖ(t), b_jk(t): direct quadrature, a shift-profile
//! cache, and the decay-bound checks.
//!
//! Both families are shifts of one profile per level:
//! a₀ₖ(t) = a₀₀(t − k) and b_jk(t) = B_j(2ʲt − k) with
//! `B_j(v) = 2^{j/2}/√(2π) ∫ g(2ʲx) conj(ψ̂(x)) e^{−ixv} dx`.
//! The cache tabulates each profile on a power-of-two grid with one FFT of
//! the trapezoid sum, keeps the window where the profile exceeds an
//! amplitude floor, and interpolates with 4-point Lagrange weights. Because
//! the grid step is 2^{−e}, every k at a fixed (t, level) shares the same
//! weights.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::{integrate_with, Decay, Integrand, QuadOptions};
use crate::planner::TruncationPlan;
use crate::spectra::{PlanConstants, SpectralModel};
use crate::wavelets::WaveletTransforms;

fn inv_sqrt_2pi() -> f64 {
    1.0 / (2.0 * PI).sqrt()
}

/// Anything that can produce coefficient values.
pub trait CoefficientSource {
    fn a0k(&self, t: f64, k: i64) -> Result<f64>;
    fn bjk(&self, t: f64, j: u32, k: i64) -> Result<f64>;
}

/// Coefficients by adaptive quadrature of the defining integrals.
pub struct DirectCoefficients<'a> {
    model: &'a SpectralModel,
    transforms: &'a WaveletTransforms,
    rel_tol: f64,
    opts: QuadOptions,
}

impl<'a> DirectCoefficients<'a> {
    pub fn new(model: &'a SpectralModel, transforms: &'a WaveletTransforms) -> Self {
        Self {
            model,
            transforms,
            rel_tol: 1e-10,
            opts: QuadOptions {
                abs_floor: 1e-11,
                period_fraction: 1.0,
                ..QuadOptions::default()
            },
        }
    }

    pub fn with_tolerance(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_floor(mut self, abs_floor: f64) -> Self {
        self.opts.abs_floor = abs_floor;
        self
    }

    /// The complex value of the a₀ₖ(t) integral; real up to quadrature error.
    pub fn a0k_raw(&self, t: f64, k: i64) -> Result<Complex64> {
        check_t(t)?;
        let (model, w) = (self.model, self.transforms);
        let decay = match w.phi_support() {
            Some(r) => Decay::Compact { radius: r },
            None => model.g_decay(),
        };
        let mut bp: Vec<f64> = model.breakpoints().to_vec();
        bp.extend(w.phi_breakpoints().iter().flat_map(|&p| [p, -p]));
        let h = Integrand::new(|y| w.phi_hat(y).conj() * model.g(y), decay).with_breakpoints(bp);
        let r = integrate_with(&h, t - k as f64, self.rel_tol, &self.opts)?;
        Ok(r.value * inv_sqrt_2pi())
    }

    /// The complex value of the b_jk(t) integral.
    pub fn bjk_raw(&self, t: f64, j: u32, k: i64) -> Result<Complex64> {
        check_t(t)?;
        let (model, w) = (self.model, self.transforms);
        let scale = 2f64.powi(j as i32);
        let decay = match w.psi_band() {
            Some((_, hi)) => Decay::Compact { radius: hi * scale },
            None => model.g_decay(),
        };
        let mut bp: Vec<f64> = model.breakpoints().to_vec();
        bp.extend(w.psi_breakpoints().iter().flat_map(|&p| [p * scale, -p * scale]));
        let h = Integrand::new(|y| w.psi_hat(y / scale).conj() * model.g(y), decay).with_breakpoints(bp);
        let r = integrate_with(&h, t - k as f64 / scale, self.rel_tol, &self.opts)?;
        Ok(r.value * inv_sqrt_2pi() / scale.sqrt())
    }
}

impl DirectCoefficients<'_> {
    /// a₀ₖ(t) from the definition, with the shift phase e^{iky} of
    /// conj(φ̂₀ₖ) kept inside the integrand instead of folded into the
    /// frequency. Independent of the shift form used elsewhere.
    pub fn a0k_from_definition(&self, t: f64, k: i64) -> Result<f64> {
        check_t(t)?;
        let (model, w) = (self.model, self.transforms);
        let decay = match w.phi_support() {
            Some(r) => Decay::Compact { radius: r },
            None => model.g_decay(),
        };
        let mut bp: Vec<f64> = model.breakpoints().to_vec();
        bp.extend(w.phi_breakpoints().iter().flat_map(|&p| [p, -p]));
        let kf = k as f64;
        let h = Integrand::new(
            |y| (Complex64::new(0.0, -kf * y).exp() * w.phi_hat(y)).conj() * model.g(y),
            decay,
        )
        .with_breakpoints(bp);
        Ok((integrate_with(&h, t, self.rel_tol, &self.opts)?.value * inv_sqrt_2pi()).re)
    }

    /// b_jk(t) from the definition with ψ̂_jk(y) = 2^{−j/2} e^{−iyk/2ʲ} ψ̂(y/2ʲ).
    pub fn bjk_from_definition(&self, t: f64, j: u32, k: i64) -> Result<f64> {
        check_t(t)?;
        let (model, w) = (self.model, self.transforms);
        let scale = 2f64.powi(j as i32);
        let decay = match w.psi_band() {
            Some((_, hi)) => Decay::Compact { radius: hi * scale },
            None => model.g_decay(),
        };
        let mut bp: Vec<f64> = model.breakpoints().to_vec();
        bp.extend(w.psi_breakpoints().iter().flat_map(|&p| [p * scale, -p * scale]));
        let kf = k as f64;
        let h = Integrand::new(
            |y| {
                let psi_jk = Complex64::new(0.0, -kf * y / scale).exp() * w.psi_hat(y / scale) / scale.sqrt();
                psi_jk.conj() * model.g(y)
            },
            decay,
        )
        .with_breakpoints(bp);
        Ok((integrate_with(&h, t, self.rel_tol, &self.opts)?.value * inv_sqrt_2pi()).re)
    }
}

fn check_t(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("t must be finite, got {t}")))
    }
}

impl CoefficientSource for DirectCoefficients<'_> {
    fn a0k(&self, t: f64, k: i64) -> Result<f64> {
        Ok(self.a0k_raw(t, k)?.re)
    }

    fn bjk(&self, t: f64, j: u32, k: i64) -> Result<f64> {
        Ok(self.bjk_raw(t, j, k)?.re)
    }
}

/// One tabulated shift profile, sampled at `v = (first + i)·step`.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    /// Grid index of `values[0]`.
    first: i64,
    /// 1/step, a power of two.
    per_unit: i64,
    values: Vec<f64>,
    /// Arguments the plan can reach; queries outside are cache misses.
    cover: (f64, f64),
    /// Largest |value| the FFT saw outside the stored window.
    outside_max: f64,
    /// Largest relative imaginary residue of the tabulated integral.
    imag_residue: f64,
}

impl Profile {
    fn empty(cover: (f64, f64), outside_max: f64) -> Self {
        Self {
            first: 0,
            per_unit: 1,
            values: Vec::new(),
            cover,
            outside_max,
            imag_residue: 0.0,
        }
    }

    pub fn step(&self) -> f64 {
        1.0 / self.per_unit as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cover(&self) -> (f64, f64) {
        self.cover
    }

    pub fn outside_max(&self) -> f64 {
        self.outside_max
    }

    pub fn imag_residue(&self) -> f64 {
        self.imag_residue
    }

    /// Arguments where interpolation uses stored samples; zero elsewhere.
    pub fn window(&self) -> Option<(f64, f64)> {
        if self.values.len() < 4 {
            return None;
        }
        let s = self.step();
        Some((
            (self.first + 1) as f64 * s,
            (self.first + self.values.len() as i64 - 3) as f64 * s,
        ))
    }

    fn miss(&self, name: &str, arg: f64) -> Error {
        Error::CacheMiss {
            profile: name.to_string(),
            arg,
            lo: self.cover.0,
            hi: self.cover.1,
        }
    }

    fn covers(&self, arg: f64) -> bool {
        let slack = 1e-9 * (1.0 + arg.abs());
        arg >= self.cover.0 - slack && arg <= self.cover.1 + slack
    }

    /// Interpolated value at `arg`.
    pub fn eval(&self, arg: f64) -> f64 {
        let x = arg * self.per_unit as f64;
        let base = x.floor();
        let w = lagrange4(x - base);
        self.at(base as i64, &w)
    }

    #[inline]
    fn at(&self, grid: i64, w: &[f64; 4]) -> f64 {
        let i = grid - self.first;
        if i < 1 || i + 2 >= self.values.len() as i64 {
            return 0.0;
        }
        let i = i as usize;
        let v = &self.values[i - 1..i + 3];
        w[0] * v[0] + w[1] * v[1] + w[2] * v[2] + w[3] * v[3]
    }
}

/// 4-point Lagrange weights on nodes −1, 0, 1, 2 at s ∈ [0, 1).
#[inline]
fn lagrange4(s: f64) -> [f64; 4] {
    let (a, b, c, d) = (s + 1.0, s, s - 1.0, s - 2.0);
    [-b * c * d / 6.0, a * c * d / 2.0, -a * b * d / 2.0, a * b * c / 6.0]
}

/// Knobs of the cache build.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheOptions {
    /// Largest grid step in t-units (the level-j grid is 2ʲ times coarser in v).
    pub grid_step: f64,
    /// Refine below `grid_step` until the predicted interpolation error is ≤ `interp_tol`.
    pub auto_refine: bool,
    pub interp_tol: f64,
    /// Coefficients below this are not stored; `None` picks min(1e−10, half the smallest plan bound).
    pub amp_floor: Option<f64>,
    /// Truncation error allowed for the x-range of each profile integral.
    pub tail_tol: f64,
}

impl Default for CacheOptions {
    fn default() -> Self {
        Self {
            grid_step: 0.01,
            auto_refine: true,
            interp_tol: 1e-9,
            amp_floor: None,
            tail_tol: 1e-11,
        }
    }
}

/// Tabulated a₀₀ and per-level B_j profiles for one plan.
#[derive(Clone, Debug)]
pub struct CoefficientCache {
    a: Profile,
    levels: Vec<Profile>,
    /// Certified sup |b_jk| per level; levels at or below the floor are not tabulated.
    level_sup: Vec<f64>,
    /// Bound on every untabulated |b_jk| of the level.
    level_cap: Vec<f64>,
    amp_floor: f64,
    n0: u64,
    m: Vec<u64>,
    t_max: f64,
}

/// Which profile to tabulate.
#[derive(Clone, Copy, Debug)]
enum Which {
    A,
    Level(u32),
}

/// Smallest value of the three decay bounds over the plan at t = 0.
pub fn min_plan_bound(plan: &TruncationPlan) -> f64 {
    (0..plan.n).map(|j| level_bound(plan, j)).fold(a_bound(plan), f64::min)
}

fn a_bound(plan: &TruncationPlan) -> f64 {
    let c = &plan.constants;
    if c.a1 > 0.0 && plan.n0 > 1 {
        c.a1 / (plan.n0 - 1) as f64
    } else {
        f64::INFINITY
    }
}

/// Smaller of B/2^{3j/2} and A/((M_j − 1)2^{j/2}).
fn level_bound(plan: &TruncationPlan, j: u32) -> f64 {
    let c = &plan.constants;
    let s = 2f64.powi(j as i32);
    let m = plan.m[j as usize];
    let mut b = f64::INFINITY;
    if c.b > 0.0 {
        b = b.min(c.b / s.powf(1.5));
    }
    if c.a > 0.0 && m > 1 {
        b = b.min(c.a / ((m - 1) as f64 * s.sqrt()));
    }
    b
}

/// Builds the cache with default options and the given grid step.
pub fn build_cache(
    plan: &TruncationPlan,
    model: &SpectralModel,
    transforms: &WaveletTransforms,
    t_max: f64,
    grid_step: f64,
) -> Result<CoefficientCache> {
    let opts = CacheOptions {
        grid_step,
        ..CacheOptions::default()
    };
    build_cache_with(plan, model, transforms, t_max, &opts)
}

pub fn build_cache_with(
    plan: &TruncationPlan,
    model: &SpectralModel,
    transforms: &WaveletTransforms,
    t_max: f64,
    opts: &CacheOptions,
) -> Result<CoefficientCache> {
    if !(opts.grid_step > 0.0 && opts.grid_step <= 0.01) {
        return Err(Error::Domain(format!("grid_step must lie in (0, 0.01], got {}", opts.grid_step)));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Domain(format!("T must be > 0, got {t_max}")));
    }
    let level_sup: Vec<f64> = (0..plan.n)
        .into_par_iter()
        .map(|j| level_sup(model, transforms, j))
        .collect::<Result<_>>()?;
    // A level whose certified sup is below both 1e−10 and its own decay
    // bounds is dropped; the floor then only has to respect live levels.
    let cap = opts.amp_floor.unwrap_or(1e-10);
    let dropped: Vec<bool> = (0..plan.n)
        .map(|j| level_sup[j as usize] <= cap.min(level_bound(plan, j)))
        .collect();
    let floor = opts.amp_floor.unwrap_or_else(|| {
        let b = (0..plan.n)
            .filter(|&j| !dropped[j as usize])
            .map(|j| level_bound(plan, j))
            .fold(a_bound(plan), f64::min);
        if b.is_finite() && b > 0.0 {
            (0.5 * b).min(1e-10)
        } else {
            1e-10
        }
    });
    if !(floor > 0.0) {
        return Err(Error::Domain(format!("amplitude floor must be > 0, got {floor}")));
    }

    let a_cover = (-((plan.n0 - 1) as f64), t_max + (plan.n0 - 1) as f64);
    let a = tabulate(model, transforms, Which::A, a_cover, floor, opts)?;

    let levels = (0..plan.n)
        .into_par_iter()
        .map(|j| {
            let s = 2f64.powi(j as i32);
            let m = (plan.m[j as usize] - 1) as f64;
            let cover = (-m, s * t_max + m);
            if dropped[j as usize] {
                Ok(Profile::empty(cover, level_sup[j as usize]))
            } else {
                tabulate(model, transforms, Which::Level(j), cover, floor, opts)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let level_cap = (0..plan.n as usize)
        .map(|j| if dropped[j] { level_sup[j] } else { floor })
        .collect();
    Ok(CoefficientCache {
        a,
        levels,
        level_sup,
        level_cap,
        amp_floor: floor,
        n0: plan.n0,
        m: plan.m.clone(),
        t_max,
    })
}

/// sup_{t,k} |b_jk(t)| ≤ 2^{−j/2}/√(2π) ∫ g(y)|ψ̂(y/2ʲ)| dy.
fn level_sup(model: &SpectralModel, w: &WaveletTransforms, j: u32) -> Result<f64> {
    let scale = 2f64.powi(j as i32);
    let decay = match w.psi_band() {
        Some((_, hi)) => Decay::Compact { radius: hi * scale },
        None => model.g_decay(),
    };
    let mut bp: Vec<f64> = model.breakpoints().to_vec();
    bp.extend(w.psi_breakpoints().iter().flat_map(|&p| [p * scale, -p * scale]));
    let h = Integrand::new(|y| Complex64::new(model.g(y) * w.psi_hat(y / scale).norm(), 0.0), decay)
        .with_breakpoints(bp);
    let opts = QuadOptions {
        abs_floor: 1e-16,
        ..QuadOptions::default()
    };
    let r = integrate_with(&h, 0.0, 1e-6, &opts)?;
    // Pad by the error estimate so the bound stays a bound.
    Ok((r.value.re + r.abs_error_estimate) * inv_sqrt_2pi() / scale.sqrt())
}

/// Radius beyond which the profile integrand carries at most `tol` of mass
/// (in profile units).
fn x_tail(model: &SpectralModel, w: &WaveletTransforms, which: Which, tol: f64) -> f64 {
    match which {
        Which::A => {
            let r = model.g_decay().radius_for(tol / inv_sqrt_2pi());
            w.phi_support().map_or(r, |s| s.min(r))
        }
        Which::Level(j) => {
            let s = 2f64.powi(j as i32);
            // ∫_{|x|>X} g(2ʲx) dx = 2^{−j}·tail(2ʲX); prefactor 2^{j/2}/√(2π).
            let y = model.g_decay().radius_for(tol * s.sqrt() / inv_sqrt_2pi());
            let r = y / s;
            w.psi_band().map_or(r, |(_, hi)| hi.min(r))
        }
    }
}

const MIN_PERIOD_LOG2: u32 = 6;
const MAX_PERIOD_LOG2: u32 = 24;
const MAX_FFT_LOG2: u32 = 24;

fn tabulate(
    model: &SpectralModel,
    w: &WaveletTransforms,
    which: Which,
    cover: (f64, f64),
    floor: f64,
    opts: &CacheOptions,
) -> Result<Profile> {
    let (scale, pre) = match which {
        Which::A => (1.0, inv_sqrt_2pi()),
        Which::Level(j) => {
            let s = 2f64.powi(j as i32);
            (s, s.sqrt() * inv_sqrt_2pi())
        }
    };
    let h_of = |x: f64| -> Complex64 {
        match which {
            Which::A => w.phi_hat(x).conj() * model.g(x),
            Which::Level(_) => w.psi_hat(x).conj() * model.g(scale * x),
        }
    };
    let xmax = x_tail(model, w, which, opts.tail_tol).max(1e-3);
    let coarse = (opts.grid_step * scale).log2().floor().min(0.0);
    let mut e_min = (-coarse) as u32;

    let mut p_log2 = MIN_PERIOD_LOG2;
    loop {
        let period = 2f64.powi(p_log2 as i32);
        let dx = 2.0 * PI / period;
        let half = (xmax / dx).ceil() as usize;
        // Samples for x ≥ 0; the integrand is conjugate-symmetric.
        let samples: Vec<Complex64> = (0..=half).map(|m| h_of(m as f64 * dx)).collect();

        // Grid exponent: Nyquist for the truncated band, then the accuracy target.
        while period * 2f64.powi(e_min as i32) < (2 * half + 1) as f64 {
            e_min += 1;
        }
        let mut e = e_min;
        if opts.auto_refine {
            while interp_error(&samples, dx, pre, 2f64.powi(-(e as i32))) > opts.interp_tol
                && p_log2 + e < MAX_FFT_LOG2
            {
                e += 1;
            }
        }
        let n_log2 = p_log2 + e;
        if n_log2 > MAX_FFT_LOG2 {
            return Err(Error::Numerical(format!(
                "profile {which:?} needs an FFT of 2^{n_log2} points"
            )));
        }
        let n = 1usize << n_log2;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[0] = samples[0];
        for (m, s) in samples.iter().enumerate().skip(1) {
            buf[m] = *s;
            buf[n - m] = s.conj();
        }
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let c = pre * dx;
        let per_unit = 1i64 << e;
        // Index n ↔ grid index n (n < N/2) or n − N.
        let val = |g: i64| -> Complex64 {
            let idx = if g >= 0 { g as usize } else { (g + n as i64) as usize };
            buf[idx] * c
        };
        let half_n = (n / 2) as i64;
        let quarter = half_n / 2;
        let edge = (-half_n..-quarter)
            .chain(quarter..half_n)
            .map(|g| val(g).re.abs())
            .fold(0.0, f64::max);
        if edge > 0.1 * floor && p_log2 < MAX_PERIOD_LOG2 {
            p_log2 += 1;
            continue;
        }
        if edge > 0.1 * floor {
            return Err(Error::Numerical(format!("profile {which:?} does not decay below the floor")));
        }

        let above: Vec<i64> = (-half_n..half_n).filter(|&g| val(g).re.abs() > floor).collect();
        let lo_cover = (cover.0 * per_unit as f64).floor() as i64 - 3;
        let hi_cover = (cover.1 * per_unit as f64).ceil() as i64 + 3;
        let (Some(&first_above), Some(&last_above)) = (above.first(), above.last()) else {
            let outside = (-half_n..half_n).map(|g| val(g).re.abs()).fold(0.0, f64::max);
            return Ok(Profile::empty(cover, outside));
        };
        let lo = (first_above - 3).max(lo_cover).max(-half_n);
        let hi = (last_above + 3).min(hi_cover).min(half_n - 1);
        let outside = (-half_n..half_n)
            .filter(|&g| g < lo + 1 || g > hi - 2)
            .map(|g| val(g).re.abs())
            .fold(0.0, f64::max);
        if lo > hi {
            return Ok(Profile::empty(cover, outside));
        }
        let mut imag: f64 = 0.0;
        let values = (lo..=hi)
            .map(|g| {
                let v = val(g);
                imag = imag.max(v.im.abs() / (1.0 + v.re.abs()));
                v.re
            })
            .collect();
        return Ok(Profile {
            first: lo,
            per_unit,
            values,
            cover,
            outside_max: outside,
            imag_residue: imag,
        });
    }
}

/// Predicted 4-point Lagrange error for a profile with samples `h(m·dx)`,
/// m ≥ 0, at grid step `step`: each frequency x contributes
/// |h(x)|·min((9/16)(step·x)⁴/24, 2).
fn interp_error(samples: &[Complex64], dx: f64, pre: f64, step: f64) -> f64 {
    let sum: f64 = samples
        .iter()
        .enumerate()
        .map(|(m, s)| {
            let x = m as f64 * dx * step;
            let weight = if m == 0 { 1.0 } else { 2.0 };
            weight * s.norm() * (9.0 / 16.0 / 24.0 * x.powi(4)).min(2.0)
        })
        .sum();
    pre * dx * sum
}

impl CoefficientCache {
    pub fn amp_floor(&self) -> f64 {
        self.amp_floor
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn a_profile(&self) -> &Profile {
        &self.a
    }

    pub fn level_profile(&self, j: u32) -> Option<&Profile> {
        self.levels.get(j as usize)
    }

    pub fn level_sup(&self, j: u32) -> Option<f64> {
        self.level_sup.get(j as usize).copied()
    }

    /// Number of tabulated samples over all profiles.
    pub fn stored_samples(&self) -> usize {
        self.a.len() + self.levels.iter().map(Profile::len).sum::<usize>()
    }

    /// Largest relative imaginary residue seen while tabulating.
    pub fn imag_residue(&self) -> f64 {
        self.levels.iter().map(|p| p.imag_residue).fold(self.a.imag_residue, f64::max)
    }

    /// Range of k with a nonzero a₀ₖ(t), clipped to |k| < N₀.
    pub fn a_k_range(&self, t: f64) -> Option<(i64, i64)> {
        let (lo, hi) = self.a.window()?;
        let n = self.n0 as i64 - 1;
        let kmin = ((t - hi).ceil() as i64).max(-n);
        let kmax = ((t - lo).floor() as i64).min(n);
        (kmin <= kmax).then_some((kmin, kmax))
    }

    /// Range of k with a nonzero b_jk(t), clipped to |k| < M_j.
    pub fn b_k_range(&self, t: f64, j: u32) -> Option<(i64, i64)> {
        let p = self.levels.get(j as usize)?;
        let (lo, hi) = p.window()?;
        let v = 2f64.powi(j as i32) * t;
        let n = self.m[j as usize] as i64 - 1;
        let kmin = ((v - hi).ceil() as i64).max(-n);
        let kmax = ((v - lo).floor() as i64).min(n);
        (kmin <= kmax).then_some((kmin, kmax))
    }

    /// a₀ₖ(t) for k in `range`, written into `out` (k ascending).
    pub fn a_row(&self, t: f64, range: (i64, i64), out: &mut Vec<f64>) {
        row(&self.a, t, range, out);
    }

    /// b_jk(t) for k in `range`.
    pub fn b_row(&self, t: f64, j: u32, range: (i64, i64), out: &mut Vec<f64>) {
        row(&self.levels[j as usize], 2f64.powi(j as i32) * t, range, out);
    }

    /// Σ a₀ₖ(t)² + Σ b_jk(t)² over the plan's indices (up to `levels` levels
    /// and the count limits in `plan`).
    pub fn energy(&self, plan: &TruncationPlan, t: f64) -> Result<f64> {
        self.cross_energy(plan, t, t)
    }

    /// Σ a₀ₖ(t)a₀ₖ(u) + Σ b_jk(t)b_jk(u) over the plan's indices: the model
    /// covariance between times t and u.
    pub fn cross_energy(&self, plan: &TruncationPlan, t: f64, u: f64) -> Result<f64> {
        let slack = 1e-12 * (1.0 + self.t_max);
        for x in [t, u] {
            if !(x >= -slack && x <= self.t_max + slack) {
                return Err(Error::CacheMiss {
                    profile: "time".into(),
                    arg: x,
                    lo: 0.0,
                    hi: self.t_max,
                });
            }
        }
        if !self.covers_plan(plan) {
            return Err(Error::CacheMiss {
                profile: "plan".into(),
                arg: plan.n as f64,
                lo: 0.0,
                hi: self.levels.len() as f64,
            });
        }
        let meet = |x: Option<(i64, i64)>, y: Option<(i64, i64)>, n: i64| {
            let ((a, b), (c, d)) = (x?, y?);
            let r = (a.max(c).max(-n), b.min(d).min(n));
            (r.0 <= r.1).then_some(r)
        };
        let mut sum = 0.0;
        let (mut x, mut y) = (Vec::new(), Vec::new());
        if let Some(r) = meet(self.a_k_range(t), self.a_k_range(u), plan.n0 as i64 - 1) {
            self.a_row(t, r, &mut x);
            self.a_row(u, r, &mut y);
            sum += x.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>();
        }
        for j in 0..plan.n {
            let n = plan.m[j as usize] as i64 - 1;
            if let Some(r) = meet(self.b_k_range(t, j), self.b_k_range(u, j), n) {
                self.b_row(t, j, r, &mut x);
                self.b_row(u, j, r, &mut y);
                sum += x.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>();
            }
        }
        Ok(sum)
    }

    /// True when every index of `plan` lies within the cache's plan.
    pub fn covers_plan(&self, plan: &TruncationPlan) -> bool {
        self.covers_counts(plan.n0, &plan.m)
    }

    /// Same check from raw counts N₀ and M_j.
    pub fn covers_counts(&self, n0: u64, m: &[u64]) -> bool {
        n0 <= self.n0 && m.len() <= self.levels.len() && m.iter().zip(&self.m).all(|(a, b)| a <= b)
    }

    /// Largest interpolation error against `direct` over `count` random
    /// probes: mostly inside the stored windows, some just past their edges.
    pub fn probe_error(&self, direct: &DirectCoefficients<'_>, count: usize, seed: u64) -> Result<f64> {
        let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let live: Vec<u32> = (0..self.levels.len() as u32)
            .filter(|&j| self.levels[j as usize].window().is_some())
            .collect();
        let mut worst: f64 = 0.0;
        for i in 0..count {
            let t = next() * self.t_max;
            let pick = (next() * (live.len() + 1) as f64) as usize;
            let in_window = i % 5 != 4;
            if pick == live.len() || live.is_empty() {
                let k = probe_index(t, self.a.window(), in_window, &mut next);
                let k = k.clamp(-(self.n0 as i64 - 1), self.n0 as i64 - 1);
                worst = worst.max((self.a0k(t, k)? - direct.a0k(t, k)?).abs());
            } else {
                let j = live[pick];
                let p = &self.levels[j as usize];
                let v = 2f64.powi(j as i32) * t;
                let m = self.m[j as usize] as i64 - 1;
                let k = probe_index(v, p.window(), in_window, &mut next);
                let k = k.clamp(-m, m);
                worst = worst.max((self.bjk(t, j, k)? - direct.bjk(t, j, k)?).abs());
            }
        }
        Ok(worst)
    }

    /// Content key for on-disk caching.
    pub fn key(
        model: &SpectralModel,
        transforms: &WaveletTransforms,
        plan: &TruncationPlan,
        t_max: f64,
        opts: &CacheOptions,
    ) -> [u8; 32] {
        let doc = serde_json::json!({
            "density": model.spec().map(|s| serde_json::to_value(s).ok()).unwrap_or(None),
            "density_name": model.name(),
            "wavelet": transforms.spec(),
            "N0": plan.n0,
            "M": plan.m,
            "T": t_max,
            "options": opts,
        });
        Sha256::digest(doc.to_string().as_bytes()).into()
    }

    /// Writes the cache as little-endian binary, tagged with `key`.
    pub fn save(&self, path: &Path, key: &[u8; 32]) -> Result<()> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(key);
        for x in [self.amp_floor, self.t_max] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out.extend_from_slice(&self.n0.to_le_bytes());
        out.extend_from_slice(&(self.levels.len() as u64).to_le_bytes());
        for ((&m, &s), &c) in self.m.iter().zip(&self.level_sup).zip(&self.level_cap) {
            out.extend_from_slice(&m.to_le_bytes());
            out.extend_from_slice(&s.to_le_bytes());
            out.extend_from_slice(&c.to_le_bytes());
        }
        for p in std::iter::once(&self.a).chain(&self.levels) {
            out.extend_from_slice(&p.first.to_le_bytes());
            out.extend_from_slice(&p.per_unit.to_le_bytes());
            for x in [p.cover.0, p.cover.1, p.outside_max, p.imag_residue] {
                out.extend_from_slice(&x.to_le_bytes());
            }
            out.extend_from_slice(&(p.values.len() as u64).to_le_bytes());
            for v in &p.values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        std::fs::File::create(path)?.write_all(&out)?;
        Ok(())
    }

    /// Reads a cache written by [`save`](Self::save); `Ok(None)` when the
    /// file belongs to a different key.
    pub fn load(path: &Path, key: &[u8; 32]) -> Result<Option<Self>> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut r = Reader { bytes: &bytes, pos: 0 };
        if r.take(MAGIC.len())? != MAGIC {
            return Err(Error::Numerical("not a coefficient cache file".into()));
        }
        if r.take(32)? != key {
            return Ok(None);
        }
        let amp_floor = r.f64()?;
        let t_max = r.f64()?;
        let n0 = r.u64()?;
        let n = r.u64()? as usize;
        let mut m = Vec::with_capacity(n);
        let mut level_sup = Vec::with_capacity(n);
        let mut level_cap = Vec::with_capacity(n);
        for _ in 0..n {
            m.push(r.u64()?);
            level_sup.push(r.f64()?);
            level_cap.push(r.f64()?);
        }
        let mut profiles = Vec::with_capacity(n + 1);
        for _ in 0..=n {
            let first = r.u64()? as i64;
            let per_unit = r.u64()? as i64;
            let cover = (r.f64()?, r.f64()?);
            let outside_max = r.f64()?;
            let imag_residue = r.f64()?;
            let len = r.u64()? as usize;
            let values = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            profiles.push(Profile {
                first,
                per_unit,
                values,
                cover,
                outside_max,
                imag_residue,
            });
        }
        let a = profiles.remove(0);
        Ok(Some(Self {
            a,
            levels: profiles,
            level_sup,
            level_cap,
            amp_floor,
            n0,
            m,
            t_max,
        }))
    }
}

const MAGIC: &[u8] = b"WSIMCACHE2";

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Numerical("truncated cache file".into()));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn row(p: &Profile, v: f64, range: (i64, i64), out: &mut Vec<f64>) {
    out.clear();
    let x = v * p.per_unit as f64;
    let base = x.floor();
    let w = lagrange4(x - base);
    let base = base as i64;
    out.extend((range.0..=range.1).map(|k| p.at(base - k * p.per_unit, &w)));
}

impl CoefficientSource for CoefficientCache {
    fn a0k(&self, t: f64, k: i64) -> Result<f64> {
        let u = t - k as f64;
        if !self.a.covers(u) {
            return Err(self.a.miss("a00", u));
        }
        Ok(self.a.eval(u))
    }

    fn bjk(&self, t: f64, j: u32, k: i64) -> Result<f64> {
        let p = self.levels.get(j as usize).ok_or_else(|| Error::CacheMiss {
            profile: format!("b{j}0"),
            arg: t,
            lo: 0.0,
            hi: 0.0,
        })?;
        let v = 2f64.powi(j as i32) * t - k as f64;
        if !p.covers(v) {
            return Err(p.miss(&format!("b{j}0"), v));
        }
        Ok(p.eval(v))
    }
}

/// Worst observed ratio |coefficient| / bound for each of the three bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub worst_a: f64,
    pub worst_b0: f64,
    pub worst_bk: f64,
    /// amp_floor divided by the smallest bound among untabulated indices.
    pub worst_untabulated: f64,
    pub checked: u64,
    pub certified_by_floor: u128,
    pub t_samples: usize,
}

impl DecayReport {
    pub fn worst(&self) -> f64 {
        self.worst_a.max(self.worst_b0).max(self.worst_bk).max(self.worst_untabulated)
    }
}

/// Checks |a₀ₖ(t)| ≤ (A₁+B₁|t|)/|k|, |b_j0(t)| ≤ B/2^{3j/2} and
/// |b_jk(t)| ≤ (A+B|t|)/(|k|2^{j/2}) over every index of `plan` at every
/// sampled t. Tabulated coefficients are compared directly; all others are
/// at most the amplitude floor, which must not exceed their bound.
pub fn verify_decay(
    cache: &CoefficientCache,
    plan: &TruncationPlan,
    constants: &PlanConstants,
    t_samples: &[f64],
) -> Result<DecayReport> {
    let PlanConstants { a, b, a1, b1, .. } = *constants;
    let mut rep = DecayReport {
        worst_a: 0.0,
        worst_b0: 0.0,
        worst_bk: 0.0,
        worst_untabulated: 0.0,
        checked: 0,
        certified_by_floor: 0,
        t_samples: t_samples.len(),
    };
    let ratio = |value: f64, bound: f64| {
        if value == 0.0 {
            0.0
        } else if bound > 0.0 {
            value.abs() / bound
        } else {
            f64::INFINITY
        }
    };
    let floor = cache.amp_floor;
    let mut buf = Vec::new();
    let total = plan.total_terms();
    for &t in t_samples {
        let mut stored: u128 = 0;
        let n0 = plan.n0 as i64 - 1;
        let ta = a1 + b1 * t.abs();
        if let Some((lo, hi)) = cache.a_k_range(t) {
            let r = (lo.max(-n0), hi.min(n0));
            if r.0 <= r.1 {
                cache.a_row(t, r, &mut buf);
                for (k, &c) in (r.0..=r.1).zip(&buf) {
                    stored += 1;
                    if k == 0 {
                        continue;
                    }
                    let q = ratio(c, ta / k.unsigned_abs() as f64);
                    if q > 1.0 {
                        return Err(Error::BoundViolation {
                            kind: "a0k",
                            j: None,
                            k,
                            t,
                            value: c.abs(),
                            bound: ta / k.unsigned_abs() as f64,
                        });
                    }
                    rep.worst_a = rep.worst_a.max(q);
                }
            }
        }
        // Untabulated a₀ₖ: the smallest bound is at |k| = N₀ − 1.
        if n0 >= 1 {
            rep.worst_untabulated = rep.worst_untabulated.max(ratio(floor, ta / n0 as f64));
        }
        for j in 0..plan.n {
            let s = 2f64.powi(j as i32);
            let tb = (a + b * t.abs()) / s.sqrt();
            let b0 = b / s.powf(1.5);
            let m = plan.m[j as usize] as i64 - 1;
            let mut has_zero = false;
            if let Some((lo, hi)) = cache.b_k_range(t, j) {
                let r = (lo.max(-m), hi.min(m));
                if r.0 <= r.1 {
                    cache.b_row(t, j, r, &mut buf);
                    for (k, &c) in (r.0..=r.1).zip(&buf) {
                        stored += 1;
                        let (q, bound, kind) = if k == 0 {
                            has_zero = true;
                            (ratio(c, b0), b0, "bj0")
                        } else {
                            let bd = tb / k.unsigned_abs() as f64;
                            (ratio(c, bd), bd, "bjk")
                        };
                        if q > 1.0 {
                            return Err(Error::BoundViolation {
                                kind,
                                j: Some(j),
                                k,
                                t,
                                value: c.abs(),
                                bound,
                            });
                        }
                        if k == 0 {
                            rep.worst_b0 = rep.worst_b0.max(q);
                        } else {
                            rep.worst_bk = rep.worst_bk.max(q);
                        }
                    }
                }
            }
            let level_cap = cache.level_cap[j as usize];
            if m >= 1 {
                rep.worst_untabulated = rep.worst_untabulated.max(ratio(level_cap, tb / m as f64));
            }
            if !has_zero {
                rep.worst_untabulated = rep.worst_untabulated.max(ratio(level_cap, b0));
            }
        }
        rep.checked += stored as u64;
        rep.certified_by_floor += total - stored;
    }
    if rep.worst_untabulated > 1.0 {
        return Err(Error::BoundViolation {
            kind: "untabulated",
            j: None,
            k: 0,
            t: f64::NAN,
            value: floor,
            bound: floor / rep.worst_untabulated,
        });
    }
    Ok(rep)
}

/// Probe index whose argument lands inside the window, or up to 8 units
/// beyond one of its edges.
fn probe_index(v: f64, window: Option<(f64, f64)>, inside: bool, next: &mut impl FnMut() -> f64) -> i64 {
    let (lo, hi) = window.unwrap_or((0.0, 0.0));
    let arg = if inside {
        lo + next() * (hi - lo)
    } else if next() < 0.5 {
        lo - next() * 8.0
    } else {
        hi + next() * 8.0
    };
    (v - arg).round() as i64
}
