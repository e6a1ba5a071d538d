//! Truncation parameters (N₀, N, M_j) from an accuracy/reliability target.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gamma, ln_gamma};
use crate::spectra::{check_admissibility, plan_constants, PlanConstants, SpectralModel};
use crate::wavelets::WaveletTransforms;

/// Accuracy ε and reliability 1−δ in L_p([0, T]).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracySpec {
    pub epsilon: f64,
    pub delta: f64,
    pub p: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

impl AccuracySpec {
    /// Target for a power Xˢ; requires p ≥ 2.
    pub fn for_power(epsilon: f64, delta: f64, p: f64, t: f64) -> Result<Self> {
        let s = Self { epsilon, delta, p, t };
        s.check(2.0)?;
        Ok(s)
    }

    /// Target for a product X₁X₂; requires p ≥ 1.
    pub fn for_product(epsilon: f64, delta: f64, p: f64, t: f64) -> Result<Self> {
        let s = Self { epsilon, delta, p, t };
        s.check(1.0)?;
        Ok(s)
    }

    pub fn check(&self, min_p: f64) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.p >= min_p && self.p.is_finite()) {
            return Err(Error::Domain(format!("p must be ≥ {min_p}, got {}", self.p)));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::Domain(format!("T must be > 0, got {}", self.t)));
        }
        Ok(())
    }
}

/// Index bounds of the truncated model: ξ₀ₖ for |k| < N₀ and η_jk for
/// j < N, |k| < M_j.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPlan {
    #[serde(rename = "N0")]
    pub n0: u64,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "M")]
    pub m: Vec<u64>,
    /// δ₁ for powers, δ_s* for a product factor.
    pub variance_budget: f64,
    pub constants: PlanConstants,
}

impl TruncationPlan {
    /// Number of random coefficients, (2N₀−1) + Σ(2M_j−1).
    pub fn total_terms(&self) -> u128 {
        let a = 2 * self.n0 as u128 - 1;
        a + self.m.iter().map(|&m| 2 * m as u128 - 1).sum::<u128>()
    }

    /// The same plan with every count multiplied: N₀ and M_j by `terms`,
    /// the number of levels by `levels`.
    pub fn grown(&self, levels: u32, terms: u64) -> Self {
        let n = self.n * levels;
        let m_last = *self.m.last().unwrap_or(&2);
        let m = (0..n as usize)
            .map(|j| self.m.get(j).copied().unwrap_or(m_last) * terms)
            .collect();
        Self {
            n0: self.n0 * terms,
            n,
            m,
            variance_budget: self.variance_budget,
            constants: self.constants,
        }
    }

    /// True when `other` includes every index of `self`.
    pub fn dominated_by(&self, other: &TruncationPlan) -> bool {
        other.n0 >= self.n0
            && other.n >= self.n
            && self.m.iter().zip(&other.m).all(|(a, b)| b >= a)
    }
}

/// Knobs outside the accuracy bound itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    /// Refuse plans with more coefficients than this.
    pub max_terms: u128,
    /// Budget divisor ≥ 1; 1 gives the minimal plan.
    pub safety_margin: f64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            max_terms: 10_000_000,
            safety_margin: 1.0,
        }
    }
}

/// δ₁ for the power Xˢ.
pub fn delta1_for_power(spec: &AccuracySpec, s: u32, r0: f64) -> Result<f64> {
    spec.check(2.0)?;
    if s < 1 {
        return Err(Error::Domain("power s must be ≥ 1".into()));
    }
    if !(r0 >= 0.0 && r0.is_finite()) {
        return Err(Error::Domain(format!("R(0) must be ≥ 0, got {r0}")));
    }
    let p = spec.p;
    let ln_d = if s == 1 {
        (spec.t * p * 2f64.powf(p / 2.0) * gamma(p / 2.0)?).ln()
    } else {
        if r0 == 0.0 {
            return Ok(f64::INFINITY);
        }
        ln_d_star(p, s, spec.t, r0)?
    };
    Ok((2.0 / p * (spec.delta.ln() - ln_d) + 2.0 * spec.epsilon.ln()).exp())
}

/// ln D* for s ≥ 2, evaluated in logs so large s and p do not overflow.
pub fn ln_d_star(p: f64, s: u32, t: f64, r0: f64) -> Result<f64> {
    let sf = s as f64;
    let q = p * (sf - 1.0);
    let mut terms = vec![(sf - 1.0).ln() + ln_gamma(q)?];
    for k in 1..s.saturating_sub(1) {
        let k = k as f64;
        let rest = sf - 1.0 - k;
        terms.push(0.5 * ((k * rest).ln() + ln_gamma(2.0 * p * k)? + ln_gamma(2.0 * p * rest)?));
    }
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ln_bracket = top + terms.iter().map(|x| (x - top).exp()).sum::<f64>().ln();
    Ok((p * sf + 3.0) / 2.0 * std::f64::consts::LN_2
        + t.ln()
        + p.ln()
        + 0.5 * ln_gamma(p)?
        + (p - 0.5) * sf.ln()
        + q / 2.0 * r0.ln()
        + 0.5 * ln_bracket)
}

/// Smallest integer strictly above `x`.
fn above(x: f64) -> f64 {
    x.floor() + 1.0
}

/// The minimal (N₀, N, M_j) strictly satisfying the three bounds for the
/// given variance budget, each count also kept > 1.
pub fn truncation_from_budget(
    budget: f64,
    constants: PlanConstants,
    t: f64,
    opts: &PlanOptions,
) -> Result<TruncationPlan> {
    if !(budget > 0.0) {
        return Err(Error::Domain(format!("variance budget must be > 0, got {budget}")));
    }
    let PlanConstants { a, b, a1, b1, .. } = constants;
    for v in [a, b, a1, b1] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("plan constants must be finite and ≥ 0, got {v}")));
        }
    }
    let eff = budget / opts.safety_margin.max(1.0);
    let sa1 = (a1 + b1 * t).powi(2);
    let sa = (a + b * t).powi(2);

    let n0 = above(6.0 / eff * sa1 + 1.0).max(2.0);
    let n_bound = f64::max(
        1.0 + (72.0 * sa / (5.0 * eff)).log2(),
        1.0 + (18.0 * b * b / (7.0 * eff)).ln() / 8f64.ln(),
    );
    let n = above(n_bound).max(2.0);
    if n > 60.0 {
        return Err(Error::BudgetTooTight {
            terms: u128::MAX,
            cap: opts.max_terms,
        });
    }
    let m = above(1.0 + 12.0 / eff * sa * (1.0 - 2f64.powf(-n))).max(2.0);

    let terms = (2.0 * n0 - 1.0) + n * (2.0 * m - 1.0);
    if terms > opts.max_terms as f64 {
        return Err(Error::BudgetTooTight {
            terms: if terms < 1e38 { terms as u128 } else { u128::MAX },
            cap: opts.max_terms,
        });
    }
    Ok(TruncationPlan {
        n0: n0 as u64,
        n: n as u32,
        m: vec![m as u64; n as usize],
        variance_budget: budget,
        constants,
    })
}

fn require_admissible(model: &SpectralModel, transforms: &WaveletTransforms) -> Result<()> {
    let report = check_admissibility(model, transforms);
    if report.passed() {
        Ok(())
    } else {
        Err(Error::Inadmissible {
            failed: report.failures().into_iter().map(String::from).collect(),
        })
    }
}

/// Plan for Y = Xˢ.
pub fn plan_power(
    spec: &AccuracySpec,
    s: u32,
    model: &SpectralModel,
    transforms: &WaveletTransforms,
    opts: &PlanOptions,
) -> Result<TruncationPlan> {
    spec.check(2.0)?;
    require_admissible(model, transforms)?;
    let constants = plan_constants(model, transforms)?;
    let delta1 = delta1_for_power(spec, s, constants.r0)?;
    truncation_from_budget(delta1, constants, spec.t, opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductPlan {
    pub plan1: TruncationPlan,
    pub plan2: TruncationPlan,
    pub delta_hat: f64,
    pub delta1_star: f64,
    pub delta2_star: f64,
}

/// δ̂ for the product X₁X₂.
pub fn delta_hat(spec: &AccuracySpec) -> Result<f64> {
    spec.check(1.0)?;
    let p = spec.p;
    let denom = 2f64.powf(2.0 * p + 1.0) * p * gamma(p)? * spec.t;
    Ok(spec.delta.powf(2.0 / p) * spec.epsilon.powi(2) / denom.powf(2.0 / p))
}

/// Plans for both factors of Z = X₁X₂.
pub fn plan_product(
    spec: &AccuracySpec,
    model1: &SpectralModel,
    transforms1: &WaveletTransforms,
    model2: &SpectralModel,
    transforms2: &WaveletTransforms,
    opts: &PlanOptions,
) -> Result<ProductPlan> {
    spec.check(1.0)?;
    require_admissible(model1, transforms1)?;
    require_admissible(model2, transforms2)?;
    let c1 = plan_constants(model1, transforms1)?;
    let c2 = plan_constants(model2, transforms2)?;
    let dh = delta_hat(spec)?;
    let (d1, d2) = (dh / c2.r0, dh / c1.r0);
    Ok(ProductPlan {
        plan1: truncation_from_budget(d1, c1, spec.t, opts)?,
        plan2: truncation_from_budget(d2, c2, spec.t, opts)?,
        delta_hat: dh,
        delta1_star: d1,
        delta2_star: d2,
    })
}
