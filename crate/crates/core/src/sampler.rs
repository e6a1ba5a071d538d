//! Random coefficients and model paths.
//!
//! Draws are standard Gaussians addressed by index: the value of ξ₀ₖ or
//! η_jk depends only on (master seed, replication, process, j, k), so a
//! smaller plan sharing a seed with a larger one sees exactly the larger
//! plan's draws restricted to its own indices.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coeffs::CoefficientCache;
use crate::error::{Error, Result};
use crate::planner::TruncationPlan;

/// Source of the expansion's random coefficients.
pub trait Draws: Sync {
    fn xi(&self, k: i64) -> f64;
    fn eta(&self, j: u32, k: i64) -> f64;

    /// ξ₀ₖ for k in lo..=hi.
    fn xi_range(&self, lo: i64, hi: i64, out: &mut Vec<f64>) {
        out.clear();
        out.extend((lo..=hi).map(|k| self.xi(k)));
    }

    /// η_jk for k in lo..=hi.
    fn eta_range(&self, j: u32, lo: i64, hi: i64, out: &mut Vec<f64>) {
        out.clear();
        out.extend((lo..=hi).map(|k| self.eta(j, k)));
    }
}

const INDEX_OFFSET: i128 = 1 << 62;

/// Counter-based Gaussian draws: ChaCha8 keyed by a hash of
/// (seed, replication, process), stream 0 for ξ and j + 1 for η_j, and
/// four 32-bit words per index.
#[derive(Clone, Debug)]
pub struct CounterDraws {
    key: [u8; 32],
}

impl CounterDraws {
    pub fn new(seed: u64, replication: u64, process: u32) -> Self {
        let mut h = Sha256::new();
        h.update(b"wavesim-draws");
        h.update(seed.to_le_bytes());
        h.update(replication.to_le_bytes());
        h.update(process.to_le_bytes());
        Self { key: h.finalize().into() }
    }

    fn fill(&self, stream: u64, lo: i64, hi: i64, out: &mut Vec<f64>) {
        out.clear();
        if lo > hi {
            return;
        }
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(stream);
        rng.set_word_pos(((lo as i128 + INDEX_OFFSET) as u128) * 4);
        out.extend((lo..=hi).map(|_| box_muller(rng.next_u64(), rng.next_u64())));
    }
}

/// Cosine branch of Box–Muller from two raw 64-bit words.
fn box_muller(a: u64, b: u64) -> f64 {
    let unit = |x: u64| ((x >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    let (u1, u2) = (unit(a), unit(b));
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

impl Draws for CounterDraws {
    fn xi(&self, k: i64) -> f64 {
        let mut v = Vec::with_capacity(1);
        self.fill(0, k, k, &mut v);
        v[0]
    }

    fn eta(&self, j: u32, k: i64) -> f64 {
        let mut v = Vec::with_capacity(1);
        self.fill(j as u64 + 1, k, k, &mut v);
        v[0]
    }

    fn xi_range(&self, lo: i64, hi: i64, out: &mut Vec<f64>) {
        self.fill(0, lo, hi, out);
    }

    fn eta_range(&self, j: u32, lo: i64, hi: i64, out: &mut Vec<f64>) {
        self.fill(j as u64 + 1, lo, hi, out);
    }
}

/// All coefficient draws of one plan, materialized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRealization {
    /// ξ₀ₖ for k = −(N₀−1)..=N₀−1.
    pub xi0: Vec<f64>,
    /// η_jk for k = −(M_j−1)..=M_j−1, one vector per level.
    pub eta: Vec<Vec<f64>>,
    pub seed: u64,
}

/// (2N₀ − 1) + Σ_j (2M_j − 1).
pub fn draw_count(plan: &TruncationPlan) -> u128 {
    (2 * plan.n0 as u128 - 1) + plan.m.iter().map(|&m| 2 * m as u128 - 1).sum::<u128>()
}

/// Draws every coefficient of `plan` from the counter stream of `seed`
/// (replication 0, process 0).
pub fn draw_coefficients(plan: &TruncationPlan, seed: u64) -> ModelRealization {
    let src = CounterDraws::new(seed, 0, 0);
    let mut xi0 = Vec::new();
    let n = plan.n0 as i64 - 1;
    src.xi_range(-n, n, &mut xi0);
    let eta = plan
        .m
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let mut v = Vec::new();
            src.eta_range(j as u32, -(m as i64 - 1), m as i64 - 1, &mut v);
            v
        })
        .collect();
    ModelRealization { xi0, eta, seed }
}

impl ModelRealization {
    /// All-zero coefficients with the counts of `plan`.
    pub fn zeros(plan: &TruncationPlan) -> Self {
        Self {
            xi0: vec![0.0; 2 * plan.n0 as usize - 1],
            eta: plan.m.iter().map(|&m| vec![0.0; 2 * m as usize - 1]).collect(),
            seed: 0,
        }
    }

    pub fn n0(&self) -> u64 {
        (self.xi0.len() as u64 + 1) / 2
    }

    pub fn m(&self) -> Vec<u64> {
        self.eta.iter().map(|v| (v.len() as u64 + 1) / 2).collect()
    }

    pub fn len(&self) -> usize {
        self.xi0.len() + self.eta.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn xi_mut(&mut self, k: i64) -> &mut f64 {
        let n = self.n0() as i64 - 1;
        &mut self.xi0[(k + n) as usize]
    }

    pub fn eta_mut(&mut self, j: u32, k: i64) -> &mut f64 {
        let v = &mut self.eta[j as usize];
        let m = (v.len() as i64 - 1) / 2;
        &mut v[(k + m) as usize]
    }

    /// Index-wise sum; both realizations must have the same counts.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.xi0.len() != other.xi0.len()
            || self.eta.len() != other.eta.len()
            || self.eta.iter().zip(&other.eta).any(|(a, b)| a.len() != b.len())
        {
            return Err(Error::Domain("realizations have different index sets".into()));
        }
        let sum = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
        Ok(Self {
            xi0: sum(&self.xi0, &other.xi0),
            eta: self.eta.iter().zip(&other.eta).map(|(a, b)| sum(a, b)).collect(),
            seed: self.seed,
        })
    }
}

impl Draws for ModelRealization {
    fn xi(&self, k: i64) -> f64 {
        let n = self.n0() as i64 - 1;
        if k.abs() > n {
            0.0
        } else {
            self.xi0[(k + n) as usize]
        }
    }

    fn eta(&self, j: u32, k: i64) -> f64 {
        let Some(v) = self.eta.get(j as usize) else { return 0.0 };
        let m = (v.len() as i64 - 1) / 2;
        if k.abs() > m {
            0.0
        } else {
            v[(k + m) as usize]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathKind {
    Base,
    Power { s: u32 },
    Product,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: PathKind,
}

/// n points evenly spaced over [0, T], endpoints included.
pub fn uniform_grid(t_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Domain(format!("grid needs n ≥ 2 and T > 0, got n = {n}, T = {t_max}")));
    }
    let step = t_max / (n - 1) as f64;
    Ok((0..n).map(|i| if i == n - 1 { t_max } else { i as f64 * step }).collect())
}

/// X̂ at `times` from a materialized realization.
pub fn evaluate_base(
    realization: &ModelRealization,
    cache: &CoefficientCache,
    times: &[f64],
) -> Result<SamplePath> {
    evaluate_counts(realization.n0(), &realization.m(), realization, cache, times)
}

/// X̂ at `times` for the index set of `plan`, reading coefficients from `draws`.
pub fn evaluate_plan(
    plan: &TruncationPlan,
    draws: &impl Draws,
    cache: &CoefficientCache,
    times: &[f64],
) -> Result<SamplePath> {
    evaluate_counts(plan.n0, &plan.m, draws, cache, times)
}

fn evaluate_counts(
    n0: u64,
    m: &[u64],
    draws: &impl Draws,
    cache: &CoefficientCache,
    times: &[f64],
) -> Result<SamplePath> {
    if !cache.covers_counts(n0, m) {
        return Err(Error::CacheMiss {
            profile: "plan".into(),
            arg: m.len() as f64,
            lo: 0.0,
            hi: cache.levels() as f64,
        });
    }
    let slack = 1e-12 * (1.0 + cache.t_max());
    if let Some(&t) = times.iter().find(|&&t| !(t >= -slack && t <= cache.t_max() + slack)) {
        return Err(Error::CacheMiss {
            profile: "time".into(),
            arg: t,
            lo: 0.0,
            hi: cache.t_max(),
        });
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("times must be strictly increasing".into()));
    }

    let mut values = vec![0.0; times.len()];
    let mut row = Vec::new();
    let mut z = Vec::new();

    // One contiguous draw block per family covers every t.
    let span = |ranges: &mut dyn Iterator<Item = Option<(i64, i64)>>, cap: i64| {
        ranges
            .flatten()
            .map(|(lo, hi)| (lo.max(-cap), hi.min(cap)))
            .filter(|(lo, hi)| lo <= hi)
            .fold(None, |acc: Option<(i64, i64)>, (lo, hi)| {
                Some(acc.map_or((lo, hi), |(a, b)| (a.min(lo), b.max(hi))))
            })
    };

    let n = n0 as i64 - 1;
    if let Some((lo, hi)) = span(&mut times.iter().map(|&t| cache.a_k_range(t)), n) {
        draws.xi_range(lo, hi, &mut z);
        for (v, &t) in values.iter_mut().zip(times) {
            if let Some((a, b)) = cache.a_k_range(t) {
                let r = (a.max(-n), b.min(n));
                if r.0 <= r.1 {
                    cache.a_row(t, r, &mut row);
                    *v += dot(&row, &z[(r.0 - lo) as usize..]);
                }
            }
        }
    }
    for (j, &mj) in m.iter().enumerate() {
        let j = j as u32;
        let cap = mj as i64 - 1;
        let Some((lo, hi)) = span(&mut times.iter().map(|&t| cache.b_k_range(t, j)), cap) else {
            continue;
        };
        draws.eta_range(j, lo, hi, &mut z);
        for (v, &t) in values.iter_mut().zip(times) {
            if let Some((a, b)) = cache.b_k_range(t, j) {
                let r = (a.max(-cap), b.min(cap));
                if r.0 <= r.1 {
                    cache.b_row(t, j, r, &mut row);
                    *v += dot(&row, &z[(r.0 - lo) as usize..]);
                }
            }
        }
    }
    Ok(SamplePath {
        times: times.to_vec(),
        values,
        kind: PathKind::Base,
    })
}

/// Σ xᵢyᵢ in index order.
fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Pointwise s-th power.
pub fn power_path(base: &SamplePath, s: u32) -> Result<SamplePath> {
    if s < 1 {
        return Err(Error::Domain("power s must be ≥ 1".into()));
    }
    Ok(SamplePath {
        times: base.times.clone(),
        values: base.values.iter().map(|v| v.powi(s as i32)).collect(),
        kind: PathKind::Power { s },
    })
}

/// Pointwise product on a shared grid.
pub fn product_path(a: &SamplePath, b: &SamplePath) -> Result<SamplePath> {
    if a.times.len() != b.times.len() || a.times.iter().zip(&b.times).any(|(x, y)| x.to_bits() != y.to_bits()) {
        return Err(Error::GridMismatch);
    }
    Ok(SamplePath {
        times: a.times.clone(),
        values: a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect(),
        kind: PathKind::Product,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{build_cache, CoefficientSource};
    use crate::spectra::{make_density, plan_constants, DensityFamily};
    use crate::wavelets::build_meyer;
    use proptest::prelude::*;

    fn counts_plan(n0: u64, m: Vec<u64>) -> TruncationPlan {
        let q = make_density(DensityFamily::Rational { n: 2 }).unwrap();
        TruncationPlan {
            n0,
            n: m.len() as u32,
            m,
            variance_budget: 1.0,
            constants: plan_constants(&q, &build_meyer()).unwrap(),
        }
    }

    fn small_setup() -> (TruncationPlan, CoefficientCache) {
        let q = make_density(DensityFamily::Rational { n: 2 }).unwrap();
        let w = build_meyer();
        let plan = counts_plan(60, vec![60, 60, 80, 120]);
        let cache = build_cache(&plan, &q, &w, 1.0, 0.01).unwrap();
        (plan, cache)
    }

    #[test]
    fn same_seed_same_draws() {
        let plan = counts_plan(5, vec![6, 7]);
        assert_eq!(draw_coefficients(&plan, 11), draw_coefficients(&plan, 11));
        assert_ne!(draw_coefficients(&plan, 11), draw_coefficients(&plan, 12));
    }

    #[test]
    fn draw_count_index_arithmetic() {
        let plan = counts_plan(3, vec![4, 4]);
        assert_eq!(draw_count(&plan), 19);
        assert_eq!(draw_coefficients(&plan, 1).len(), 19);
    }

    #[test]
    fn draws_are_standard() {
        let plan = counts_plan(50_001, vec![2]);
        let r = draw_coefficients(&plan, 5);
        let x = &r.xi0[..100_000];
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        assert!(mean.abs() < 4.0 / (1e5f64).sqrt(), "{mean}");
        assert!((var - 1.0).abs() < 4.0 * (2.0 / 1e5f64).sqrt(), "{var}");
    }

    #[test]
    fn index_addressed_draws_agree_with_ranges() {
        let d = CounterDraws::new(9, 3, 1);
        let mut v = Vec::new();
        d.eta_range(2, -5, 5, &mut v);
        for (i, k) in (-5..=5).enumerate() {
            assert_eq!(v[i].to_bits(), d.eta(2, k).to_bits());
        }
        assert_ne!(d.xi(0), d.eta(0, 0));
        assert_ne!(d.xi(0), CounterDraws::new(9, 4, 1).xi(0));
        assert_ne!(d.xi(0), CounterDraws::new(9, 3, 2).xi(0));
    }

    #[test]
    fn restricted_plan_shares_draws() {
        let big = draw_coefficients(&counts_plan(8, vec![9, 9, 9]), 4);
        let small = draw_coefficients(&counts_plan(3, vec![4, 5]), 4);
        for k in -2..=2 {
            assert_eq!(big.xi(k), small.xi(k));
        }
        for k in -4..=4 {
            assert_eq!(big.eta(1, k), small.eta(1, k));
        }
    }

    #[test]
    fn zero_draws_zero_path() {
        let (plan, cache) = small_setup();
        let times = uniform_grid(1.0, 33).unwrap();
        let p = evaluate_base(&ModelRealization::zeros(&plan), &cache, &times).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_term_reduces_to_a00() {
        let (plan, cache) = small_setup();
        let mut r = ModelRealization::zeros(&plan);
        *r.xi_mut(0) = 1.0;
        let times = uniform_grid(1.0, 17).unwrap();
        let p = evaluate_base(&r, &cache, &times).unwrap();
        for (&t, &v) in times.iter().zip(&p.values) {
            assert!((v - cache.a0k(t, 0).unwrap()).abs() < 1e-14);
        }
        let mut r = ModelRealization::zeros(&plan);
        *r.eta_mut(2, -3) = 1.0;
        let p = evaluate_base(&r, &cache, &times).unwrap();
        for (&t, &v) in times.iter().zip(&p.values) {
            assert!((v - cache.bjk(t, 2, -3).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn uncovered_plan_is_a_miss() {
        let (_, cache) = small_setup();
        let r = draw_coefficients(&counts_plan(61, vec![2]), 1);
        assert!(matches!(evaluate_base(&r, &cache, &[0.5]), Err(Error::CacheMiss { .. })));
        let r = draw_coefficients(&counts_plan(3, vec![2]), 1);
        assert!(matches!(evaluate_base(&r, &cache, &[1.5]), Err(Error::CacheMiss { .. })));
    }

    #[test]
    fn power_examples() {
        let base = SamplePath {
            times: vec![0.0, 0.5],
            values: vec![-2.0, 1.5],
            kind: PathKind::Base,
        };
        assert_eq!(power_path(&base, 1).unwrap().values, base.values);
        assert_eq!(power_path(&base, 2).unwrap().values, vec![4.0, 2.25]);
        assert_eq!(power_path(&base, 3).unwrap().kind, PathKind::Power { s: 3 });
        assert!(power_path(&base, 0).is_err());
    }

    #[test]
    fn product_examples() {
        let a = SamplePath {
            times: vec![0.0, 0.5, 1.0],
            values: vec![-2.0, 1.5, 0.25],
            kind: PathKind::Base,
        };
        let one = SamplePath {
            values: vec![1.0; 3],
            ..a.clone()
        };
        assert_eq!(product_path(&a, &one).unwrap().values, a.values);
        let b = SamplePath {
            values: vec![3.0, -1.0, 7.0],
            ..a.clone()
        };
        assert_eq!(product_path(&a, &b).unwrap().values, product_path(&b, &a).unwrap().values);
        let c = SamplePath {
            times: vec![0.0, 0.4, 1.0],
            ..a.clone()
        };
        assert!(matches!(product_path(&a, &c), Err(Error::GridMismatch)));
    }

    #[test]
    fn grid_is_uniform() {
        let g = uniform_grid(1.0, 512).unwrap();
        assert_eq!(g.len(), 512);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[511], 1.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(uniform_grid(1.0, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn evaluation_is_linear(s1 in 0u64..1000, s2 in 0u64..1000) {
            let (plan, cache) = small_setup();
            let r1 = draw_coefficients(&plan, s1);
            let r2 = draw_coefficients(&plan, s2);
            let times = uniform_grid(1.0, 65).unwrap();
            let p1 = evaluate_base(&r1, &cache, &times).unwrap();
            let p2 = evaluate_base(&r2, &cache, &times).unwrap();
            let p12 = evaluate_base(&r1.add(&r2).unwrap(), &cache, &times).unwrap();
            for i in 0..times.len() {
                prop_assert!((p12.values[i] - p1.values[i] - p2.values[i]).abs() <= 1e-10);
            }
        }

        #[test]
        fn lazy_and_materialized_agree(seed in 0u64..1000) {
            let (plan, cache) = small_setup();
            let times = uniform_grid(1.0, 33).unwrap();
            let a = evaluate_base(&draw_coefficients(&plan, seed), &cache, &times).unwrap();
            let b = evaluate_plan(&plan, &CounterDraws::new(seed, 0, 0), &cache, &times).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
