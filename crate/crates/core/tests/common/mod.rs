#![allow(dead_code)]

use wavesim::coeffs::{build_cache, CoefficientCache};
use wavesim::planner::{plan_power, plan_product, AccuracySpec, PlanOptions, ProductPlan, TruncationPlan};
use wavesim::spectra::{make_density, DensityFamily, SpectralModel};
use wavesim::wavelets::{build_daubechies, build_meyer, WaveletTransforms};

pub fn unlimited() -> PlanOptions {
    PlanOptions {
        max_terms: u128::MAX,
        ..PlanOptions::default()
    }
}

pub struct Example1 {
    pub spec: AccuracySpec,
    pub model: SpectralModel,
    pub wavelet: WaveletTransforms,
    pub plan: TruncationPlan,
    pub cache: CoefficientCache,
}

/// f = (1+y⁴)⁻², Meyer, p = 2, s = 2, T = 1, ε = 0.5, δ = 0.05.
pub fn example1() -> Example1 {
    let spec = AccuracySpec::for_power(0.5, 0.05, 2.0, 1.0).unwrap();
    let model = make_density(DensityFamily::Rational { n: 2 }).unwrap();
    let wavelet = build_meyer();
    let plan = plan_power(&spec, 2, &model, &wavelet, &unlimited()).unwrap();
    let cache = build_cache(&plan, &model, &wavelet, spec.t, 0.01).unwrap();
    Example1 {
        spec,
        model,
        wavelet,
        plan,
        cache,
    }
}

pub struct Example2 {
    pub spec: AccuracySpec,
    pub models: [SpectralModel; 2],
    pub wavelet: WaveletTransforms,
    pub plans: ProductPlan,
    pub caches: [CoefficientCache; 2],
}

/// f₁ = (1+y²)⁻⁴, f₂ two-bump (m = 2, a = 3), Daubechies order 4 for both;
/// p = 2, T = 1, ε = 0.5, δ = 0.05.
pub fn example2() -> Example2 {
    let spec = AccuracySpec::for_product(0.5, 0.05, 2.0, 1.0).unwrap();
    let m1 = make_density(DensityFamily::Lorentzian { n: 2 }).unwrap();
    let m2 = make_density(DensityFamily::TwoBump { m: 2, a: 3.0 }).unwrap();
    let wavelet = build_daubechies(4, 24).unwrap();
    let plans = plan_product(&spec, &m1, &wavelet, &m2, &wavelet, &unlimited()).unwrap();
    let c1 = build_cache(&plans.plan1, &m1, &wavelet, spec.t, 0.01).unwrap();
    let c2 = build_cache(&plans.plan2, &m2, &wavelet, spec.t, 0.01).unwrap();
    Example2 {
        spec,
        models: [m1, m2],
        wavelet,
        plans,
        caches: [c1, c2],
    }
}
