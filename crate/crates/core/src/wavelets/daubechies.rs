//! Daubechies low-pass filters by spectral factorization.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Filter taps `c_k` of `m₀(ξ) = Σ_k c_k e^{-ikξ}`, normalized so `m₀(0) = 1`.
///
/// The usual orthonormal taps are `h_k = √2·c_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowPass {
    pub taps: Vec<f64>,
    /// First moment `Σ k c_k`; φ̂(x) ≈ e^{-i·centroid·x} for small x.
    pub centroid: f64,
}

impl LowPass {
    #[inline]
    pub fn m0(&self, xi: f64) -> Complex64 {
        let z = Complex64::cis(-xi);
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.taps.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Minimum-phase Daubechies filter with `order` vanishing moments.
pub fn design(order: u32) -> Result<LowPass> {
    if order < 1 {
        return Err(Error::Domain(format!("Daubechies order must be ≥ 1, got {order}")));
    }
    let n = order as usize;
    // Σ_{k<N} C(N-1+k, k) yᵏ, whose roots in y = sin²(ξ/2) give the zeros of |L|².
    let p: Vec<f64> = (0..n)
        .map(|k| binomial((n - 1 + k) as u64, k as u64))
        .collect();
    let roots = poly_roots(&p)?;

    // L(z) = Π (z - z_r)/(1 - z_r) over the zeros outside the unit circle,
    // which gives the usual tap ordering (largest taps first).
    let mut l = vec![Complex64::new(1.0, 0.0)];
    for y in roots {
        let b = Complex64::new(2.0, 0.0) - y * 4.0;
        let disc = (b * b - 4.0).sqrt();
        let z1 = (b + disc) * 0.5;
        let z2 = (b - disc) * 0.5;
        let zr = if z1.norm() > z2.norm() { z1 } else { z2 };
        let scale = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - zr);
        l = poly_mul(&l, &[-zr * scale, scale]);
    }
    // ((1 + z)/2)^N
    let half = Complex64::new(0.5, 0.0);
    for _ in 0..n {
        l = poly_mul(&l, &[half, half]);
    }
    let taps: Vec<f64> = l.iter().map(|c| c.re).collect();
    let imag = l.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if imag > 1e-9 {
        return Err(Error::Numerical(format!(
            "Daubechies {order} filter has imaginary residue {imag:e}"
        )));
    }
    let check = orthonormality_defect(&taps);
    if check > 1e-9 {
        return Err(Error::Numerical(format!(
            "Daubechies {order} filter fails orthonormality by {check:e}"
        )));
    }
    let centroid = taps.iter().enumerate().map(|(k, c)| k as f64 * c).sum();
    Ok(LowPass { taps, centroid })
}

/// max_m |Σ_k c_k c_{k+2m} − δ_{m0}/2|, plus |Σ c_k − 1|.
pub fn orthonormality_defect(taps: &[f64]) -> f64 {
    let mut worst = (taps.iter().sum::<f64>() - 1.0).abs();
    for shift in (0..taps.len()).step_by(2) {
        let s: f64 = taps.iter().zip(&taps[shift..]).map(|(a, b)| a * b).sum();
        let target = if shift == 0 { 0.5 } else { 0.0 };
        worst = worst.max((s - target).abs());
    }
    worst
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Roots of `Σ p_k yᵏ` (ascending coefficients) from the companion matrix,
/// polished by Newton steps.
fn poly_roots(p: &[f64]) -> Result<Vec<Complex64>> {
    let deg = p.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = p[deg];
    let mut m = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -p[i] / lead;
    }
    let eig = m.complex_eigenvalues();
    let mut roots: Vec<Complex64> = eig.iter().copied().collect();
    for r in roots.iter_mut() {
        for _ in 0..8 {
            let (mut v, mut d) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for &c in p.iter().rev() {
                d = d * *r + v;
                v = v * *r + c;
            }
            if d.norm() == 0.0 {
                break;
            }
            let step = v / d;
            *r -= step;
            if step.norm() <= 1e-15 * r.norm().max(1.0) {
                break;
            }
        }
        if !(r.re.is_finite() && r.im.is_finite()) {
            return Err(Error::Numerical("root polishing diverged".into()));
        }
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn haar_taps() {
        let f = design(1).unwrap();
        assert_eq!(f.taps.len(), 2);
        assert!((f.taps[0] - 0.5).abs() < 1e-15 && (f.taps[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn db2_matches_closed_form() {
        // h = (1+√3, 3+√3, 3−√3, 1−√3)/(4√2), so c = h/√2.
        let s3 = 3f64.sqrt();
        let expect = [1.0 + s3, 3.0 + s3, 3.0 - s3, 1.0 - s3].map(|v| v / 8.0);
        let f = design(2).unwrap();
        for (a, b) in f.taps.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn quadrature_mirror_condition() {
        for order in [1, 2, 3, 4, 6, 10] {
            let f = design(order).unwrap();
            assert_eq!(f.taps.len(), 2 * order as usize);
            for i in 0..37 {
                let xi = -PI + i as f64 * 0.17;
                let s = f.m0(xi).norm_sqr() + f.m0(xi + PI).norm_sqr();
                assert!((s - 1.0).abs() < 1e-10, "order {order}: {s}");
            }
            assert!((f.m0(0.0) - 1.0).norm() < 1e-13);
            assert!(f.m0(PI).norm() < 1e-10);
        }
    }

    #[test]
    fn order_zero_rejected() {
        assert!(matches!(design(0), Err(Error::Domain(_))));
    }
}
