use crate::error::{Error, Result};

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    check(x)?;
    Ok(statrs::function::gamma::gamma(x))
}

/// ln Γ(x) for x > 0; used where Γ itself would overflow.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check(x)?;
    Ok(statrs::function::gamma::ln_gamma(x))
}

fn check(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("gamma requires a positive finite argument, got {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn known_values() {
        assert!(rel(gamma(1.0).unwrap(), 1.0) <= 1e-10);
        assert!(rel(gamma(0.5).unwrap(), PI.sqrt()) <= 1e-10);
        assert!(rel(gamma(5.0).unwrap(), 24.0) <= 1e-10);
        // 49! to 17 digits
        assert!(rel(gamma(50.0).unwrap(), 6.082_818_640_342_675e62) <= 1e-10);
    }

    #[test]
    fn nonpositive_rejected() {
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.5).is_err());
        assert!(ln_gamma(f64::NAN).is_err());
    }

    proptest::proptest! {
        #[test]
        fn recurrence(x in 0.5f64..25.0) {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            proptest::prop_assert!(rel(lhs, rhs) <= 1e-9);
        }
    }

    #[test]
    fn ln_gamma_consistent() {
        for &x in &[0.5, 1.5, 7.25, 30.0] {
            assert!((ln_gamma(x).unwrap() - gamma(x).unwrap().ln()).abs() < 1e-12);
        }
    }
}
