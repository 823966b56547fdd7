//! Unit-circle stability predicates.
//!
//! [`is_stable`] is the predicate of record: a Jury-type coefficient-table
//! reduction, pure arithmetic on the coefficients, no root extraction.
//! [`polynomial_roots`] (companion-matrix eigenvalues) exists as the
//! independent cross-check and for root-modulus margins; the two routes are
//! kept separate on purpose.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::poly::Polynomial;
use crate::error::{Error, Result};

/// Roots whose modulus is within this distance of 1 are treated as boundary
/// roots and count as unstable.
pub const UNIT_CIRCLE_TOL: f64 = 1e-9;

/// True iff every root of `p` lies strictly inside the unit circle.
///
/// Decided by the Jury reduction: at each stage the reflection coefficient
/// k = (constant term)/(leading term) must satisfy |k| < 1, and the degree
/// is lowered by one via p(z) <- (p(z) - k·p*(z))/z with p* the reversed
/// polynomial. Boundary cases within [`UNIT_CIRCLE_TOL`] are unstable.
pub fn is_stable(p: &Polynomial) -> Result<bool> {
    if p.degree() < 1 || p.is_zero() {
        return Err(Error::DegeneratePolynomial(format!(
            "stability test needs degree >= 1, got {:?}",
            p.coeffs()
        )));
    }
    let mut c = p.coeffs().to_vec();
    while c.len() > 2 {
        let lead = c[0];
        let cons = c[c.len() - 1];
        if !lead.is_finite() || !cons.is_finite() {
            return Ok(false);
        }
        if cons.abs() >= lead.abs() * (1.0 - UNIT_CIRCLE_TOL) {
            return Ok(false);
        }
        let k = cons / lead;
        let n = c.len();
        let reduced: Vec<f64> = (0..n - 1).map(|i| c[i] - k * c[n - 1 - i]).collect();
        c = reduced;
    }
    // degree 1: single root at -c1/c0
    Ok(c[1].abs() < c[0].abs() * (1.0 - UNIT_CIRCLE_TOL))
}

/// All complex roots of `p`.
///
/// Closed forms for degree 1 and 2, companion-matrix eigenvalues above.
pub fn polynomial_roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    let d = p.degree();
    if d < 1 || p.is_zero() {
        return Err(Error::DegeneratePolynomial(
            "root extraction needs degree >= 1".into(),
        ));
    }
    let c = p.monic();
    let a = c.coeffs();
    match d {
        1 => Ok(vec![Complex64::new(-a[1], 0.0)]),
        2 => {
            let (b, c0) = (a[1], a[2]);
            let disc = b * b - 4.0 * c0;
            if disc >= 0.0 {
                let s = disc.sqrt();
                // avoid cancellation: compute the larger-magnitude root first
                let q = -0.5 * (b + b.signum() * s);
                let r1 = if q != 0.0 { q } else { 0.0 };
                let r2 = if q != 0.0 { c0 / q } else { 0.0 };
                Ok(vec![Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)])
            } else {
                let re = -b / 2.0;
                let im = (-disc).sqrt() / 2.0;
                Ok(vec![Complex64::new(re, im), Complex64::new(re, -im)])
            }
        }
        _ => {
            // companion matrix of the monic polynomial
            let mut m = DMatrix::<f64>::zeros(d, d);
            for i in 1..d {
                m[(i, i - 1)] = 1.0;
            }
            for i in 0..d {
                m[(i, d - 1)] = -a[d - i];
            }
            let eig = m.complex_eigenvalues();
            Ok(eig.iter().map(|e| Complex64::new(e.re, e.im)).collect())
        }
    }
}

/// Largest root modulus of `p`.
pub fn max_root_modulus(p: &Polynomial) -> Result<f64> {
    Ok(polynomial_roots(p)?
        .iter()
        .map(|r| r.norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_order_inside() {
        assert!(is_stable(&Polynomial::new(vec![1.0, -0.5])).unwrap());
    }

    #[test]
    fn first_order_outside() {
        assert!(!is_stable(&Polynomial::new(vec![1.0, -2.0])).unwrap());
    }

    #[test]
    fn boundary_root_counts_unstable() {
        // (z - 1)(z - 0.5)
        let p = Polynomial::from_roots(&[1.0, 0.5]);
        assert!(!is_stable(&p).unwrap());
        // root just inside the tolerance band
        let p = Polynomial::from_roots(&[1.0 - 1e-12, 0.5]);
        assert!(!is_stable(&p).unwrap());
        // root clearly inside
        let p = Polynomial::from_roots(&[1.0 - 1e-5, 0.5]);
        assert!(is_stable(&p).unwrap());
    }

    #[test]
    fn degenerate_is_error() {
        assert!(is_stable(&Polynomial::constant(2.0)).is_err());
        assert!(polynomial_roots(&Polynomial::constant(1.0)).is_err());
    }

    #[test]
    fn double_root_at_one() {
        let p = Polynomial::new(vec![1.0, -2.0, 1.0]);
        let roots = polynomial_roots(&p).unwrap();
        for r in roots {
            assert_relative_eq!(r.re, 1.0, max_relative = 1e-9);
            assert_relative_eq!(r.im, 0.0, epsilon = 1e-9);
        }
        assert!(!is_stable(&p).unwrap());
    }

    #[test]
    fn complex_pair_modulus_from_constant_term() {
        // z^2 - 1.988 z + 0.9881: complex pair, |root| = sqrt(0.9881)
        let p = Polynomial::new(vec![1.0, -1.988, 0.9881]);
        let roots = polynomial_roots(&p).unwrap();
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert_relative_eq!(r.norm(), 0.9881_f64.sqrt(), max_relative = 1e-9);
        }
        assert!(is_stable(&p).unwrap());
    }

    #[test]
    fn single_real_root() {
        let roots = polynomial_roots(&Polynomial::new(vec![1.0, -2.0])).unwrap();
        assert_eq!(roots.len(), 1);
        assert_relative_eq!(roots[0].re, 2.0);
    }

    #[test]
    fn companion_matches_vieta() {
        // degree 4 with known roots
        let p = Polynomial::from_roots(&[0.3, -0.8, 1.4, -0.1]);
        let roots = polynomial_roots(&p).unwrap();
        let prod: Complex64 = roots.iter().product();
        let sum: Complex64 = roots.iter().sum();
        assert_relative_eq!(prod.re, 0.3 * -0.8 * 1.4 * -0.1, max_relative = 1e-6);
        assert_relative_eq!(sum.re, 0.3 - 0.8 + 1.4 - 0.1, max_relative = 1e-6);
        assert!(!is_stable(&p).unwrap());
    }
}
