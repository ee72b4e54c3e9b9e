//! Standard normal distribution function and its inverse.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// `Phi(x)` through the complementary error function.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `Phi^{-1}(u)` for `0 < u < 1`.
pub fn inv_normal_cdf(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!(
            "inverse normal cdf needs 0 < u < 1, got {u}"
        )));
    }
    Ok(inv_norm(u))
}

// Acklam's rational approximation (relative error ~1e-9).
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];
const P_LOW: f64 = 0.02425;

/// Unchecked inverse; callers guarantee `0 < u < 1`.
#[inline]
pub(crate) fn inv_norm(u: f64) -> f64 {
    // Work in the lower half and reflect, which makes the result exactly odd.
    let (p, sign) = if u > 0.5 { (1.0 - u, -1.0) } else { (u, 1.0) };
    if p == 0.5 {
        return 0.0;
    }
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // One Halley step against the lower tail probability.
    let e = 0.5 * libm::erfc(-x / SQRT_2) - p;
    let g = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    let x = x - g / (1.0 + 0.5 * x * g);
    sign * x
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Phi by composite Simpson quadrature of the density on [0, x].
    fn phi_quadrature(x: f64) -> f64 {
        let n = 20_000;
        let h = x / n as f64;
        let mut s = norm_pdf(0.0) + norm_pdf(x);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * norm_pdf(i as f64 * h);
        }
        0.5 + s * h / 3.0
    }

    #[test]
    fn center_and_quantile() {
        assert_eq!(inv_normal_cdf(0.5).unwrap(), 0.0);
        let z = inv_normal_cdf(0.975).unwrap();
        assert!((z - 1.959964).abs() < 1e-6);
        assert!((phi_quadrature(z) - 0.975).abs() < 1e-12);
    }

    #[test]
    fn antisymmetry() {
        // dyadic u so that 1 - u is exact
        for u in [2f64.powi(-30), 2f64.powi(-10), 1.0 / 64.0, 0.125, 0.375, 0.4375] {
            let s = inv_normal_cdf(u).unwrap() + inv_normal_cdf(1.0 - u).unwrap();
            assert!(s.abs() < 1e-12, "u={u} sum={s}");
        }
    }

    #[test]
    fn accuracy_against_quadrature_oracle() {
        for u in [0.01, 0.05, 0.2, 0.4, 0.6, 0.77, 0.9, 0.99] {
            let x = inv_normal_cdf(u).unwrap();
            let back = phi_quadrature(x);
            // |dx| = |dPhi| / phi(x)
            assert!((back - u).abs() / norm_pdf(x) < 1e-9, "u={u}");
        }
    }

    #[test]
    fn tails_invert_cdf() {
        for u in [1e-12, 1e-8, 1e-5, 0.01, 0.024, 0.025] {
            let x = inv_normal_cdf(u).unwrap();
            let rel = (norm_cdf(x) - u).abs() / u;
            assert!(rel < 1e-12, "u={u} rel={rel}");
        }
    }

    #[test]
    fn domain_errors() {
        for u in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(inv_normal_cdf(u), Err(Error::Domain(_))));
        }
    }
}
