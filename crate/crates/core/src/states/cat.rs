//! Two-mode Schrödinger cat `N (|g1, g2> + |-g1, -g2>)`.

use crate::error::{Error, Result};
use crate::numerics::Complex;

use super::{ln_factorial, DisplacementPair, PhotonPair, TomogramSource};

/// Negative values above this are rounding noise and clamp to zero.
pub const CLOSED_FORM_NEG_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatState {
    pub gamma1: Complex,
    pub gamma2: Complex,
}

impl CatState {
    pub fn new(gamma1: Complex, gamma2: Complex) -> Result<Self> {
        if !(gamma1.is_finite() && gamma2.is_finite()) {
            return Err(Error::InvalidParameter("cat amplitudes must be finite".into()));
        }
        Ok(CatState { gamma1, gamma2 })
    }

    /// `|g1|^2 + |g2|^2`
    pub fn total_intensity(&self) -> f64 {
        self.gamma1.norm_sqr() + self.gamma2.norm_sqr()
    }
}

/// `ln cosh(x)` without overflow.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln N(g1, g2)` with `N = exp(s/2) / (2 sqrt(cosh s))`, `s = |g1|^2 + |g2|^2`.
pub fn cat_log_normalization(gamma1: Complex, gamma2: Complex) -> f64 {
    let s = gamma1.norm_sqr() + gamma2.norm_sqr();
    0.5 * s - std::f64::consts::LN_2 - 0.5 * ln_cosh(s)
}

/// Normalization factor of the cat state. Bounded by `1/sqrt(2)` for large
/// amplitudes, so it is always finite even where `cosh` itself overflows.
pub fn cat_normalization(gamma1: Complex, gamma2: Complex) -> f64 {
    cat_log_normalization(gamma1, gamma2).exp()
}

/// Photon-number tomogram of the cat state:
///
/// `w = e^{-|a|^2} / (4 n1! n2! cosh s) * |e^{-z} u1^n1 u2^n2 + e^{z} v1^n1 v2^n2|^2`
///
/// with `u = a + g`, `v = a - g`, `z = conj(a1) g1 + conj(a2) g2`. Both terms
/// are carried as complex logarithms so large amplitudes do not overflow.
pub fn cat_tomogram(s: &CatState, n: PhotonPair, alpha: DisplacementPair) -> Result<f64> {
    let (a1, a2) = (alpha.alpha1, alpha.alpha2);
    let z = a1.conj() * s.gamma1 + a2.conj() * s.gamma2;
    let ln_prefactor = -(a1.norm_sqr() + a2.norm_sqr())
        - 4f64.ln()
        - ln_cosh(s.total_intensity())
        - ln_factorial(n.n1)
        - ln_factorial(n.n2);

    let log_term = |sign: f64, b1: Complex, b2: Complex| -> Option<Complex> {
        let mut acc = -z * sign;
        for (base, power) in [(b1, n.n1), (b2, n.n2)] {
            if power == 0 {
                continue;
            }
            if base.norm() == 0.0 {
                return None;
            }
            acc += base.ln() * power as f64;
        }
        Some(acc)
    };
    let plus = log_term(1.0, a1 + s.gamma1, a2 + s.gamma2);
    let minus = log_term(-1.0, a1 - s.gamma1, a2 - s.gamma2);

    let value = match (plus, minus) {
        (None, None) => 0.0,
        (Some(t), None) | (None, Some(t)) => (ln_prefactor + 2.0 * t.re).exp(),
        (Some(t1), Some(t2)) => {
            let m = t1.re.max(t2.re);
            let sum = (t1 - m).exp() + (t2 - m).exp();
            (ln_prefactor + 2.0 * m).exp() * sum.norm_sqr()
        }
    };
    clamp_probability(value, CLOSED_FORM_NEG_TOL)
}

pub(crate) fn clamp_probability(value: f64, tol: f64) -> Result<f64> {
    if value.is_nan() {
        return Err(Error::NumericalNegativity(f64::NAN));
    }
    if value < -tol {
        return Err(Error::NumericalNegativity(value));
    }
    Ok(value.max(0.0))
}

impl TomogramSource for CatState {
    fn tomogram(&self, n: PhotonPair, alpha: DisplacementPair) -> Result<f64> {
        cat_tomogram(self, n, alpha)
    }
}
