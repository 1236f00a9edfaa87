use crate::error::{Error, Result};
use crate::numerics::Complex;

use super::{ln_factorial, DisplacementPair, PhotonPair, TomogramSource};

/// Product of coherent states `|g1> |g2>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentProduct {
    pub gamma1: Complex,
    pub gamma2: Complex,
}

impl CoherentProduct {
    pub fn new(gamma1: Complex, gamma2: Complex) -> Result<Self> {
        if !(gamma1.is_finite() && gamma2.is_finite()) {
            return Err(Error::InvalidParameter("coherent amplitudes must be finite".into()));
        }
        Ok(CoherentProduct { gamma1, gamma2 })
    }
}

/// `e^{-lambda} lambda^n / n!`
pub fn poisson(lambda: f64, n: usize) -> f64 {
    if n == 0 {
        return (-lambda).exp();
    }
    if lambda == 0.0 {
        return 0.0;
    }
    (-lambda + n as f64 * lambda.ln() - ln_factorial(n)).exp()
}

/// Tomogram of a coherent product: displacing `|g>` by `a` gives `|a + g>`
/// up to a phase, so each mode is Poisson with mean `|a_i + g_i|^2`.
pub fn coherent_tomogram(s: &CoherentProduct, n: PhotonPair, alpha: DisplacementPair) -> f64 {
    let l1 = (alpha.alpha1 + s.gamma1).norm_sqr();
    let l2 = (alpha.alpha2 + s.gamma2).norm_sqr();
    poisson(l1, n.n1) * poisson(l2, n.n2)
}

impl TomogramSource for CoherentProduct {
    fn tomogram(&self, n: PhotonPair, alpha: DisplacementPair) -> Result<f64> {
        Ok(coherent_tomogram(self, n, alpha))
    }
}
