//! Brute-force tomogram for pure states given as finite superpositions of
//! two-mode coherent states. Used as a test oracle for the closed forms.

use crate::error::{Error, Result};
use crate::numerics::Complex;

use super::{
    cat_normalization, CatState, CoherentProduct, DisplacementPair, PhotonPair, State,
    TomogramSource,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentTerm {
    pub coef: Complex,
    pub delta1: Complex,
    pub delta2: Complex,
}

/// `sum_i c_i |d1_i> |d2_i>`
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentSuperposition {
    pub terms: Vec<CoherentTerm>,
}

impl From<&CatState> for CoherentSuperposition {
    fn from(s: &CatState) -> Self {
        let n = Complex::new(cat_normalization(s.gamma1, s.gamma2), 0.0);
        CoherentSuperposition {
            terms: vec![
                CoherentTerm { coef: n, delta1: s.gamma1, delta2: s.gamma2 },
                CoherentTerm { coef: n, delta1: -s.gamma1, delta2: -s.gamma2 },
            ],
        }
    }
}

impl From<&CoherentProduct> for CoherentSuperposition {
    fn from(s: &CoherentProduct) -> Self {
        CoherentSuperposition {
            terms: vec![CoherentTerm {
                coef: Complex::new(1.0, 0.0),
                delta1: s.gamma1,
                delta2: s.gamma2,
            }],
        }
    }
}

impl TryFrom<&State> for CoherentSuperposition {
    type Error = Error;

    fn try_from(state: &State) -> Result<Self> {
        match state {
            State::Cat(s) => Ok(s.into()),
            State::Coherent(s) => Ok(s.into()),
            State::Gaussian(_) => Err(Error::UnsupportedState),
        }
    }
}

/// `<n|d> = e^{-|d|^2/2} d^n / sqrt(n!)`
fn fock_amplitude(d: Complex, n: usize) -> Complex {
    let mut sqrt_fact = 1.0;
    for k in 2..=n {
        sqrt_fact *= (k as f64).sqrt();
    }
    (-0.5 * d.norm_sqr()).exp() * d.powu(n as u32) / sqrt_fact
}

/// Phase picked up by `D(a)|d> = e^{(a conj(d) - conj(a) d)/2} |a + d>`.
fn displacement_phase(a: Complex, d: Complex) -> Complex {
    ((a * d.conj() - a.conj() * d) * 0.5).exp()
}

/// `w = |<n1 n2| D(a1, a2) |psi>|^2`, summing the displaced coherent
/// amplitudes term by term.
pub fn fock_oracle_tomogram(
    state: &CoherentSuperposition,
    n: PhotonPair,
    alpha: DisplacementPair,
) -> f64 {
    let amplitude = state.terms.iter().fold(Complex::new(0.0, 0.0), |acc, t| {
        let m1 = displacement_phase(alpha.alpha1, t.delta1)
            * fock_amplitude(alpha.alpha1 + t.delta1, n.n1);
        let m2 = displacement_phase(alpha.alpha2, t.delta2)
            * fock_amplitude(alpha.alpha2 + t.delta2, n.n2);
        acc + t.coef * m1 * m2
    });
    amplitude.norm_sqr()
}

impl TomogramSource for CoherentSuperposition {
    fn tomogram(&self, n: PhotonPair, alpha: DisplacementPair) -> Result<f64> {
        Ok(fock_oracle_tomogram(self, n, alpha))
    }
}
