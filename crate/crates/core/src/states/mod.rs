//! Quantum states and their photon-number tomograms
//! `w(n1, n2 | a1, a2) = <n1 n2| D(a) rho D(a)^dag |n1 n2>`.

mod cat;
mod coherent;
mod fock;
mod gaussian;

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Complex, Mat4, Vec4};

pub use cat::{
    cat_log_normalization, cat_normalization, cat_tomogram, ln_cosh, CatState, CLOSED_FORM_NEG_TOL,
};
pub use coherent::{coherent_tomogram, poisson, CoherentProduct};
pub use fock::{fock_oracle_tomogram, CoherentSuperposition, CoherentTerm};
pub use gaussian::{
    gaussian_purity_family, gaussian_r, gaussian_shifted_mean, gaussian_tomogram, gaussian_y,
    GaussianSpec, GaussianState, QuadratureConvention, HERMITE_IM_TOL, HERMITE_NEG_TOL,
};

pub(crate) use cat::clamp_probability;

/// Displacement amplitudes `(a1, a2)` applied to the two modes.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DisplacementPair {
    pub alpha1: Complex,
    pub alpha2: Complex,
}

impl DisplacementPair {
    pub fn new(alpha1: Complex, alpha2: Complex) -> Self {
        DisplacementPair { alpha1, alpha2 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_finite(&self) -> bool {
        self.alpha1.is_finite() && self.alpha2.is_finite()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct PhotonPair {
    pub n1: usize,
    pub n2: usize,
}

impl PhotonPair {
    pub fn new(n1: usize, n2: usize) -> Self {
        PhotonPair { n1, n2 }
    }
}

/// `ln n!`, exact summation below 256 and Stirling beyond.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 256 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        let x = n as f64 + 1.0;
        // Stirling series for ln Gamma(x)
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
    }
}

/// Square table `w(n1, n2)` for `n1, n2 <= n_max`, row major in `n1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TomogramTable {
    n_max: usize,
    data: Vec<f64>,
}

impl TomogramTable {
    pub fn from_vec(n_max: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), (n_max + 1) * (n_max + 1));
        TomogramTable { n_max, data }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn get(&self, n1: usize, n2: usize) -> f64 {
        self.data[n1 * (self.n_max + 1) + n2]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn to_array2(&self) -> Array2<f64> {
        let side = self.n_max + 1;
        Array2::from_shape_vec((side, side), self.data.clone()).expect("square table")
    }
}

pub trait TomogramSource: Send + Sync {
    fn tomogram(&self, n: PhotonPair, alpha: DisplacementPair) -> Result<f64>;

    fn table(&self, alpha: DisplacementPair, n_max: usize) -> Result<TomogramTable> {
        let mut data = Vec::with_capacity((n_max + 1) * (n_max + 1));
        for n1 in 0..=n_max {
            for n2 in 0..=n_max {
                data.push(self.tomogram(PhotonPair::new(n1, n2), alpha)?);
            }
        }
        Ok(TomogramTable::from_vec(n_max, data))
    }
}

#[derive(Clone, Debug)]
pub enum State {
    Cat(CatState),
    Coherent(CoherentProduct),
    Gaussian(Box<GaussianState>),
}

impl State {
    pub fn gaussian(spec: GaussianSpec) -> Result<Self> {
        Ok(State::Gaussian(Box::new(GaussianState::new(spec)?)))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            State::Cat(_) => "cat",
            State::Coherent(_) => "coherent",
            State::Gaussian(_) => "gaussian",
        }
    }

    pub fn from_description(d: &StateDescription) -> Result<Self> {
        match d {
            StateDescription::Cat { gamma1, gamma2 } => {
                Ok(State::Cat(CatState::new(to_c(*gamma1), to_c(*gamma2))?))
            }
            StateDescription::Coherent { gamma1, gamma2 } => Ok(State::Coherent(
                CoherentProduct::new(to_c(*gamma1), to_c(*gamma2))?,
            )),
            StateDescription::Gaussian { m, mean, convention } => {
                let spec = GaussianSpec::with_convention(
                    Mat4(m.to_rows()),
                    Vec4(mean.unwrap_or([0.0; 4])),
                    *convention,
                )?;
                State::gaussian(spec)
            }
            StateDescription::GaussianFamily { k, l, convention } => {
                let spec = gaussian_purity_family(*k, *l)?.with_quadrature_convention(*convention);
                State::gaussian(spec)
            }
        }
    }

    /// Reads a JSON state description.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let d: StateDescription =
            serde_json::from_str(text).map_err(|e| Error::StateFile(e.to_string()))?;
        Self::from_description(&d)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::StateFile(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

impl TomogramSource for State {
    fn tomogram(&self, n: PhotonPair, alpha: DisplacementPair) -> Result<f64> {
        match self {
            State::Cat(s) => s.tomogram(n, alpha),
            State::Coherent(s) => s.tomogram(n, alpha),
            State::Gaussian(s) => s.tomogram(n, alpha),
        }
    }

    fn table(&self, alpha: DisplacementPair, n_max: usize) -> Result<TomogramTable> {
        match self {
            State::Cat(s) => s.table(alpha, n_max),
            State::Coherent(s) => s.table(alpha, n_max),
            State::Gaussian(s) => s.table(alpha, n_max),
        }
    }
}

fn to_c(p: [f64; 2]) -> Complex {
    Complex::new(p[0], p[1])
}

/// On-disk state description. Complex numbers are `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateDescription {
    Cat {
        gamma1: [f64; 2],
        gamma2: [f64; 2],
    },
    Coherent {
        gamma1: [f64; 2],
        gamma2: [f64; 2],
    },
    Gaussian {
        #[serde(rename = "M")]
        m: MatrixInput,
        #[serde(default)]
        mean: Option<[f64; 4]>,
        #[serde(default)]
        convention: QuadratureConvention,
    },
    GaussianFamily {
        k: f64,
        l: f64,
        #[serde(default)]
        convention: QuadratureConvention,
    },
}

/// A 4x4 matrix given either as nested rows or as 16 row-major numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixInput {
    Rows([[f64; 4]; 4]),
    Flat([f64; 16]),
}

impl MatrixInput {
    pub fn to_rows(&self) -> [[f64; 4]; 4] {
        match self {
            MatrixInput::Rows(r) => *r,
            MatrixInput::Flat(f) => std::array::from_fn(|i| std::array::from_fn(|j| f[4 * i + j])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn rel_close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
    }

    #[test]
    fn ln_factorial_matches_product() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-14);
        let exact: f64 = (2..=300).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial(300) - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn cat_normalization_values() {
        let z = c(0.0, 0.0);
        assert!((cat_normalization(c(1.0, 0.0), c(1.0, 0.0)) - std::f64::consts::FRAC_1_SQRT_2 / (1.0 + (-4f64).exp()).sqrt()).abs() < 1e-14);
        assert!((cat_normalization(c(30.0, 0.0), z) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(cat_normalization(c(1e3, 0.0), c(1e3, 0.0)).is_finite());
    }

    #[test]
    fn cat_vacuum_example() {
        // w(0,0) at a = 0 is 1 / cosh(|g1|^2 + |g2|^2)
        let s = CatState::new(c(1.0, 0.0), c(0.5, 0.0)).unwrap();
        let w = cat_tomogram(&s, PhotonPair::new(0, 0), DisplacementPair::zero()).unwrap();
        assert!((w - 1.0 / 1.25f64.cosh()).abs() < 1e-14);
        // odd total photon number vanishes at the origin
        let w = cat_tomogram(&s, PhotonPair::new(1, 0), DisplacementPair::zero()).unwrap();
        assert!(w.abs() < 1e-15);
    }

    #[test]
    fn closed_forms_match_fock_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut draw = |r: f64| c(rng.gen_range(-r..r), rng.gen_range(-r..r));
        for case in 0..100 {
            let (g1, g2, a1, a2) = (draw(2.0), draw(2.0), draw(1.5), draw(1.5));
            let alpha = DisplacementPair::new(a1, a2);
            let cat = CatState::new(g1, g2).unwrap();
            let coh = CoherentProduct::new(g1, g2).unwrap();
            let cat_oracle = CoherentSuperposition::from(&cat);
            let coh_oracle = CoherentSuperposition::from(&coh);
            let n = PhotonPair::new(case % 9, (case / 9) % 7);
            let (x, y) = (cat.tomogram(n, alpha).unwrap(), fock_oracle_tomogram(&cat_oracle, n, alpha));
            assert!(rel_close(x, y, 1e-10, 1e-14), "cat case {case}: {x} vs {y}");
            let (x, y) = (coh.tomogram(n, alpha).unwrap(), fock_oracle_tomogram(&coh_oracle, n, alpha));
            assert!(rel_close(x, y, 1e-10, 1e-14), "coherent case {case}: {x} vs {y}");
        }
    }

    #[test]
    fn cat_is_normalized() {
        let cat = CatState::new(c(1.2, -0.4), c(0.3, 0.9)).unwrap();
        let t = cat.table(DisplacementPair::new(c(0.5, 0.2), c(-0.3, 0.1)), 40).unwrap();
        assert!((t.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_cat_stays_finite() {
        let cat = CatState::new(c(10.0, 0.0), c(10.0, 0.0)).unwrap();
        let w = cat.tomogram(PhotonPair::new(100, 100), DisplacementPair::new(c(0.01, 0.0), c(0.0, 0.0))).unwrap();
        assert!(w.is_finite() && w >= 0.0);
    }

    #[test]
    fn gaussian_rejected_by_fock_oracle() {
        let spec = gaussian_purity_family(0.5, 0.0).unwrap();
        let state = State::gaussian(spec).unwrap();
        assert!(matches!(CoherentSuperposition::try_from(&state), Err(Error::UnsupportedState)));
    }

    #[test]
    fn parses_state_files() {
        let s = State::from_json_str(r#"{"type":"cat","gamma1":[1,0],"gamma2":[0.5,0]}"#).unwrap();
        assert_eq!(s.kind(), "cat");
        let flat = r#"{"type":"gaussian","M":[1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1],"mean":[0,0,0,0]}"#;
        let nested = r#"{"type":"gaussian","M":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],"convention":"swapped"}"#;
        for text in [flat, nested] {
            assert_eq!(State::from_json_str(text).unwrap().kind(), "gaussian");
        }
        let fam = r#"{"type":"gaussian_family","k":1.0,"l":0.1}"#;
        assert_eq!(State::from_json_str(fam).unwrap().kind(), "gaussian");

        assert!(matches!(State::from_json_str(r#"{"type":"squeezed"}"#), Err(Error::StateFile(_))));
        assert!(matches!(
            State::from_json_str(r#"{"type":"gaussian","M":[[0.1,0,0,0],[0,0.1,0,0],[0,0,0.1,0],[0,0,0,0.1]]}"#),
            Err(Error::NonPhysicalSpec(_))
        ));
    }
}
