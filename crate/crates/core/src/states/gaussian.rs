//! Two-mode Gaussian states.
//!
//! Quadratures are ordered `(p1, p2, q1, q2)` everywhere, with
//! `p = -i (a - a^dag) / sqrt(2)`, `q = (a + a^dag) / sqrt(2)` and hbar = 1.
//! The photon-number tomogram is
//!
//! ```text
//! w(n1, n2) = exp(-Q (2M + I)^-1 Q) / sqrt(det(M + I/2))
//!             * H^R_{n1,n2,n1,n2}(y) / (n1! n2!)
//! R = U^dag (I - 2M) (I + 2M)^-1 U^*
//! y = 2 U^T (I - 2M)^-1 Q
//! ```
//!
//! where `Q` is the mean vector after displacement.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{diagonal_plan, sparsity_mask, DiagonalHermite, HermiteParams};
use crate::numerics::{is_positive_definite, Complex, Mat4, Mat4C, Mat4R, Vec4, Vec4C, Vec4R};

use super::cat::clamp_probability;
use super::{DisplacementPair, PhotonPair, TomogramSource, TomogramTable};

/// Negative tomogram values above this clamp to zero.
pub const HERMITE_NEG_TOL: f64 = 1e-9;
/// Allowed imaginary residue, relative to `1 + |Re|`.
pub const HERMITE_IM_TOL: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-12;
const UNCERTAINTY_TOL: f64 = 1e-10;
const R_SYMMETRY_TOL: f64 = 1e-10;

/// How a displacement `(a1, a2)` shifts the mean quadratures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureConvention {
    /// `p_j += sqrt(2) Im a_j`, `q_j += sqrt(2) Re a_j`, as follows from
    /// `D^dag a D = a + alpha` with the quadrature definitions above.
    #[default]
    Standard,
    /// `p_j += sqrt(2) Re a_j`, `q_j += sqrt(2) Im a_j`. Equivalent to reading
    /// `M` and the mean in `(q1, q2, p1, p2)` order. The published
    /// squeezed-state Bell matrix was tabulated in this convention.
    Swapped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSpec {
    m: Mat4R,
    mean: Vec4R,
    convention: QuadratureConvention,
}

impl GaussianSpec {
    /// Validates symmetry, positive definiteness and `det M >= 1/16`.
    pub fn new(m: Mat4R, mean: Vec4R) -> Result<Self> {
        Self::with_convention(m, mean, QuadratureConvention::Standard)
    }

    pub fn with_convention(m: Mat4R, mean: Vec4R, convention: QuadratureConvention) -> Result<Self> {
        if !m.is_finite() || !mean.0.iter().all(|x| x.is_finite()) {
            return Err(Error::NonPhysicalSpec("non-finite entries".into()));
        }
        let asym = m.asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::NonPhysicalSpec(format!(
                "dispersion matrix is not symmetric (max deviation {asym:e})"
            )));
        }
        if !is_positive_definite(&m) {
            return Err(Error::NonPhysicalSpec(
                "dispersion matrix is not positive definite".into(),
            ));
        }
        let det = m.det();
        if det < 1.0 / 16.0 - UNCERTAINTY_TOL {
            return Err(Error::NonPhysicalSpec(format!(
                "det M = {det} violates the uncertainty relation det M >= 1/16"
            )));
        }
        Ok(GaussianSpec { m, mean, convention })
    }

    /// Symplectic eigenvalues `(nu_min, nu_max)` of `M`.
    ///
    /// With `Omega` the commutator form, `nu_min^2 + nu_max^2 = -tr((Omega M)^2) / 2`
    /// and `nu_min^2 nu_max^2 = det M`.
    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        let mut omega = Mat4R::zero();
        omega.0[2][0] = 1.0;
        omega.0[0][2] = -1.0;
        omega.0[3][1] = 1.0;
        omega.0[1][3] = -1.0;
        let om = omega.matmul(&self.m);
        let sum = -(0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| om.0[i][j] * om.0[j][i])
            .sum::<f64>()
            / 2.0;
        let prod = self.m.det();
        let disc = (sum * sum - 4.0 * prod).max(0.0).sqrt();
        let hi = (sum + disc) / 2.0;
        let lo = prod / hi;
        (lo.max(0.0).sqrt(), hi.sqrt())
    }

    /// Robertson-Schrödinger bound `nu_min >= 1/2`. Stronger than
    /// `det M >= 1/16`, which is all the constructor enforces.
    pub fn is_physical(&self) -> bool {
        self.symplectic_eigenvalues().0 >= 0.5 - UNCERTAINTY_TOL
    }

    pub fn m(&self) -> &Mat4R {
        &self.m
    }

    pub fn mean(&self) -> &Vec4R {
        &self.mean
    }

    pub fn convention(&self) -> QuadratureConvention {
        self.convention
    }

    pub fn with_quadrature_convention(mut self, convention: QuadratureConvention) -> Self {
        self.convention = convention;
        self
    }
}

/// Mean quadratures of `D(a) rho D(a)^dag`. The dispersion matrix is unchanged.
pub fn gaussian_shifted_mean(g: &GaussianSpec, alpha: DisplacementPair) -> Vec4R {
    let (a1, a2) = (alpha.alpha1, alpha.alpha2);
    let shift = match g.convention {
        QuadratureConvention::Standard => [a1.im, a2.im, a1.re, a2.re],
        QuadratureConvention::Swapped => [a1.re, a2.re, a1.im, a2.im],
    };
    Vec4([0, 1, 2, 3].map(|i| g.mean.0[i] + SQRT_2 * shift[i]))
}

fn u_matrix() -> Mat4C {
    let i = Complex::new(0.0, FRAC_1_SQRT_2);
    let o = Complex::new(FRAC_1_SQRT_2, 0.0);
    let z = Complex::new(0.0, 0.0);
    Mat4([
        [-i, z, i, z],
        [z, -i, z, i],
        [o, z, o, z],
        [z, o, z, o],
    ])
}

/// `R = U^dag (I - 2M) (I + 2M)^-1 U^*`, symmetrized after checking symmetry.
pub fn gaussian_r(m: &Mat4R) -> Result<Mat4C> {
    let id = Mat4R::identity();
    let lhs = id - m.scale(2.0);
    let rhs = (id + m.scale(2.0)).inverse()?;
    let u = u_matrix();
    let r = u.adjoint().matmul(&lhs.matmul(&rhs).to_complex()).matmul(&u.conj());
    let asym = r.asymmetry();
    if asym > R_SYMMETRY_TOL {
        return Err(Error::AsymmetricR(asym));
    }
    Ok(Mat4::from_fn(|i, j| (r.0[i][j] + r.0[j][i]) * 0.5))
}

/// `y = 2 U^T (I - 2M)^-1 Q`.
///
/// A zero mean gives `y = 0` without touching `(I - 2M)^-1`; otherwise a
/// singular `I - 2M` is reported as [`Error::DegenerateGaussian`].
pub fn gaussian_y(m: &Mat4R, shifted_mean: &Vec4R) -> Result<Vec4C> {
    if shifted_mean.is_zero() {
        return Ok(Vec4C::zero());
    }
    let inv = (Mat4R::identity() - m.scale(2.0))
        .inverse()
        .map_err(|_| Error::DegenerateGaussian)?;
    let v = inv.mul_vec(shifted_mean).to_complex();
    let y = u_matrix().transpose().mul_vec(&v);
    Ok(Vec4(y.0.map(|c| c * 2.0)))
}

/// Mixed-state family `M(k, l)` with zero mean; `det M = (1 + 4l) / 16`.
pub fn gaussian_purity_family(k: f64, l: f64) -> Result<GaussianSpec> {
    if !(k.is_finite() && l.is_finite()) || k < 0.5 || l < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "purity family needs k >= 1/2 and l >= 0, got k = {k}, l = {l}"
        )));
    }
    let s = (k * k - 0.25).sqrt();
    let m = Mat4([
        [k + l / k, s, 0.0, 0.0],
        [s, k, 0.0, 0.0],
        [0.0, 0.0, k, s],
        [0.0, 0.0, s, k],
    ]);
    GaussianSpec::new(m, Vec4R::zero())
}

/// Precomputed, displacement-independent pieces of the Gaussian tomogram.
#[derive(Clone, Debug)]
pub struct GaussianState {
    spec: GaussianSpec,
    r: Mat4C,
    exp_form: Mat4R,
    ln_norm: f64,
    max_order: usize,
}

impl GaussianState {
    pub fn new(spec: GaussianSpec) -> Result<Self> {
        if !spec.is_physical() {
            log::warn!(
                "dispersion matrix violates the Robertson-Schrödinger bound \
                 (smallest symplectic eigenvalue {:.4} < 1/2); tomogram values may be negative",
                spec.symplectic_eigenvalues().0
            );
        }
        let id = Mat4R::identity();
        let r = gaussian_r(&spec.m)?;
        let exp_form = (spec.m.scale(2.0) + id).inverse()?;
        let det_half = (spec.m + id.scale(0.5)).det();
        Ok(GaussianState {
            spec,
            r,
            exp_form,
            ln_norm: -0.5 * det_half.ln(),
            max_order: crate::hermite::DEFAULT_MAX_ORDER,
        })
    }

    /// Raises or lowers the Hermite order cap (default 128, i.e. `n_max <= 32`).
    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    pub fn spec(&self) -> &GaussianSpec {
        &self.spec
    }

    pub fn r(&self) -> &Mat4C {
        &self.r
    }

    /// Real parts of the tomogram formula without clamping.
    ///
    /// For a dispersion matrix that passes `det M >= 1/16` but violates the
    /// Robertson-Schrödinger bound the formula describes an indefinite
    /// operator and entries can be genuinely negative; this table exposes
    /// them for diagnostics. No residue or negativity checks are applied.
    pub fn raw_table(&self, alpha: DisplacementPair, n_max: usize) -> Result<TomogramTable> {
        self.real_table(alpha, n_max, false)
    }

    fn real_table(&self, alpha: DisplacementPair, n_max: usize, check: bool) -> Result<TomogramTable> {
        let q = gaussian_shifted_mean(&self.spec, alpha);
        let y = gaussian_y(&self.spec.m, &q)?;
        let ln_pre = self.ln_norm - self.exp_form.quadratic_form(&q);
        let params = HermiteParams::new(self.r, y)?;
        let plan: Arc<_> = diagonal_plan(n_max, self.max_order, sparsity_mask(&self.r))?;
        let hermite = DiagonalHermite::compute(plan, &params);

        let inv_fact: Vec<f64> = (0..=n_max)
            .scan(1.0f64, |acc, n| {
                if n > 0 {
                    *acc /= n as f64;
                }
                Some(*acc)
            })
            .collect();
        let pre = ln_pre.exp();
        let mut data = Vec::with_capacity((n_max + 1) * (n_max + 1));
        for n1 in 0..=n_max {
            for n2 in 0..=n_max {
                let w = hermite.get(n1, n2) * (pre * inv_fact[n1] * inv_fact[n2]);
                // applied to w rather than the Hermite value: relative to the
                // Hermite value the bound would flag entries whose absolute
                // probability error is far below any tolerance downstream
                if check && !(w.im.abs() <= HERMITE_IM_TOL * (1.0 + w.re.abs())) {
                    return Err(Error::ComplexResidue { re: w.re, im: w.im });
                }
                data.push(w.re);
            }
        }
        Ok(TomogramTable::from_vec(n_max, data))
    }

    /// All `w(n1, n2)` for `n1, n2 <= n_max` at one displacement.
    pub fn tomogram_table(&self, alpha: DisplacementPair, n_max: usize) -> Result<TomogramTable> {
        let raw = self.real_table(alpha, n_max, true)?;
        let data = raw
            .data()
            .iter()
            .map(|&w| clamp_probability(w, HERMITE_NEG_TOL))
            .collect::<Result<Vec<_>>>()?;
        Ok(TomogramTable::from_vec(n_max, data))
    }
}

impl TomogramSource for GaussianState {
    fn tomogram(&self, n: PhotonPair, alpha: DisplacementPair) -> Result<f64> {
        let table = self.tomogram_table(alpha, n.n1.max(n.n2))?;
        Ok(table.get(n.n1, n.n2))
    }

    fn table(&self, alpha: DisplacementPair, n_max: usize) -> Result<TomogramTable> {
        self.tomogram_table(alpha, n_max)
    }
}

/// Convenience: single tomogram value for a spec.
pub fn gaussian_tomogram(g: &GaussianSpec, n: PhotonPair, alpha: DisplacementPair) -> Result<f64> {
    GaussianState::new(g.clone())?.tomogram(n, alpha)
}
