//! Shared fixtures for the benchmarks.

use tomobell_core::bell::BellSettings;
use tomobell_core::numerics::{Mat4, Mat4R, Vec4R};
use tomobell_core::states::{GaussianSpec, GaussianState, QuadratureConvention};
use tomobell_core::Complex;

/// The squeezed two-mode example with its printed dispersion matrix.
pub fn squeezed_m() -> Mat4R {
    let a = 35f64.sqrt() / 2.0;
    let b = 3f64.sqrt() / 2.0;
    Mat4([[3.0, a, 0.0, 0.0], [a, 3.0, 0.0, 0.0], [0.0, 0.0, 1.0, b], [0.0, 0.0, b, 1.0]])
}

pub fn squeezed_state() -> GaussianState {
    let spec = GaussianSpec::with_convention(squeezed_m(), Vec4R::zero(), QuadratureConvention::Swapped)
        .expect("valid example");
    GaussianState::new(spec).expect("valid example")
}

/// Settings at which the squeezed example's Bell matrix was tabulated.
pub fn printed_settings() -> BellSettings {
    let c = Complex::new;
    BellSettings::new(c(0.0, -0.12), c(0.0, 0.04), c(0.0, 0.22), c(0.0, -0.32))
}
