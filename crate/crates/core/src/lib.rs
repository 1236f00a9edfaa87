pub mod bell;
pub mod error;
pub mod hermite;
pub mod numerics;
pub mod portrait;
pub mod states;

pub use error::{Error, Result};
pub use numerics::{Complex, Mat4C, Mat4R, Vec4C, Vec4R};
