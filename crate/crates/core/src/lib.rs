pub mod affine;
pub mod algebra;
pub mod error;
pub mod catalog;
pub mod expr;
pub mod families;
pub mod fixedpoint;
pub mod verify;
pub mod zeta;

pub use error::{Error, Result};
