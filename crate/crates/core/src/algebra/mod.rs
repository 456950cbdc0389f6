//! Exact arithmetic: rationals, polynomials, matrices, factorization and
//! rational-function products.

pub mod factor;
pub mod matrix;
pub mod modp;
pub mod numfield;
pub mod poly;
pub mod rational;
pub mod ratfunc;
pub mod recurrence;
pub mod sturm;

pub use matrix::QMatrix;
pub use poly::{IntPoly, QPoly};
pub use ratfunc::RatFuncProduct;
pub use rational::Rational;
