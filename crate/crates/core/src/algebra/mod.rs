//! Exact polynomial and linear algebra.

pub mod dense;
pub mod linalg;
pub mod matrix;
pub mod monomial;
pub mod poly;
pub mod ring;

pub use dense::FpForm;
pub use matrix::PolyMatrix;
pub use monomial::Monomial;
pub use poly::MultiPoly;
pub use ring::{Integers, Rationals, Ring, RingTag};
