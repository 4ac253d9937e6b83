//! Point counts, automorphism chains and lattice invariants for the K3
//! surface cut out by a 4×4×4 tritensor.

pub mod algebra;
pub mod cayley;
pub mod certifier;
pub mod counting;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod lattice;

pub use error::{Error, Result};
pub use field::Gf;
