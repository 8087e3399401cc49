//! Closed-form predictions for the distribution of elliptic-curve Frobenius
//! data modulo an integer, together with the exhaustive oracles that verify
//! them: brute-force matrix counting over residue rings and full censuses of
//! curves over small finite fields.

pub mod arith;
pub mod census;
pub mod elliptic;
pub mod error;
pub mod finite_field;
pub mod formulas;
pub mod modp;
pub mod torsion_frobenius;
pub mod zn_matrix;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
