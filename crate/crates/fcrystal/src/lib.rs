//! Exact p-adic linear algebra for F-crystals over finite fields and over
//! lifted one-dimensional bases: N_r/M^r/A^r filtrations, de Rham and
//! syntomic complexes, Euler factors and the determinant identities.

pub mod error;
pub mod fcrystal_point;
pub mod fpoly;
pub mod gen;
pub mod homalg;
pub mod lifted;
pub mod padic;
pub mod par;
pub mod semilinear;
pub mod zeta;

pub use error::{Error, Result};
