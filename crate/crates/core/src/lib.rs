//! Numerical laboratory for coincidence arrangements of local observables in
//! massive scalar free field theory.

pub mod analytic;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod multiindex;
pub mod phasespace;
pub mod rng;
pub mod singleparticle;

pub use error::{Error, Result};
