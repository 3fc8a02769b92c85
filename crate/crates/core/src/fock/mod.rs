//! Truncated bosonic Fock space over a finite set of one-particle modes.

mod basis;
mod functional;
mod operators;
mod window;

pub use basis::{FockBasis, Lowering, ModeSet, Occupation, DEFAULT_STATE_BUDGET};
pub use functional::{EnergyFunctional, FunctionalKind, SamplingMode};
pub use operators::{
    annihilator, annihilator_coeffs, creator, creator_coeffs, energy_projection, field_generator, hamiltonian,
    low_sector, lowering_sparse, momentum, normal_ordered_weyl, normal_ordered_weyl_coeffs, number, translation,
    truncation_gap, weyl, weyl_apply, weyl_coeffs, weyl_verified, FockOperator,
};
pub use window::{m_map, EnergyWindow, MMap};
