//! Named states, measurements and tomographic sets.
//!
//! Orderings are fixed so correlation tables are reproducible: Bell states
//! come as (φ⁺, φ⁻, ψ⁺, ψ⁻) and the μ states in lexicographic `(i, j)` order.

mod measurement;
mod states;
mod tomography;

pub use measurement::{Measurement, MeasurementRecord};
pub use states::{
    bell_basis, bell_states, born, ghz, max_entangled, maximally_mixed, mu_state, mu_states,
    white_noise,
};
pub use tomography::{tomographic_basis, TomographicBasis};
