//! Entanglement certification for composite quantum measurements.
//!
//! The crate classifies joint measurements as separable or entangled,
//! builds witnesses for entangled ones and decomposes them into local
//! tomographic projectors, and simulates the two network protocols that
//! certify measurement entanglement without trusting the measuring device:
//! swap-steering (trusted tomography on one side) and the star network
//! (fully device-independent, via any Bell inequality).
//!
//! All numerics are generic over the [`Real`] scalar (`f64` or `f32`); the
//! `*64` aliases at the crate root fix the usual double-precision choice.

pub mod error;
pub mod formats;
pub mod linalg;
pub mod network;
pub mod objects;
pub mod optim;
pub mod sampling;
pub mod scalar;
pub mod separability;
pub mod star;
pub mod steering;
pub mod witness;

pub use error::{Error, Result};
pub use linalg::{Eigen, Operator, ProductTerm, PureVector};
pub use objects::{Measurement, TomographicBasis};
pub use sampling::Seed;
pub use scalar::{Real, Tolerances};
pub use separability::{ElementVerdict, Status};
pub use star::{BellFunctional, StarTable};
pub use steering::{CorrelationTable, SohsModel};
pub use witness::Witness;

pub type Operator64 = Operator<f64>;
pub type Operator32 = Operator<f32>;
pub type PureVector64 = PureVector<f64>;
pub type PureVector32 = PureVector<f32>;
pub type Measurement64 = Measurement<f64>;
pub type Measurement32 = Measurement<f32>;
pub type TomographicBasis64 = TomographicBasis<f64>;
pub type Witness64 = Witness<f64>;
pub type Witness32 = Witness<f32>;
pub type CorrelationTable64 = CorrelationTable<f64>;
pub type SohsModel64 = SohsModel<f64>;
pub type BellFunctional64 = BellFunctional<f64>;
pub type StarTable64 = StarTable<f64>;
pub type Tolerances64 = Tolerances<f64>;
