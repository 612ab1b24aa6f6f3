//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point scalar (`f32` or `f64`) underlying all complex
/// operators, probabilities and functional values.
///
/// The associated constants are the default tolerances for the precision;
/// they are only defaults, every check that uses them also takes an
/// explicit [`Tolerances`] value.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + std::fmt::LowerExp
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Maximum `|A - A†|` entry for an operator to count as Hermitian.
    const HERMITIAN_TOL: f64;
    /// Eigenvalue floor for positive semi-definiteness.
    const PSD_TOL: f64;
    /// A partial-transpose eigenvalue below `-ENTANGLEMENT_TOL` flags entanglement.
    const ENTANGLEMENT_TOL: f64;
    /// Stopping threshold for iterative refinements.
    const CONVERGENCE_TOL: f64;

    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const HERMITIAN_TOL: f64 = 1e-10;
    const PSD_TOL: f64 = 1e-9;
    const ENTANGLEMENT_TOL: f64 = 1e-8;
    const CONVERGENCE_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const HERMITIAN_TOL: f64 = 1e-5;
    const PSD_TOL: f64 = 1e-4;
    const ENTANGLEMENT_TOL: f64 = 1e-3;
    const CONVERGENCE_TOL: f64 = 1e-6;
}

/// Numerical tolerances threaded through validation and classification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(bound = "T: Real")]
pub struct Tolerances<T: Real = f64> {
    pub hermitian: T,
    pub psd: T,
    pub entanglement: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            hermitian: T::lit(T::HERMITIAN_TOL),
            psd: T::lit(T::PSD_TOL),
            entanglement: T::lit(T::ENTANGLEMENT_TOL),
        }
    }
}

impl<T: Real> Tolerances<T> {
    /// Uses `tol` for Hermiticity and positivity while keeping the entanglement
    /// threshold at least ten times the positivity floor.
    pub fn uniform(tol: T) -> Self {
        let ent = T::lit(10.0) * tol;
        Self {
            hermitian: tol,
            psd: tol,
            entanglement: if ent > tol { ent } else { tol },
        }
    }
}
