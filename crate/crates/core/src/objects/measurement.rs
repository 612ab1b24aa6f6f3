use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dims, total_dim, Operator, PureVector};
use crate::scalar::{Real, Tolerances};

/// A POVM `{E_b}` on a composite space: positive effects summing to the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "MeasurementRecord<T>",
    into = "MeasurementRecord<T>",
    bound = "T: Real"
)]
pub struct Measurement<T: Real = f64> {
    dims: Vec<usize>,
    effects: Vec<Operator<T>>,
    name: String,
    projective: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MeasurementRecord<T: Real> {
    pub dims: Vec<usize>,
    pub effects: Vec<Operator<T>>,
    #[serde(default)]
    pub name: String,
}

impl<T: Real> TryFrom<MeasurementRecord<T>> for Measurement<T> {
    type Error = Error;

    fn try_from(r: MeasurementRecord<T>) -> Result<Self> {
        Measurement::new(r.dims, r.effects, r.name)
    }
}

impl<T: Real> From<Measurement<T>> for MeasurementRecord<T> {
    fn from(m: Measurement<T>) -> Self {
        MeasurementRecord {
            dims: m.dims,
            effects: m.effects,
            name: m.name,
        }
    }
}

impl<T: Real> Measurement<T> {
    pub fn new(
        dims: Vec<usize>,
        effects: Vec<Operator<T>>,
        name: impl Into<String>,
    ) -> Result<Self> {
        Self::with_tolerances(dims, effects, name, &Tolerances::default())
    }

    /// Validates positivity, completeness and records whether the effects
    /// are mutually orthogonal projectors.
    pub fn with_tolerances(
        dims: Vec<usize>,
        effects: Vec<Operator<T>>,
        name: impl Into<String>,
        tol: &Tolerances<T>,
    ) -> Result<Self> {
        check_dims(&dims)?;
        if effects.is_empty() {
            return Err(Error::InvalidMeasurement("no effects".into()));
        }
        let n = total_dim(&dims);
        let mut fixed = Vec::with_capacity(effects.len());
        for (b, e) in effects.into_iter().enumerate() {
            if e.dim() != n {
                return Err(Error::InvalidMeasurement(format!(
                    "effect {b} has dimension {}, expected {n}",
                    e.dim()
                )));
            }
            let e = e.with_dims(dims.clone())?;
            let dev = e.hermitian_deviation();
            if dev > tol.hermitian {
                return Err(Error::InvalidMeasurement(format!(
                    "effect {b} is not Hermitian (deviation {:e})",
                    dev.as_f64()
                )));
            }
            let min = e.min_eigenvalue(tol.hermitian)?;
            if min < -tol.psd {
                return Err(Error::InvalidMeasurement(format!(
                    "effect {b} is not positive (min eigenvalue {:e})",
                    min.as_f64()
                )));
            }
            fixed.push(e);
        }
        let mut sum = Operator::zeros(dims.clone())?;
        for e in &fixed {
            sum = &sum + e;
        }
        let id = Operator::identity(dims.clone())?;
        let gap = sum.max_abs_diff(&id);
        if gap > tol.psd {
            return Err(Error::InvalidMeasurement(format!(
                "effects do not sum to the identity (max deviation {:e})",
                gap.as_f64()
            )));
        }
        let projective = is_projective(&fixed, tol.psd);
        Ok(Self {
            dims,
            effects: fixed,
            name: name.into(),
            projective,
        })
    }

    /// Rank-one projective measurement from an orthonormal basis.
    pub fn from_basis(
        dims: Vec<usize>,
        basis: &[PureVector<T>],
        name: impl Into<String>,
    ) -> Result<Self> {
        let effects = basis.iter().map(|v| v.projector()).collect();
        Self::new(dims, effects, name)
    }

    /// `{|i⟩⟨i|}` over every computational basis state.
    pub fn computational(dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        let n = total_dim(&dims);
        let basis: Result<Vec<_>> = (0..n).map(|i| PureVector::basis(dims.clone(), i)).collect();
        Self::from_basis(dims, &basis?, "computational")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn effects(&self) -> &[Operator<T>] {
        &self.effects
    }

    pub fn effect(&self, b: usize) -> Result<&Operator<T>> {
        self.effects.get(b).ok_or(Error::IndexOutOfRange {
            index: b,
            limit: self.effects.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_projective(&self) -> bool {
        self.projective
    }

    /// Projective with every effect of rank at most one.
    pub fn is_rank_one_projective(&self, tol: T) -> bool {
        self.projective
            && self.effects.iter().all(|e| {
                let tr = e.trace().re;
                (tr - T::one()).abs() <= tol || tr.abs() <= tol
            })
    }
}

fn is_projective<T: Real>(effects: &[Operator<T>], tol: T) -> bool {
    for (i, a) in effects.iter().enumerate() {
        for (j, b) in effects.iter().enumerate().skip(i) {
            let prod = a * b;
            let target = if i == j {
                a.clone()
            } else {
                Operator::zeros(a.dims().to_vec()).expect("valid dims")
            };
            if prod.max_abs_diff(&target) > tol {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objects::bell_basis;

    #[test]
    fn computational_basis_is_projective() {
        let m: Measurement = Measurement::computational(vec![2, 2]).unwrap();
        assert_eq!(m.len(), 4);
        assert!(m.is_projective());
        assert!(m.is_rank_one_projective(1e-9));
    }

    #[test]
    fn rejects_incomplete_effects() {
        let e: Operator = PureVector::basis(vec![2], 0).unwrap().projector();
        let err = Measurement::new(vec![2], vec![e], "broken").unwrap_err();
        assert!(matches!(err, Error::InvalidMeasurement(msg) if msg.contains("sum")));
    }

    #[test]
    fn rejects_negative_effect() {
        let a: Operator = Operator::from_real(vec![2], &[1.5, 0.0, 0.0, 0.5]).unwrap();
        let b: Operator = Operator::from_real(vec![2], &[-0.5, 0.0, 0.0, 0.5]).unwrap();
        let err = Measurement::new(vec![2], vec![a, b], "neg").unwrap_err();
        assert!(matches!(err, Error::InvalidMeasurement(msg) if msg.contains("positive")));
    }

    #[test]
    fn noisy_povm_is_not_projective() {
        let a: Operator = Operator::from_real(vec![2], &[0.75, 0.0, 0.0, 0.25]).unwrap();
        let b: Operator = Operator::from_real(vec![2], &[0.25, 0.0, 0.0, 0.75]).unwrap();
        let m = Measurement::new(vec![2], vec![a, b], "unsharp").unwrap();
        assert!(!m.is_projective());
    }

    #[test]
    fn file_record_validates_on_load() {
        let json = serde_json::to_string(&bell_basis::<f64>()).unwrap();
        let back: Measurement = serde_json::from_str(&json).unwrap();
        assert_eq!(back.name(), "bell");
        assert!(back.is_projective());
        let bad = r#"{"dims":[2],"effects":[{"dims":[2],"re":[1,0,0,0]}],"name":"x"}"#;
        assert!(serde_json::from_str::<Measurement>(bad).is_err());
    }
}
