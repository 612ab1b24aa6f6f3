use serde::{Deserialize, Serialize};

use super::Operator;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `coefficient · F_1 ⊗ F_2 ⊗ …` with one local operator per tensor factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ProductTerm<T: Real = f64> {
    pub coefficient: T,
    pub factors: Vec<Operator<T>>,
}

impl<T: Real> ProductTerm<T> {
    pub fn new(coefficient: T, factors: Vec<Operator<T>>) -> Self {
        Self {
            coefficient,
            factors,
        }
    }

    pub fn to_operator(&self) -> Result<Operator<T>> {
        Ok(Operator::tensor_all(&self.factors)?.scale(self.coefficient))
    }

    /// True when every factor equals the identity, i.e. the term needs no
    /// measured correlation.
    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|f| {
            Operator::identity(f.dims().to_vec())
                .map(|id| id.max_abs_diff(f) <= T::epsilon())
                .unwrap_or(false)
        })
    }
}

/// Sum of product terms; all terms must share the factor structure `dims`.
pub fn reconstruct<T: Real>(dims: &[usize], terms: &[ProductTerm<T>]) -> Result<Operator<T>> {
    let mut acc = Operator::zeros(dims.to_vec())?;
    for term in terms {
        let op = term.to_operator()?;
        if op.dims() != dims {
            return Err(Error::ShapeMismatch(format!(
                "product term on {:?}, expected {dims:?}",
                op.dims()
            )));
        }
        acc = &acc + &op;
    }
    Ok(acc)
}
