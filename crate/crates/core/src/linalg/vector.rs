use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{check_dims, compose, total_dim, Operator};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A state vector on a composite space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "VectorRecord<T>",
    into = "VectorRecord<T>",
    bound = "T: Real"
)]
pub struct PureVector<T: Real = f64> {
    dims: Vec<usize>,
    amps: Vec<Complex<T>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VectorRecord<T: Real> {
    pub dims: Vec<usize>,
    pub re: Vec<T>,
    #[serde(default)]
    pub im: Vec<T>,
}

impl<T: Real> TryFrom<VectorRecord<T>> for PureVector<T> {
    type Error = Error;

    fn try_from(r: VectorRecord<T>) -> Result<Self> {
        let im = if r.im.is_empty() {
            vec![T::zero(); r.re.len()]
        } else {
            r.im
        };
        if im.len() != r.re.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} real parts vs {} imaginary parts",
                r.re.len(),
                im.len()
            )));
        }
        let amps =
            r.re.into_iter()
                .zip(im)
                .map(|(a, b)| Complex::new(a, b))
                .collect();
        PureVector::new(r.dims, amps)?.normalized()
    }
}

impl<T: Real> From<PureVector<T>> for VectorRecord<T> {
    fn from(v: PureVector<T>) -> Self {
        VectorRecord {
            re: v.amps.iter().map(|c| c.re).collect(),
            im: v.amps.iter().map(|c| c.im).collect(),
            dims: v.dims,
        }
    }
}

impl<T: Real> PureVector<T> {
    /// Wraps amplitudes without normalizing them.
    pub fn new(dims: Vec<usize>, amps: Vec<Complex<T>>) -> Result<Self> {
        check_dims(&dims)?;
        let n = total_dim(&dims);
        if amps.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: amps.len(),
            });
        }
        if let Some(p) = amps
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::NonFinite(p));
        }
        Ok(Self { dims, amps })
    }

    pub fn from_real(dims: Vec<usize>, amps: &[f64]) -> Result<Self> {
        let amps = amps
            .iter()
            .map(|&a| Complex::new(T::lit(a), T::zero()))
            .collect();
        Self::new(dims, amps)
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        check_dims(&dims)?;
        let n = total_dim(&dims);
        if index >= n {
            return Err(Error::IndexOutOfRange { index, limit: n });
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); n];
        amps[index] = Complex::new(T::one(), T::zero());
        Ok(Self { dims, amps })
    }

    /// Basis vector given by per-factor digits, e.g. `&[0, 1]` for `|01⟩`.
    pub fn basis_digits(dims: Vec<usize>, index: &[usize]) -> Result<Self> {
        if index.len() != dims.len() || index.iter().zip(&dims).any(|(i, d)| i >= d) {
            return Err(Error::InvalidArgument(format!(
                "basis digits {index:?} do not fit dims {dims:?}"
            )));
        }
        let flat = compose(index, &dims);
        Self::basis(dims, flat)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm(&self) -> T {
        self.amps.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n <= T::min_positive_value() {
            return Err(Error::ZeroNorm);
        }
        let inv = T::one() / n;
        self.amps.iter_mut().for_each(|c| *c = *c * inv);
        Ok(self)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a.conj() * b
            })
    }

    pub fn conj(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn scaled(&self, s: Complex<T>) -> Self {
        Self {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|c| c * s).collect(),
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, amps }
    }

    /// Tensor product of a nonempty list of vectors.
    pub fn tensor_all(parts: &[Self]) -> Result<Self> {
        let (first, rest) = parts
            .split_first()
            .ok_or_else(|| Error::InvalidArgument("empty tensor product".into()))?;
        Ok(rest.iter().fold(first.clone(), |acc, v| acc.tensor(v)))
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> Operator<T> {
        let n = self.amps.len();
        let mut data = Vec::with_capacity(n * n);
        for a in &self.amps {
            for b in &self.amps {
                data.push(a * b.conj());
            }
        }
        Operator::from_parts_unchecked(self.dims.clone(), data)
    }

    /// Reorders tensor factors so that new factor `k` is old factor `perm[k]`.
    pub fn permute_factors(&self, perm: &[usize]) -> Result<Self> {
        let map = super::operator::permutation_map(&self.dims, perm)?;
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let amps = map.iter().map(|&old| self.amps[old]).collect();
        Ok(Self {
            dims: new_dims,
            amps,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        if self.amps.len() != other.amps.len() {
            return T::infinity();
        }
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    /// Fidelity-style overlap `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }
}
