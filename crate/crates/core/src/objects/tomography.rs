use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{invert_real, solve_real, Operator, PureVector};
use crate::scalar::Real;

/// `d²` rank-one projectors spanning the Hermitian operators on `ℂ^d`.
///
/// The Gram matrix `G_kl = Tr(τ_k τ_l)` and its inverse are kept so that
/// expansions in the set are a single matrix-vector product; the Gram
/// condition number is reported for callers who want to compare sets.
#[derive(Clone, Debug)]
pub struct TomographicBasis<T: Real = f64> {
    d: usize,
    id: String,
    vectors: Vec<PureVector<T>>,
    projectors: Vec<Operator<T>>,
    gram: Vec<T>,
    gram_inv: Vec<T>,
    condition_number: T,
}

impl<T: Real> TomographicBasis<T> {
    /// Builds a set from user-supplied pure states (normalized on entry).
    pub fn from_states(id: impl Into<String>, states: Vec<PureVector<T>>) -> Result<Self> {
        let d = states
            .first()
            .map(|v| v.dim())
            .ok_or_else(|| Error::SingularGram("empty set".into()))?;
        if states.len() != d * d {
            return Err(Error::SingularGram(format!(
                "{} states for local dimension {d}, need {}",
                states.len(),
                d * d
            )));
        }
        let vectors: Vec<PureVector<T>> = states
            .into_iter()
            .map(|v| {
                if v.dims() != [d] {
                    return Err(Error::InvalidDims(format!(
                        "tomographic state on {:?}, expected [{d}]",
                        v.dims()
                    )));
                }
                v.normalized()
            })
            .collect::<Result<_>>()?;
        let m = d * d;
        let mut gram = vec![T::zero(); m * m];
        for k in 0..m {
            for l in 0..m {
                gram[k * m + l] = vectors[k].overlap(&vectors[l]);
            }
        }
        let gram_op = Operator::new(
            vec![m],
            gram.iter().map(|&g| Complex::new(g, T::zero())).collect(),
        )?;
        let eig = gram_op.hermitian_eig(T::lit(T::HERMITIAN_TOL))?;
        let (lo, hi) = (eig.values[0], eig.values[m - 1]);
        if lo <= hi * T::epsilon() * T::lit(1e3) {
            return Err(Error::SingularGram(format!(
                "Gram matrix eigenvalues span [{lo:e}, {hi:e}]"
            )));
        }
        let gram_inv = invert_real(&gram, m)?;
        let projectors = vectors.iter().map(|v| v.projector()).collect();
        Ok(Self {
            d,
            id: id.into(),
            vectors,
            projectors,
            gram,
            gram_inv,
            condition_number: hi / lo,
        })
    }

    /// Looks a built-in set up by identifier. Only `"standard"` exists.
    pub fn by_id(id: &str, d: usize) -> Result<Self> {
        match id {
            "standard" => tomographic_basis(d),
            other => Err(Error::InvalidArgument(format!(
                "unknown tomographic basis id {other:?}"
            ))),
        }
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn vectors(&self) -> &[PureVector<T>] {
        &self.vectors
    }

    pub fn projectors(&self) -> &[Operator<T>] {
        &self.projectors
    }

    pub fn projector(&self, k: usize) -> Result<&Operator<T>> {
        self.projectors.get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            limit: self.projectors.len(),
        })
    }

    /// Row-major `d² × d²` Gram matrix.
    pub fn gram(&self) -> &[T] {
        &self.gram
    }

    pub fn gram_inverse(&self) -> &[T] {
        &self.gram_inv
    }

    pub fn condition_number(&self) -> T {
        self.condition_number
    }

    /// Coefficients `c` with `H = Σ_k c_k τ_k` for Hermitian `H` on `ℂ^d`.
    pub fn expand(&self, h: &Operator<T>) -> Result<Vec<T>> {
        if h.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: h.dim(),
            });
        }
        let mut rhs: Vec<T> = self
            .projectors
            .iter()
            .map(|t| t.trace_inner_re(h))
            .collect::<Result<_>>()?;
        solve_real(self.gram.clone(), self.len(), &mut rhs)?;
        Ok(rhs)
    }

    pub fn combine(&self, coeffs: &[T]) -> Result<Operator<T>> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: coeffs.len(),
            });
        }
        let mut acc = Operator::zeros(vec![self.d])?;
        for (c, t) in coeffs.iter().zip(&self.projectors) {
            acc = &acc + &t.scale(*c);
        }
        Ok(acc)
    }
}

/// Default set: `|k⟩` for every `k`, then `(|j⟩ + |k⟩)/√2` and then
/// `(|j⟩ + i|k⟩)/√2` for every `j < k`. For qubits this is
/// `{|0⟩, |1⟩, |+⟩, |+i⟩}`.
pub fn tomographic_basis<T: Real>(d: usize) -> Result<TomographicBasis<T>> {
    if d < 2 {
        return Err(Error::InvalidDims(format!("local dimension {d} < 2")));
    }
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let zero = Complex::new(T::zero(), T::zero());
    let mut states = Vec::with_capacity(d * d);
    for k in 0..d {
        states.push(PureVector::basis(vec![d], k)?);
    }
    for phase in [Complex::new(h, T::zero()), Complex::new(T::zero(), h)] {
        for j in 0..d {
            for k in j + 1..d {
                let mut amps = vec![zero; d];
                amps[j] = Complex::new(h, T::zero());
                amps[k] = phase;
                states.push(PureVector::new(vec![d], amps)?);
            }
        }
    }
    TomographicBasis::from_states("standard", states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objects::mu_state;

    #[test]
    fn qubit_set_matches_named_states() {
        let b = tomographic_basis::<f64>(2).unwrap();
        assert_eq!(b.len(), 4);
        let expected = [(0, 0), (0, 1), (1, 0), (2, 0)];
        for (v, (i, j)) in b.vectors().iter().zip(expected) {
            assert!(v.max_abs_diff(&mu_state(i, j).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn qubit_gram_determinant_is_nonzero() {
        // G = [[1,0,.5,.5],[0,1,.5,.5],[.5,.5,1,.5],[.5,.5,.5,1]], det = 1/4
        let b = tomographic_basis::<f64>(2).unwrap();
        let g = b.gram();
        let expected = [
            1.0, 0.0, 0.5, 0.5, 0.0, 1.0, 0.5, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 0.5, 1.0,
        ];
        for (a, e) in g.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
        assert!(b.condition_number().is_finite() && b.condition_number() > 1.0);
    }

    #[test]
    fn qutrit_set_has_nine_projectors() {
        let b = tomographic_basis::<f64>(3).unwrap();
        assert_eq!(b.len(), 9);
        for t in b.projectors() {
            assert!((t * t).max_abs_diff(t) < 1e-12);
        }
    }

    #[test]
    fn rejects_incomplete_sets() {
        assert!(tomographic_basis::<f64>(1).is_err());
        let s: Vec<PureVector> = (0..4)
            .map(|_| PureVector::basis(vec![2], 0).unwrap())
            .collect();
        assert!(matches!(
            TomographicBasis::from_states("bad", s),
            Err(Error::SingularGram(_))
        ));
    }

    #[test]
    fn expansion_roundtrip_qutrit() {
        let b = tomographic_basis::<f64>(3).unwrap();
        let h = Operator::new(
            vec![3],
            vec![
                Complex::new(0.3, 0.0),
                Complex::new(0.1, 0.4),
                Complex::new(-0.2, 0.1),
                Complex::new(0.1, -0.4),
                Complex::new(-1.0, 0.0),
                Complex::new(0.0, 0.7),
                Complex::new(-0.2, -0.1),
                Complex::new(0.0, -0.7),
                Complex::new(0.5, 0.0),
            ],
        )
        .unwrap();
        let c = b.expand(&h).unwrap();
        assert!(b.combine(&c).unwrap().max_abs_diff(&h) < 1e-12);
    }
}
