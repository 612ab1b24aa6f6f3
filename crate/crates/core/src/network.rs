//! Independent sources feeding one central joint measurement.
//!
//! Source `j` prepares a state on `(A_j, B_j)`. The central party measures
//! `B_1…B_N` jointly; the outer parties hold `A_1…A_N`. The global state is
//! laid out as `(A_1 … A_N | B_1 … B_N)`, obtained from the source order
//! `(A_1, B_1, …, A_N, B_N)` by an explicit factor permutation.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{total_dim, Operator, PureVector};
use crate::objects::{max_entangled, white_noise, Measurement};
use crate::scalar::{Real, Tolerances};

/// `|φ⁺_d⟩⟨φ⁺_d|` for every central factor dimension `d`.
pub fn max_entangled_sources<T: Real>(dims: &[usize]) -> Result<Vec<Operator<T>>> {
    dims.iter()
        .map(|&d| Ok(max_entangled::<T>(d)?.projector()))
        .collect()
}

pub fn pure_sources<T: Real>(states: &[PureVector<T>]) -> Result<Vec<Operator<T>>> {
    states
        .iter()
        .map(|s| {
            if s.dims().len() != 2 {
                return Err(Error::InvalidState(format!(
                    "a source spans two systems, got dims {:?}",
                    s.dims()
                )));
            }
            Ok(s.clone().normalized()?.projector())
        })
        .collect()
}

/// Mixes every source with white noise at visibility `v`.
pub fn with_visibility<T: Real>(sources: &[Operator<T>], v: T) -> Result<Vec<Operator<T>>> {
    sources.iter().map(|s| white_noise(s, v)).collect()
}

/// Checks each source is a two-system density matrix whose second factor
/// matches the central factor; returns the outer dimensions.
pub fn validate_sources<T: Real>(
    sources: &[Operator<T>],
    central_dims: &[usize],
    tol: &Tolerances<T>,
) -> Result<Vec<usize>> {
    if sources.len() != central_dims.len() {
        return Err(Error::DimensionMismatch {
            expected: central_dims.len(),
            found: sources.len(),
        });
    }
    let mut outer = Vec::with_capacity(sources.len());
    for (j, (s, &d)) in sources.iter().zip(central_dims).enumerate() {
        if s.dims().len() != 2 {
            return Err(Error::InvalidState(format!(
                "source {j} has dims {:?}",
                s.dims()
            )));
        }
        if s.dims()[1] != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.dims()[1],
            });
        }
        let tr = s.trace();
        if (tr.re - T::one()).abs() > tol.psd || tr.im.abs() > tol.psd {
            return Err(Error::InvalidState(format!(
                "source {j} has trace {}",
                tr.re
            )));
        }
        if !s.is_psd(tol.psd)? {
            return Err(Error::NotPsd {
                min_eigenvalue: s.min_eigenvalue(tol.hermitian)?.as_f64(),
            });
        }
        outer.push(s.dims()[0]);
    }
    Ok(outer)
}

/// `(0, 2, …, 2N−2, 1, 3, …, 2N−1)`: source order to `(A… | B…)`.
pub fn wire_permutation(n: usize) -> Vec<usize> {
    (0..n)
        .map(|j| 2 * j)
        .chain((0..n).map(|j| 2 * j + 1))
        .collect()
}

/// `⊗_j ρ_j` in the `(A_1 … A_N | B_1 … B_N)` layout.
pub fn network_state<T: Real>(sources: &[Operator<T>]) -> Result<Operator<T>> {
    let joint = Operator::tensor_all(sources)?;
    joint.permute_factors(&wire_permutation(sources.len()))
}

/// Unnormalized outer state for each central outcome:
/// `σ_b = Tr_B[(𝟙_A ⊗ E_b) ρ]`, with `Tr σ_b = p(b)`.
pub fn conditional_states<T: Real>(
    central: &Measurement<T>,
    sources: &[Operator<T>],
    tol: &Tolerances<T>,
) -> Result<Vec<Operator<T>>> {
    let outer = validate_sources(sources, central.dims(), tol)?;
    let rho = network_state(sources)?;
    let da = total_dim(&outer);
    let db = total_dim(central.dims());
    let n = da * db;
    let rd = rho.data();
    central
        .effects()
        .par_iter()
        .map(|e| {
            let ed = e.data();
            let mut out = vec![Complex::new(T::zero(), T::zero()); da * da];
            for a in 0..da {
                for ap in 0..da {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for b in 0..db {
                        let row = &rd[(a * db + b) * n + ap * db..(a * db + b) * n + ap * db + db];
                        for bp in 0..db {
                            acc += row[bp] * ed[bp * db + b];
                        }
                    }
                    out[a * da + ap] = acc;
                }
            }
            Operator::new(outer.clone(), out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objects::bell_basis;

    #[test]
    fn wire_permutation_shape() {
        assert_eq!(wire_permutation(3), vec![0, 2, 4, 1, 3, 5]);
    }

    #[test]
    fn bell_swap_leaves_transposed_element() {
        let tol = Tolerances::default();
        let bm = bell_basis::<f64>();
        let sources = max_entangled_sources::<f64>(&[2, 2]).unwrap();
        let sigma = conditional_states(&bm, &sources, &tol).unwrap();
        for (s, e) in sigma.iter().zip(bm.effects()) {
            assert!((s.trace().re - 0.25).abs() < 1e-12);
            let expected = e.transpose().scale(0.25);
            assert!(s.max_abs_diff(&expected) < 1e-12);
        }
    }

    #[test]
    fn complex_element_comes_back_transposed() {
        let tol = Tolerances::default();
        let i = Complex::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        let h = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let z = Complex::new(0.0, 0.0);
        let v = PureVector::new(vec![2, 2], vec![h, z, z, i]).unwrap();
        let mut basis = vec![v.clone()];
        basis.push(PureVector::new(vec![2, 2], vec![h, z, z, -i]).unwrap());
        basis.push(PureVector::basis(vec![2, 2], 1).unwrap());
        basis.push(PureVector::basis(vec![2, 2], 2).unwrap());
        let m = Measurement::from_basis(vec![2, 2], &basis, "complex").unwrap();
        let sources = max_entangled_sources::<f64>(&[2, 2]).unwrap();
        let sigma = conditional_states(&m, &sources, &tol).unwrap();
        let p = v.projector();
        assert!(sigma[0].max_abs_diff(&p.transpose().scale(0.25)) < 1e-12);
        assert!(sigma[0].max_abs_diff(&p.scale(0.25)) > 0.1);
    }

    #[test]
    fn trivial_central_measurement_gives_outer_marginal() {
        let tol = Tolerances::default();
        let psi = PureVector::<f64>::from_real(vec![2, 2], &[0.8, 0.0, 0.0, 0.6]).unwrap();
        let sources = pure_sources(&[psi.clone(), psi]).unwrap();
        let id = Measurement::new(
            vec![2, 2],
            vec![Operator::identity(vec![2, 2]).unwrap()],
            "id",
        )
        .unwrap();
        let sigma = conditional_states(&id, &sources, &tol).unwrap();
        let one = sources[0].partial_trace(&[0]).unwrap();
        assert!(sigma[0].max_abs_diff(&one.tensor(&one)) < 1e-12);
    }

    #[test]
    fn source_validation() {
        let tol = Tolerances::default();
        let s = max_entangled_sources::<f64>(&[2]).unwrap();
        assert!(validate_sources(&s, &[3], &tol).is_err());
        assert!(validate_sources(&s, &[2, 2], &tol).is_err());
        let bad = vec![Operator::<f64>::identity(vec![2, 2]).unwrap()];
        assert!(validate_sources(&bad, &[2], &tol).is_err());
    }
}
