//! Local refinement over pure product states.
//!
//! The objective `Tr(W σ_1 ⊗ … ⊗ σ_N)` is minimized one site at a time:
//! with all other sites fixed it is a quadratic form in the remaining local
//! vector, whose exact minimizer is the lowest eigenvector of the
//! environment-contracted `d × d` operator. Each step therefore never
//! increases the objective.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{digit_table, Operator, PureVector};
use crate::sampling::{random_product_state, Seed};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineBudget {
    pub max_sweeps: usize,
    pub tol: f64,
}

impl Default for RefineBudget {
    fn default() -> Self {
        Self {
            max_sweeps: 200,
            tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Refinement<T: Real> {
    pub value: T,
    pub states: Vec<PureVector<T>>,
    /// Objective after every single-site update, starting with the initial value.
    pub history: Vec<T>,
}

/// `d_k × d_k` operator `H` with `⟨x|H|x⟩ = ⟨x ⊗ v|W|x ⊗ v⟩`, where `v` is
/// the product of the other sites' vectors.
pub fn environment<T: Real>(
    op: &Operator<T>,
    states: &[PureVector<T>],
    site: usize,
) -> Operator<T> {
    let dims = op.dims();
    let nf = dims.len();
    let n = op.dim();
    let table = digit_table(dims);
    let weights: Vec<Complex<T>> = (0..n)
        .map(|i| {
            let d = &table[i * nf..(i + 1) * nf];
            (0..nf)
                .filter(|&m| m != site)
                .fold(Complex::new(T::one(), T::zero()), |acc, m| {
                    acc * states[m].amplitudes()[d[m]]
                })
        })
        .collect();
    let dk = dims[site];
    let mut h = vec![Complex::new(T::zero(), T::zero()); dk * dk];
    let data = op.data();
    for i in 0..n {
        let wi = weights[i].conj();
        if wi.norm_sqr() == T::zero() {
            continue;
        }
        let a = table[i * nf + site];
        for j in 0..n {
            let b = table[j * nf + site];
            h[a * dk + b] += wi * data[i * n + j] * weights[j];
        }
    }
    Operator::new(vec![dk], h)
        .expect("environment shape")
        .symmetrized()
}

/// `⟨ψ|W|ψ⟩` for `ψ = ⊗ states`.
pub fn product_expectation<T: Real>(op: &Operator<T>, states: &[PureVector<T>]) -> Result<T> {
    let psi = PureVector::tensor_all(states)?;
    if psi.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: psi.dim(),
        });
    }
    Ok(op.expectation(&psi).re)
}

fn check_start<T: Real>(op: &Operator<T>, start: &[PureVector<T>]) -> Result<()> {
    if start.len() != op.n_factors() || start.iter().zip(op.dims()).any(|(v, &d)| v.dim() != d) {
        return Err(Error::ShapeMismatch(format!(
            "start states do not match factor dims {:?}",
            op.dims()
        )));
    }
    Ok(())
}

/// Coordinate-wise minimization of `Tr(W σ_1 ⊗ … ⊗ σ_N)` over pure product states.
pub fn refine_product_state<T: Real>(
    op: &Operator<T>,
    start: Vec<PureVector<T>>,
    budget: RefineBudget,
) -> Result<Refinement<T>> {
    check_start(op, &start)?;
    if budget.max_sweeps == 0 {
        return Err(Error::InvalidArgument(
            "refinement budget must be ≥ 1".into(),
        ));
    }
    let herm_tol = T::lit(T::HERMITIAN_TOL).max(op.max_abs() * T::epsilon() * T::lit(64.0));
    if !op.is_hermitian(herm_tol) {
        return Err(Error::NotHermitian {
            deviation: op.hermitian_deviation().as_f64(),
        });
    }
    let op = op.symmetrized();
    let mut states = start
        .into_iter()
        .map(|v| v.normalized())
        .collect::<Result<Vec<_>>>()?;
    let mut value = product_expectation(&op, &states)?;
    let mut history = vec![value];
    let tol = T::lit(budget.tol);
    for _ in 0..budget.max_sweeps {
        let before = value;
        for site in 0..states.len() {
            let env = environment(&op, &states, site);
            let eig = env.hermitian_eig(T::infinity())?;
            let (lambda, v) = eig.min_pair();
            // keep the old vector when the step would not improve
            if lambda < value {
                states[site] = v.clone();
                value = lambda;
            }
            history.push(value);
        }
        if before - value < tol {
            break;
        }
    }
    Ok(Refinement {
        value,
        states,
        history,
    })
}

/// Best value over `restarts` random starts, each refined to convergence.
///
/// Restart `k` draws its start from `seed.split(k)`; ties go to the lowest
/// restart index, so the result is independent of thread count.
pub fn min_over_product_states<T: Real>(
    op: &Operator<T>,
    restarts: usize,
    seed: Seed,
    budget: RefineBudget,
) -> Result<Refinement<T>> {
    if restarts == 0 {
        return Err(Error::InvalidArgument(
            "at least one restart required".into(),
        ));
    }
    let results: Vec<Result<Refinement<T>>> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.split(k as u64).rng();
            let start = random_product_state(op.dims(), &mut rng)?;
            refine_product_state(op, start, budget)
        })
        .collect();
    let mut best: Option<Refinement<T>> = None;
    for r in results {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    Ok(best.expect("restarts > 0"))
}
