//! Swap-steering: a trusted tomographic party against an untrusted joint
//! measurement, with the functional `S_b = Σ_i β_i p(0, b | i)`.
//!
//! The trusted party measures `{τ_{i_1} ⊗ … ⊗ τ_{i_N}, 𝟙 − τ_{i_1} ⊗ … ⊗ τ_{i_N}}`
//! on `A_1 … A_N`. Any separable outcome-independent hidden-state model gives
//! `S_b = −p(b) Tr(W ρ̄_b) ≤ 0` with `ρ̄_b` separable.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{digits, total_dim, Operator, PureVector};
use crate::network::conditional_states;
use crate::objects::{Measurement, TomographicBasis};
use crate::sampling::{random_density_matrix, random_simplex};
use crate::scalar::{Real, Tolerances};
use crate::witness::{witness_for_measurement, BetaTensor, Witness};

/// `p(a, b | i_1 … i_N)` for `a ∈ {0, 1}`, stored as `probs[(b·|I| + i)·2 + a]`
/// with `i` the row-major flat input index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CorrelationTable<T: Real = f64> {
    pub local_dims: Vec<usize>,
    /// Inputs per site, `d_j²`.
    pub shape: Vec<usize>,
    pub n_outcomes: usize,
    pub basis_id: String,
    pub probs: Vec<T>,
}

impl<T: Real> CorrelationTable<T> {
    pub fn n_parties(&self) -> usize {
        self.local_dims.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn p(&self, a: usize, b: usize, input: usize) -> T {
        self.probs[(b * self.n_inputs() + input) * 2 + a]
    }

    /// `p(b)` read at input 0.
    pub fn marginal(&self, b: usize) -> T {
        self.p(0, b, 0) + self.p(1, b, 0)
    }

    /// Range, no-signaling of `b`, and normalization, all within `tol`.
    pub fn check(&self, tol: T) -> Result<()> {
        let ni = self.n_inputs();
        if self.probs.len() != self.n_outcomes * ni * 2 {
            return Err(Error::ShapeMismatch(format!(
                "{} probabilities for {} outcomes × {ni} inputs × 2",
                self.probs.len(),
                self.n_outcomes
            )));
        }
        for &p in &self.probs {
            if !(p >= -tol && p <= T::one() + tol) {
                return Err(Error::ProbabilityOutOfRange(p.as_f64()));
            }
        }
        let mut total = T::zero();
        for b in 0..self.n_outcomes {
            let pb = self.marginal(b);
            total += pb;
            for i in 1..ni {
                let q = self.p(0, b, i) + self.p(1, b, i);
                if (q - pb).abs() > tol {
                    return Err(Error::InvalidModel(format!(
                        "p(b={b}) depends on the trusted input: {} vs {}",
                        q.as_f64(),
                        pb.as_f64()
                    )));
                }
            }
        }
        if (total - T::one()).abs() > tol {
            return Err(Error::InvalidModel(format!(
                "Σ_b p(b) = {}",
                total.as_f64()
            )));
        }
        Ok(())
    }
}

/// Hidden states of one source and their weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HiddenSource<T: Real = f64> {
    pub weights: Vec<T>,
    pub states: Vec<Operator<T>>,
}

/// Separable outcome-independent hidden-state model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SohsModel<T: Real = f64> {
    pub sources: Vec<HiddenSource<T>>,
    pub n_outcomes: usize,
    /// `p(b | λ_1 … λ_N)`, row-major over `(λ_1, …, λ_N, b)`.
    pub response: Vec<T>,
}

impl<T: Real> SohsModel<T> {
    pub fn hidden_shape(&self) -> Vec<usize> {
        self.sources.iter().map(|s| s.states.len()).collect()
    }

    pub fn validate(&self, tol: &Tolerances<T>) -> Result<()> {
        if self.sources.is_empty() || self.n_outcomes == 0 {
            return Err(Error::InvalidModel("empty model".into()));
        }
        for (j, s) in self.sources.iter().enumerate() {
            if s.weights.len() != s.states.len() || s.states.is_empty() {
                return Err(Error::InvalidModel(format!(
                    "source {j}: weights and states differ in length"
                )));
            }
            let sum: T = s.weights.iter().copied().sum();
            if s.weights.iter().any(|&w| w < -tol.psd) || (sum - T::one()).abs() > tol.psd {
                return Err(Error::InvalidModel(format!(
                    "source {j}: weights are not a distribution"
                )));
            }
            let d = s.states[0].dims().to_vec();
            for rho in &s.states {
                if rho.dims() != d.as_slice() || rho.dims().len() != 1 {
                    return Err(Error::InvalidModel(format!(
                        "source {j}: inconsistent hidden-state dims"
                    )));
                }
                if (rho.trace().re - T::one()).abs() > tol.psd || !rho.is_psd(tol.psd)? {
                    return Err(Error::InvalidModel(format!(
                        "source {j}: hidden state is not a density matrix"
                    )));
                }
            }
        }
        let cells: usize = self.hidden_shape().iter().product();
        if self.response.len() != cells * self.n_outcomes {
            return Err(Error::InvalidModel(
                "response table has the wrong size".into(),
            ));
        }
        for row in self.response.chunks(self.n_outcomes) {
            let sum: T = row.iter().copied().sum();
            if row.iter().any(|&p| p < -tol.psd) || (sum - T::one()).abs() > tol.psd {
                return Err(Error::InvalidModel(
                    "response is not a conditional distribution".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Random model: up to `max_hidden` mixed hidden states per source, random
/// weights and responses.
pub fn random_sohs_model<T: Real, R: Rng + ?Sized>(
    local_dims: &[usize],
    max_hidden: usize,
    n_outcomes: usize,
    rng: &mut R,
) -> Result<SohsModel<T>> {
    if max_hidden == 0 || n_outcomes == 0 {
        return Err(Error::InvalidArgument(
            "need at least one hidden state and one outcome".into(),
        ));
    }
    let mut sources = Vec::with_capacity(local_dims.len());
    for &d in local_dims {
        let k = rng.random_range(1..=max_hidden);
        let mut states = Vec::with_capacity(k);
        for _ in 0..k {
            let rank = rng.random_range(1..=d);
            states.push(random_density_matrix(&[d], rank, rng)?);
        }
        sources.push(HiddenSource {
            weights: random_simplex(k, rng),
            states,
        });
    }
    let cells: usize = sources.iter().map(|s| s.states.len()).product();
    let mut response = Vec::with_capacity(cells * n_outcomes);
    for _ in 0..cells {
        response.extend(random_simplex::<T, _>(n_outcomes, rng));
    }
    Ok(SohsModel {
        sources,
        n_outcomes,
        response,
    })
}

fn check_bases<T: Real>(local_dims: &[usize], bases: &[&TomographicBasis<T>]) -> Result<()> {
    if local_dims.len() != bases.len() {
        return Err(Error::DimensionMismatch {
            expected: local_dims.len(),
            found: bases.len(),
        });
    }
    for (&d, b) in local_dims.iter().zip(bases) {
        if b.local_dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: b.local_dim(),
            });
        }
    }
    Ok(())
}

fn joined_id<T: Real>(bases: &[&TomographicBasis<T>]) -> String {
    let first = bases.first().map(|b| b.id()).unwrap_or("");
    if bases.iter().all(|b| b.id() == first) {
        first.to_string()
    } else {
        bases.iter().map(|b| b.id()).collect::<Vec<_>>().join(",")
    }
}

/// Outcome-0 effect `τ_{i_1} ⊗ … ⊗ τ_{i_N}` of the trusted party.
pub fn alice_effect<T: Real>(
    bases: &[&TomographicBasis<T>],
    inputs: &[usize],
) -> Result<Operator<T>> {
    if inputs.len() != bases.len() {
        return Err(Error::DimensionMismatch {
            expected: bases.len(),
            found: inputs.len(),
        });
    }
    let parts = inputs
        .iter()
        .zip(bases)
        .map(|(&i, b)| b.projector(i).cloned())
        .collect::<Result<Vec<_>>>()?;
    Operator::tensor_all(&parts)
}

fn product_vector<T: Real>(bases: &[&TomographicBasis<T>], idx: &[usize]) -> Result<PureVector<T>> {
    let parts: Vec<PureVector<T>> = idx
        .iter()
        .zip(bases)
        .map(|(&i, b)| b.vectors()[i].clone())
        .collect();
    PureVector::tensor_all(&parts)
}

/// Born-rule table for the central measurement fed by `sources`, each on
/// `(A_j, B_j)`.
pub fn quantum_correlations<T: Real>(
    bob: &Measurement<T>,
    sources: &[Operator<T>],
    bases: &[&TomographicBasis<T>],
    tol: &Tolerances<T>,
) -> Result<CorrelationTable<T>> {
    let sigma = conditional_states(bob, sources, tol)?;
    let local_dims = sigma[0].dims().to_vec();
    check_bases(&local_dims, bases)?;
    let shape: Vec<usize> = bases.iter().map(|b| b.len()).collect();
    let ni: usize = shape.iter().product();
    let mut vectors = Vec::with_capacity(ni);
    let mut idx = vec![0; shape.len()];
    for flat in 0..ni {
        digits(flat, &shape, &mut idx);
        vectors.push(product_vector(bases, &idx)?);
    }
    let per_b: Vec<Vec<T>> = sigma
        .par_iter()
        .map(|s| {
            let pb = s.trace().re;
            let mut row = Vec::with_capacity(ni * 2);
            for v in &vectors {
                let p0 = s.expectation(v).re.max(T::zero()).min(pb);
                row.push(p0);
                row.push(pb - p0);
            }
            row
        })
        .collect();
    Ok(CorrelationTable {
        local_dims,
        shape,
        n_outcomes: bob.len(),
        basis_id: joined_id(bases),
        probs: per_b.concat(),
    })
}

/// `Tr(τ_k ρ)` for every hidden state of every source.
fn local_scores<T: Real>(model: &SohsModel<T>, bases: &[&TomographicBasis<T>]) -> Vec<Vec<Vec<T>>> {
    model
        .sources
        .iter()
        .zip(bases)
        .map(|(s, b)| {
            s.states
                .iter()
                .map(|rho| b.vectors().iter().map(|v| rho.expectation(v).re).collect())
                .collect()
        })
        .collect()
}

/// Table generated by a hidden-state model with honest trusted measurements.
pub fn sohs_correlations<T: Real>(
    model: &SohsModel<T>,
    bases: &[&TomographicBasis<T>],
    tol: &Tolerances<T>,
) -> Result<CorrelationTable<T>> {
    model.validate(tol)?;
    let local_dims: Vec<usize> = model.sources.iter().map(|s| s.states[0].dim()).collect();
    check_bases(&local_dims, bases)?;
    let shape: Vec<usize> = bases.iter().map(|b| b.len()).collect();
    let ni: usize = shape.iter().product();
    let hshape = model.hidden_shape();
    let cells: usize = hshape.iter().product();
    let scores = local_scores(model, bases);
    let nb = model.n_outcomes;
    let mut probs = vec![T::zero(); nb * ni * 2];
    let mut lam = vec![0; hshape.len()];
    let mut idx = vec![0; shape.len()];
    for cell in 0..cells {
        digits(cell, &hshape, &mut lam);
        let w: T = lam
            .iter()
            .enumerate()
            .fold(T::one(), |acc, (j, &l)| acc * model.sources[j].weights[l]);
        let resp = &model.response[cell * nb..(cell + 1) * nb];
        for i in 0..ni {
            digits(i, &shape, &mut idx);
            let p0 = idx
                .iter()
                .enumerate()
                .fold(T::one(), |acc, (j, &k)| acc * scores[j][lam[j]][k]);
            for (b, &r) in resp.iter().enumerate() {
                let base = (b * ni + i) * 2;
                probs[base] += w * r * p0;
                probs[base + 1] += w * r * (T::one() - p0);
            }
        }
    }
    Ok(CorrelationTable {
        local_dims,
        shape,
        n_outcomes: nb,
        basis_id: joined_id(bases),
        probs,
    })
}

/// `max_b Σ_i β_i p(0, b | i)`, lowest `b` on ties.
pub fn functional_s<T: Real>(
    table: &CorrelationTable<T>,
    beta: &BetaTensor<T>,
) -> Result<(T, usize)> {
    if beta.shape != table.shape {
        return Err(Error::ShapeMismatch(format!(
            "β shape {:?} vs table inputs {:?}",
            beta.shape, table.shape
        )));
    }
    let ni = table.n_inputs();
    let mut best = (T::neg_infinity(), 0);
    for b in 0..table.n_outcomes {
        let s: T = (0..ni).map(|i| beta.values[i] * table.p(0, b, i)).sum();
        if s > best.0 {
            best = (s, b);
        }
    }
    Ok(best)
}

/// Per-outcome values `S_b`, in outcome order.
pub fn functional_s_per_b<T: Real>(
    table: &CorrelationTable<T>,
    beta: &BetaTensor<T>,
) -> Result<Vec<T>> {
    if beta.shape != table.shape {
        return Err(Error::ShapeMismatch(format!(
            "β shape {:?} vs table inputs {:?}",
            beta.shape, table.shape
        )));
    }
    let ni = table.n_inputs();
    Ok((0..table.n_outcomes)
        .map(|b| (0..ni).map(|i| beta.values[i] * table.p(0, b, i)).sum())
        .collect())
}

/// Value with maximally entangled sources: Alice is left with `E_b^T / D`,
/// so `S_b = −Tr(W E_b^T) / D` with `D = Π d_j`. Lowest `b` on ties.
pub fn quantum_value_closed_form<T: Real>(
    bob: &Measurement<T>,
    w: &Witness<T>,
) -> Result<(T, usize)> {
    if w.beta().is_none() {
        return Err(Error::MissingBeta);
    }
    if w.dims() != bob.dims() {
        return Err(Error::DimensionMismatch {
            expected: total_dim(bob.dims()),
            found: w.operator().dim(),
        });
    }
    let d = T::from_usize_lossy(total_dim(bob.dims()));
    let mut best = (T::neg_infinity(), 0);
    for (b, e) in bob.effects().iter().enumerate() {
        let v = -w.operator().trace_inner_re(&e.transpose())? / d;
        if v > best.0 {
            best = (v, b);
        }
    }
    Ok(best)
}

/// Witness for the swap-steering test of `bob`: built from the transposed
/// elements (what the trusted side actually receives) and expanded over
/// `bases`.
pub fn steering_witness<T: Real>(
    bob: &Measurement<T>,
    bases: &[&TomographicBasis<T>],
    tol: &Tolerances<T>,
) -> Result<(usize, Witness<T>)> {
    let transposed = Measurement::new(
        bob.dims().to_vec(),
        bob.effects().iter().map(|e| e.transpose()).collect(),
        bob.name(),
    )?;
    let (b, _, w) = witness_for_measurement(&transposed, tol)?;
    Ok((b, w.with_beta(bases)?))
}

/// `Σ_i β_i Π_j Tr(τ_{i_j} ρ_j)`: the score of a single product hidden state.
/// Equals `−Tr(W ρ_1 ⊗ … ⊗ ρ_N)`.
pub fn product_score<T: Real>(
    beta: &BetaTensor<T>,
    bases: &[&TomographicBasis<T>],
    states: &[Operator<T>],
) -> Result<T> {
    let dims: Vec<usize> = states.iter().map(|s| s.dim()).collect();
    check_bases(&dims, bases)?;
    let shape: Vec<usize> = bases.iter().map(|b| b.len()).collect();
    if beta.shape != shape {
        return Err(Error::ShapeMismatch(format!(
            "β shape {:?} vs {shape:?}",
            beta.shape
        )));
    }
    let scores: Vec<Vec<T>> = states
        .iter()
        .zip(bases)
        .map(|(rho, b)| b.vectors().iter().map(|v| rho.expectation(v).re).collect())
        .collect();
    let mut idx = vec![0; shape.len()];
    let mut acc = T::zero();
    for (flat, &bv) in beta.values.iter().enumerate() {
        digits(flat, &shape, &mut idx);
        acc += bv
            * idx
                .iter()
                .enumerate()
                .fold(T::one(), |p, (j, &k)| p * scores[j][k]);
    }
    Ok(acc)
}

/// Largest visibility `v ∈ [0, 1]` at which `S(v) ≤ 0`, by bisection on the
/// simulated table with every source mixed at visibility `v`. `None` if
/// `S(1) ≤ 0`.
pub fn visibility_threshold<T: Real>(
    bob: &Measurement<T>,
    sources: &[Operator<T>],
    bases: &[&TomographicBasis<T>],
    beta: &BetaTensor<T>,
    tol: &Tolerances<T>,
) -> Result<Option<T>> {
    let value = |v: T| -> Result<T> {
        let noisy = crate::network::with_visibility(sources, v)?;
        Ok(functional_s(&quantum_correlations(bob, &noisy, bases, tol)?, beta)?.0)
    };
    if value(T::one())? <= T::zero() {
        return Ok(None);
    }
    let (mut lo, mut hi) = (T::zero(), T::one());
    for _ in 0..60 {
        let mid = (lo + hi) * T::lit(0.5);
        if value(mid)? > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{max_entangled_sources, pure_sources};
    use crate::objects::{bell_basis, maximally_mixed, tomographic_basis};
    use crate::sampling::Seed;
    use crate::witness::{builtin_wbm, builtin_wbm_prime};

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn qubit_bases() -> TomographicBasis<f64> {
        tomographic_basis(2).unwrap()
    }

    #[test]
    fn alice_effect_examples() {
        let b = qubit_bases();
        let e = alice_effect(&[&b], &[0]).unwrap();
        assert!(e.max_abs_diff(&b.projectors()[0]) < 1e-15);
        let e2 = alice_effect(&[&b, &b], &[1, 3]).unwrap();
        assert_eq!(e2.dim(), 4);
        let eig = e2.hermitian_eig(1e-10).unwrap();
        let rank = eig.values.iter().filter(|v| v.abs() > 1e-9).count();
        assert_eq!(rank, 1);
        let comp = &Operator::identity(vec![2, 2]).unwrap() - &e2;
        assert!(comp.is_psd(1e-12).unwrap());
        assert!(alice_effect(&[&b], &[4]).is_err());
    }

    #[test]
    fn bm_scenario_gives_one_eighth() {
        let b = qubit_bases();
        let bm = bell_basis::<f64>();
        let sources = max_entangled_sources::<f64>(&[2, 2]).unwrap();
        let table = quantum_correlations(&bm, &sources, &[&b, &b], &tol()).unwrap();
        table.check(1e-9).unwrap();
        for k in 0..4 {
            assert!((table.marginal(k) - 0.25).abs() < 1e-12);
        }
        for w in [builtin_wbm_prime::<f64>(), builtin_wbm()] {
            let w = w.with_beta(&[&b, &b]).unwrap();
            let (s, arg) = functional_s(&table, w.beta().unwrap()).unwrap();
            assert!((s - 0.125).abs() < 1e-9, "S = {s}");
            assert_eq!(arg, 0);
            let (c, _) = quantum_value_closed_form(&bm, &w).unwrap();
            assert!((c - 0.125).abs() < 1e-12);
        }
    }

    #[test]
    fn trivial_bob_factorizes() {
        let b = qubit_bases();
        let psi = PureVector::<f64>::from_real(vec![2, 2], &[0.6, 0.0, 0.0, 0.8]).unwrap();
        let sources = pure_sources(&[psi.clone(), psi]).unwrap();
        let id = Measurement::new(
            vec![2, 2],
            vec![Operator::identity(vec![2, 2]).unwrap()],
            "id",
        )
        .unwrap();
        let table = quantum_correlations(&id, &sources, &[&b, &b], &tol()).unwrap();
        let rho_a = sources[0].partial_trace(&[0]).unwrap();
        for i in 0..16 {
            let (i1, i2) = (i / 4, i % 4);
            let e = rho_a.trace_inner_re(b.projector(i1).unwrap()).unwrap()
                * rho_a.trace_inner_re(b.projector(i2).unwrap()).unwrap();
            assert!((table.p(0, 0, i) - e).abs() < 1e-12);
        }
    }

    #[test]
    fn sohs_examples() {
        let b = qubit_bases();
        let mixed = maximally_mixed::<f64>(vec![2]).unwrap();
        let model = SohsModel {
            sources: vec![
                HiddenSource {
                    weights: vec![1.0],
                    states: vec![mixed.clone()],
                },
                HiddenSource {
                    weights: vec![1.0],
                    states: vec![mixed],
                },
            ],
            n_outcomes: 2,
            response: vec![1.0, 0.0],
        };
        let t = sohs_correlations(&model, &[&b, &b], &tol()).unwrap();
        t.check(1e-12).unwrap();
        for i in 0..16 {
            assert!((t.p(0, 0, i) - 0.25).abs() < 1e-12);
            assert_eq!(t.p(0, 1, i), 0.0);
            assert_eq!(t.p(1, 1, i), 0.0);
        }
        let bad = SohsModel {
            response: vec![0.5, 0.4],
            ..model
        };
        assert!(sohs_correlations(&bad, &[&b, &b], &tol()).is_err());
    }

    #[test]
    fn zero_beta_and_shape_errors() {
        let b = qubit_bases();
        let bm = bell_basis::<f64>();
        let sources = max_entangled_sources::<f64>(&[2, 2]).unwrap();
        let table = quantum_correlations(&bm, &sources, &[&b, &b], &tol()).unwrap();
        let zero = BetaTensor::zeros(vec![4, 4]);
        assert_eq!(functional_s(&table, &zero).unwrap(), (0.0, 0));
        assert!(functional_s(&table, &BetaTensor::zeros(vec![4])).is_err());
        assert!(matches!(
            quantum_value_closed_form(&bm, &builtin_wbm_prime()),
            Err(Error::MissingBeta)
        ));
    }

    #[test]
    fn separable_bob_closed_form_nonpositive() {
        let b = qubit_bases();
        let comp = Measurement::<f64>::computational(vec![2, 2]).unwrap();
        let w = builtin_wbm::<f64>().with_beta(&[&b, &b]).unwrap();
        assert!(quantum_value_closed_form(&comp, &w).unwrap().0 <= 1e-12);
    }

    #[test]
    fn sohs_bound_small_sample() {
        let b = qubit_bases();
        let w = builtin_wbm_prime::<f64>().with_beta(&[&b, &b]).unwrap();
        let mut rng = Seed::new(9).rng();
        for _ in 0..50 {
            let m = random_sohs_model::<f64, _>(&[2, 2], 4, 3, &mut rng).unwrap();
            let t = sohs_correlations(&m, &[&b, &b], &tol()).unwrap();
            t.check(1e-9).unwrap();
            assert!(functional_s(&t, w.beta().unwrap()).unwrap().0 <= 1e-9);
        }
    }

    #[test]
    fn product_score_is_minus_witness_trace() {
        let b = qubit_bases();
        let w = builtin_wbm::<f64>().with_beta(&[&b, &b]).unwrap();
        let mut rng = Seed::new(3).rng();
        for _ in 0..10 {
            let r1 = random_density_matrix::<f64, _>(&[2], 2, &mut rng).unwrap();
            let r2 = random_density_matrix::<f64, _>(&[2], 1, &mut rng).unwrap();
            let s = product_score(w.beta().unwrap(), &[&b, &b], &[r1.clone(), r2.clone()]).unwrap();
            let t = w.operator().trace_inner_re(&r1.tensor(&r2)).unwrap();
            assert!((s + t).abs() < 1e-10);
        }
    }

    #[test]
    fn threshold_for_bm() {
        let b = qubit_bases();
        let bm = bell_basis::<f64>();
        let sources = max_entangled_sources::<f64>(&[2, 2]).unwrap();
        let w = builtin_wbm_prime::<f64>().with_beta(&[&b, &b]).unwrap();
        let v = visibility_threshold(&bm, &sources, &[&b, &b], w.beta().unwrap(), &tol())
            .unwrap()
            .unwrap();
        // Swapping two Werner states leaves visibility v², so S_0 = (2v² − 1)/8.
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9, "{v}");
    }
}
