//! Numeric search for two-qubit witnesses with few correlation terms.
//!
//! Candidates have the form `c𝟙 − Σ_{k≤K} P_k ⊗ Q_k` with rank-one local
//! projectors. The smallest valid `c` is the largest product-state value of
//! `A = Σ P_k ⊗ Q_k`, so the detection margin against a measurement is
//! `max_b Tr(A E_b) − max_{product} Tr(A σ)`. This is evidence only: the
//! product maximum is estimated by local refinement from random starts.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Operator, PureVector};
use crate::objects::Measurement;
use crate::optim::{min_over_product_states, RefineBudget};
use crate::sampling::{complex_gaussian, random_pure_state, Seed};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub max_terms: usize,
    pub starts: usize,
    pub steps: usize,
    /// Refinement restarts used for the product maximum during the climb.
    pub restarts: usize,
    /// Restarts for the final check of each reported candidate.
    pub verify_restarts: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_terms: 4,
            starts: 16,
            steps: 200,
            restarts: 6,
            verify_restarts: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchRow {
    pub terms: usize,
    pub margin: f64,
    pub quantum_max: f64,
    pub product_max: f64,
    pub detecting: bool,
    /// Local vectors `(p_k, q_k)` of the best candidate.
    pub pairs: Vec<(PureVector<f64>, PureVector<f64>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub rows: Vec<SearchRow>,
    pub min_detecting_terms: Option<usize>,
}

pub const DETECTION_MARGIN: f64 = 1e-6;

struct Candidate<T: Real> {
    pairs: Vec<(PureVector<T>, PureVector<T>)>,
}

impl<T: Real> Candidate<T> {
    fn operator(&self) -> Operator<T> {
        let mut acc = Operator::zeros(vec![2, 2]).expect("qubit pair");
        for (p, q) in &self.pairs {
            acc = &acc + &p.projector().tensor(&q.projector());
        }
        acc
    }
}

fn evaluate<T: Real>(
    a: &Operator<T>,
    m: &Measurement<T>,
    restarts: usize,
    seed: Seed,
) -> Result<(T, T)> {
    let mut qmax = T::neg_infinity();
    for e in m.effects() {
        qmax = qmax.max(a.trace_inner_re(e)?);
    }
    let neg = a.scale(-T::one());
    let pmax = -min_over_product_states(&neg, restarts, seed, RefineBudget::default())?.value;
    Ok((qmax, pmax))
}

fn perturb<T: Real, R: Rng + ?Sized>(v: &PureVector<T>, step: T, rng: &mut R) -> PureVector<T> {
    let amps = v
        .amplitudes()
        .iter()
        .map(|a| *a + complex_gaussian::<T, _>(rng) * step)
        .collect();
    PureVector::new(v.dims().to_vec(), amps)
        .and_then(|p| p.normalized())
        .unwrap_or_else(|_| v.clone())
}

fn climb<T: Real>(
    m: &Measurement<T>,
    terms: usize,
    opts: &SearchOptions,
    seed: Seed,
) -> Result<(Candidate<T>, T)> {
    let mut rng = seed.rng();
    let mut pairs = Vec::with_capacity(terms);
    for _ in 0..terms {
        pairs.push((
            random_pure_state(&[2], &mut rng)?,
            random_pure_state(&[2], &mut rng)?,
        ));
    }
    let mut cur = Candidate { pairs };
    let (q, p) = evaluate(&cur.operator(), m, opts.restarts, seed.split(0))?;
    let mut margin = q - p;
    let mut step = T::lit(0.4);
    for s in 0..opts.steps {
        let k = rng.random_range(0..terms);
        let mut next = Candidate {
            pairs: cur.pairs.clone(),
        };
        if rng.random_bool(0.5) {
            next.pairs[k].0 = perturb(&next.pairs[k].0, step, &mut rng);
        } else {
            next.pairs[k].1 = perturb(&next.pairs[k].1, step, &mut rng);
        }
        let (q, p) = evaluate(&next.operator(), m, opts.restarts, seed.split(s as u64 + 1))?;
        if q - p > margin {
            margin = q - p;
            cur = next;
        } else {
            step = (step * T::lit(0.98)).max(T::lit(0.02));
        }
    }
    Ok((cur, margin))
}

fn to_f64<T: Real>(v: &PureVector<T>) -> PureVector<f64> {
    let amps = v
        .amplitudes()
        .iter()
        .map(|a| num_complex::Complex::new(a.re.as_f64(), a.im.as_f64()))
        .collect();
    PureVector::new(v.dims().to_vec(), amps).expect("same shape")
}

/// Best margin found for each `K = 1..=max_terms`.
pub fn term_search<T: Real>(m: &Measurement<T>, opts: &SearchOptions) -> Result<SearchReport> {
    if m.dims() != [2, 2] {
        return Err(Error::Unsupported(
            "term search covers two-qubit measurements only".into(),
        ));
    }
    if opts.max_terms == 0 || opts.starts == 0 {
        return Err(Error::InvalidArgument(
            "term search needs at least one term and one start".into(),
        ));
    }
    let base = Seed::new(opts.seed);
    let mut rows = Vec::new();
    for k in 1..=opts.max_terms {
        let kseed = base.split(k as u64);
        let results: Vec<Result<(Candidate<T>, T)>> = (0..opts.starts)
            .into_par_iter()
            .map(|s| climb(m, k, opts, kseed.split(s as u64)))
            .collect();
        let mut best: Option<(Candidate<T>, T)> = None;
        for r in results {
            let r = r?;
            if best.as_ref().is_none_or(|(_, v)| r.1 > *v) {
                best = Some(r);
            }
        }
        let (cand, _) = best.expect("at least one start");
        let (q, p) = evaluate(
            &cand.operator(),
            m,
            opts.verify_restarts,
            kseed.with_stream(u64::MAX),
        )?;
        let margin = (q - p).as_f64();
        rows.push(SearchRow {
            terms: k,
            margin,
            quantum_max: q.as_f64(),
            product_max: p.as_f64(),
            detecting: margin > DETECTION_MARGIN,
            pairs: cand
                .pairs
                .iter()
                .map(|(p, q)| (to_f64(p), to_f64(q)))
                .collect(),
        });
    }
    let min_detecting_terms = rows.iter().find(|r| r.detecting).map(|r| r.terms);
    Ok(SearchReport {
        rows,
        min_detecting_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objects::bell_basis;

    #[test]
    fn search_on_bell_basis_is_reproducible() {
        let opts = SearchOptions {
            max_terms: 2,
            starts: 2,
            steps: 20,
            restarts: 3,
            verify_restarts: 8,
            seed: 5,
        };
        let a = term_search(&bell_basis::<f64>(), &opts).unwrap();
        let b = term_search(&bell_basis::<f64>(), &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2);
    }

    #[test]
    fn single_term_never_detects() {
        // A single product projector attains its maximum on a product state.
        let opts = SearchOptions {
            max_terms: 1,
            starts: 3,
            steps: 30,
            ..Default::default()
        };
        let r = term_search(&bell_basis::<f64>(), &opts).unwrap();
        assert!(!r.rows[0].detecting);
    }

    #[test]
    fn trine_witness_detects_with_three_terms() {
        // Trine states on the XZ great circle: product maximum 9/8, while
        // Tr(A φ⁺) = 3/2.
        let mut a = Operator::<f64>::zeros(vec![2, 2]).unwrap();
        for k in 0..3 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let t = PureVector::<f64>::from_real(vec![2], &[(th / 2.0).cos(), (th / 2.0).sin()])
                .unwrap();
            a = &a + &t.projector().tensor(&t.projector());
        }
        let w = &Operator::identity(vec![2, 2]).unwrap().scale(1.125) - &a;
        let phi = crate::objects::bell_states::<f64>()[0].projector();
        assert!((w.trace_inner_re(&phi).unwrap() + 0.375).abs() < 1e-12);
        let m = min_over_product_states(&w, 200, Seed::new(1), RefineBudget::default()).unwrap();
        assert!(m.value >= -1e-12 && m.value < 1e-9, "{}", m.value);
    }

    #[test]
    fn rejects_non_qubit_pairs() {
        let m = Measurement::<f64>::computational(vec![2, 3]).unwrap();
        assert!(term_search(&m, &SearchOptions::default()).is_err());
    }
}
