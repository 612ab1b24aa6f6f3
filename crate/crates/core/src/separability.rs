//! Separable / entangled classification of measurement elements.
//!
//! A negative eigenvalue of the partial transpose across any bipartition
//! proves entanglement. Positivity of every partial transpose proves
//! separability only for `2 ⊗ 2` and `2 ⊗ 3`; elsewhere a PPT element is
//! reported as undetermined unless an explicit product decomposition is
//! found numerically.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{digit_table, reconstruct, Operator, ProductTerm, PureVector};
use crate::objects::Measurement;
use crate::optim::{min_over_product_states, RefineBudget};
use crate::sampling::Seed;
use crate::scalar::{Real, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Separable,
    Entangled,
    Undetermined,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Separable => "separable",
            Status::Entangled => "entangled",
            Status::Undetermined => "undetermined",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum Evidence<T: Real = f64> {
    /// Partial transpose on `cut` has eigenvalue `min_eigenvalue < 0`.
    NegativePartialTranspose { cut: Vec<usize>, min_eigenvalue: T },
    /// Two-factor `2⊗2` / `2⊗3` element whose partial transpose is positive.
    PositivePartialTranspose { min_eigenvalue: T },
    /// Explicit `Σ_k c_k P_k ⊗ Q_k ⊗ …` with nonnegative weights.
    ProductDecomposition {
        terms: Vec<ProductTerm<T>>,
        residual: T,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ElementVerdict<T: Real = f64> {
    pub status: Status,
    pub evidence: Option<Evidence<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PptCheck<T: Real = f64> {
    pub holds: bool,
    pub min_eigenvalue: T,
}

#[derive(Clone, Copy, Debug)]
pub struct DecompositionSearch {
    /// Independent greedy peeling attempts.
    pub attempts: usize,
    /// Random starts per product-vector search.
    pub restarts: usize,
    pub seed: Seed,
}

impl Default for DecompositionSearch {
    fn default() -> Self {
        Self {
            attempts: 4,
            restarts: 16,
            seed: Seed::new(0),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SeparabilityOptions<T: Real = f64> {
    pub tolerances: Tolerances<T>,
    pub search: Option<DecompositionSearch>,
}

impl<T: Real> Default for SeparabilityOptions<T> {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            search: Some(DecompositionSearch::default()),
        }
    }
}

/// Largest residual accepted for a numerically found product decomposition.
pub const DECOMPOSITION_RESIDUAL: f64 = 1e-7;

/// One side of every bipartition of `n` factors, always containing factor 0.
pub fn all_cuts(n: usize) -> Vec<Vec<usize>> {
    if n < 2 {
        return Vec::new();
    }
    (0u64..1 << (n - 1))
        .map(|mask| {
            std::iter::once(0)
                .chain((1..n).filter(|&k| mask & (1 << (k - 1)) != 0))
                .collect::<Vec<_>>()
        })
        .filter(|cut| cut.len() < n)
        .collect()
}

fn check_cut(n_factors: usize, cut: &[usize]) -> Result<()> {
    if cut.is_empty() {
        return Err(Error::InvalidCut("empty side".into()));
    }
    if let Some(&bad) = cut.iter().find(|&&k| k >= n_factors) {
        return Err(Error::InvalidCut(format!(
            "factor {bad} out of range for {n_factors} factors"
        )));
    }
    let mut sorted = cut.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() >= n_factors {
        return Err(Error::InvalidCut(format!(
            "{cut:?} leaves the other side empty"
        )));
    }
    Ok(())
}

fn ensure_psd<T: Real>(element: &Operator<T>, tol: &Tolerances<T>) -> Result<()> {
    let min = element.min_eigenvalue(tol.hermitian)?;
    if min < -tol.psd {
        return Err(Error::NotPsd {
            min_eigenvalue: min.as_f64(),
        });
    }
    Ok(())
}

/// Smallest eigenvalue of the partial transpose across `cut` (the factors on
/// one side); the cut holds when it is at least `-tol.entanglement`.
pub fn ppt_check<T: Real>(
    element: &Operator<T>,
    cut: &[usize],
    tol: &Tolerances<T>,
) -> Result<PptCheck<T>> {
    check_cut(element.n_factors(), cut)?;
    ensure_psd(element, tol)?;
    let pt = element.partial_transpose_on(cut)?;
    let min_eigenvalue = pt.min_eigenvalue(tol.hermitian)?;
    Ok(PptCheck {
        holds: min_eigenvalue >= -tol.entanglement,
        min_eigenvalue,
    })
}

fn is_low_dimensional(dims: &[usize]) -> bool {
    matches!(dims, [2, 2] | [2, 3] | [3, 2])
}

/// Classifies one element: NPT on any cut means entangled; PPT in `2⊗2` or
/// `2⊗3` means separable; otherwise separable only with an explicit product
/// decomposition, else undetermined.
pub fn classify_element<T: Real>(
    element: &Operator<T>,
    opts: &SeparabilityOptions<T>,
) -> Result<ElementVerdict<T>> {
    let tol = &opts.tolerances;
    if element.n_factors() < 2 {
        return Err(Error::InvalidDims(format!(
            "element on {:?} has a single factor",
            element.dims()
        )));
    }
    ensure_psd(element, tol)?;
    let mut worst: Option<(Vec<usize>, T)> = None;
    for cut in all_cuts(element.n_factors()) {
        let min = element
            .partial_transpose_on(&cut)?
            .min_eigenvalue(tol.hermitian)?;
        if worst.as_ref().is_none_or(|(_, w)| min < *w) {
            worst = Some((cut, min));
        }
    }
    let (cut, min) = worst.expect("at least one cut");
    if min < -tol.entanglement {
        return Ok(ElementVerdict {
            status: Status::Entangled,
            evidence: Some(Evidence::NegativePartialTranspose {
                cut,
                min_eigenvalue: min,
            }),
        });
    }
    if is_low_dimensional(element.dims()) {
        return Ok(ElementVerdict {
            status: Status::Separable,
            evidence: Some(Evidence::PositivePartialTranspose {
                min_eigenvalue: min,
            }),
        });
    }
    if let Some(search) = opts.search {
        if let Some((terms, residual)) = product_decomposition(element, tol, &search)? {
            return Ok(ElementVerdict {
                status: Status::Separable,
                evidence: Some(Evidence::ProductDecomposition { terms, residual }),
            });
        }
    }
    Ok(ElementVerdict {
        status: Status::Undetermined,
        evidence: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MeasurementVerdict<T: Real = f64> {
    pub verdict: Status,
    pub per_element: Vec<ElementVerdict<T>>,
}

impl<T: Real> MeasurementVerdict<T> {
    pub fn count(&self, status: Status) -> usize {
        self.per_element
            .iter()
            .filter(|v| v.status == status)
            .count()
    }
}

/// Entangled iff some element is entangled, separable iff all are.
pub fn classify_measurement<T: Real>(
    m: &Measurement<T>,
    opts: &SeparabilityOptions<T>,
) -> Result<MeasurementVerdict<T>> {
    let per_element = m
        .effects()
        .par_iter()
        .enumerate()
        .map(|(b, e)| {
            let mut o = *opts;
            if let Some(s) = o.search.as_mut() {
                s.seed = s.seed.split(b as u64);
            }
            classify_element(e, &o)
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = if per_element.iter().any(|v| v.status == Status::Entangled) {
        Status::Entangled
    } else if per_element.iter().all(|v| v.status == Status::Separable) {
        Status::Separable
    } else {
        Status::Undetermined
    };
    Ok(MeasurementVerdict {
        verdict,
        per_element,
    })
}

/// Local factors of a product vector, or `None` if `v` is not a product.
pub fn factorize<T: Real>(
    v: &PureVector<T>,
    fidelity_tol: T,
) -> Result<Option<Vec<PureVector<T>>>> {
    let rho = v.projector();
    let mut parts = Vec::with_capacity(v.dims().len());
    for k in 0..v.dims().len() {
        let local = rho.partial_trace(&[k])?;
        let eig = local.hermitian_eig(T::infinity())?;
        parts.push(eig.max_pair().1.clone());
    }
    let u = PureVector::tensor_all(&parts)?;
    if u.overlap(v) >= T::one() - fidelity_tol {
        Ok(Some(parts))
    } else {
        Ok(None)
    }
}

fn term_from_parts<T: Real>(weight: T, parts: &[PureVector<T>]) -> ProductTerm<T> {
    ProductTerm::new(weight, parts.iter().map(|p| p.projector()).collect())
}

fn accept<T: Real>(
    element: &Operator<T>,
    terms: Vec<ProductTerm<T>>,
) -> Result<Option<(Vec<ProductTerm<T>>, T)>> {
    let residual = reconstruct(element.dims(), &terms)?.max_abs_diff(element);
    Ok((residual <= T::lit(DECOMPOSITION_RESIDUAL)).then_some((terms, residual)))
}

/// Alternates between projecting onto the range and the best rank-one
/// (product) approximation, sharpening a product vector that lies in the
/// range only up to the square-root accuracy of the variational search.
fn polish_into_range<T: Real>(
    range: &Operator<T>,
    mut parts: Vec<PureVector<T>>,
) -> Result<Vec<PureVector<T>>> {
    let dims = range.dims().to_vec();
    let table = digit_table(&dims);
    let nf = dims.len();
    for _ in 0..500 {
        let x = PureVector::tensor_all(&parts)?;
        let y = range.apply(&x)?;
        let y = match y.normalized() {
            Ok(y) => y,
            Err(_) => break,
        };
        for k in 0..nf {
            let mut local = vec![Complex::new(T::zero(), T::zero()); dims[k]];
            for (i, amp) in y.amplitudes().iter().enumerate() {
                let d = &table[i * nf..(i + 1) * nf];
                let w = (0..nf)
                    .filter(|&m| m != k)
                    .fold(Complex::new(T::one(), T::zero()), |acc, m| {
                        acc * parts[m].amplitudes()[d[m]].conj()
                    });
                local[d[k]] += w * amp;
            }
            if let Ok(u) = PureVector::new(vec![dims[k]], local)?.normalized() {
                parts[k] = u;
            }
        }
        let x = PureVector::tensor_all(&parts)?;
        let px = range.apply(&x)?;
        if x.max_abs_diff(&px) < T::epsilon() * T::lit(8.0) {
            break;
        }
    }
    Ok(parts)
}

/// Searches for `element = Σ_k c_k ⊗_j |x_kj⟩⟨x_kj|` with `c_k ≥ 0`.
///
/// First tries the spectral decomposition (all eigenvectors products), then
/// greedy peeling: pick a product vector `x` in the range of the remainder
/// `X`, subtract `|x⟩⟨x| / ⟨x|X⁺|x⟩` (the largest multiple keeping `X`
/// positive, which lowers its rank by one) and repeat.
pub fn product_decomposition<T: Real>(
    element: &Operator<T>,
    tol: &Tolerances<T>,
    search: &DecompositionSearch,
) -> Result<Option<(Vec<ProductTerm<T>>, T)>> {
    let scale = element.max_abs();
    if scale <= tol.psd {
        return Ok(Some((Vec::new(), scale)));
    }
    let fid_tol = T::lit(1e-10);
    let eig = element.hermitian_eig(tol.hermitian)?;
    let floor = tol.psd * scale.max(T::one());
    let mut spectral = Vec::new();
    let mut all_product = true;
    for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
        if *lambda <= floor {
            continue;
        }
        match factorize(v, fid_tol)? {
            Some(parts) => spectral.push(term_from_parts(*lambda, &parts)),
            None => {
                all_product = false;
                break;
            }
        }
    }
    if all_product {
        if let Some(found) = accept(element, spectral)? {
            return Ok(Some(found));
        }
    }

    let dims = element.dims().to_vec();
    let id = Operator::identity(dims.clone())?;
    let budget = RefineBudget::default();
    for attempt in 0..search.attempts {
        let mut rest = element.clone();
        let mut terms = Vec::new();
        let mut ok = false;
        for step in 0..=element.dim() {
            if rest.max_abs() <= T::lit(1e-3) * T::lit(DECOMPOSITION_RESIDUAL) * scale.max(T::one())
            {
                ok = true;
                break;
            }
            let e = rest.hermitian_eig(T::infinity())?;
            let top = e.values[e.values.len() - 1];
            let thr = top * T::lit(1e-9);
            let mut range = Operator::zeros(dims.clone())?;
            let mut pinv = Operator::zeros(dims.clone())?;
            for (lambda, v) in e.values.iter().zip(&e.vectors) {
                if *lambda > thr {
                    let p = v.projector();
                    range = &range + &p;
                    pinv = &pinv + &p.scale(T::one() / *lambda);
                }
            }
            let outside = &id - &range;
            let seed = search.seed.split((attempt * 4096 + step) as u64);
            let best = min_over_product_states(&outside, search.restarts, seed, budget)?;
            if best.value > T::lit(1e-9) {
                break;
            }
            let parts = polish_into_range(&range, best.states)?;
            let x = PureVector::tensor_all(&parts)?;
            let inv = pinv.expectation(&x).re;
            if inv <= T::zero() {
                break;
            }
            let weight = T::one() / inv;
            terms.push(term_from_parts(weight, &parts));
            rest = (&rest - &x.projector().scale(weight)).symmetrized();
        }
        if ok {
            if let Some(found) = accept(element, terms)? {
                return Ok(Some(found));
            }
        }
    }
    Ok(None)
}
