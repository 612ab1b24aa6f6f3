//! Witnesses for entangled measurements and their local decompositions.
//!
//! A witness `W` satisfies `Tr(W σ) ≥ 0` on every separable operator and
//! `Tr(W E) < 0` on the targeted entangled element. For the swap-steering
//! functional it is rewritten as `W = −Σ β_{i_1…i_N} τ_{i_1} ⊗ … ⊗ τ_{i_N}`
//! over a tomographically complete local set `{τ_i}`.

mod builtin;
pub mod search;

pub use builtin::{builtin_wbm, builtin_wbm_prime, mu_sum_unconjugated};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{digit_table, reconstruct, total_dim, Operator, ProductTerm, PureVector};
use crate::objects::{Measurement, TomographicBasis};
use crate::optim::{min_over_product_states as refine_multistart, RefineBudget, Refinement};
use crate::sampling::Seed;
use crate::scalar::{Real, Tolerances};
use crate::separability::all_cuts;

/// Reconstruction tolerance for product terms and β expansions.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// Coefficients `β` over the product tomographic family, row-major with one
/// axis per site (axis length `d_j²`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BetaTensor<T: Real = f64> {
    pub shape: Vec<usize>,
    pub values: Vec<T>,
    /// Max-abs error of `−Σ β τ ⊗ … ⊗ τ` against the witness operator.
    pub residual: T,
}

impl<T: Real> BetaTensor<T> {
    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            values: vec![T::zero(); n],
            residual: T::zero(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn flat_index(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.shape.len() || index.iter().zip(&self.shape).any(|(i, s)| i >= s) {
            return Err(Error::ShapeMismatch(format!(
                "index {index:?} for β of shape {:?}",
                self.shape
            )));
        }
        Ok(crate::linalg::compose(index, &self.shape))
    }

    pub fn get(&self, index: &[usize]) -> Result<T> {
        Ok(self.values[self.flat_index(index)?])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "WitnessRecord<T>",
    into = "WitnessRecord<T>",
    bound = "T: Real"
)]
pub struct Witness<T: Real = f64> {
    operator: Operator<T>,
    beta: Option<BetaTensor<T>>,
    product_terms: Option<Vec<ProductTerm<T>>>,
    basis_id: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WitnessRecord<T: Real> {
    pub operator: Operator<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaTensor<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product_terms: Option<Vec<ProductTerm<T>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_id: Option<String>,
}

impl<T: Real> TryFrom<WitnessRecord<T>> for Witness<T> {
    type Error = Error;

    /// Rechecks Hermiticity, the product terms and, when the basis id names
    /// known sets, the β expansion.
    fn try_from(r: WitnessRecord<T>) -> Result<Self> {
        let mut w = Witness::new(r.operator, &Tolerances::default())?;
        if let Some(terms) = r.product_terms {
            w = w.with_product_terms(terms)?;
        }
        if let Some(beta) = r.beta {
            let id = r.basis_id.clone().unwrap_or_else(|| "standard".into());
            let ids: Vec<&str> = id.split(',').collect();
            let bases = w
                .dims()
                .iter()
                .enumerate()
                .map(|(k, &d)| {
                    TomographicBasis::by_id(
                        ids.get(k).or(ids.first()).copied().unwrap_or("standard"),
                        d,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&TomographicBasis<T>> = bases.iter().collect();
            let rebuilt = rebuild_from_beta(&beta, &refs)?;
            let err = rebuilt.max_abs_diff(&w.operator);
            if err > T::lit(RECONSTRUCTION_TOL) {
                return Err(Error::ShapeMismatch(format!(
                    "β reproduces the witness only to {:e}",
                    err.as_f64()
                )));
            }
            w.beta = Some(BetaTensor {
                residual: err,
                ..beta
            });
        }
        w.basis_id = r.basis_id;
        Ok(w)
    }
}

impl<T: Real> From<Witness<T>> for WitnessRecord<T> {
    fn from(w: Witness<T>) -> Self {
        Self {
            operator: w.operator,
            beta: w.beta,
            product_terms: w.product_terms,
            basis_id: w.basis_id,
        }
    }
}

impl<T: Real> Witness<T> {
    pub fn new(operator: Operator<T>, tol: &Tolerances<T>) -> Result<Self> {
        let dev = operator.hermitian_deviation();
        if dev > tol.hermitian {
            return Err(Error::NotHermitian {
                deviation: dev.as_f64(),
            });
        }
        Ok(Self {
            operator: operator.symmetrized(),
            beta: None,
            product_terms: None,
            basis_id: None,
        })
    }

    /// Attaches a product decomposition after checking it reproduces the operator.
    pub fn with_product_terms(mut self, terms: Vec<ProductTerm<T>>) -> Result<Self> {
        let rebuilt = reconstruct(self.operator.dims(), &terms)?;
        let err = rebuilt.max_abs_diff(&self.operator);
        if err > T::lit(RECONSTRUCTION_TOL) {
            return Err(Error::ShapeMismatch(format!(
                "product terms reproduce the witness only to {:e}",
                err.as_f64()
            )));
        }
        self.product_terms = Some(terms);
        Ok(self)
    }

    /// Computes and attaches `β` for one tomographic set per site.
    pub fn with_beta(mut self, bases: &[&TomographicBasis<T>]) -> Result<Self> {
        let beta = beta_coefficients(&self, bases)?;
        self.basis_id = Some(bases.iter().map(|b| b.id()).collect::<Vec<_>>().join(","));
        self.beta = Some(beta);
        Ok(self)
    }

    pub fn operator(&self) -> &Operator<T> {
        &self.operator
    }

    pub fn dims(&self) -> &[usize] {
        self.operator.dims()
    }

    pub fn beta(&self) -> Option<&BetaTensor<T>> {
        self.beta.as_ref()
    }

    pub fn product_terms(&self) -> Option<&[ProductTerm<T>]> {
        self.product_terms.as_deref()
    }

    pub fn basis_id(&self) -> Option<&str> {
        self.basis_id.as_deref()
    }

    /// Number of product terms that require a measured correlation (terms
    /// whose factors are all identities are free).
    pub fn correlation_count(&self) -> Option<usize> {
        self.product_terms
            .as_ref()
            .map(|t| t.iter().filter(|p| !p.is_identity()).count())
    }

    /// Largest `|λ|` of the operator. Witnesses are not normalized.
    pub fn scale(&self) -> Result<T> {
        let eig = self.operator.hermitian_eig(T::infinity())?;
        Ok(eig.values[0].abs().max(eig.max_pair().0.abs()))
    }

    /// Transposed witness (acts on transposed elements); drops `β` and terms.
    pub fn transposed(&self) -> Self {
        Self {
            operator: self.operator.transpose(),
            beta: None,
            product_terms: self.product_terms.as_ref().map(|terms| {
                terms
                    .iter()
                    .map(|t| {
                        ProductTerm::new(
                            t.coefficient,
                            t.factors.iter().map(|f| f.transpose()).collect(),
                        )
                    })
                    .collect()
            }),
            basis_id: None,
        }
    }
}

/// `W = (|η⟩⟨η|)^{T_cut}` with `η` the lowest eigenvector of `element^{T_cut}`.
///
/// For any product `σ`, `Tr(W σ) = ⟨η|σ^{T_cut}|η⟩ ≥ 0`, while
/// `Tr(W E) = λ_min(E^{T_cut}) < 0`.
pub fn witness_from_element<T: Real>(
    element: &Operator<T>,
    cut: &[usize],
    tol: &Tolerances<T>,
) -> Result<Witness<T>> {
    let check = crate::separability::ppt_check(element, cut, tol)?;
    if check.holds {
        return Err(Error::PptElement {
            min_eigenvalue: check.min_eigenvalue.as_f64(),
        });
    }
    let pt = element.partial_transpose_on(cut)?;
    let eig = pt.hermitian_eig(tol.hermitian)?;
    let (_, eta) = eig.min_pair();
    let w = eta.projector().partial_transpose_on(cut)?;
    Witness::new(w, tol)
}

/// Picks the element and cut with the most negative partial-transpose
/// eigenvalue (lowest element index, then first cut, on ties) and builds its
/// witness.
pub fn witness_for_measurement<T: Real>(
    m: &Measurement<T>,
    tol: &Tolerances<T>,
) -> Result<(usize, Vec<usize>, Witness<T>)> {
    let mut best: Option<(usize, Vec<usize>, T)> = None;
    for (b, e) in m.effects().iter().enumerate() {
        for cut in all_cuts(e.n_factors()) {
            let min = e
                .partial_transpose_on(&cut)?
                .min_eigenvalue(tol.hermitian)?;
            if best
                .as_ref()
                .is_none_or(|(_, _, v)| min < *v - tol.entanglement * T::lit(1e-3))
            {
                best = Some((b, cut, min));
            }
        }
    }
    let (b, cut, min) = best.ok_or_else(|| Error::InvalidMeasurement("no bipartite cut".into()))?;
    if min >= -tol.entanglement {
        return Err(Error::PptElement {
            min_eigenvalue: min.as_f64(),
        });
    }
    let w = witness_from_element(&m.effects()[b], &cut, tol)?;
    Ok((b, cut, w))
}

/// `min_b Tr(W E_b)` and the lowest index attaining it.
pub fn verify_witness<T: Real>(w: &Witness<T>, m: &Measurement<T>) -> Result<(T, usize)> {
    if w.operator.dim() != total_dim(m.dims()) {
        return Err(Error::DimensionMismatch {
            expected: w.operator.dim(),
            found: total_dim(m.dims()),
        });
    }
    let mut best = (T::infinity(), 0);
    for (b, e) in m.effects().iter().enumerate() {
        let v = w.operator.trace_inner_re(e)?;
        if v < best.0 {
            best = (v, b);
        }
    }
    Ok(best)
}

fn check_bases<T: Real>(dims: &[usize], bases: &[&TomographicBasis<T>]) -> Result<()> {
    if bases.len() != dims.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} tomographic sets for {} sites",
            bases.len(),
            dims.len()
        )));
    }
    for (k, (b, &d)) in bases.iter().zip(dims).enumerate() {
        if b.local_dim() != d {
            return Err(Error::ShapeMismatch(format!(
                "site {k} has dimension {d}, tomographic set is for {}",
                b.local_dim()
            )));
        }
    }
    Ok(())
}

/// Applies `M_k` along axis `k` of a row-major tensor, for every `k`.
fn apply_modewise<T: Real>(values: &mut Vec<T>, shape: &[usize], mats: &[&[T]]) {
    let total: usize = shape.iter().product();
    for (axis, mat) in mats.iter().enumerate() {
        let m = shape[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let outer = total / (m * inner);
        let mut out = vec![T::zero(); total];
        for o in 0..outer {
            for r in 0..m {
                for c in 0..m {
                    let coef = mat[r * m + c];
                    if coef == T::zero() {
                        continue;
                    }
                    let src = (o * m + c) * inner;
                    let dst = (o * m + r) * inner;
                    for i in 0..inner {
                        out[dst + i] += coef * values[src + i];
                    }
                }
            }
        }
        *values = out;
    }
}

/// Solves `W = −Σ β_{i_1…i_N} τ_{i_1} ⊗ … ⊗ τ_{i_N}` for `β`.
///
/// The product family's Gram matrix is the Kronecker product of the local
/// Gram matrices, so `β = −(G_1⁻¹ ⊗ … ⊗ G_N⁻¹) t` with
/// `t_{i} = Tr(W τ_{i_1} ⊗ … ⊗ τ_{i_N})`.
pub fn beta_coefficients<T: Real>(
    w: &Witness<T>,
    bases: &[&TomographicBasis<T>],
) -> Result<BetaTensor<T>> {
    let dims = w.dims().to_vec();
    check_bases(&dims, bases)?;
    let shape: Vec<usize> = bases.iter().map(|b| b.len()).collect();
    let total: usize = shape.iter().product();
    let nf = dims.len();
    let mut idx = vec![0; nf];
    let mut values = Vec::with_capacity(total);
    for flat in 0..total {
        crate::linalg::digits(flat, &shape, &mut idx);
        let parts: Vec<PureVector<T>> = idx
            .iter()
            .zip(bases)
            .map(|(&i, b)| b.vectors()[i].clone())
            .collect();
        let t = PureVector::tensor_all(&parts)?;
        values.push(-w.operator.expectation(&t).re);
    }
    let inverses: Vec<&[T]> = bases.iter().map(|b| b.gram_inverse()).collect();
    apply_modewise(&mut values, &shape, &inverses);
    let mut beta = BetaTensor {
        shape,
        values,
        residual: T::zero(),
    };
    let rebuilt = rebuild_from_beta(&beta, bases)?;
    beta.residual = rebuilt.max_abs_diff(&w.operator);
    Ok(beta)
}

/// Same set on every one of `n_parties` sites.
pub fn beta_coefficients_uniform<T: Real>(
    w: &Witness<T>,
    basis: &TomographicBasis<T>,
    n_parties: usize,
) -> Result<BetaTensor<T>> {
    let bases = vec![basis; n_parties];
    beta_coefficients(w, &bases)
}

/// `−Σ β τ ⊗ … ⊗ τ`.
pub fn rebuild_from_beta<T: Real>(
    beta: &BetaTensor<T>,
    bases: &[&TomographicBasis<T>],
) -> Result<Operator<T>> {
    let dims: Vec<usize> = bases.iter().map(|b| b.local_dim()).collect();
    let shape: Vec<usize> = bases.iter().map(|b| b.len()).collect();
    if shape != beta.shape {
        return Err(Error::ShapeMismatch(format!(
            "β shape {:?} vs tomographic shape {shape:?}",
            beta.shape
        )));
    }
    let n = total_dim(&dims);
    let nf = dims.len();
    let table = digit_table(&dims);
    let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
    let mut idx = vec![0; nf];
    for (flat, &b) in beta.values.iter().enumerate() {
        if b == T::zero() {
            continue;
        }
        crate::linalg::digits(flat, &shape, &mut idx);
        let amps: Vec<&[Complex<T>]> = idx
            .iter()
            .zip(bases)
            .map(|(&i, basis)| basis.vectors()[i].amplitudes())
            .collect();
        let vec: Vec<Complex<T>> = (0..n)
            .map(|r| {
                let d = &table[r * nf..(r + 1) * nf];
                (0..nf).fold(Complex::new(T::one(), T::zero()), |acc, k| {
                    acc * amps[k][d[k]]
                })
            })
            .collect();
        for r in 0..n {
            let vr = vec[r] * (-b);
            for c in 0..n {
                data[r * n + c] += vr * vec[c].conj();
            }
        }
    }
    Operator::new(dims, data)
}

/// Lowest `Tr(W σ_1 ⊗ … ⊗ σ_N)` found over pure product states.
///
/// Pure products are the extreme points of the separable set, so this is an
/// upper bound on the minimum over all separable states.
pub fn min_over_product_states<T: Real>(
    w: &Witness<T>,
    restarts: usize,
    seed: Seed,
) -> Result<Refinement<T>> {
    refine_multistart(&w.operator, restarts, seed, RefineBudget::default())
}
