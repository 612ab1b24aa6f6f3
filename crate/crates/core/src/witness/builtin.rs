use crate::linalg::{Operator, ProductTerm};
use crate::objects::mu_state;
use crate::scalar::{Real, Tolerances};

use super::Witness;

fn mu<T: Real>(i: usize, j: usize) -> Operator<T> {
    mu_state::<T>(i, j).expect("valid μ index").projector()
}

fn identity_term<T: Real>(c: f64) -> ProductTerm<T> {
    let id = Operator::identity(vec![2]).expect("qubit");
    ProductTerm::new(T::lit(c), vec![id.clone(), id])
}

/// `¼(𝟙 − Σ_{i,j,j'} (−1)^{j+j'} μ_{i,j} ⊗ μ_{i,j'}*)` as 12 product terms plus
/// the identity. Equals `½𝟙 − |φ⁺⟩⟨φ⁺|`.
///
/// The second factor is complex-conjugated; for the Y axis that swaps `j'`.
pub fn builtin_wbm<T: Real>() -> Witness<T> {
    let mut terms = vec![identity_term(0.25)];
    for i in 0..3 {
        for j in 0..2 {
            for jp in 0..2 {
                let sign = if (j + jp) % 2 == 0 { -0.25 } else { 0.25 };
                let conj_jp = if i == 2 { 1 - jp } else { jp };
                terms.push(ProductTerm::new(
                    T::lit(sign),
                    vec![mu(i, j), mu(i, conj_jp)],
                ));
            }
        }
    }
    from_terms(terms)
}

/// `(3/2)𝟙 − Σ_{i,j∈{0,1}} μ_{i,j} ⊗ μ_{i,j}`: four correlation terms.
pub fn builtin_wbm_prime<T: Real>() -> Witness<T> {
    let mut terms = vec![identity_term(1.5)];
    for i in 0..2 {
        for j in 0..2 {
            terms.push(ProductTerm::new(-T::one(), vec![mu(i, j), mu(i, j)]));
        }
    }
    from_terms(terms)
}

/// The 12-term sum with no conjugation on the second factor. It is the
/// singlet projector, not a witness; kept for comparison.
pub fn mu_sum_unconjugated<T: Real>() -> Operator<T> {
    let mut terms = vec![identity_term(0.25)];
    for i in 0..3 {
        for j in 0..2 {
            for jp in 0..2 {
                let sign = if (j + jp) % 2 == 0 { -0.25 } else { 0.25 };
                terms.push(ProductTerm::new(T::lit(sign), vec![mu(i, j), mu(i, jp)]));
            }
        }
    }
    crate::linalg::reconstruct(&[2, 2], &terms).expect("qubit pair")
}

fn from_terms<T: Real>(terms: Vec<ProductTerm<T>>) -> Witness<T> {
    let op = crate::linalg::reconstruct(&[2, 2], &terms).expect("qubit pair");
    Witness::new(op, &Tolerances::default())
        .and_then(|w| w.with_product_terms(terms))
        .expect("builtin witness is consistent")
}
