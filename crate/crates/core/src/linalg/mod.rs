//! Dense complex linear algebra over small composite Hilbert spaces.
//!
//! Storage is row-major with the last tensor factor varying fastest, so the
//! basis index of `|i_1 i_2 … i_n⟩` is `((i_1 d_2 + i_2) d_3 + …) + i_n`.

mod eig;
mod operator;
mod product;
mod solve;
mod vector;

pub use eig::Eigen;
pub use operator::{Operator, OperatorRecord};
pub use product::{reconstruct, ProductTerm};
pub use solve::{invert_real, solve_real};
pub use vector::PureVector;

use crate::error::{Error, Result};

pub(crate) fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

pub(crate) fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("empty dimension list".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidDims(format!(
            "factor dimension {d} < 2 in {dims:?}"
        )));
    }
    Ok(())
}

/// Splits a flat basis index into per-factor digits.
pub(crate) fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

pub(crate) fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Table of digits for every flat index, `table[i * n + k]` being digit `k` of `i`.
pub(crate) fn digit_table(dims: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let total = total_dim(dims);
    let mut table = vec![0; total * n];
    for i in 0..total {
        digits(i, dims, &mut table[i * n..(i + 1) * n]);
    }
    table
}
