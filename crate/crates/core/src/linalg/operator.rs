use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::eig::{jacobi_eigh, Eigen};
use super::{check_dims, digit_table, total_dim, PureVector};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Complex square matrix tagged with its tensor-factor dimensions.
///
/// Values are immutable in the sense that every operation returns a new
/// operator; the type is `Send + Sync` and free to share across threads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "OperatorRecord<T>",
    into = "OperatorRecord<T>",
    bound = "T: Real"
)]
pub struct Operator<T: Real = f64> {
    dims: Vec<usize>,
    data: Vec<Complex<T>>,
}

/// On-disk form: row-major real and imaginary parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OperatorRecord<T: Real> {
    pub dims: Vec<usize>,
    pub re: Vec<T>,
    #[serde(default)]
    pub im: Vec<T>,
}

impl<T: Real> TryFrom<OperatorRecord<T>> for Operator<T> {
    type Error = Error;

    fn try_from(r: OperatorRecord<T>) -> Result<Self> {
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
        let data =
            r.re.into_iter()
                .zip(im)
                .map(|(a, b)| Complex::new(a, b))
                .collect();
        Operator::new(r.dims, data)
    }
}

impl<T: Real> From<Operator<T>> for OperatorRecord<T> {
    fn from(op: Operator<T>) -> Self {
        OperatorRecord {
            re: op.data.iter().map(|c| c.re).collect(),
            im: op.data.iter().map(|c| c.im).collect(),
            dims: op.dims,
        }
    }
}

/// For every flat index in the permuted layout, the flat index it came from.
pub(crate) fn permutation_map(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    let n = dims.len();
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidArgument(format!(
            "permutation {perm:?} for {n} factors"
        )));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation"
            )));
        }
        seen[p] = true;
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let total = total_dim(dims);
    let mut old_digits = vec![0; n];
    let mut new_digits = vec![0; n];
    let mut map = Vec::with_capacity(total);
    for idx in 0..total {
        super::digits(idx, &new_dims, &mut new_digits);
        for (k, &p) in perm.iter().enumerate() {
            old_digits[p] = new_digits[k];
        }
        map.push(super::compose(&old_digits, dims));
    }
    Ok(map)
}

impl<T: Real> Operator<T> {
    pub fn new(dims: Vec<usize>, data: Vec<Complex<T>>) -> Result<Self> {
        check_dims(&dims)?;
        let n = total_dim(&dims);
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        if let Some(p) = data
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::NonFinite(p));
        }
        Ok(Self { dims, data })
    }

    pub(crate) fn from_parts_unchecked(dims: Vec<usize>, data: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(data.len(), total_dim(&dims).pow(2));
        Self { dims, data }
    }

    /// Builds an operator from real row-major entries.
    pub fn from_real(dims: Vec<usize>, entries: &[f64]) -> Result<Self> {
        let data = entries
            .iter()
            .map(|&x| Complex::new(T::lit(x), T::zero()))
            .collect();
        Self::new(dims, data)
    }

    pub fn from_fn(dims: Vec<usize>, f: impl Fn(usize, usize) -> Complex<T>) -> Result<Self> {
        check_dims(&dims)?;
        let n = total_dim(&dims);
        let data = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self::new(dims, data)
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        let n = total_dim(&dims);
        Ok(Self {
            dims,
            data: vec![Complex::new(T::zero(), T::zero()); n * n],
        })
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self> {
        let mut op = Self::zeros(dims)?;
        let n = op.dim();
        for i in 0..n {
            op.data[i * n + i] = Complex::new(T::one(), T::zero());
        }
        Ok(op)
    }

    pub fn diagonal(dims: Vec<usize>, diag: &[T]) -> Result<Self> {
        let mut op = Self::zeros(dims)?;
        let n = op.dim();
        if diag.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: diag.len(),
            });
        }
        for (i, &d) in diag.iter().enumerate() {
            op.data[i * n + i] = Complex::new(d, T::zero());
        }
        Ok(op)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        total_dim(&self.dims)
    }

    pub fn n_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim() + col]
    }

    /// Same entries, different factor structure.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims)?;
        if total_dim(&dims) != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: total_dim(&dims),
            });
        }
        Ok(Self {
            dims,
            data: self.data.clone(),
        })
    }

    pub fn scale(&self, s: T) -> Self {
        self.scale_complex(Complex::new(s, T::zero()))
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|c| c * s).collect(),
        }
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let n = self.dim();
        let zero = Complex::new(T::zero(), T::zero());
        let mut data = vec![zero; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == zero {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let out = &mut data[i * n..(i + 1) * n];
                for (o, b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self {
            dims: self.dims.clone(),
            data,
        })
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim();
        let data = (0..n * n)
            .map(|k| self.data[(k % n) * n + k / n].conj())
            .collect();
        Self {
            dims: self.dims.clone(),
            data,
        }
    }

    /// Full transpose in the computational basis.
    pub fn transpose(&self) -> Self {
        let n = self.dim();
        let data = (0..n * n).map(|k| self.data[(k % n) * n + k / n]).collect();
        Self {
            dims: self.dims.clone(),
            data,
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            data: self.data.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex<T> {
        let n = self.dim();
        (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, i| {
            acc + self.data[i * n + i]
        })
    }

    /// Kronecker product; factor dimensions are concatenated.
    pub fn tensor(&self, other: &Self) -> Self {
        let (n, m) = (self.dim(), other.dim());
        let nm = n * m;
        let zero = Complex::new(T::zero(), T::zero());
        let mut data = vec![zero; nm * nm];
        for i in 0..n {
            for j in 0..n {
                let a = self.data[i * n + j];
                if a == zero {
                    continue;
                }
                for k in 0..m {
                    let row = (i * m + k) * nm + j * m;
                    for l in 0..m {
                        data[row + l] = a * other.data[k * m + l];
                    }
                }
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, data }
    }

    pub fn tensor_all(parts: &[Self]) -> Result<Self> {
        let (first, rest) = parts
            .split_first()
            .ok_or_else(|| Error::InvalidArgument("empty tensor product".into()))?;
        Ok(rest.iter().fold(first.clone(), |acc, op| acc.tensor(op)))
    }

    fn check_factor_set(&self, factors: &[usize], allow_all: bool) -> Result<Vec<usize>> {
        let n = self.n_factors();
        let mut set: Vec<usize> = factors.to_vec();
        set.sort_unstable();
        set.dedup();
        if set.is_empty() {
            return Err(Error::InvalidCut("empty factor set".into()));
        }
        if let Some(&bad) = set.iter().find(|&&f| f >= n) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                limit: n,
            });
        }
        if !allow_all && set.len() == n {
            return Err(Error::InvalidCut(format!(
                "{factors:?} covers every factor"
            )));
        }
        Ok(set)
    }

    /// Traces out every factor not listed in `keep`; kept factors retain
    /// their relative order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let keep = self.check_factor_set(keep, true)?;
        let nf = self.n_factors();
        let kept_dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        let traced: Vec<usize> = (0..nf).filter(|k| !keep.contains(k)).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&k| self.dims[k]).collect();
        let n = self.dim();
        let table = digit_table(&self.dims);
        let mut kept_idx = vec![0usize; n];
        let mut traced_idx = vec![0usize; n];
        let mut buf_k = vec![0; keep.len()];
        let mut buf_t = vec![0; traced.len()];
        for i in 0..n {
            let d = &table[i * nf..(i + 1) * nf];
            for (s, &k) in keep.iter().enumerate() {
                buf_k[s] = d[k];
            }
            for (s, &k) in traced.iter().enumerate() {
                buf_t[s] = d[k];
            }
            kept_idx[i] = super::compose(&buf_k, &kept_dims);
            traced_idx[i] = if traced.is_empty() {
                0
            } else {
                super::compose(&buf_t, &traced_dims)
            };
        }
        let m = total_dim(&kept_dims);
        let mut data = vec![Complex::new(T::zero(), T::zero()); m * m];
        for i in 0..n {
            for j in 0..n {
                if traced_idx[i] == traced_idx[j] {
                    data[kept_idx[i] * m + kept_idx[j]] += self.data[i * n + j];
                }
            }
        }
        Ok(Self {
            dims: kept_dims,
            data,
        })
    }

    /// Transpose on a single tensor factor.
    pub fn partial_transpose(&self, factor: usize) -> Result<Self> {
        self.partial_transpose_on(&[factor])
    }

    /// Transpose on every factor in `factors`. Pure entry permutation, so
    /// applying it twice reproduces the input bit for bit.
    pub fn partial_transpose_on(&self, factors: &[usize]) -> Result<Self> {
        let set = self.check_factor_set(factors, true)?;
        let nf = self.n_factors();
        let n = self.dim();
        let table = digit_table(&self.dims);
        let mut di = vec![0; nf];
        let mut dj = vec![0; nf];
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            for j in 0..n {
                di.copy_from_slice(&table[i * nf..(i + 1) * nf]);
                dj.copy_from_slice(&table[j * nf..(j + 1) * nf]);
                for &f in &set {
                    std::mem::swap(&mut di[f], &mut dj[f]);
                }
                let ni = super::compose(&di, &self.dims);
                let nj = super::compose(&dj, &self.dims);
                data[ni * n + nj] = self.data[i * n + j];
            }
        }
        Ok(Self {
            dims: self.dims.clone(),
            data,
        })
    }

    /// Reorders tensor factors so that new factor `k` is old factor `perm[k]`.
    pub fn permute_factors(&self, perm: &[usize]) -> Result<Self> {
        let map = permutation_map(&self.dims, perm)?;
        let n = self.dim();
        let mut data = Vec::with_capacity(n * n);
        for &oi in &map {
            for &oj in &map {
                data.push(self.data[oi * n + oj]);
            }
        }
        Ok(Self {
            dims: perm.iter().map(|&p| self.dims[p]).collect(),
            data,
        })
    }

    /// `Tr(self · other)`.
    pub fn trace_inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_same_dim(other)?;
        let n = self.dim();
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        Ok(acc)
    }

    /// Real part of `Tr(self · other)`; the imaginary part vanishes for
    /// Hermitian arguments.
    pub fn trace_inner_re(&self, other: &Self) -> Result<T> {
        self.trace_inner(other).map(|c| c.re)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        if self.data.len() != other.data.len() {
            return T::infinity();
        }
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, a| m.max(a.norm()))
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> T {
        let n = self.dim();
        let mut dev = T::zero();
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `(A + A†) / 2`.
    pub fn symmetrized(&self) -> Self {
        let n = self.dim();
        let half = T::lit(0.5);
        let data = (0..n * n)
            .map(|k| (self.data[k] + self.data[(k % n) * n + k / n].conj()) * half)
            .collect();
        Self {
            dims: self.dims.clone(),
            data,
        }
    }

    /// Eigendecomposition of a Hermitian operator (checked against `tol`,
    /// then symmetrized). Eigenvalues ascend.
    pub fn hermitian_eig(&self, tol: T) -> Result<Eigen<T>> {
        let dev = self.hermitian_deviation();
        if dev > tol {
            return Err(Error::NotHermitian {
                deviation: dev.as_f64(),
            });
        }
        Ok(jacobi_eigh(&self.symmetrized()))
    }

    pub fn min_eigenvalue(&self, tol: T) -> Result<T> {
        let eig = self.hermitian_eig(tol)?;
        Ok(eig.values[0])
    }

    /// `true` iff the smallest eigenvalue is at least `-tol`.
    pub fn is_psd(&self, tol: T) -> Result<bool> {
        Ok(self.min_eigenvalue(tol)? >= -tol)
    }

    /// `⟨v|A|v⟩`.
    pub fn expectation(&self, v: &PureVector<T>) -> Complex<T> {
        let n = self.dim();
        let a = v.amplitudes();
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..n {
            let mut row = Complex::new(T::zero(), T::zero());
            for j in 0..n {
                row += self.data[i * n + j] * a[j];
            }
            acc += a[i].conj() * row;
        }
        acc
    }

    pub fn apply(&self, v: &PureVector<T>) -> Result<PureVector<T>> {
        let n = self.dim();
        if v.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.dim(),
            });
        }
        let a = v.amplitudes();
        let out = (0..n)
            .map(|i| {
                (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
                    acc + self.data[i * n + j] * a[j]
                })
            })
            .collect();
        PureVector::new(self.dims.clone(), out)
    }
}

impl<T: Real> Add for &Operator<T> {
    type Output = Operator<T>;

    /// Panics on mismatched dimensions; use [`Operator::try_add`] otherwise.
    fn add(self, rhs: Self) -> Operator<T> {
        self.try_add(rhs).expect("operator dimensions match")
    }
}

impl<T: Real> Sub for &Operator<T> {
    type Output = Operator<T>;

    fn sub(self, rhs: Self) -> Operator<T> {
        self.try_sub(rhs).expect("operator dimensions match")
    }
}

impl<T: Real> Mul for &Operator<T> {
    type Output = Operator<T>;

    fn mul(self, rhs: Self) -> Operator<T> {
        self.try_matmul(rhs).expect("operator dimensions match")
    }
}

impl<T: Real> Neg for &Operator<T> {
    type Output = Operator<T>;

    fn neg(self) -> Operator<T> {
        self.scale(-T::one())
    }
}
