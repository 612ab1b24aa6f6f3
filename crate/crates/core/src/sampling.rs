//! Seeded random generators.
//!
//! Every stochastic routine takes a [`Seed`] (or an explicit RNG derived from
//! one). Parallel work uses one stream id per task, so results do not depend
//! on thread count or scheduling.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dims, total_dim, Operator, PureVector};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

impl Seed {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    /// Same seed, different stream: an independent reproducible sequence.
    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    /// Derives a sub-stream for task `index` of this seed's own stream.
    pub fn split(self, index: u64) -> Self {
        let stream = self
            .stream
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(index.wrapping_add(1));
        Self {
            seed: self.seed,
            stream,
        }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

impl Default for Seed {
    fn default() -> Self {
        Self::new(0)
    }
}

pub fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let x: f64 = rng.sample(StandardNormal);
    T::lit(x)
}

pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    Complex::new(gaussian(rng), gaussian(rng))
}

/// Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn random_pure_state<T: Real, R: Rng + ?Sized>(
    dims: &[usize],
    rng: &mut R,
) -> Result<PureVector<T>> {
    check_dims(dims)?;
    let n = total_dim(dims);
    let amps = (0..n).map(|_| complex_gaussian(rng)).collect();
    PureVector::new(dims.to_vec(), amps)?.normalized()
}

/// One Haar-random pure state per factor.
pub fn random_product_state<T: Real, R: Rng + ?Sized>(
    dims: &[usize],
    rng: &mut R,
) -> Result<Vec<PureVector<T>>> {
    dims.iter().map(|&d| random_pure_state(&[d], rng)).collect()
}

/// Ginibre density matrix `G G† / Tr(G G†)` with `G` of shape `D × rank`.
pub fn random_density_matrix<T: Real, R: Rng + ?Sized>(
    dims: &[usize],
    rank: usize,
    rng: &mut R,
) -> Result<Operator<T>> {
    check_dims(dims)?;
    let n = total_dim(dims);
    if rank == 0 || rank > n {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} outside 1..={n}"
        )));
    }
    let g: Vec<Complex<T>> = (0..n * rank).map(|_| complex_gaussian(rng)).collect();
    let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in 0..rank {
                acc += g[i * rank + k] * g[j * rank + k].conj();
            }
            data[i * n + j] = acc;
        }
    }
    let op = Operator::new(dims.to_vec(), data)?;
    let tr = op.trace().re;
    Ok(op.scale(T::one() / tr))
}

/// Haar-random orthonormal basis (Gram-Schmidt on Gaussian vectors).
pub fn random_orthonormal_basis<T: Real, R: Rng + ?Sized>(
    dims: &[usize],
    rng: &mut R,
) -> Result<Vec<PureVector<T>>> {
    check_dims(dims)?;
    let n = total_dim(dims);
    let mut basis: Vec<PureVector<T>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v = random_pure_state::<T, R>(dims, rng)?;
        for _ in 0..2 {
            for b in &basis {
                let proj = b.inner(&v);
                let amps = v
                    .amplitudes()
                    .iter()
                    .zip(b.amplitudes())
                    .map(|(x, y)| x - y * proj)
                    .collect();
                v = PureVector::new(dims.to_vec(), amps)?;
            }
        }
        if v.norm() > T::lit(1e-6) {
            basis.push(v.normalized()?);
        }
    }
    Ok(basis)
}

/// Uniform point on the probability simplex (flat Dirichlet).
pub fn random_simplex<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| T::lit(x / total)).collect()
}
