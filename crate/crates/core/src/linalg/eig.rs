use num_complex::Complex;

use super::{Operator, PureVector};
use crate::scalar::Real;

/// Spectral decomposition `A = Σ_k λ_k |v_k⟩⟨v_k|`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: Vec<PureVector<T>>,
}

impl<T: Real> Eigen<T> {
    pub fn reconstruct(&self) -> Operator<T> {
        let dims = self.vectors[0].dims().to_vec();
        let n = self.vectors[0].dim();
        let mut data = vec![Complex::new(T::zero(), T::zero()); n * n];
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let a = v.amplitudes();
            for i in 0..n {
                let ai = a[i] * *lambda;
                for j in 0..n {
                    data[i * n + j] += ai * a[j].conj();
                }
            }
        }
        Operator::from_parts_unchecked(dims, data)
    }

    /// Eigenvector belonging to the smallest eigenvalue.
    pub fn min_pair(&self) -> (T, &PureVector<T>) {
        (self.values[0], &self.vectors[0])
    }

    pub fn max_pair(&self) -> (T, &PureVector<T>) {
        let last = self.values.len() - 1;
        (self.values[last], &self.vectors[last])
    }
}

const MAX_SWEEPS: usize = 64;

/// Cyclic complex Jacobi for a Hermitian matrix (input assumed symmetrized).
pub(crate) fn jacobi_eigh<T: Real>(op: &Operator<T>) -> Eigen<T> {
    let n = op.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let mut a = op.data().to_vec();
    let mut v = vec![zero; n * n];
    for i in 0..n {
        v[i * n + i] = Complex::new(T::one(), T::zero());
    }
    let scale = a.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
    let eps = T::epsilon();
    let two = T::lit(2.0);

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q].norm_sqr();
            }
        }
        if off.sqrt() <= eps * scale || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r <= eps * eps * scale {
                    continue;
                }
                let phase = apq / r;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (two * r);
                let t = if theta.abs() > T::one() / eps {
                    T::one() / (two * theta)
                } else {
                    let sgn = if theta >= T::zero() {
                        T::one()
                    } else {
                        -T::one()
                    };
                    sgn / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // J = [[c, s e^{iφ}], [-s e^{-iφ}, c]] on the (p, q) plane
                let cc = Complex::new(c, T::zero());
                let jpq = phase * s;
                let jqp = -(phase.conj() * s);

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * cc + akq * jqp;
                    a[k * n + q] = akp * jpq + akq * cc;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * cc + aqk * jqp.conj();
                    a[q * n + k] = apk * jpq.conj() + aqk * cc;
                }
                a[p * n + q] = zero;
                a[q * n + p] = zero;
                a[p * n + p] = Complex::new(a[p * n + p].re, T::zero());
                a[q * n + q] = Complex::new(a[q * n + q].re, T::zero());
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * cc + vkq * jqp;
                    v[k * n + q] = vkp * jpq + vkq * cc;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[i * n + i]
            .re
            .partial_cmp(&a[j * n + j].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let dims = op.dims().to_vec();
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = order
        .iter()
        .map(|&col| {
            let amps = (0..n).map(|row| v[row * n + col]).collect();
            PureVector::new(dims.clone(), amps).expect("eigenvector shape")
        })
        .collect();
    Eigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hermitian_from_seed(n: usize, seed: u64) -> Operator {
        // small LCG keeps this test independent of the sampling module
        let mut s = seed;
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let raw: Vec<Complex<f64>> = (0..n * n).map(|_| Complex::new(next(), next())).collect();
        Operator::new(vec![n], raw).unwrap().symmetrized()
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        for (n, seed) in [(2, 1), (4, 2), (8, 3), (9, 4), (16, 5)] {
            let h = hermitian_from_seed(n, seed);
            let eig = h.hermitian_eig(1e-10).unwrap();
            assert!(eig.reconstruct().max_abs_diff(&h) < 1e-12);
            for i in 0..n {
                for j in 0..n {
                    let g = eig.vectors[i].inner(&eig.vectors[j]);
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((g - Complex::new(e, 0.0)).norm() < 1e-12);
                }
            }
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn single_precision_reconstruction() {
        let h64 = hermitian_from_seed(6, 9);
        let data = h64
            .data()
            .iter()
            .map(|c| Complex::new(c.re as f32, c.im as f32))
            .collect();
        let h: Operator<f32> = Operator::new(vec![6], data).unwrap();
        let eig = h.hermitian_eig(1e-5).unwrap();
        assert!(eig.reconstruct().max_abs_diff(&h) < 1e-5);
    }
}
