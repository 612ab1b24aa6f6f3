use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solves the real system `A x = b` in place by Gaussian elimination with
/// partial pivoting. `a` is `n × n` row-major and is consumed.
pub fn solve_real<T: Real>(mut a: Vec<T>, n: usize, b: &mut [T]) -> Result<()> {
    if a.len() != n * n || b.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "system of size {n} with {} matrix entries and {} rhs entries",
            a.len(),
            b.len()
        )));
    }
    let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let floor = scale * T::epsilon() * T::from_usize_lossy(n.max(1)) * T::lit(16.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .abs()
                    .partial_cmp(&a[j * n + col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if a[pivot * n + col].abs() <= floor {
            return Err(Error::SingularGram(format!(
                "pivot {:e} at column {col}",
                a[pivot * n + col].as_f64()
            )));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let p = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row * n + k] * b[k];
        }
        b[row] = acc / a[row * n + row];
    }
    Ok(())
}

/// Inverse of a real `n × n` matrix, column by column.
pub fn invert_real<T: Real>(a: &[T], n: usize) -> Result<Vec<T>> {
    let mut inv = vec![T::zero(); n * n];
    for col in 0..n {
        let mut e = vec![T::zero(); n];
        e[col] = T::one();
        solve_real(a.to_vec(), n, &mut e)?;
        for row in 0..n {
            inv[row * n + col] = e[row];
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = vec![2.0, 1.0, 1.0, 3.0];
        let mut b: Vec<f64> = vec![3.0, 5.0];
        solve_real(a, 2, &mut b).unwrap();
        assert!((b[0] - 0.8).abs() < 1e-14);
        assert!((b[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        let mut b = vec![1.0, 1.0];
        assert!(matches!(
            solve_real(a, 2, &mut b),
            Err(Error::SingularGram(_))
        ));
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = vec![4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let inv = invert_real(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-13);
            }
        }
    }
}
