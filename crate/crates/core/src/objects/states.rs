use num_complex::Complex;

use super::Measurement;
use crate::error::{Error, Result};
use crate::linalg::{Operator, PureVector};
use crate::scalar::{Real, Tolerances};

fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

/// `(φ⁺, φ⁻, ψ⁺, ψ⁻)` with `|φ±⟩ = (|00⟩ ± |11⟩)/√2`, `|ψ±⟩ = (|01⟩ ± |10⟩)/√2`.
pub fn bell_states<T: Real>() -> [PureVector<T>; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = |a: [f64; 4]| PureVector::from_real(vec![2, 2], &a).expect("bell state");
    [
        v([h, 0.0, 0.0, h]),
        v([h, 0.0, 0.0, -h]),
        v([0.0, h, h, 0.0]),
        v([0.0, h, -h, 0.0]),
    ]
}

/// Bell-basis measurement, effects ordered φ⁺, φ⁻, ψ⁺, ψ⁻.
pub fn bell_basis<T: Real>() -> Measurement<T> {
    Measurement::from_basis(vec![2, 2], &bell_states(), "bell").expect("bell basis is valid")
}

/// `|φ⁺_d⟩ = Σ_i |ii⟩ / √d` on dims `(d, d)`.
pub fn max_entangled<T: Real>(d: usize) -> Result<PureVector<T>> {
    if d < 2 {
        return Err(Error::InvalidDims(format!("local dimension {d} < 2")));
    }
    let amp = T::one() / T::from_usize_lossy(d).sqrt();
    let mut amps = vec![Complex::new(T::zero(), T::zero()); d * d];
    for i in 0..d {
        amps[i * d + i] = Complex::new(amp, T::zero());
    }
    PureVector::new(vec![d, d], amps)
}

/// Qubit state `|μ_{i,j}⟩`: eigenstates of Z (`i = 0`), X (`i = 1`) and
/// Y (`i = 2`), with `j = 0` the +1 eigenstate.
pub fn mu_state<T: Real>(i: usize, j: usize) -> Result<PureVector<T>> {
    if i > 2 || j > 1 {
        return Err(Error::InvalidArgument(format!("no μ state ({i}, {j})")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if j == 0 { 1.0 } else { -1.0 };
    let amps = match i {
        0 => {
            let mut a = vec![c(0.0, 0.0); 2];
            a[j] = c(1.0, 0.0);
            a
        }
        1 => vec![c(h, 0.0), c(sign * h, 0.0)],
        _ => vec![c(h, 0.0), c(0.0, sign * h)],
    };
    PureVector::new(vec![2], amps)
}

/// The six μ states in lexicographic `(i, j)` order.
pub fn mu_states<T: Real>() -> Vec<PureVector<T>> {
    (0..3)
        .flat_map(|i| (0..2).map(move |j| mu_state(i, j).expect("valid index")))
        .collect()
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
pub fn ghz<T: Real>(n: usize) -> Result<PureVector<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("GHZ on {n} qubits")));
    }
    let dims = vec![2; n];
    let size = 1 << n;
    let h = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let mut amps = vec![Complex::new(T::zero(), T::zero()); size];
    amps[0] = Complex::new(h, T::zero());
    amps[size - 1] = Complex::new(h, T::zero());
    PureVector::new(dims, amps)
}

pub fn maximally_mixed<T: Real>(dims: Vec<usize>) -> Result<Operator<T>> {
    let id = Operator::identity(dims)?;
    let n = T::from_usize_lossy(id.dim());
    Ok(id.scale(T::one() / n))
}

/// `v ρ + (1 - v) 𝟙/D`.
pub fn white_noise<T: Real>(state: &Operator<T>, visibility: T) -> Result<Operator<T>> {
    if !(T::zero()..=T::one()).contains(&visibility) {
        return Err(Error::InvalidArgument(format!(
            "visibility {visibility} outside [0, 1]"
        )));
    }
    let mixed = maximally_mixed(state.dims().to_vec())?;
    Ok(&state.scale(visibility) + &mixed.scale(T::one() - visibility))
}

/// Born probability `Tr(E ρ)`, clamped into `[0, 1]` when it lies within
/// `tol.psd` of the interval.
pub fn born<T: Real>(effect: &Operator<T>, state: &Operator<T>, tol: &Tolerances<T>) -> Result<T> {
    let tr = state.trace();
    if (tr.re - T::one()).abs() > tol.psd || tr.im.abs() > tol.psd {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    let min = state.min_eigenvalue(tol.hermitian)?;
    if min < -tol.psd {
        return Err(Error::NotPsd {
            min_eigenvalue: min.as_f64(),
        });
    }
    let p = effect.trace_inner_re(state)?;
    if p < -tol.psd || p > T::one() + tol.psd {
        return Err(Error::ProbabilityOutOfRange(p.as_f64()));
    }
    Ok(p.max(T::zero()).min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_basis_layout() {
        let m = bell_basis::<f64>();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi_plus = PureVector::from_real(vec![2, 2], &[h, 0.0, 0.0, h]).unwrap();
        assert!(m.effects()[0].max_abs_diff(&phi_plus.projector()) < 1e-15);
        let sum = m
            .effects()
            .iter()
            .fold(Operator::zeros(vec![2, 2]).unwrap(), |a, e| &a + e);
        assert!(sum.max_abs_diff(&Operator::identity(vec![2, 2]).unwrap()) < 1e-15);
        let prod = &m.effects()[0] * &m.effects()[2];
        assert!(prod.max_abs() < 1e-15);
        assert!(m.is_projective());
        for e in m.effects() {
            assert_eq!(e, &e.transpose());
            assert!(e.data().iter().all(|z| z.im == 0.0));
        }
    }

    #[test]
    fn max_entangled_examples() {
        let phi2: PureVector = max_entangled(2).unwrap();
        assert!(phi2.overlap(&bell_states()[0]) > 1.0 - 1e-15);
        let phi3: PureVector = max_entangled(3).unwrap();
        let a = 1.0 / 3f64.sqrt();
        for (k, amp) in phi3.amplitudes().iter().enumerate() {
            let e = if k % 4 == 0 { a } else { 0.0 };
            assert!((amp.re - e).abs() < 1e-15 && amp.im == 0.0);
        }
        let marg = phi3.projector().partial_trace(&[0]).unwrap();
        let mixed = maximally_mixed(vec![3]).unwrap();
        assert!(marg.max_abs_diff(&mixed) < 1e-15);
        assert!(max_entangled::<f64>(1).is_err());
    }

    #[test]
    fn mu_state_examples() {
        let mu = mu_states::<f64>();
        assert_eq!(mu.len(), 6);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureVector::from_real(vec![2], &[h, h]).unwrap();
        assert!(mu[2].max_abs_diff(&plus) < 1e-15);
        let minus_i = PureVector::new(vec![2], vec![c(h, 0.0), c(0.0, -h)]).unwrap();
        assert!(mu[5].max_abs_diff(&minus_i) < 1e-15);
        assert_eq!(mu[0].inner(&mu[1]).norm(), 0.0);
    }

    #[test]
    fn born_examples() {
        let tol = Tolerances::<f64>::default();
        let p0 = PureVector::<f64>::basis(vec![2], 0).unwrap().projector();
        assert_eq!(born(&p0, &p0, &tol).unwrap(), 1.0);
        let phi = bell_states::<f64>()[0].projector();
        let mixed = maximally_mixed(vec![2, 2]).unwrap();
        assert!((born(&phi, &mixed, &tol).unwrap() - 0.25).abs() < 1e-15);
        let rho = Operator::from_real(vec![2], &[0.7, 0.2, 0.2, 0.3]).unwrap();
        let comp = &Operator::identity(vec![2]).unwrap() - &p0;
        let sum = born(&comp, &rho, &tol).unwrap() + born(&p0, &rho, &tol).unwrap();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn born_rejects_out_of_range() {
        let tol = Tolerances::<f64>::default();
        let rho = Operator::from_real(vec![2], &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let big = Operator::from_real(vec![2], &[2.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            born(&big, &rho, &tol),
            Err(Error::ProbabilityOutOfRange(_))
        ));
        let not_state = Operator::from_real(vec![2], &[0.5, 0.0, 0.0, 0.0]).unwrap();
        assert!(born(&rho, &not_state, &tol).is_err());
    }
}
