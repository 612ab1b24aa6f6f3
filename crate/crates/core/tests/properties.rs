use entwit::linalg::{Operator, PureVector};
use entwit::network::max_entangled_sources;
use entwit::objects::{bell_basis, tomographic_basis, Measurement};
use entwit::optim::{refine_product_state, RefineBudget};
use entwit::sampling::{
    random_density_matrix, random_orthonormal_basis, random_product_state, random_pure_state, Seed,
};
use entwit::separability::{classify_element, classify_measurement, SeparabilityOptions};
use entwit::star::{local_model_correlations, random_local_model, star_quantum_correlations};
use entwit::steering::{
    functional_s, product_score, quantum_correlations, quantum_value_closed_form, steering_witness,
};
use entwit::witness::{
    beta_coefficients, builtin_wbm, builtin_wbm_prime, min_over_product_states, rebuild_from_beta,
    verify_witness, witness_from_element, Witness,
};
use entwit::{Status, Tolerances};
use proptest::prelude::*;

type Op = Operator<f64>;

fn random_hermitian(dims: &[usize], seed: u64) -> Op {
    let mut rng = Seed::new(seed).rng();
    let d: usize = dims.iter().product();
    let g = random_density_matrix::<f64, _>(dims, d, &mut rng).unwrap();
    let h = random_density_matrix::<f64, _>(dims, 1, &mut rng).unwrap();
    &g - &h.scale(0.7)
}

fn random_op(d: usize, seed: u64) -> Op {
    let mut rng = Seed::new(seed).rng();
    let v = random_orthonormal_basis::<f64, _>(&[d], &mut rng).unwrap();
    let w = random_pure_state::<f64, _>(&[d], &mut rng).unwrap();
    Operator::from_fn(vec![d], |r, c| {
        v[0].amplitudes()[r] * w.amplitudes()[c].conj()
    })
    .unwrap()
}

fn tol() -> Tolerances<f64> {
    Tolerances::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tensor_is_associative(s in any::<u64>(), d1 in 2usize..4, d2 in 2usize..4, d3 in 2usize..3) {
        let (a, b, c) = (random_op(d1, s), random_op(d2, s ^ 1), random_op(d3, s ^ 2));
        let l = a.tensor(&b).tensor(&c);
        let r = a.tensor(&b.tensor(&c));
        prop_assert!(l.max_abs_diff(&r) < 1e-14);
        prop_assert_eq!(l.dims(), &[d1, d2, d3][..]);
    }

    #[test]
    fn partial_trace_of_product(s in any::<u64>(), d1 in 2usize..4, d2 in 2usize..4) {
        let (a, b) = (random_op(d1, s), random_op(d2, s ^ 7));
        let ab = a.tensor(&b);
        let keep0 = ab.partial_trace(&[0]).unwrap();
        prop_assert!(keep0.max_abs_diff(&a.scale_complex(b.trace())) < 1e-13);
        let keep1 = ab.partial_trace(&[1]).unwrap();
        prop_assert!(keep1.max_abs_diff(&b.scale_complex(a.trace())) < 1e-13);
    }

    #[test]
    fn partial_transpose_laws(s in any::<u64>(), d1 in 2usize..4, d2 in 2usize..4) {
        let h = random_hermitian(&[d1, d2], s);
        let pt = h.partial_transpose(1).unwrap();
        prop_assert!(pt.partial_transpose(1).unwrap().max_abs_diff(&h) < 1e-15);
        prop_assert!((pt.trace() - h.trace()).norm() < 1e-13);
        prop_assert!(pt.is_hermitian(1e-12));
        let both = pt.partial_transpose(0).unwrap();
        prop_assert!(both.max_abs_diff(&h.transpose()) < 1e-15);
    }

    #[test]
    fn eigendecomposition_reconstructs(s in any::<u64>(), d1 in 2usize..4, d2 in 2usize..4) {
        let h = random_hermitian(&[d1, d2], s);
        let eig = h.hermitian_eig(1e-10).unwrap();
        prop_assert!(eig.reconstruct().max_abs_diff(&h) < 1e-10);
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn refinement_never_increases(s in any::<u64>()) {
        let h = random_hermitian(&[2, 3, 2], s);
        let mut rng = Seed::new(s).with_stream(3).rng();
        let start = random_product_state::<f64, _>(&[2, 3, 2], &mut rng).unwrap();
        let r = refine_product_state(&h, start, RefineBudget::default()).unwrap();
        prop_assert!(r.history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn beta_solve_is_idempotent(s in any::<u64>(), d2 in 2usize..4) {
        let dims = [2, d2];
        let w = Witness::new(random_hermitian(&dims, s), &tol()).unwrap();
        let b2 = tomographic_basis::<f64>(2).unwrap();
        let bd = tomographic_basis::<f64>(d2).unwrap();
        let bases = [&b2, &bd];
        let beta = beta_coefficients(&w, &bases).unwrap();
        prop_assert!(beta.residual < 1e-10);
        let rebuilt = Witness::new(rebuild_from_beta(&beta, &bases).unwrap(), &tol()).unwrap();
        let again = beta_coefficients(&rebuilt, &bases).unwrap();
        for (x, y) in beta.values.iter().zip(&again.values) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn single_hidden_state_score(s in any::<u64>()) {
        let b = tomographic_basis::<f64>(2).unwrap();
        let w = builtin_wbm_prime::<f64>().with_beta(&[&b, &b]).unwrap();
        let mut rng = Seed::new(s).rng();
        let r1 = random_density_matrix::<f64, _>(&[2], 2, &mut rng).unwrap();
        let r2 = random_density_matrix::<f64, _>(&[2], 2, &mut rng).unwrap();
        let score = product_score(w.beta().unwrap(), &[&b, &b], &[r1.clone(), r2.clone()]).unwrap();
        prop_assert!((score + w.operator().trace_inner_re(&r1.tensor(&r2)).unwrap()).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Witnesses from NPT pure projectors separate them from every sampled
    /// product state.
    #[test]
    fn npt_projector_witness(s in any::<u64>(), d2 in 2usize..4) {
        let mut rng = Seed::new(s).rng();
        let psi = random_pure_state::<f64, _>(&[2, d2], &mut rng).unwrap();
        let e = psi.projector();
        let w = witness_from_element(&e, &[1], &tol()).unwrap();
        prop_assert!(w.operator().trace_inner_re(&e).unwrap() < 0.0);
        let m = min_over_product_states(&w, 1000, Seed::new(s ^ 5)).unwrap();
        prop_assert!(m.value >= -1e-6, "{}", m.value);
    }
}

/// Random separable 2⊗2 measurement: local projective measurements on each
/// side combined with a random classical coarse-graining.
fn random_separable_measurement(seed: u64) -> Measurement<f64> {
    let mut rng = Seed::new(seed).rng();
    let a = random_orthonormal_basis::<f64, _>(&[2], &mut rng).unwrap();
    let b = random_orthonormal_basis::<f64, _>(&[2], &mut rng).unwrap();
    let mut effects = vec![Operator::zeros(vec![2, 2]).unwrap(); 3];
    for x in &a {
        for y in &b {
            let k = rand::Rng::random_range(&mut rng, 0..3);
            effects[k] = &effects[k] + &x.projector().tensor(&y.projector());
        }
    }
    Measurement::new(vec![2, 2], effects, "local").unwrap()
}

#[test]
fn separable_measurements_never_violate_witnesses() {
    let opts = SeparabilityOptions::default();
    let ws = [builtin_wbm::<f64>(), builtin_wbm_prime()];
    for k in 0..200 {
        let m = random_separable_measurement(k);
        assert_eq!(
            classify_measurement(&m, &opts).unwrap().verdict,
            Status::Separable
        );
        for w in &ws {
            let (v, _) = verify_witness(w, &m).unwrap();
            assert!(v >= -1e-12, "measurement {k}: {v}");
        }
    }
}

/// Random rank-one projective measurement on two qubits (entangled with
/// probability one).
fn random_basis_measurement(seed: u64) -> Measurement<f64> {
    let mut rng = Seed::new(seed).rng();
    let basis = random_orthonormal_basis::<f64, _>(&[2, 2], &mut rng).unwrap();
    Measurement::from_basis(vec![2, 2], &basis, "random").unwrap()
}

#[test]
fn closed_form_matches_simulation_and_is_positive() {
    let b = tomographic_basis::<f64>(2).unwrap();
    let sources = max_entangled_sources::<f64>(&[2, 2]).unwrap();
    for k in 0..100 {
        let m = random_basis_measurement(1000 + k);
        let (_, w) = steering_witness(&m, &[&b, &b], &tol()).unwrap();
        let table = quantum_correlations(&m, &sources, &[&b, &b], &tol()).unwrap();
        table.check(1e-9).unwrap();
        let (s, _) = functional_s(&table, w.beta().unwrap()).unwrap();
        let (c, _) = quantum_value_closed_form(&m, &w).unwrap();
        assert!((s - c).abs() < 1e-9, "{k}: {s} vs {c}");
        assert!(s > 0.0, "{k}: {s}");
    }
}

#[test]
fn product_projectors_are_never_entangled() {
    let opts = SeparabilityOptions::default();
    let mut rng = Seed::new(77).rng();
    for dims in [vec![2, 2], vec![2, 3], vec![3, 3], vec![2, 2, 2]] {
        for _ in 0..20 {
            let parts = random_product_state::<f64, _>(&dims, &mut rng).unwrap();
            let e = PureVector::tensor_all(&parts).unwrap().projector();
            assert_eq!(
                classify_element(&e, &opts).unwrap().status,
                Status::Separable
            );
        }
    }
}

#[test]
fn quantum_star_tables_are_no_signaling() {
    let sources = max_entangled_sources::<f64>(&[2, 2]).unwrap();
    let mut rng = Seed::new(8).rng();
    for k in 0..20 {
        let m = random_basis_measurement(k);
        let settings: Vec<Vec<Measurement<f64>>> = (0..2)
            .map(|_| {
                (0..2)
                    .map(|_| {
                        let v = random_orthonormal_basis::<f64, _>(&[2], &mut rng).unwrap();
                        Measurement::from_basis(vec![2], &v, "s").unwrap()
                    })
                    .collect()
            })
            .collect();
        let t = star_quantum_correlations(&m, &settings, &sources, &tol()).unwrap();
        t.check(1e-9).unwrap();
    }
    let bm = bell_basis::<f64>();
    let z: Measurement<f64> = Measurement::computational(vec![2]).unwrap();
    let settings = vec![vec![z.clone(), z.clone()], vec![z.clone(), z]];
    star_quantum_correlations(&bm, &settings, &sources, &tol())
        .unwrap()
        .check(1e-12)
        .unwrap();
}

#[test]
fn local_tables_are_normalized() {
    let mut rng = Seed::new(12).rng();
    for _ in 0..200 {
        let m = random_local_model::<f64, _>(&[2, 3], &[3, 2], 4, 5, &mut rng);
        local_model_correlations(&m, 1e-9)
            .unwrap()
            .check(1e-12)
            .unwrap();
    }
}
