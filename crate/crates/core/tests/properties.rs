use bellwb::analysis::{
    nppt_violation_factor, ns_condition_value, violation_factor_ghz, violation_factor_ghz_limit,
    DEFAULT_RESTARTS,
};
use bellwb::ccp::{simulate_protocol, CcpTask, Protocol};
use bellwb::linalg::{
    hermitian_eigenvalues, kron, partial_transpose, ComplexMatrix, QubitIndexSet, C64,
};
use bellwb::quantum::{
    bell_operator_sum, dur_state, ghz_overlap_difference, ghz_overlap_via_tensor, ghz_state,
    quantum_value, random, twirled_quantum_value, DensityMatrix, GhzSign,
};
use bellwb::scenario::{
    bell_value, coefficient_tensor, lhv_bound_bruteforce, lr_bound_analytic, strategy_correlations,
    BellScenario, DeterministicStrategy,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c64() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(c64(), n * n)
        .prop_map(move |data| ComplexMatrix::from_vec(n, n, data).unwrap())
}

fn hermitian(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n).prop_map(|a| (&a + &a.adjoint()).scale_real(0.5))
}

fn density(n: usize) -> impl Strategy<Value = DensityMatrix> {
    any::<u64>().prop_map(move |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random::density_matrix(n, &mut rng).unwrap()
    })
}

fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    a.max_abs_diff(b).unwrap() <= tol
}

proptest! {
    #[test]
    fn kron_is_associative(a in matrix(2), b in matrix(2), c in matrix(2)) {
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(close(&left, &right, 1e-12));
    }

    #[test]
    fn kron_trace_factorizes(a in matrix(2), b in matrix(4)) {
        let lhs = kron(&a, &b).trace();
        let rhs = a.trace() * b.trace();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn partial_transpose_preserves_trace_and_hermiticity(
        h in hermitian(8),
        mask in 1u64..7,
    ) {
        let set = QubitIndexSet::from_mask(mask, 3).unwrap();
        let pt = partial_transpose(&h, &set, 3).unwrap();
        prop_assert!((pt.trace() - h.trace()).norm() <= 1e-12);
        prop_assert!(pt.hermiticity_defect() <= 1e-12);
    }

    #[test]
    fn complementary_transposes_share_spectrum(h in hermitian(8), mask in 1u64..7) {
        let set = QubitIndexSet::from_mask(mask, 3).unwrap();
        let other = set.complement(3).unwrap();
        let a = hermitian_eigenvalues(&partial_transpose(&h, &set, 3).unwrap()).unwrap();
        let b = hermitian_eigenvalues(&partial_transpose(&h, &other, 3).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn eigenvalues_match_trace_moments(h in hermitian(8)) {
        let ev = hermitian_eigenvalues(&h).unwrap();
        let sum: f64 = ev.iter().sum();
        let squares: f64 = ev.iter().map(|l| l * l).sum();
        let h2 = h.matmul(&h).unwrap();
        prop_assert!((sum - h.trace().re).abs() <= 1e-8);
        prop_assert!((squares - h2.trace().re).abs() <= 1e-8);
    }

    #[test]
    fn no_strategy_exceeds_bound(
        (n, m) in (2usize..=4, 2usize..=5),
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let s = BellScenario::new(n, m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table = (0..n)
            .map(|_| (0..m).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
            .collect();
        let d = DeterministicStrategy::new(table).unwrap();
        let value = bell_value(
            &coefficient_tensor(&s).unwrap(),
            &strategy_correlations(&s, &d).unwrap(),
        )
        .unwrap();
        prop_assert!(value.abs() <= lr_bound_analytic(&s) + 1e-9);
    }

    #[test]
    fn quantum_value_within_operator_norm(rho in density(3), m in 2usize..=6) {
        let s = BellScenario::new(3, m).unwrap();
        let half = s.n_tuples_f64() / 2.0;
        let v = quantum_value(&s, &rho).unwrap();
        prop_assert!(v.abs() <= half * (1.0 + 1e-12));
    }

    #[test]
    fn twirl_is_periodic(rho in density(3), alpha in -3.0f64..3.0) {
        let s = BellScenario::new(3, 3).unwrap();
        let a = twirled_quantum_value(&s, &rho, alpha).unwrap();
        let b = twirled_quantum_value(&s, &rho, alpha + 2.0 * std::f64::consts::PI * 3.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-9);
    }
}

#[test]
fn brute_force_matches_analytic_on_grid() {
    for n in 2..=4 {
        for m in 2..=5 {
            if m * (n - 1) > 16 {
                continue;
            }
            let s = BellScenario::new(n, m).unwrap();
            let (value, _) = lhv_bound_bruteforce(&s).unwrap();
            assert!((value - lr_bound_analytic(&s)).abs() <= 1e-9, "{s}");
        }
    }
}

#[test]
fn brute_force_argmax_is_party_symmetric() {
    for (n, m) in [(3, 2), (3, 3), (4, 2)] {
        let s = BellScenario::new(n, m).unwrap();
        let c = coefficient_tensor(&s).unwrap();
        let (value, d) = lhv_bound_bruteforce(&s).unwrap();
        let table = d.table();
        for shift in 1..n {
            let rotated: Vec<Vec<i8>> = (0..n).map(|k| table[(k + shift) % n].clone()).collect();
            let d = DeterministicStrategy::new(rotated).unwrap();
            let v = bell_value(&c, &strategy_correlations(&s, &d).unwrap()).unwrap();
            assert!((v.abs() - value).abs() <= 1e-9);
        }
    }
}

#[test]
fn coefficient_norm_is_half_tuple_count() {
    for n in 2..=5 {
        for m in 2..=6 {
            let s = BellScenario::new(n, m).unwrap();
            let c = coefficient_tensor(&s).unwrap();
            assert!((c.squared_norm() - s.n_tuples_f64() / 2.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn overlap_via_tensor_matches_direct() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..50 {
        let n = 2 + k % 3;
        let rho = random::density_matrix(n, &mut rng).unwrap();
        let plus = ghz_state(n, GhzSign::Plus).unwrap();
        let minus = ghz_state(n, GhzSign::Minus).unwrap();
        let direct = rho.expectation(&plus).unwrap() - rho.expectation(&minus).unwrap();
        let via = ghz_overlap_via_tensor(&rho, GhzSign::Plus).unwrap()
            - ghz_overlap_via_tensor(&rho, GhzSign::Minus).unwrap();
        assert!((direct - via).abs() <= 1e-9);
        assert!((direct - ghz_overlap_difference(&rho).unwrap()).abs() <= 1e-9);
    }
}

#[test]
fn bell_operator_spectrum_is_two_point() {
    for (n, m) in [(2, 3), (3, 2), (3, 4)] {
        let s = BellScenario::new(n, m).unwrap();
        let mut ev = hermitian_eigenvalues(&bell_operator_sum(&s).unwrap()).unwrap();
        let half = s.n_tuples_f64() / 2.0;
        assert!((ev.remove(0) + half).abs() <= 1e-8);
        assert!((ev.pop().unwrap() - half).abs() <= 1e-8);
        assert!(ev.iter().all(|l| l.abs() <= 1e-8));
    }
}

#[test]
fn ns_value_is_local_unitary_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (n, m) in [(2, 2), (3, 3)] {
        let s = BellScenario::new(n, m).unwrap();
        for _ in 0..3 {
            let rho = random::density_matrix(n, &mut rng).unwrap();
            let unitaries: Vec<_> = (0..n).map(|_| random::su2(&mut rng)).collect();
            let rotated = rho.with_local_unitaries(&unitaries).unwrap();
            let (a, _) = ns_condition_value(&s, &rho, DEFAULT_RESTARTS, 5).unwrap();
            let (b, _) = ns_condition_value(&s, &rotated, DEFAULT_RESTARTS, 5).unwrap();
            assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        }
    }
}

#[test]
fn violation_grows_with_parties() {
    for n in 2..=6 {
        for m in 2..=6 {
            let a = violation_factor_ghz(&BellScenario::new(n, m).unwrap());
            let b = violation_factor_ghz(&BellScenario::new(n + 1, m).unwrap());
            assert!(a < b, "V({n},{m}) = {a} >= V({},{m}) = {b}", n + 1);
        }
    }
}

#[test]
fn nppt_states_never_violate() {
    for n in 2..=10 {
        for m in 2..=64 {
            assert!(nppt_violation_factor(&BellScenario::new(n, m).unwrap()) < 1.0);
        }
    }
}

#[test]
fn violation_converges_monotonically() {
    for n in 4..=7 {
        let limit = violation_factor_ghz_limit(n);
        let gaps: Vec<f64> = (2..=64)
            .map(|m| (violation_factor_ghz(&BellScenario::new(n, m).unwrap()) - limit).abs())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "N = {n}");
    }
}

#[test]
fn dur_state_value_at_three_parties() {
    let rho = dur_state(3, 0.0).unwrap();
    for m in 2..=5 {
        let s = BellScenario::new(3, m).unwrap();
        let bound = (m as f64 / 2.0).powi(3);
        assert!(quantum_value(&s, &rho).unwrap().abs() <= bound + 1e-9);
    }
}

#[test]
fn monte_carlo_within_three_sigma() {
    let rho = ghz_state(2, GhzSign::Plus).unwrap().density();
    let task = CcpTask::new(BellScenario::new(2, 2).unwrap());
    for protocol in [Protocol::Classical, Protocol::Quantum(&rho)] {
        let hits = (0..100u64)
            .filter(|&seed| {
                simulate_protocol(&task, &protocol, 100_000, seed, 4)
                    .unwrap()
                    .within_sigmas(3.0)
            })
            .count();
        assert!(hits >= 99, "{:?}: {hits}/100", protocol.kind());
    }
}
