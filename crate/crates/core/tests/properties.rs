use chaoslab::channel::{choi_from_unitary, Environment};
use chaoslab::echo::{choi_echo_paths, haar_echo_exact, DEFAULT_MAX_EXACT_SITES};
use chaoslab::spectra::spacing_ratios;
use chaoslab::spinops::{haar_unitary, kron, partial_trace, random_product_state, ComplexMatrix};
use chaoslab::Complex64;
use proptest::prelude::*;

fn matrix(dim: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |i, j| {
        let (re, im) = entries[i * dim + j];
        Complex64::new(re, im)
    })
}

fn entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
}

/// Random density matrix `A A† / Tr`.
fn density(dim: usize, entries: &[(f64, f64)]) -> ComplexMatrix {
    let a = matrix(dim, entries);
    let rho = a.matmul(&a.adjoint());
    let tr = rho.trace();
    rho.scale(Complex64::new(1.0, 0.0) / tr)
}

fn levels(increments: &[f64]) -> Vec<f64> {
    increments
        .iter()
        .scan(0.0, |acc, d| {
            *acc += d;
            Some(*acc)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kron_is_associative(a in entries(4), b in entries(9), c in entries(4)) {
        let (a, b, c) = (matrix(2, &a), matrix(3, &b), matrix(2, &c));
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
    }

    #[test]
    fn partial_traces_compose(e in entries(64)) {
        let rho = density(8, &e);
        let at_once = partial_trace(&rho, 3, &[2, 3]).unwrap();
        let third_then_second = partial_trace(&partial_trace(&rho, 3, &[3]).unwrap(), 2, &[2]).unwrap();
        let second_then_third = partial_trace(&partial_trace(&rho, 3, &[2]).unwrap(), 2, &[2]).unwrap();
        prop_assert!(at_once.max_abs_diff(&third_then_second) < 1e-12);
        prop_assert!(at_once.max_abs_diff(&second_then_third) < 1e-12);
        prop_assert!((at_once.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spacing_ratios_are_bounded_and_scale_invariant(
        inc in prop::collection::vec(0.01..5.0f64, 20..200),
        scale in 0.01..100.0f64,
        shift in -50.0..50.0f64,
        trim in 0.0..0.1f64,
    ) {
        let e = levels(&inc);
        let base = spacing_ratios(&e, trim).unwrap();
        prop_assert!(base.ratios.iter().all(|r| (0.0..=1.0).contains(r)));
        prop_assert!((0.0..=1.0).contains(&base.mean_r));
        let moved: Vec<f64> = e.iter().map(|x| scale * x + shift).collect();
        let other = spacing_ratios(&moved, trim).unwrap();
        prop_assert_eq!(base.ratios.len(), other.ratios.len());
        for (a, b) in base.ratios.iter().zip(&other.ratios) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn spacing_ratios_are_reflection_invariant(inc in prop::collection::vec(0.01..5.0f64, 20..200)) {
        let e = levels(&inc);
        let mirrored: Vec<f64> = e.iter().rev().map(|x| -x).collect();
        let mut a = spacing_ratios(&e, 0.05).unwrap().ratios;
        let mut b = spacing_ratios(&mirrored, 0.05).unwrap().ratios;
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn induced_channels_are_valid(seed in any::<u64>(), env_seed in any::<u64>(), probe in 1usize..=3) {
        let u = haar_unitary(8, seed);
        let env = random_product_state(2, env_seed).unwrap();
        let ch = choi_from_unitary(&u, Environment::Pure(env.amplitudes()), probe).unwrap();
        let purity = ch.choi_purity();
        prop_assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&purity));
        prop_assert!((purity - ch.choi_purity_from_basis_action()).abs() < 1e-10);
        let ptm = ch.pauli_transfer_matrix();
        prop_assert!((ptm.r[0][0] - 1.0).abs() < 1e-10);
        for k in 1..4 {
            prop_assert!(ptm.r[0][k].abs() < 1e-10);
        }
        let paths = choi_echo_paths(&u, Environment::Pure(env.amplitudes()), probe).unwrap();
        prop_assert!(paths.max_disagreement() < 1e-10);
        prop_assert!((paths.choi_purity - purity).abs() < 1e-10);
    }

    #[test]
    fn haar_echo_is_bounded(seed in any::<u64>(), probe in 1usize..=3) {
        let u = haar_unitary(8, seed);
        let echo = haar_echo_exact(&u, probe, DEFAULT_MAX_EXACT_SITES).unwrap();
        prop_assert!((0.25 - 1e-9..=1.0 + 1e-9).contains(&echo));
    }
}
