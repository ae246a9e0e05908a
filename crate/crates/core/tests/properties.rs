use proptest::prelude::*;
use turnover::charfn::{psi_inf_k, psi_n, psi_n_k, ArgVector};
use turnover::empirical::{empirical_cf, kde, linspace, trapezoid};
use turnover::rng::stream;
use turnover::simulator::{distance_row, renormalise, sample_jump, EnsembleState};
use turnover::{OffsetDistribution, OffsetKind};

fn kind() -> impl Strategy<Value = OffsetKind> {
    prop_oneof![
        Just(OffsetKind::Gaussian),
        Just(OffsetKind::Uniform),
        Just(OffsetKind::TwoPoint)
    ]
}

fn dist() -> impl Strategy<Value = OffsetDistribution> {
    (kind(), 0.01f64..2.0).prop_map(|(k, s)| OffsetDistribution::new(k, s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn xi_even_and_bounded(d in dist(), s in -200.0f64..200.0) {
        prop_assert_eq!(d.xi(s), d.xi(-s));
        prop_assert!(d.xi(s).abs() <= 1.0);
    }

    #[test]
    fn joint_cf_bounded_even_and_one_at_origin(
        d in dist(),
        n in 3usize..9,
        args in proptest::collection::vec(-30.0f64..30.0, 1..4),
    ) {
        prop_assume!(args.len() < n);
        let v = psi_n_k(&ArgVector::new(args.clone()).unwrap(), n, &d).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-12);
        let neg: Vec<f64> = args.iter().map(|x| -x).collect();
        let w = psi_n_k(&ArgVector::new(neg).unwrap(), n, &d).unwrap();
        prop_assert!((v - w).abs() < 1e-12);
        let zero = psi_n_k(&ArgVector::new(vec![0.0; args.len()]).unwrap(), n, &d).unwrap();
        prop_assert!((zero - 1.0).abs() < 1e-14);
    }

    #[test]
    fn joint_cf_permutation_and_marginalisation(
        d in dist(),
        n in 4usize..9,
        a in -30.0f64..30.0,
        b in -30.0f64..30.0,
        c in -30.0f64..30.0,
    ) {
        let f = |v: Vec<f64>| psi_n_k(&ArgVector::new(v).unwrap(), n, &d).unwrap();
        let base = f(vec![a, b, c]);
        for perm in [vec![c, a, b], vec![b, c, a], vec![a, c, b]] {
            prop_assert!((f(perm) - base).abs() < 1e-12);
        }
        prop_assert!((f(vec![a, 0.0, c]) - f(vec![a, c])).abs() < 1e-12);
        prop_assert!((f(vec![a, 0.0]) - psi_n(a, n, &d).unwrap()).abs() < 1e-12);
        let g = |v: Vec<f64>| psi_inf_k(&ArgVector::new(v).unwrap(), d.sigma()).unwrap();
        prop_assert!((g(vec![b, c, a]) - g(vec![a, b, c])).abs() < 1e-12);
        prop_assert!((g(vec![0.0, b, c]) - g(vec![b, c])).abs() < 1e-12);
    }

    #[test]
    fn renormalised_view_sums_to_zero_and_ignores_translation(
        xs in proptest::collection::vec(-1e3f64..1e3, 2..40),
        shift in -1e3f64..1e3,
    ) {
        let view = renormalise(&EnsembleState::new(xs.clone()));
        prop_assert!(view.positions.iter().sum::<f64>().abs() <= view.zero_sum_tolerance() * 1e3);
        let moved = renormalise(&EnsembleState::new(xs.iter().map(|x| x + shift).collect()));
        let (a, b) = (distance_row(&view).values, distance_row(&moved).values);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn jumps_move_one_coordinate_to_a_neighbour(d in dist(), n in 2usize..30, seed in any::<u64>()) {
        let mut rng = stream(seed);
        let mut state = EnsembleState::new((0..n).map(|i| i as f64).collect());
        for _ in 0..50 {
            let before = state.positions.clone();
            let jump = sample_jump(n, &d, &mut rng);
            prop_assert!(jump.target != jump.source && jump.target < n && jump.source < n);
            state.apply(jump);
            let changed = before.iter().zip(&state.positions).filter(|(a, b)| a != b).count();
            prop_assert!(changed <= 1);
            prop_assert_eq!(state.positions[jump.target], before[jump.source] + jump.offset);
        }
    }

    #[test]
    fn kde_is_a_density(
        xs in proptest::collection::vec(-1.0f64..1.0, 1..200),
        h in 0.02f64..0.3,
    ) {
        let grid = linspace(-3.0, 3.0, 2001);
        let f = kde(&xs, h, &grid).unwrap();
        prop_assert!(f.iter().all(|v| *v >= 0.0));
        prop_assert!((trapezoid(&grid, &f) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn empirical_cf_is_conjugate_symmetric(
        xs in proptest::collection::vec(-5.0f64..5.0, 1..100),
        s in -50.0f64..50.0,
    ) {
        let (re, im) = empirical_cf(&xs, s).unwrap();
        let (re2, im2) = empirical_cf(&xs, -s).unwrap();
        prop_assert_eq!(re, re2);
        prop_assert_eq!(im, -im2);
    }
}
