mod common;

use capbound::entropy::{self, conditional_mutual_information, LabeledState};
use capbound::linalg;
use capbound::sdp;
use capbound::state::DensityMatrix;
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn private_information_splits_over_spectral_decompositions(seed in any::<u64>(), members in 2usize..4) {
        let mut r = rng(seed);
        let ch = random_small_channel(&mut r, 3);
        let ens = random_ensemble(&mut r, members, ch.dim_in());
        let (lhs, rhs) = private_split(&ch, &ens);
        prop_assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn three_letter_coherent_information_telescopes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ch = random_channel(&mut r, 2, 2, 2);
        let rho = random_input(&mut r, 8);
        let t = telescope(&ch, 3, &rho);
        let sum: f64 = t.steps.iter().sum();
        prop_assert!((sum - t.total).abs() < 1e-9, "{sum} vs {}", t.total);
        for (a, b) in t.steps.iter().zip(&t.split_steps) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn strong_subadditivity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = linalg::random_density(&mut r, 8, 8);
        let s = LabeledState::new(vec![("A", 2), ("B", 2), ("C", 2)], DensityMatrix::from_trusted(rho)).unwrap();
        prop_assert!(conditional_mutual_information(&s, &["A"], &["B"], &["C"]).unwrap() >= -1e-9);
    }

    #[test]
    fn pure_tripartite_marginals_share_entropy(seed in any::<u64>()) {
        let mut r = rng(seed);
        let v = linalg::random_pure(&mut r, 12);
        let s = LabeledState::new(vec![("A", 2), ("B", 3), ("E", 2)], DensityMatrix::pure(&v)).unwrap();
        prop_assert!((s.entropy(&["A", "B"]).unwrap() - s.entropy(&["E"]).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn entropy_is_continuous_in_trace_distance(seed in any::<u64>(), t in 0.0f64..0.1) {
        let mut r = rng(seed);
        let rho = linalg::random_density(&mut r, 3, 3);
        let sigma = linalg::random_density(&mut r, 3, 3);
        let mixed = &rho * nalgebra::Complex::new(1.0 - t, 0.0) + &sigma * nalgebra::Complex::new(t, 0.0);
        let eps = 0.5 * linalg::trace_norm(&(&rho - &mixed));
        prop_assume!(eps <= 0.1);
        let gap = (entropy::entropy_of(&rho) - entropy::entropy_of(&mixed)).abs();
        prop_assert!(gap <= sdp::f1(3, 2.0 * eps).unwrap() + 1e-9, "{gap} at eps {eps}");
    }
}
