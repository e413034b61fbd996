//! Randomized invariants over light-tailed models.

use alloc::vec::Vec;

use proptest::prelude::*;

use crate::chains::{
    build_embedded_matrix, exact_loss, invariant_measure_infinite, loss_from_infinite, loss_probability_exact,
    solve_finite, time_stationary_distribution, QueueModel,
};
use crate::distributions::Distribution;
use crate::real::{HighPrecision, Real};

fn law() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (0.2f64..5.0).prop_map(|r| Distribution::exponential(r).unwrap()),
        (1u32..5, 0.5f64..8.0).prop_map(|(k, r)| Distribution::erlang(k, r).unwrap()),
        (0.05f64..3.0).prop_map(|d| Distribution::deterministic(d).unwrap()),
        (0.05f64..0.95, 0.2f64..2.0, 2.0f64..9.0).prop_map(|(w, r1, r2)| Distribution::hyperexponential(
            alloc::vec![w, 1.0 - w],
            alloc::vec![r1, r2]
        )
        .unwrap()),
    ]
}

fn model() -> impl Strategy<Value = QueueModel> {
    (0.1f64..3.0, law(), prop_oneof![Just(Distribution::zero()), law()]).prop_filter_map(
        "a_0 underflow",
        |(l, s, v)| {
            let m = QueueModel::new(l, s, v).ok()?;
            (m.rho() < 8.0).then_some(m)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn finite_solution_is_invariant(m in model(), n in 2usize..25) {
        let k = m.kernel::<f64>(n).unwrap();
        let pi = solve_finite(n, &k).unwrap();
        let total: f64 = pi.values.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(pi.values.iter().all(|&x| x >= 0.0));
        let p = build_embedded_matrix(n, &k).unwrap();
        let back = p.left_multiply(&pi.values);
        for (x, y) in back.iter().zip(&pi.values) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn loss_is_a_probability_above_its_limit(m in model(), n in 1usize..30) {
        let loss = exact_loss::<f64>(&m, n).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&loss), "{loss}");
        let limit = (1.0 - 1.0 / m.rho()).max(0.0);
        prop_assert!(loss >= limit - 1e-10, "{loss} < {limit}");
    }

    #[test]
    fn loss_decreases_with_capacity(m in model(), n in 1usize..20) {
        let a = exact_loss::<HighPrecision>(&m, n).unwrap();
        let b = exact_loss::<HighPrecision>(&m, n + 1).unwrap();
        prop_assert!(b <= a, "{a:?} then {b:?}");
    }

    #[test]
    fn time_distribution_sums_to_one(m in model(), n in 1usize..20) {
        let k = m.kernel::<HighPrecision>(n).unwrap();
        let pi = solve_finite(n, &k).unwrap();
        let star: Vec<f64> = time_stationary_distribution(&m, &k, &pi).iter().map(Real::to_f64).collect();
        prop_assert_eq!(star.len(), n + 1);
        prop_assert!((star.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(star.iter().all(|&x| x >= -1e-15));
        let loss = loss_probability_exact(&m, &k, &pi).to_f64();
        prop_assert!((star[n] - loss).abs() < 1e-12, "PASTA: {} vs {loss}", star[n]);
    }

    #[test]
    fn infinite_measure_reproduces_finite_loss(m in model(), n in 2usize..20) {
        let k = m.kernel::<HighPrecision>(n).unwrap();
        let measure = invariant_measure_infinite(&m, &k, n).unwrap();
        let via_measure = loss_from_infinite(&m, &k, &measure, n).to_f64();
        let direct = loss_probability_exact(&m, &k, &solve_finite(n, &k).unwrap()).to_f64();
        prop_assert!((via_measure - direct).abs() <= 1e-10 * direct.abs().max(1e-300), "{via_measure} vs {direct}");
    }
}
