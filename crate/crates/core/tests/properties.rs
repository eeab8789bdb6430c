//! Property tests for the algebraic invariants of the sequence calculus.

use fracdiff_core::fracdiff::{self, VecSeq};
use fracdiff_core::kernels::{cesaro_kernel, conv, forward_diff, FracOrder, ScalarSeq};
use fracdiff_core::solver::{admissibility, weighted_norm, WeightKind};
use proptest::prelude::*;

fn seq_strategy(len: usize) -> impl Strategy<Value = ScalarSeq> {
    prop::collection::vec(-1.0f64..1.0, len).prop_map(|v| ScalarSeq::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_commutes(u in seq_strategy(33), v in seq_strategy(33)) {
        let uv = conv(&u, &v).unwrap();
        let vu = conv(&v, &u).unwrap();
        for n in 0..=32 {
            prop_assert!((uv[n] - vu[n]).abs() <= 1e-12 * uv[n].abs().max(1.0));
        }
    }

    #[test]
    fn convolution_associates(
        u in seq_strategy(33),
        v in seq_strategy(33),
        w in seq_strategy(33),
    ) {
        let left = conv(&conv(&u, &v).unwrap(), &w).unwrap();
        let right = conv(&u, &conv(&v, &w).unwrap()).unwrap();
        for n in 0..=32 {
            prop_assert!((left[n] - right[n]).abs() <= 1e-12 * left[n].abs().max(1.0));
        }
    }

    #[test]
    fn kernel_semigroup_at_random_orders(
        a in 0.15f64..2.4,
        b in 0.15f64..2.4,
    ) {
        let ka = cesaro_kernel(a, 64).unwrap();
        let kb = cesaro_kernel(b, 64).unwrap();
        let kab = cesaro_kernel(a + b, 64).unwrap();
        let got = conv(&ka, &kb).unwrap();
        for n in 0..=64 {
            prop_assert!((got[n] - kab[n]).abs() <= 1e-12 * kab[n]);
        }
    }

    #[test]
    fn repeated_first_differences_match_binomial_form(
        u in seq_strategy(25),
        m in 1u32..4,
    ) {
        let mut iterated = u.clone();
        for _ in 0..m {
            iterated = forward_diff(&iterated, 1).unwrap();
        }
        let direct = forward_diff(&u, m).unwrap();
        for n in 0..iterated.values().len() {
            prop_assert!(
                (iterated[n] - direct[n]).abs() <= 1e-13 * direct[n].abs().max(1.0)
            );
        }
    }

    #[test]
    fn fractional_difference_inverts_fractional_sum(
        u in seq_strategy(29),
        alpha in 1.05f64..1.95,
    ) {
        let order = FracOrder::solver_order(alpha).unwrap();
        let vs = VecSeq::from_scalar(&u);
        let summed = fracdiff::frac_sum(alpha, &vs).unwrap();
        let back = fracdiff::rl_diff(order, &summed).unwrap();
        let scale = vs.sup_norm().max(1.0);
        for n in 0..=26 {
            prop_assert!((back.state(n)[0] - u[n + 2]).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn weighted_norm_is_absolutely_homogeneous(
        u in seq_strategy(22),
        c in -8.0f64..8.0,
    ) {
        let space = admissibility(&WeightKind::Factorial, 21).unwrap();
        let base = VecSeq::from_scalar(&u);
        let mut scaled = base.clone();
        for n in 0..=21 {
            for x in scaled.state_mut(n) {
                *x *= c;
            }
        }
        let lhs = weighted_norm(&scaled, &space);
        let rhs = c.abs() * weighted_norm(&base, &space);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300) + 1e-300);
    }
}
