//! Finite filtered probability spaces and discrete martingale inequalities,
//! checked by exhaustive enumeration of atoms.

mod checks;
mod stats;
mod tree;

pub use checks::{
    bdg_phi_check, conditional_sum_check, davis_decompose, doob_lp_check, doob_phi_check, garsia_gap,
    good_lambda_check, measured_constant, previsible_control_check, previsible_control_constant,
    require_nonneg_submartingale, sibling_envelope, type_ratio, DavisCheck, DavisDecomposition, DiscreteReport,
    GarsiaReport, GoodLambdaReport, JointLaw, CHECK_TOL,
};
pub use stats::{stats, MartingaleStats};
pub use tree::{
    binary_walk, from_level_specs, random_martingale, AdaptedProcess, FiltrationTree, LevelSpec, Node,
    RandomTreeParams, TreeSpec, MARTINGALE_TOL, MAX_ATOMS,
};

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::convex::{conjugate, power_phi, ConvexFunction};
    use crate::Norm;

    fn two_point(values: [f64; 2]) -> AdaptedProcess {
        let tree = Arc::new(FiltrationTree::from_levels(&[vec![vec![0.5, 0.5]]]).unwrap());
        AdaptedProcess::scalar(tree, vec![0.0, values[0], values[1]]).unwrap()
    }

    fn random(seed: u64, depth: usize, d: usize, norm: Norm, start_zero: bool) -> AdaptedProcess {
        random_martingale(&RandomTreeParams { depth, branching: 3, dim: d, norm, seed, start_zero }).unwrap()
    }

    #[test]
    fn tree_masses_validated() {
        assert!(FiltrationTree::from_levels(&[vec![vec![0.5, 0.4]]]).is_err());
        assert!(FiltrationTree::from_levels(&[vec![vec![]]]).is_err());
        let t = FiltrationTree::from_levels(&[vec![vec![0.5, 0.5]], vec![vec![1.0], vec![0.25, 0.75]]]).unwrap();
        assert_eq!(t.depth(), 2);
        assert_eq!(t.leaves().len(), 3);
        let mass: f64 = t.leaves().map(|id| t.node(id).prob).sum();
        assert!((mass - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_expectation_examples() {
        let walk = binary_walk(3, 1.0, 0.0).unwrap();
        let c = AdaptedProcess::scalar(walk.tree().clone(), vec![2.5; walk.tree().len()]).unwrap();
        for k in 0..=3 {
            assert!(c.conditional_expectation(3, k).unwrap().iter().all(|&v| v == 2.5));
        }
        let coin = two_point([-1.0, 1.0]);
        assert_eq!(coin.conditional_expectation(1, 0).unwrap(), vec![0.0]);
        let tree = Arc::new(FiltrationTree::from_levels(&[vec![vec![0.5, 0.25, 0.25]]]).unwrap());
        let x = AdaptedProcess::scalar(tree, vec![0.0, 4.0, 0.0, 8.0]).unwrap();
        assert_eq!(x.conditional_expectation(1, 0).unwrap(), vec![4.0]);
        assert!(matches!(x.conditional_expectation(2, 0), Err(crate::Error::DepthOutOfRange { .. })));
        assert!(x.conditional_expectation(0, 1).is_err());
    }

    #[test]
    fn martingale_examples() {
        assert!(binary_walk(4, 1.0, 0.0).unwrap().is_martingale(MARTINGALE_TOL));
        assert!(!two_point([1.0, 1.0]).is_martingale(MARTINGALE_TOL));
        // M_{k+1} = M_k·U, U ∈ {0.5, 1.5}
        let levels: Vec<Vec<Vec<f64>>> = (0..3).map(|k| vec![vec![0.5, 0.5]; 1 << k]).collect();
        let tree = Arc::new(FiltrationTree::from_levels(&levels).unwrap());
        let mut vals = vec![1.0; tree.len()];
        for id in 1..tree.len() {
            let parent = tree.node(id).parent.unwrap();
            let first = tree.node(parent).children[0] == id;
            vals[id] = vals[parent] * if first { 0.5 } else { 1.5 };
        }
        assert!(AdaptedProcess::scalar(tree, vals).unwrap().is_martingale(MARTINGALE_TOL));
    }

    #[test]
    fn stats_examples() {
        let tree = Arc::new(FiltrationTree::from_levels(&[vec![vec![1.0]]]).unwrap());
        let c = AdaptedProcess::scalar(tree, vec![-3.0, -3.0]).unwrap();
        let st = stats(&c, 1.5);
        assert_eq!(st.max_abs[2 - 1], 3.0);
        assert!((st.s_big[1] - 3.0).abs() < 1e-15);

        let coin = two_point([-1.0, 1.0]);
        let st = stats(&coin, 2.0);
        for leaf in 1..3 {
            assert_eq!((st.s_big[leaf], st.max_abs[leaf], st.s_small[leaf]), (1.0, 1.0, 1.0));
        }
        let walk = binary_walk(2, 1.0, 0.0).unwrap();
        let st = stats(&walk, 2.0);
        for leaf in walk.tree().leaves() {
            assert!((st.s_big[leaf] - 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn davis_examples() {
        let coin = two_point([-1.0, 1.0]);
        let dec = davis_decompose(&coin).unwrap();
        assert!(dec.g.values().iter().all(|&v| v == 0.0));
        assert_eq!(dec.h.values(), coin.values());

        let tree = Arc::new(FiltrationTree::from_levels(&[vec![vec![0.5, 0.5]], vec![vec![1.0], vec![1.0]]]).unwrap());
        let c = AdaptedProcess::scalar(tree, vec![2.0; 5]).unwrap();
        let dec = davis_decompose(&c).unwrap();
        assert!(dec.g.values().iter().all(|&v| v == 0.0));
        assert!(dec.h.values().iter().all(|&v| v == 2.0));
        assert!(dec.small.iter().all(|&v| v == 0.0));

        let m = random(11, 3, 1, Norm::EUCLIDEAN, false);
        let dec = davis_decompose(&m).unwrap();
        assert!(dec.check(&m).holds(1e-10), "{:?}", dec.check(&m));

        assert!(matches!(davis_decompose(&two_point([1.0, 2.0])), Err(crate::Error::NotMartingale { .. })));
    }

    #[test]
    fn doob_examples() {
        let pair = conjugate(&power_phi(2.0).unwrap());
        let zero = two_point([0.0, 0.0]);
        let r = doob_phi_check(&zero, &pair).unwrap();
        assert_eq!((r.lhs, r.rhs, r.pass), (0.0, 0.0, true));
        let x = two_point([0.0, 1.0]);
        let r = doob_phi_check(&x, &pair).unwrap();
        assert_eq!((r.lhs, r.constant, r.constant * r.rhs), (0.5, 4.0, 2.0));
        assert!(r.pass);
        let walk = binary_walk(3, 1.0, 0.0).unwrap().norm_process();
        let r = doob_phi_check(&walk, &pair).unwrap();
        // 8-atom enumeration by hand: max |S_k| over paths of a 3-step walk.
        let mut lhs = 0.0;
        let mut rhs = 0.0;
        for bits in 0..8u32 {
            let mut s = 0i32;
            let mut mx = 0i32;
            for k in 0..3 {
                s += if bits >> k & 1 == 1 { 1 } else { -1 };
                mx = mx.max(s.abs());
            }
            lhs += f64::from(mx * mx) / 8.0;
            rhs += f64::from(s * s) / 8.0;
        }
        assert!((r.lhs - lhs).abs() < 1e-14 && (r.rhs - rhs).abs() < 1e-14);
        assert!(r.pass);
        assert!(doob_phi_check(&two_point([1.0, -1.0]), &pair).is_err());
        let shifted = binary_walk(1, 1.0, 1.0).unwrap();
        assert!(matches!(doob_phi_check(&shifted, &pair), Err(crate::Error::NotSubmartingale(_))));
    }

    #[test]
    fn garsia_examples() {
        let half_square = ConvexFunction::power(0.5, 2.0).unwrap(); // φ(t) = t
        let r = garsia_gap(&two_point([0.0, 0.0]), &half_square).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let r = garsia_gap(&two_point([0.0, 1.0]), &half_square).unwrap();
        assert_eq!((r.lhs, r.rhs, r.gap), (0.25, 0.5, 0.25));
        // |walk| on depth 2
        let x = binary_walk(2, 1.0, 0.0).unwrap().norm_process();
        assert!(garsia_gap(&x, &half_square).unwrap().gap >= -1e-10);
    }

    #[test]
    fn conditional_sum_examples() {
        let sq = conjugate(&power_phi(2.0).unwrap());
        let lin = conjugate(&power_phi(1.0).unwrap());
        let walk = binary_walk(3, 1.0, 0.0).unwrap();
        let det = AdaptedProcess::scalar(walk.tree().clone(), vec![0.7; walk.tree().len()]).unwrap();
        let r = conditional_sum_check(&det, &sq).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-12 && r.pass);
        let z = random(5, 3, 1, Norm::EUCLIDEAN, false).norm_process();
        let r = conditional_sum_check(&z, &lin).unwrap();
        assert_eq!(r.constant, 1.0);
        assert!((r.lhs - r.rhs).abs() < 1e-12);
        let r = conditional_sum_check(&z, &sq).unwrap();
        assert_eq!(r.constant, 16.0);
        assert!(r.pass);
        let neg = two_point([-1.0, 1.0]);
        assert!(matches!(conditional_sum_check(&neg, &sq), Err(crate::Error::NegativeValue { .. })));
    }

    #[test]
    fn good_lambda_examples() {
        let lin = power_phi(1.0).unwrap();
        let same = JointLaw { atoms: vec![(1.0, 1.0, 0.5), (3.0, 3.0, 0.5)] };
        let r = good_lambda_check(&same, &lin, 2.0, 0.5, 0.25).unwrap();
        assert_eq!(r.minimal_epsilon, 0.0);
        assert!(r.applicable && r.conclusion_holds == Some(true));
        assert_eq!(r.regime, "0<delta<=1");

        let r = good_lambda_check(&same, &lin, 4.0, 4.0, 0.125).unwrap();
        assert_eq!((r.gamma, r.eta), (4.0, 0.25));
        assert_eq!(r.bound.unwrap(), 2.0 * 2.0);
        assert_eq!(r.regime, "delta>1");

        let sq = power_phi(2.0).unwrap();
        let bounded = JointLaw { atoms: vec![(1.0, 2.0, 0.25), (2.0, 0.5, 0.25), (0.5, 1.0, 0.5)] };
        let r = good_lambda_check(&bounded, &sq, 3.0, 1.0, 0.1).unwrap();
        // y ≤ 2x pointwise and β = 3 > 2δ: the event {y > 3λ, x ≤ λ} is empty.
        assert_eq!(r.minimal_epsilon, 0.0);
        let lhs: f64 = bounded.atoms.iter().map(|&(_, y, p)| p * y * y).sum();
        assert_eq!(r.lhs, lhs);
        assert_eq!(r.conclusion_holds, Some(true));
    }

    #[test]
    fn previsible_examples() {
        let sq = power_phi(2.0).unwrap();
        let zero = two_point([0.0, 0.0]);
        let w = two_point([0.0, 0.0]);
        let r = previsible_control_check(&zero, &w, &sq, 2.0, 1.0).unwrap();
        assert_eq!((r.lhs, r.rhs, r.pass), (0.0, 0.0, true));

        let walk = binary_walk(3, 1.0, 0.0).unwrap();
        let mut ones = vec![1.0; walk.tree().len()];
        ones[0] = 0.0;
        let w = AdaptedProcess::scalar(walk.tree().clone(), ones).unwrap();
        let c = previsible_control_constant(2.0, 2.0, 1.0);
        let r = previsible_control_check(&walk, &w, &sq, 2.0, c).unwrap();
        assert!(r.pass && r.measured_constant < c);
        // E max_k S_k² over a 3-step walk is 30/8; E S_3² = 3 and w* = 1.
        assert!((r.measured_constant - 3.75 / 4.0).abs() < 1e-12, "{}", r.measured_constant);

        let bad = AdaptedProcess::scalar(walk.tree().clone(), vec![0.5; walk.tree().len()]).unwrap();
        assert!(matches!(previsible_control_check(&walk, &bad, &sq, 2.0, c), Err(crate::Error::NotPrevisible { .. })));
    }

    #[test]
    fn previsible_constant_minimizes() {
        // Φ = t², L = 1, p = 2: C(β) = 2β²(1+2β)²/(β−1)², minimal near β ≈ 2.
        let c = previsible_control_constant(2.0, 2.0, 1.0);
        let brute = (1..200_000)
            .map(|i| 1.0 + i as f64 * 1e-4)
            .map(|b: f64| 2.0 * b * b * (1.0 + 2.0 * b).powi(2) / (b - 1.0).powi(2))
            .fold(f64::INFINITY, f64::min);
        assert!((c - brute).abs() < 1e-6 * brute, "{c} vs {brute}");
    }

    #[test]
    fn bdg_examples() {
        let sq = power_phi(2.0).unwrap();
        let tree = Arc::new(FiltrationTree::from_levels(&[vec![vec![1.0]]]).unwrap());
        let c = AdaptedProcess::scalar(tree, vec![1.5, 1.5]).unwrap();
        let r = bdg_phi_check(&c, &sq, 2.0, 1.0).unwrap();
        assert_eq!((r.lhs, r.rhs, r.measured_constant), (2.25, 2.25, 1.0));
        let walk = binary_walk(4, 1.0, 0.0).unwrap();
        let r = bdg_phi_check(&walk, &sq, 2.0, 4.0).unwrap();
        assert!(r.pass && r.measured_constant <= 4.0);
        let m = random(3, 4, 3, Norm::L(1.0), false);
        let r = bdg_phi_check(&m, &power_phi(1.5).unwrap(), 1.5, f64::INFINITY).unwrap();
        assert!(r.measured_constant.is_finite() && r.measured_constant > 0.0);
    }

    proptest! {
        #[test]
        fn tower_property(seed in 0u64..500, depth in 1usize..5, d in 1usize..3) {
            let m = random(seed, depth, d, Norm::EUCLIDEAN, false);
            for j in 0..=depth {
                let direct_full = m.conditional_expectation(depth, j).unwrap();
                for k in 0..=j {
                    // E[E[X_N | F_j] | F_k] via a process holding E[X_N | F_j] at depth j.
                    let mut vals = m.values().to_vec();
                    let lvl = m.tree().level(j);
                    vals[lvl.start * d..lvl.end * d].copy_from_slice(&direct_full);
                    let inner = AdaptedProcess::new(m.tree().clone(), d, vals, m.norm()).unwrap();
                    let nested = inner.conditional_expectation(j, k).unwrap();
                    let direct = m.conditional_expectation(depth, k).unwrap();
                    for (a, b) in nested.iter().zip(&direct) {
                        prop_assert!((a - b).abs() < 1e-12);
                    }
                }
            }
        }

        #[test]
        fn maximal_statistics_nondecreasing(seed in 0u64..500, p in 1.0f64..2.0) {
            let m = random(seed, 4, 2, Norm::Inf, false);
            let st = stats(&m, p);
            for id in 1..m.tree().len() {
                let q = m.tree().node(id).parent.unwrap();
                prop_assert!(st.s_big[id] >= st.s_big[q]);
                prop_assert!(st.max_abs[id] >= st.max_abs[q]);
                prop_assert!(st.s_small[id] >= st.s_small[q]);
            }
        }

        #[test]
        fn davis_identities(seed in 0u64..500, d in 1usize..4, s in prop::sample::select(vec![1.0, 2.0, f64::INFINITY])) {
            let m = random(seed, 4, d, Norm::new(s).unwrap(), false);
            let dec = davis_decompose(&m).unwrap();
            let chk = dec.check(&m);
            prop_assert!(chk.holds(1e-10), "{:?}", chk);
        }

        #[test]
        fn doob_lp_holds(seed in 0u64..500, p in 1.1f64..3.0) {
            let x = random(seed, 4, 1, Norm::EUCLIDEAN, true).norm_process();
            prop_assert!(doob_lp_check(&x, p).unwrap().pass);
        }

        #[test]
        fn hilbert_type_identity(seed in 0u64..500, d in 1usize..4) {
            let m = random(seed, 4, d, Norm::EUCLIDEAN, false);
            let (lhs, rhs) = type_ratio(&m, 2.0);
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs));
        }

        #[test]
        fn garsia_direction(seed in 0u64..500, p in 1.0f64..3.0) {
            let x = random(seed, 4, 1, Norm::EUCLIDEAN, true).norm_process();
            prop_assert!(garsia_gap(&x, &power_phi(p).unwrap()).unwrap().gap >= -1e-10);
        }
    }
}
