use levy_bdg::convex::{c_star, check_identities, conjugate, growth_constant, power_phi, ConvexFunction};
use levy_bdg::inequalities::{mc_verify_i, mc_verify_ii, BanachModel, McSettings, Verdict};
use levy_bdg::integrator::{integrate, IntegrandSpec};
use levy_bdg::prm::{sample_prm, GeometricSpec, MarkMeasure};
use levy_bdg::rng::StreamKey;
use levy_bdg::Norm;
use proptest::prelude::*;

fn three_atoms() -> MarkMeasure {
    MarkMeasure::new(vec![(vec![1.0], 0.5), (vec![-0.5], 1.0), (vec![2.0], 0.25)], Norm::EUCLIDEAN).unwrap()
}

fn threshold_integrand(nu: &MarkMeasure, horizon: f64) -> levy_bdg::integrator::StepIntegrand {
    let spec: IntegrandSpec =
        serde_json::from_str(r#"{"kind":"adapted_threshold","threshold":0.8,"low":1.5,"high":-0.5,"partition":5}"#)
            .unwrap();
    spec.build(nu, horizon, Norm::EUCLIDEAN).unwrap()
}

/// A convex table from positive density increments.
fn table_from(steps: &[(f64, f64)]) -> ConvexFunction {
    let (mut t, mut phi) = (vec![0.0], vec![0.0]);
    let mut density = 0.0;
    for &(dt, dd) in steps {
        density += dd;
        let last_t = *t.last().unwrap();
        let last_phi = *phi.last().unwrap();
        t.push(last_t + dt);
        phi.push(last_phi + density * dt);
    }
    ConvexFunction::table(t, phi).unwrap()
}

fn grid(max: f64) -> Vec<f64> {
    (0..=40).map(|i| max * i as f64 / 40.0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn young_inequality_on_tables(steps in prop::collection::vec((0.1f64..2.0, 0.05f64..3.0), 1..6)) {
        let f = table_from(&steps);
        let pair = conjugate(&f);
        for &u in &grid(f.default_range()) {
            for &v in &grid(pair.dual.default_range()) {
                prop_assert!(pair.young_gap(u, v) >= -1e-10, "u={u} v={v}");
            }
        }
    }

    #[test]
    fn power_conjugation_is_an_involution(p in 1.05f64..6.0, scale in 0.2f64..5.0) {
        let f = ConvexFunction::power(scale, p).unwrap();
        let back = conjugate(&conjugate(&f).dual).dual;
        for &u in &grid(10.0) {
            let (a, b) = (f.value(u), back.value(u));
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300), "u={u}: {a} vs {b}");
        }
    }

    #[test]
    fn power_growth_constants(p in 1.0f64..6.0) {
        let f = power_phi(p).unwrap();
        prop_assert_eq!(c_star(&f, 100.0).unwrap(), p);
        prop_assert_eq!(growth_constant(&f, 100.0).unwrap(), 2f64.powf(p));
    }

    #[test]
    fn convexity_identities_for_powers(p in 1.0f64..5.0) {
        let pair = conjugate(&power_phi(p).unwrap());
        let rep = check_identities(&pair, &grid(4.0));
        prop_assert!(rep.fenchel_equality <= 1e-8, "{rep:?}");
        let scale = pair.primal.value(40.0).max(pair.dual.value(4.0)).max(1.0);
        prop_assert!(rep.max_violation() <= 1e-12 * scale, "{rep:?}");
    }

    #[test]
    fn prm_paths_reproducible_and_sorted(seed in any::<u64>(), index in 0u64..1000, horizon in 0.1f64..5.0) {
        let nu = three_atoms();
        let key = StreamKey::new(seed, 3);
        let a = sample_prm(&nu, horizon, &key, index).unwrap();
        let b = sample_prm(&nu, horizon, &key, index).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.times.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(a.times.iter().all(|&t| t > 0.0 && t <= horizon));
    }

    #[test]
    fn truncation_only_removes_mass(first in 0.5f64..3.0, ratio in 0.2f64..0.9, eps in 0.0f64..2.0) {
        let g = GeometricSpec { first, ratio, count: 8, weight: 1.0, weight_ratio: 1.0, direction: None };
        let nu = MarkMeasure::geometric(&g, Norm::EUCLIDEAN).unwrap();
        let cut = nu.truncate(eps).unwrap();
        prop_assert!(cut.total_mass() <= nu.total_mass());
        prop_assert!(cut.atoms().iter().all(|a| nu.atom_by_id(a.id) == Some(a)));
        prop_assert!(cut.atoms().iter().all(|a| a.z[0].abs() > eps));
    }

    #[test]
    fn functionals_nondecreasing_in_time(seed in 0u64..500) {
        let nu = three_atoms();
        let xi = threshold_integrand(&nu, 2.0);
        let path = sample_prm(&nu, 2.0, &StreamKey::new(seed, 1), 0).unwrap();
        let ip = integrate(&xi, &path, &nu).unwrap();
        let mut prev = (0.0, 0.0, 0.0);
        for k in 0..=20 {
            let t = 0.1 * k as f64;
            let cur = (ip.sup_norm(t), ip.jump_power_sum(4.0, t), ip.nu_power_integral(&nu, 4.0, t).unwrap());
            prop_assert!(cur.0 >= prev.0 && cur.1 >= prev.1 && cur.2 >= prev.2);
            prev = cur;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn measured_ratio_is_scale_invariant(c in prop::sample::select(vec![-3.0, -0.5, 0.25, 2.0, 7.0])) {
        let nu = three_atoms();
        let xi = threshold_integrand(&nu, 1.0);
        let model = BanachModel::euclidean(1);
        let mc = McSettings { paths: 400, horizon: 1.0, key: StreamKey::new(5, 5), threads: 0 };
        let base = mc_verify_ii(&model, &xi, &nu, 4.0, &mc).unwrap().primary;
        let scaled = mc_verify_ii(&model, &xi.scaled(c), &nu, 4.0, &mc).unwrap().primary;
        let k = c.abs().powi(4);
        prop_assert!((scaled.lhs.mean - k * base.lhs.mean).abs() <= 1e-9 * k * base.lhs.mean);
        prop_assert!((scaled.rhs.mean - k * base.rhs.mean).abs() <= 1e-9 * k * base.rhs.mean);
        prop_assert!((scaled.ratio - base.ratio).abs() <= 1e-9 * base.ratio);
    }

    #[test]
    fn degenerate_constant_never_plain_pass(q in prop::sample::select(vec![1.0, 1.5, 2.0])) {
        let nu = three_atoms();
        let xi = threshold_integrand(&nu, 1.0);
        let model = BanachModel::euclidean(1);
        let mc = McSettings { paths: 300, horizon: 1.0, key: StreamKey::new(6, 6), threads: 0 };
        // r = p makes the printed (ii) factor vanish.
        let rep = mc_verify_ii(&model, &xi, &nu, 2.0, &mc).unwrap();
        prop_assert!(rep.primary.degenerate);
        prop_assert_ne!(rep.primary.verdict, Verdict::Pass);
        prop_assert!(rep.primary.measured_constant.is_finite());
        let rep = mc_verify_i(&model, &xi, &nu, q, &mc).unwrap();
        for c in rep.all() {
            prop_assert!(!c.degenerate || c.verdict != Verdict::Pass);
        }
    }
}
