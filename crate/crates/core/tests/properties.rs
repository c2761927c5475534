use hearability::analytic::{pl_alpha4, pl_upper_bound};
use hearability::reuse::{pl_with_reuse_convolved, pl_with_reuse_enumerated, ReuseQuery};
use hearability::simulate::estimate_pl_curve;
use hearability::{evaluate, MethodTag, QuadratureSpec, Scenario, SimConfig};
use proptest::prelude::*;

fn scenario(l: usize, alpha: f64, p: f64, q: f64) -> Scenario {
    Scenario::builder().l(l).alpha(alpha).p(p).q(q).build().unwrap()
}

fn methods_for(alpha: f64) -> Vec<MethodTag> {
    MethodTag::ALL
        .into_iter()
        .filter(|m| !m.requires_alpha4() || alpha == 4.0)
        .collect()
}

fn alpha_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(4.0), 2.5f64..5.5]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn outputs_are_probabilities_and_decrease_in_threshold(
        l in 1usize..7,
        alpha in alpha_strategy(),
        p in 0.0f64..=1.0,
        q in 0.05f64..=1.0,
        db in -25.0f64..5.0,
        step in 0.1f64..6.0,
    ) {
        let s = scenario(l, alpha, p, q);
        let quad = QuadratureSpec::default();
        for m in methods_for(alpha) {
            let lo = evaluate(m, &s.with_threshold_db(db), &quad).unwrap();
            let hi = evaluate(m, &s.with_threshold_db(db + step), &quad).unwrap();
            prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
            prop_assert!(hi <= lo + 1e-9, "{m}: P({}) = {hi} > P({db}) = {lo}", db + step);
        }
    }

    #[test]
    fn more_participants_is_harder(
        l in 1usize..7,
        alpha in alpha_strategy(),
        p in 0.0f64..=1.0,
        db in -25.0f64..0.0,
    ) {
        let quad = QuadratureSpec::default();
        let a = scenario(l, alpha, p, 1.0).with_threshold_db(db);
        let b = scenario(l + 1, alpha, p, 1.0).with_threshold_db(db);
        for m in [MethodTag::UpperBound, MethodTag::DoubleIntegral] {
            let (x, y) = (evaluate(m, &a, &quad).unwrap(), evaluate(m, &b, &quad).unwrap());
            prop_assert!(y <= x + 1e-9, "{m}: L={l} gives {x}, L+1 gives {y}");
        }
    }

    #[test]
    fn density_scaling_leaves_interference_limited_outputs_unchanged(
        l in 1usize..6,
        alpha in alpha_strategy(),
        p in 0.0f64..=1.0,
        db in -22.0f64..0.0,
        factor in prop_oneof![Just(10.0), 0.01f64..100.0],
    ) {
        let quad = QuadratureSpec::default();
        let s = scenario(l, alpha, p, 1.0).with_threshold_db(db);
        let t = s.with_lambda(s.lambda() * factor).unwrap();
        for m in methods_for(alpha) {
            let (x, y) = (evaluate(m, &s, &quad).unwrap(), evaluate(m, &t, &quad).unwrap());
            if m.is_density_free() {
                prop_assert_eq!(x.to_bits(), y.to_bits(), "{}", m);
            } else {
                prop_assert!((x - y).abs() <= 1e-8, "{m}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn coordination_helps(db in -22.0f64..0.0, p_lo in 0.0f64..1.0, dp in 0.0f64..1.0) {
        let p_hi = (p_lo + dp).min(1.0);
        let quad = QuadratureSpec::default();
        let a = pl_alpha4(&scenario(4, 4.0, p_lo, 1.0).with_threshold_db(db), &quad).unwrap();
        let b = pl_alpha4(&scenario(4, 4.0, p_hi, 1.0).with_threshold_db(db), &quad).unwrap();
        prop_assert!(a + 1e-9 >= b, "p={p_lo}: {a}, p={p_hi}: {b}");
    }

    #[test]
    fn reuse_paths_agree(l in 1usize..6, k in 1usize..5, db in -20.0f64..0.0, p in 0.2f64..=1.0) {
        let s = scenario(l, 4.0, p, p).to_builder().k(k).threshold_db(db).build().unwrap();
        let query = ReuseQuery::new(MethodTag::SingleIntegralAlpha4, s, QuadratureSpec::default()).unwrap();
        let a = pl_with_reuse_enumerated(&query).unwrap();
        let b = pl_with_reuse_convolved(&query).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        prop_assert!((0.0..=1.0).contains(&a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn bound_dominates_simulation(alpha in prop_oneof![Just(3.0), Just(4.0)], l in 2usize..6, seed in 0u64..1000) {
        let s = scenario(l, alpha, 1.0, 1.0);
        let dbs: Vec<f64> = (0..8).map(|i| -20.0 + 2.5 * i as f64).collect();
        let mut c = SimConfig::new(3000, seed);
        c.expected_bs = 300;
        let mc = estimate_pl_curve(&s, &c, &dbs).unwrap();
        for (&db, e) in dbs.iter().zip(&mc) {
            let ub = pl_upper_bound(&s.with_threshold_db(db)).unwrap();
            prop_assert!(ub >= e.value - 4.0 * e.stderr.max(1e-3), "{db} dB: bound {ub} vs {e:?}");
        }
    }

    #[test]
    fn simulation_scales_with_density(seed in 0u64..1000, factor in 0.1f64..50.0) {
        let s = scenario(4, 4.0, 2.0 / 3.0, 1.0);
        let dbs = [-16.0, -8.0, -3.0];
        let c = SimConfig::new(2000, seed);
        let a = estimate_pl_curve(&s, &c, &dbs).unwrap();
        let b = estimate_pl_curve(&s.with_lambda(s.lambda() * factor).unwrap(), &c, &dbs).unwrap();
        for (x, y) in a.iter().zip(&b) {
            // Distances scale exactly, so only rounding at the threshold can move a count.
            prop_assert!((x.value - y.value).abs() <= 2.0 / 2000.0, "{x:?} {y:?}");
        }
    }
}
