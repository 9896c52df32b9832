mod common;

use common::model_from_seed;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use semistatic::codec::{measure_from_json, measure_to_json, strategy_from_json, strategy_to_json, tree_from_json, tree_to_json};
use semistatic::duality::{robust_price, superhedge, RobustPrice, SuperhedgeResult};
use semistatic::hedging::{decompose_unhedgeable, replicate, terminal_gain, DynamicPosition, HedgingSpan, Replication};
use semistatic::model::Measure;
use semistatic::polytope::{build_constraints, enumerate_extreme_points, member};
use semistatic::random::{random_measure, random_payoff, ModelConfig};
use semistatic::rational::{int, ratio, Rational};
use semistatic::tree::{extract_tree, TreeOutcome};

fn cfg() -> ModelConfig {
    ModelConfig::default()
}

fn dynamic_from(values: &[i64], m: &semistatic::model::FilteredModel) -> DynamicPosition {
    let mut h = DynamicPosition::zeros(m);
    let mut it = values.iter().cycle();
    for k in 1..=m.steps() {
        for c in 0..m.filtration().partition(k - 1).len() {
            for j in 0..m.assets() {
                h.set(k, c, j, int(*it.next().unwrap()));
            }
        }
    }
    h
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn tower_property(seed in any::<u64>(), wseed in any::<u64>()) {
        let (m, _) = model_from_seed(seed, &cfg());
        let mut rng = ChaCha8Rng::seed_from_u64(wseed);
        let q = Measure::new(random_measure(&mut rng, m.n_atoms())).unwrap();
        let x = random_payoff(&mut rng, m.n_atoms());
        let f = m.filtration();
        for k in 0..=m.steps() {
            let inner = f.conditional_expectation(&x, k, &q);
            for j in 0..=k {
                let lhs = f.conditional_expectation(&inner, j, &q);
                let rhs = f.conditional_expectation(&x, j, &q);
                for a in q.support() {
                    prop_assert_eq!(&lhs[a], &rhs[a]);
                }
            }
        }
        prop_assert_eq!(f.conditional_expectation(&x, 0, &q)[q.support()[0]].clone(), q.expectation(&x));
    }

    #[test]
    fn gains_have_zero_expectation_under_calibrated_measures(seed in any::<u64>(), h in prop::collection::vec(-4i64..=4, 1..12)) {
        let (m, q0) = model_from_seed(seed, &cfg());
        let gain = terminal_gain(&dynamic_from(&h, &m), &m).unwrap();
        let q0 = Measure::new(q0).unwrap();
        prop_assert!(q0.expectation(&gain).is_zero());
        for v in enumerate_extreme_points(&build_constraints(&m)).vertices {
            prop_assert!(v.expectation(&gain).is_zero());
        }
    }

    #[test]
    fn vertices_replicate_everything(seed in any::<u64>(), pseed in any::<u64>()) {
        let (m, _) = model_from_seed(seed, &cfg());
        let mut rng = ChaCha8Rng::seed_from_u64(pseed);
        let x = random_payoff(&mut rng, m.n_atoms());
        for v in enumerate_extreme_points(&build_constraints(&m)).vertices {
            match replicate(&x, &v, &m).unwrap() {
                Replication::Replicated(s) => {
                    let p = s.payoff(&m).unwrap();
                    for a in v.support() {
                        prop_assert_eq!(&p[a], &x[a]);
                    }
                    // Price is the expectation.
                    prop_assert_eq!(&s.cash, &v.expectation(&x));
                }
                Replication::NotReplicable { .. } => prop_assert!(false, "vertex must be complete"),
            }
        }
    }

    #[test]
    fn residual_is_orthogonal_to_the_span(seed in any::<u64>(), pseed in any::<u64>()) {
        let (m, q0) = model_from_seed(seed, &cfg());
        let q = Measure::new(q0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(pseed);
        let x = random_payoff(&mut rng, m.n_atoms());
        let span = HedgingSpan::new(&m);
        if let Replication::NotReplicable { residual } = replicate(&x, &q, &m).unwrap() {
            prop_assert!(residual.iter().any(|r| !r.is_zero()));
            for v in &span.vectors {
                let ip: Rational = (0..m.n_atoms()).map(|a| &q.weights()[a] * &v[a] * &residual[a]).sum();
                prop_assert!(ip.is_zero());
            }
        }
    }

    #[test]
    fn unhedgeable_parts_are_martingales(seed in any::<u64>()) {
        let (m, _) = model_from_seed(seed, &cfg());
        for q in enumerate_extreme_points(&build_constraints(&m)).vertices {
            let d = decompose_unhedgeable(&q, &m).unwrap();
            prop_assert!(d.atoms_disjoint());
            for b in &d.blocks {
                for mart in &b.martingales {
                    for k in 1..mart.len() {
                        let ce = m.filtration().conditional_expectation(&mart[k], k - 1, &q);
                        for a in q.support() {
                            prop_assert_eq!(&ce[a], &mart[k - 1][a]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn superhedge_dominates_and_bounds_every_vertex(seed in any::<u64>(), pseed in any::<u64>()) {
        let (m, _) = model_from_seed(seed, &cfg());
        let mut rng = ChaCha8Rng::seed_from_u64(pseed);
        let phi = random_payoff(&mut rng, m.n_atoms());
        let SuperhedgeResult::Optimal { price, strategy, .. } = superhedge(&phi, &m) else {
            return Err(TestCaseError::fail("generated models are arbitrage free"));
        };
        let p = strategy.payoff(&m).unwrap();
        prop_assert!((0..m.n_atoms()).all(|a| p[a] >= phi[a]));
        let (rp, vs) = robust_price(&phi, &m);
        for v in &vs.vertices {
            prop_assert!(v.expectation(&phi) <= price);
            prop_assert_eq!(v.expectation(&p), price.clone());
        }
        let RobustPrice::Value { value, .. } = rp else { unreachable!() };
        prop_assert_eq!(value, price);
    }

    #[test]
    fn robust_price_is_cash_additive_and_monotone(seed in any::<u64>(), pseed in any::<u64>(), c in -5i64..=5) {
        let (m, _) = model_from_seed(seed, &cfg());
        let mut rng = ChaCha8Rng::seed_from_u64(pseed);
        let phi = random_payoff(&mut rng, m.n_atoms());
        let (RobustPrice::Value { value: base, .. }, _) = robust_price(&phi, &m) else { unreachable!() };
        let shifted: Vec<Rational> = phi.iter().map(|x| x + int(c)).collect();
        let (RobustPrice::Value { value: s, .. }, _) = robust_price(&shifted, &m) else { unreachable!() };
        prop_assert_eq!(s, &base + int(c));
        let bigger: Vec<Rational> = phi.iter().map(|x| x + x.abs()).collect();
        let (RobustPrice::Value { value: b, .. }, _) = robust_price(&bigger, &m) else { unreachable!() };
        prop_assert!(b >= base);
    }

    #[test]
    fn codecs_round_trip(seed in any::<u64>(), h in prop::collection::vec(-9i64..=9, 1..10), cash in -20i64..20) {
        let (m, q0) = model_from_seed(seed, &cfg());
        let q = Measure::new(q0).unwrap();
        prop_assert_eq!(measure_from_json(&measure_to_json(&q)).unwrap(), q.clone());
        let s = semistatic::hedging::SemiStaticStrategy {
            cash: ratio(cash, 3),
            statics: (0..m.claims().len()).map(|i| ratio(i as i64 - 1, 2)).collect(),
            dynamic: dynamic_from(&h, &m),
        };
        prop_assert_eq!(strategy_from_json(&strategy_to_json(&s), &m).unwrap(), s);
        if let Some(v) = enumerate_extreme_points(&build_constraints(&m)).vertices.first() {
            if let TreeOutcome::Tree(ex) = extract_tree(v, &m).unwrap() {
                prop_assert_eq!(tree_from_json(&tree_to_json(&ex.tree)).unwrap(), ex.tree);
            }
        }
        prop_assert!(member(&q, &build_constraints(&m)));
    }
}
