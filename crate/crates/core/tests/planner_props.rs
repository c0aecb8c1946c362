use num_traits::{One, Zero};
use proptest::prelude::*;
use sedplan::belief;
use sedplan::envs::random::{Limits, ALICE, BOB};
use sedplan::envs::TwoTurnGame;
use sedplan::planner::{exact_oracle, jensen_sides, softmax};
use sedplan::{Exact, ExactBelief, Blueprint, Game, Planner, PlannerConfig, Scalar, TabularBlueprint, Variant};

fn setup(seed: u64) -> (TwoTurnGame, TabularBlueprint, ExactBelief<TwoTurnGame>) {
    let g = TwoTurnGame::generate(seed, Limits::default());
    let pi = g.random_blueprint(seed.wrapping_add(1));
    let b = belief::initial_belief(&g).unwrap();
    (g, pi, b)
}

fn exact_config(variant: Variant) -> PlannerConfig {
    PlannerConfig::default().exact().with_variant(variant)
}

fn variants() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Expected), Just(Variant::Probability)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn best_pair_never_loses_to_the_blueprint(seed in any::<u64>(), variant in variants()) {
        let (g, pi, b) = setup(seed);
        let plan = exact_oracle(&g, &pi, &b, &exact_config(variant)).unwrap();
        let best = plan.table.best_pair();
        prop_assert!(best.value >= best.blueprint);
        prop_assert_eq!(best.blueprint, plan.table.blueprint_value());
        for (a1, a2) in plan.sets().pairs() {
            let pooled = plan.table.pooled_value(a1, a2).unwrap();
            prop_assert!(pooled >= plan.table.blueprint_value());
            prop_assert!(pooled <= best.value);
            let p = plan.table.improvement_prob(a1, a2).unwrap();
            prop_assert!(p >= Exact::zero() && p <= Exact::one());
        }
    }

    #[test]
    fn pooling_never_beats_per_state_choice(seed in any::<u64>(), variant in variants()) {
        let (g, pi, b) = setup(seed);
        let plan = exact_oracle(&g, &pi, &b, &exact_config(variant)).unwrap();
        if let Some(f) = &plan.response {
            let sides = jensen_sides(&plan.table, f);
            prop_assert!(sides.per_state >= sides.pooled);
            prop_assert!(sides.pooled >= plan.table.blueprint_value());
        }
    }

    #[test]
    fn deviations_are_never_blueprint_actions(seed in any::<u64>()) {
        let (g, pi, b) = setup(seed);
        let cfg = exact_config(Variant::Expected);
        let sets = Planner::new(&g, &pi, &cfg).deviation_sets(&b, 0).unwrap();
        for &a1 in &sets.deviations {
            prop_assert!(sets.marginal.prob(a1).is_zero());
        }
        for a1 in 0..g.a1 {
            if !sets.is_deviation(a1) {
                prop_assert!(sets.marginal.prob(a1) > Exact::zero());
            }
        }
    }

    #[test]
    fn exact_plans_do_not_depend_on_the_seed(seed in any::<u64>(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let (g, pi, b) = setup(seed);
        let cfg = exact_config(Variant::Expected);
        let planner = Planner::new(&g, &pi, &cfg);
        let p1 = planner.plan(&b, s1).unwrap();
        let p2 = planner.plan(&b, s2).unwrap();
        prop_assert_eq!(p1.sets(), p2.sets());
        prop_assert_eq!(&p1.table.pooled, &p2.table.pooled);
        prop_assert_eq!(&p1.table.improvement, &p2.table.improvement);
        prop_assert_eq!(p1.response.map(|f| f.rows), p2.response.map(|f| f.rows));
    }

    #[test]
    fn sparta_plays_legal_actions(seed in any::<u64>(), sampled in any::<bool>()) {
        let (g, pi, b) = setup(seed);
        let cfg = if sampled {
            PlannerConfig { belief_samples: 20, rollout_samples: 5, decision_samples: Some(20), ..PlannerConfig::default() }
        } else {
            exact_config(Variant::Expected)
        };
        let planner = Planner::new(&g, &pi, &cfg);
        for s1 in 0..g.n1 {
            let info = g.info_state(&g.world(s1, 0), ALICE);
            if belief::condition(&g, &b, ALICE, &info).is_err() {
                continue;
            }
            let d = planner.sparta_step(&b, &info, seed).unwrap();
            prop_assert!(g.legal_actions(&info).contains(&d.action));
            if d.deviated {
                prop_assert!(pi.probability::<f64>(&g, &info, d.action) == 0.0);
            }
        }
    }

    #[test]
    fn alice_and_bob_play_legal_actions(seed in any::<u64>(), variant in variants()) {
        let (g, pi, b) = setup(seed);
        let cfg = exact_config(variant);
        let planner = Planner::new(&g, &pi, &cfg);
        let plan = planner.plan(&b, 0).unwrap();
        let sets = plan.sets();
        let answered = if plan.response.is_some() { &sets.deviations[..] } else { &[] };
        for &a1 in answered {
            let a2 = planner.bob_respond(&plan, a1).unwrap().unwrap();
            prop_assert!(sets.responses.contains(&a2));
            for w in b.support().iter().filter(|w| g.legal1[w.s1].contains(&a1)) {
                prop_assert!(g.legal2[w.s2].contains(&a2));
            }
        }
        prop_assert_eq!(planner.bob_respond(&plan, usize::MAX).unwrap(), None);
        for world in b.support() {
            let info = g.info_state(world, ALICE);
            let d = planner.alice_decide(&b, &info, &plan, 0).unwrap();
            prop_assert!(g.legal_actions(&info).contains(&d.action));
            prop_assert_eq!(d.deviated, sets.is_deviation(d.action));
        }
    }

    #[test]
    fn softmax_is_a_distribution(values in prop::collection::vec(-10.0f64..10.0, 1..8), t in 1e-3f64..1e3) {
        let p = softmax(&values, t);
        prop_assert_eq!(p.len(), values.len());
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        for i in 0..values.len() {
            for j in 0..values.len() {
                if values[i] > values[j] {
                    prop_assert!(p[i] >= p[j]);
                }
            }
        }
    }

    #[test]
    fn softmax_limits(values in prop::collection::vec(-10.0f64..10.0, 2..8)) {
        let top = values.iter().cloned().fold(f64::MIN, f64::max);
        let winners = values.iter().filter(|&&v| v == top).count() as f64;
        let cold = softmax(&values, 1e-6);
        for (v, p) in values.iter().zip(&cold) {
            let expect = if *v == top { 1.0 / winners } else { 0.0 };
            prop_assert!((p - expect).abs() < 1e-6 || top - v < 1e-4);
        }
        let hot = softmax(&values, 1e9);
        let uniform = 1.0 / values.len() as f64;
        prop_assert!(hot.iter().all(|p| (p - uniform).abs() < 1e-6));
    }
}

#[test]
fn exact_softmax_sums_to_one() {
    let values: Vec<Exact> = [1, 3, -2].iter().map(|&n| Exact::from_integer(n.into())).collect();
    let p = softmax(&values, 0.7);
    let total: f64 = p.iter().map(Scalar::to_f64).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn responder_is_the_next_player() {
    let (g, pi, _) = setup(3);
    let cfg = PlannerConfig::default();
    assert_eq!(Planner::new(&g, &pi, &cfg).responder(ALICE), BOB);
}
