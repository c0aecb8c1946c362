use sedplan::belief;
use sedplan::envs::tiger::{Lever, TrampolineTiger, JUMP, NOOP, PULL};
use sedplan::planner::{exact_episode_value, run_episode_from, run_episode};
use sedplan::{Exact, NoopBlueprint, Planner, PlannerConfig, PlannerKind, ProtocolOptions, Scalar, Variant};

fn q(n: i64, d: i64) -> Exact {
    Exact::from_ratio(n, d)
}

fn cfg(game: &TrampolineTiger) -> PlannerConfig {
    PlannerConfig {
        eps_q: 0.01 * 11.0,
        ..PlannerConfig::for_game(game)
    }
}

#[test]
fn hand_enumerated_tiger_table() {
    // Tiger world (0.9): Bob pulling always costs 10, so both pairs are
    // clamped to the blueprint value 0. Trampoline world (0.1): (jump, pull)
    // earns 1, (jump, noop) earns -10 and is clamped to 0.
    let game = TrampolineTiger::default();
    let c = cfg(&game).exact();
    let planner = Planner::new(&game, &NoopBlueprint, &c);
    let b = belief::initial_belief::<_, Exact>(&game).unwrap();
    let plan = planner.plan(&b, 0).unwrap();
    let sets = plan.sets();
    assert_eq!(sets.deviations, vec![JUMP]);
    assert_eq!(sets.responses, vec![NOOP, PULL]);
    assert_eq!(plan.table.pooled_value(JUMP, PULL), Some(q(1, 10)));
    assert_eq!(plan.table.pooled_value(JUMP, NOOP), Some(q(0, 1)));
    assert_eq!(plan.table.improvement_prob(JUMP, PULL), Some(q(1, 10)));
    assert_eq!(plan.table.improvement_prob(JUMP, NOOP), Some(q(0, 1)));
    let best = plan.table.best_pair();
    assert_eq!(best.pair, Some((JUMP, PULL)));
    assert_eq!(best.value, q(1, 10));
    assert_eq!(best.blueprint, q(0, 1));
    assert_eq!(plan.response.unwrap().argmax(JUMP), Some(PULL));
}

#[test]
fn alice_jumps_only_on_the_trampoline() {
    let game = TrampolineTiger::default();
    let c = cfg(&game).exact();
    let opts = ProtocolOptions::new(PlannerKind::ImprovisedE);
    for (lever, expect) in [(Lever::Tiger, vec![NOOP, NOOP]), (Lever::Trampoline, vec![JUMP, PULL])] {
        let out = run_episode_from::<_, _, f64>(&game, &NoopBlueprint, &c, &opts, game.world(lever), 3).unwrap();
        let actions: Vec<_> = out.history.turns.iter().map(|t| t.action).collect();
        assert_eq!(actions, expect, "{lever:?}");
    }
    let v: f64 = exact_episode_value(&game, &NoopBlueprint, &c, &opts, 3).unwrap();
    assert!((v - 0.1).abs() < 1e-12, "{v}");
}

#[test]
fn sampled_episode_runs() {
    let game = TrampolineTiger::default();
    let c = cfg(&game).with_variant(Variant::Probability);
    let opts = ProtocolOptions::new(PlannerKind::ImprovisedP);
    let out = run_episode::<_, _, f64>(&game, &NoopBlueprint, &c, &opts, 11).unwrap();
    assert_eq!(out.history.turns.len(), 2);
}
