//! Belief updates against brute-force Bayes.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use sedplan::belief::{self, Evidence};
use sedplan::envs::finesse::dealt;
use sedplan::envs::hanabi::HanabiState;
use sedplan::envs::random::{Limits, TwoTurnState, ALICE, BOB};
use sedplan::envs::tiger::{JUMP, NOOP};
use sedplan::envs::{Lever, MiniHanabi, ScriptedHanabi, TrampolineTiger, TwoTurnGame};
use sedplan::{seed, Blueprint, Exact, Game, TabularBlueprint};

fn q(n: i64, d: i64) -> Exact {
    Exact::new(n.into(), d.into())
}

/// Posterior over `(s1, s2)` after Alice plays `a1`, straight from the
/// weight table.
fn brute_posterior(g: &TwoTurnGame, pi: &TabularBlueprint, a1: usize) -> BTreeMap<(usize, usize), Exact> {
    let mut joint = BTreeMap::new();
    for s1 in 0..g.n1 {
        let info = g.info_state(&g.world(s1, 0), ALICE);
        let like: Exact = pi.probability(g, &info, a1);
        for s2 in 0..g.n2 {
            let w = Exact::from_integer(g.weights[s1][s2].into()) * like.clone();
            if !w.is_zero() {
                joint.insert((s1, s2), w);
            }
        }
    }
    let total: Exact = joint.values().cloned().sum();
    joint.into_iter().map(|(k, w)| (k, w / total.clone())).collect()
}

#[test]
fn public_update_matches_bayes_on_random_games() {
    let mut checked = 0;
    for i in 0..200 {
        let g = TwoTurnGame::generate(seed::derive(77, i), Limits::default());
        let pi = g.random_blueprint(seed::derive(78, i));
        let prior = belief::initial_belief::<_, Exact>(&g).unwrap();
        for a1 in 0..g.a1 {
            let expect = brute_posterior(&g, &pi, a1);
            let observed = g.view(&TwoTurnState { a1: Some(a1), ..g.world(0, 0) }, &[]);
            let got = belief::filter_update(&g, &prior, a1, Evidence::Blueprint(&pi), &[], &observed);
            if expect.is_empty() {
                assert!(got.is_err(), "game {i} a1 {a1}");
                continue;
            }
            let got = got.unwrap();
            let got: BTreeMap<(usize, usize), Exact> = got.iter().map(|(w, p)| ((w.s1, w.s2), p.clone())).collect();
            assert_eq!(got, expect, "game {i} a1 {a1}");
            checked += 1;
        }
    }
    assert!(checked > 100);
}

#[test]
fn private_update_conditions_on_own_state() {
    for i in 0..100 {
        let g = TwoTurnGame::generate(seed::derive(77, i), Limits::default());
        let pi = g.random_blueprint(seed::derive(78, i));
        for s2 in 0..g.n2 {
            let root_view = g.view(&g.world(0, s2), &[BOB]);
            let Ok(prior) = belief::initial_group_belief::<_, Exact>(&g, &[BOB], &root_view) else {
                continue;
            };
            for a1 in 0..g.a1 {
                let observed = g.view(&TwoTurnState { a1: Some(a1), ..g.world(0, s2) }, &[BOB]);
                let Ok(got) = belief::filter_update(&g, &prior, a1, Evidence::Blueprint(&pi), &[BOB], &observed) else {
                    continue;
                };
                let slice: BTreeMap<usize, Exact> = brute_posterior(&g, &pi, a1)
                    .into_iter()
                    .filter(|((_, t2), _)| *t2 == s2)
                    .map(|((s1, _), p)| (s1, p))
                    .collect();
                let total: Exact = slice.values().cloned().sum();
                for (w, p) in got.iter() {
                    assert_eq!(w.s2, s2);
                    assert_eq!(*p, slice[&w.s1].clone() / total.clone(), "game {i}");
                }
                assert_eq!(got.len(), slice.len());
            }
        }
    }
}

#[test]
fn uninformative_evidence_keeps_the_prior() {
    for i in 0..50 {
        let g = TwoTurnGame::generate(seed::derive(77, i), Limits::default());
        let prior = belief::initial_belief::<_, Exact>(&g).unwrap();
        let a1 = g.legal1[0][0];
        let observed = g.view(&TwoTurnState { a1: Some(a1), ..g.world(0, 0) }, &[]);
        let b = belief::filter_update::<_, TabularBlueprint, Exact>(&g, &prior, a1, Evidence::Uninformative, &[], &observed)
            .unwrap();
        let legal: Exact = prior
            .iter()
            .filter(|(w, _)| g.legal1[w.s1].contains(&a1))
            .map(|(_, p)| p.clone())
            .sum();
        for (w, p) in b.iter() {
            assert!(g.legal1[w.s1].contains(&a1));
            assert_eq!(*p, prior.weight_of(&g.world(w.s1, w.s2)) / legal.clone());
        }
    }
}

#[test]
fn tiger_posterior_after_a_jump() {
    let g = TrampolineTiger::with_p(0.25).unwrap();
    let mut pi = TabularBlueprint::new("leaky");
    for (lever, jump) in [(Lever::Trampoline, q(1, 2)), (Lever::Tiger, q(1, 10))] {
        let info = g.info_state(&g.world(lever), ALICE);
        pi.insert(g.view_key(&info), vec![(NOOP, Exact::one() - jump.clone()), (JUMP, jump)]);
    }
    let prior = belief::initial_belief::<_, Exact>(&g).unwrap();
    assert_eq!(prior.weight_of(&g.world(Lever::Trampoline)), q(1, 4));
    let mut after = g.world(Lever::Tiger);
    after.alice = Some(JUMP);
    let observed = g.view(&after, &[BOB]);
    let b = belief::filter_update(&g, &prior, JUMP, Evidence::Blueprint(&pi), &[BOB], &observed).unwrap();
    // (1/4 * 1/2) / (1/4 * 1/2 + 3/4 * 1/10) = 5/8
    let mut tramp = g.world(Lever::Trampoline);
    tramp.alice = Some(JUMP);
    assert_eq!(b.weight_of(&tramp), q(5, 8));
    assert_eq!(b.weight_of(&after), q(3, 8));
    assert_eq!(b.total(), Exact::one());
}

/// Belief worlds keep the undealt cards as counts, so match on hands.
fn holds(b: &sedplan::Belief<MiniHanabi>, state: &HanabiState) -> bool {
    b.iter()
        .any(|(w, p)| *p > 0.0 && w.hands == state.hands && w.fireworks == state.fireworks && w.turn == state.turn)
}

#[test]
fn hanabi_group_belief_holds_the_true_world() {
    let g = MiniHanabi::default();
    for s in 0..20 {
        let mut state = dealt(&g, s);
        let group = [0, 1];
        let mut b = belief::initial_group_belief::<_, f64>(&g, &group, &g.view(&state, &group)).unwrap();
        assert!(b.is_normalized());
        let mut rng = seed::rng(s);
        for _ in 0..4 {
            assert!(holds(&b, &state), "seed {s}");
            let p = g.current_player(&state).unwrap();
            let a = ScriptedHanabi.sample(&g, &g.info_state(&state, p), &mut rng);
            state = g.step(&state, a, &mut rng).unwrap().next;
            b = belief::filter_update(&g, &b, a, Evidence::Blueprint(&ScriptedHanabi), &group, &g.view(&state, &group))
                .unwrap();
            assert!(b.is_normalized());
        }
        assert!(holds(&b, &state), "seed {s}");
    }
}
