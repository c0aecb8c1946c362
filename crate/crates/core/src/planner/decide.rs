use rand::Rng;

use crate::belief::{self, PublicBelief};
use crate::blueprint::Blueprint;
use crate::game::{self, Action, Budget, Game};
use crate::scalar::{self, Scalar};
use crate::seed;

use super::estimate::{budget_error, evaluate};
use super::{Plan, PlanError, Planner};
use crate::blueprint::Estimate;

/// The acting player's choice at her true information state.
#[derive(Debug, Clone, PartialEq)]
pub struct AliceDecision<S> {
    pub action: Action,
    /// `true` when `action` was chosen by the search rather than the blueprint.
    pub deviated: bool,
    /// `q_pi(b, s1)`.
    pub blueprint_value: S,
    /// Estimated value of each candidate at the true information state.
    pub values: Vec<(Action, S)>,
}

impl<S: Scalar> AliceDecision<S> {
    /// Highest-valued candidate, lowest action on ties.
    pub fn best(&self) -> Option<(Action, S)> {
        let v: Vec<S> = self.values.iter().map(|(_, v)| v.clone()).collect();
        scalar::argmax_first(&v).map(|k| self.values[k].clone())
    }
}

/// One-step unilateral search: same fields, candidates are all legal actions.
pub type SpartaDecision<S> = AliceDecision<S>;

impl<G: Game, B: Blueprint<G>> Planner<'_, G, B> {
    fn blueprint_action(&self, s1: &G::View, seed: u64) -> Action {
        let mut rng = seed::rng(seed::derive(seed, seed::stream::BLUEPRINT));
        self.blueprint.sample(self.game, s1, &mut rng)
    }

    /// Values each candidate first action (with Bob's reply drawn from
    /// `reply`, if given) by `K` common-random-number rollouts or exactly.
    fn candidate_values<S: Scalar>(
        &self,
        b: &PublicBelief<G::State, S>,
        player: usize,
        s1: &G::View,
        candidates: &[Action],
        reply: &dyn Fn(Action) -> Vec<(Action, S)>,
        seed: u64,
    ) -> Result<(S, Vec<(Action, S)>), PlanError> {
        let cond = belief::condition(self.game, b, player, s1)?;
        if self.config.exact {
            let bp = evaluate(self, &cond.belief, &[], Estimate::Exact, seed)?.mean;
            let mut budget = Budget::new(self.config.guard);
            let mut values = Vec::new();
            for &a1 in candidates {
                let follow = reply(a1);
                let mut v = S::zero();
                for (world, w) in cond.belief.iter() {
                    let inner = if follow.is_empty() {
                        game::exact_return::<G, B, S>(self.game, world, self.blueprint, &[a1], &mut budget)
                            .map_err(|e| budget_error(e, &budget))?
                    } else {
                        let mut acc = S::zero();
                        for (a2, p) in &follow {
                            if p.is_zero() {
                                continue;
                            }
                            let r: S = game::exact_return(self.game, world, self.blueprint, &[a1, *a2], &mut budget)
                                .map_err(|e| budget_error(e, &budget))?;
                            acc = acc + p.clone() * r;
                        }
                        acc
                    };
                    v = v + w.clone() * inner;
                }
                values.push((a1, v));
            }
            return Ok((bp, values));
        }

        let k = self.config.decision_samples_for(self.game.num_actions(player));
        let bp = evaluate(self, &cond.belief, &[], Estimate::Samples(k), seed)?.mean;
        let worlds = cond.belief.sample(k, seed::derive(seed, 0));
        let mut values = Vec::new();
        for (d, &a1) in candidates.iter().enumerate() {
            let follow: Vec<(Action, f64)> = reply(a1).into_iter().map(|(a, p)| (a, p.to_f64())).collect();
            let mut pick = seed::rng(seed::derive_path(seed, &[u64::MAX, d as u64]));
            let mut total = 0.0;
            for (j, world) in worlds.iter().enumerate() {
                let mut prefix = vec![a1];
                if !follow.is_empty() {
                    let u: f64 = pick.random();
                    let mut acc = 0.0;
                    let mut chosen = follow.last().expect("non-empty").0;
                    for &(a2, p) in &follow {
                        acc += p;
                        if u < acc {
                            chosen = a2;
                            break;
                        }
                    }
                    prefix.push(chosen);
                }
                let mut rng = seed::LazyRng::new(seed::derive(seed, 1 + j as u64));
                total += game::rollout(self.game, world, self.blueprint, &prefix, &mut rng)?;
            }
            values.push((a1, S::from_f64(total / k as f64)));
        }
        Ok((bp, values))
    }

    /// Alice's rule: deviate with the best `a1 ∈ D` when its value under
    /// `f(a1)` at her true state beats the blueprint by `eps_q`.
    pub fn alice_decide<S: Scalar>(
        &self,
        b: &PublicBelief<G::State, S>,
        s1: &G::View,
        plan: &Plan<G, S>,
        seed: u64,
    ) -> Result<AliceDecision<S>, PlanError> {
        let sets = plan.sets();
        let legal = self.game.legal_actions(s1);
        let candidates: Vec<Action> = match &plan.response {
            Some(_) => sets.deviations.iter().copied().filter(|a| legal.contains(a)).collect(),
            None => Vec::new(),
        };
        let response = plan.response.as_ref();
        let reply = |a1: Action| response.map(|f| f.distribution(a1)).unwrap_or_default();
        let (blueprint_value, values) = self.candidate_values(b, sets.alice, s1, &candidates, &reply, seed)?;
        let mut decision = AliceDecision {
            action: 0,
            deviated: false,
            blueprint_value,
            values,
        };
        let margin = S::from_f64(self.config.eps_q);
        match decision.best() {
            Some((a1, v)) if v >= decision.blueprint_value.clone() + margin => {
                decision.action = a1;
                decision.deviated = true;
            }
            _ => decision.action = self.blueprint_action(s1, seed),
        }
        Ok(decision)
    }

    /// Bob's rule: if `a1` is a deviation of `plan`, play the most likely
    /// response; `None` means `a1` was not a deviation.
    pub fn bob_respond<S: Scalar>(&self, plan: &Plan<G, S>, a1: Action) -> Result<Option<Action>, PlanError> {
        if !plan.sets().is_deviation(a1) {
            return Ok(None);
        }
        plan.response
            .as_ref()
            .and_then(|f| f.argmax(a1))
            .map(Some)
            .ok_or(PlanError::MissingResponse { action: a1 })
    }

    /// Unilateral one-step search over every legal action of the player
    /// holding `s1`, assuming blueprint play afterwards.
    pub fn sparta_step<S: Scalar>(
        &self,
        b: &PublicBelief<G::State, S>,
        s1: &G::View,
        seed: u64,
    ) -> Result<SpartaDecision<S>, PlanError> {
        self.config.validate()?;
        let player = belief::acting_player(self.game, b)?;
        let candidates: Vec<Action> = self
            .game
            .legal_actions(s1)
            .into_iter()
            .filter(|a| self.config.allows_deviation(*a))
            .collect();
        let none = |_: Action| Vec::new();
        let (blueprint_value, values) = self.candidate_values(b, player, s1, &candidates, &none, seed)?;
        let mut decision = SpartaDecision {
            action: 0,
            deviated: false,
            blueprint_value,
            values,
        };
        let margin = S::from_f64(self.config.eps_q);
        match decision.best() {
            Some((a, v)) if v >= decision.blueprint_value.clone() + margin => {
                decision.action = a;
                decision.deviated = self.blueprint.probability::<f64>(self.game, s1, a) == 0.0;
            }
            _ => decision.action = self.blueprint_action(s1, seed),
        }
        Ok(decision)
    }
}
