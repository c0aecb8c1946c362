//! Self-explaining deviation search.
//!
//! The acting player ("Alice") looks for an action the blueprint never
//! plays, paired with a response of the next player ("Bob") that Bob can
//! infer from public information alone. Both players build the same
//! [`Plan`] from the shared belief: the deviation sets, the value table and
//! the response function. Alice then uses her private information to decide
//! whether to deviate; Bob uses the plan to recognise and answer the
//! deviation.

mod config;
mod decide;
mod estimate;
mod oracle;
mod protocol;
mod response;

pub use config::{ConfigError, PlannerConfig, Temperature, Variant};
pub use decide::{AliceDecision, SpartaDecision};
pub use estimate::{QEstimates, SedPair, StateRow};
pub use oracle::{exact_oracle, jensen_sides, JensenSides};
pub use protocol::{
    exact_episode_value, run_episode, run_episode_from, EpisodeDriver, EpisodeOutcome, PlannerKind,
    ProtocolOptions, TurnAnnotation,
};
pub use response::{softmax, ResponseFunction};

use thiserror::Error;

use crate::belief::{self, BeliefError, PublicBelief};
use crate::blueprint::{self, Blueprint, BlueprintMarginal, Estimate};
use crate::game::{Action, Game, GameError, PlayerId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("exact enumeration needs about {needed} rollout-equivalents, limit is {limit}")]
    TooLarge { needed: usize, limit: usize },
    #[error("deviation {action} was detected but no response is defined for it")]
    MissingResponse { action: Action },
    #[error("protocol failure at turn {turn}: {message}\ntranscript:\n{transcript}")]
    Protocol {
        turn: usize,
        message: String,
        transcript: String,
    },
}

/// `D(b)` and `R` for one acting player and responder.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationSets<S> {
    pub alice: PlayerId,
    pub bob: PlayerId,
    /// Alice's actions whose blueprint marginal is at most `eps_p`.
    pub deviations: Vec<Action>,
    /// Bob's actions legal after every deviation in every world.
    pub responses: Vec<Action>,
    pub marginal: BlueprintMarginal<S>,
}

impl<S> DeviationSets<S> {
    pub fn is_deviation(&self, action: Action) -> bool {
        self.deviations.contains(&action)
    }

    /// `true` when no deviation pair exists.
    pub fn is_empty(&self) -> bool {
        self.deviations.is_empty() || self.responses.is_empty()
    }

    pub fn pair_count(&self) -> usize {
        self.deviations.len() * self.responses.len()
    }

    /// Row-major position of `(a1, a2)` in `D × R`.
    pub fn pair_index(&self, a1: Action, a2: Action) -> Option<usize> {
        let d = self.deviations.iter().position(|&a| a == a1)?;
        let r = self.responses.iter().position(|&a| a == a2)?;
        Some(d * self.responses.len() + r)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Action, Action)> + '_ {
        self.deviations
            .iter()
            .flat_map(move |&a1| self.responses.iter().map(move |&a2| (a1, a2)))
    }
}

/// Everything either player derives from the shared belief.
#[derive(Debug, Clone)]
pub struct Plan<G: Game, S> {
    pub table: QEstimates<G, S>,
    /// `None` when `D` or `R` is empty.
    pub response: Option<ResponseFunction<S>>,
}

impl<G: Game, S: Scalar> Plan<G, S> {
    pub fn sets(&self) -> &DeviationSets<S> {
        &self.table.sets
    }
}

/// Planner bound to one game, blueprint and configuration.
#[derive(Debug)]
pub struct Planner<'a, G, B> {
    pub game: &'a G,
    pub blueprint: &'a B,
    pub config: &'a PlannerConfig,
}

impl<G, B> Clone for Planner<'_, G, B> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<G, B> Copy for Planner<'_, G, B> {}

impl<'a, G: Game, B: Blueprint<G>> Planner<'a, G, B> {
    pub fn new(game: &'a G, blueprint: &'a B, config: &'a PlannerConfig) -> Self {
        Self {
            game,
            blueprint,
            config,
        }
    }

    fn estimate_kind(&self, samples: usize) -> Estimate {
        if self.config.exact {
            Estimate::Exact
        } else {
            Estimate::Samples(samples)
        }
    }

    /// Responder for a deviation by the player to move in `b`.
    pub fn responder(&self, alice: PlayerId) -> PlayerId {
        (alice + 1) % self.game.num_players()
    }

    /// Builds `D(b)` from the blueprint marginal and `R` by intersecting
    /// Bob's legal actions over every world and every deviation.
    pub fn deviation_sets<S: Scalar>(
        &self,
        b: &PublicBelief<G::State, S>,
        seed: u64,
    ) -> Result<DeviationSets<S>, PlanError> {
        self.config.validate()?;
        let game = self.game;
        let alice = belief::acting_player(game, b)?;
        let bob = self.responder(alice);
        let marginal = blueprint::marginal(
            game,
            self.blueprint,
            b,
            self.estimate_kind(self.config.belief_samples),
            crate::seed::derive(seed, 0),
        )?;
        let eps_p = S::from_f64(self.config.eps_p);
        let deviations: Vec<Action> = (0..game.num_actions(alice))
            .filter(|a| self.config.allows_deviation(*a))
            .filter(|&a| marginal.prob(a) <= eps_p)
            .collect();

        let mut responses: Vec<Action> = (0..game.num_actions(bob))
            .filter(|a| self.config.allows_response(*a))
            .collect();
        'worlds: for world in b.support() {
            let legal_alice = game.legal_actions(&game.info_state(world, alice));
            for &a1 in deviations.iter().filter(|a| legal_alice.contains(a)) {
                for (t, _) in game.outcomes::<f64>(world, a1)? {
                    if game.current_player(&t.next) != Some(bob) {
                        responses.clear();
                        break 'worlds;
                    }
                    let legal_bob = game.legal_actions(&game.info_state(&t.next, bob));
                    responses.retain(|a| legal_bob.contains(a));
                    if responses.is_empty() {
                        break 'worlds;
                    }
                }
            }
        }
        Ok(DeviationSets {
            alice,
            bob,
            deviations,
            responses,
            marginal,
        })
    }

    /// `hat_q(b, s1, a1, a2)`: the value of playing `(a1, a2)` then the
    /// blueprint, or `None` (minus infinity) outside `D × R`.
    #[allow(clippy::too_many_arguments)]
    pub fn hat_q<S: Scalar>(
        &self,
        b: &PublicBelief<G::State, S>,
        s1: &G::View,
        a1: Action,
        a2: Action,
        sets: &DeviationSets<S>,
        estimate: Estimate,
        seed: u64,
    ) -> Result<Option<S>, PlanError> {
        if !sets.is_deviation(a1) || !sets.responses.contains(&a2) {
            return Ok(None);
        }
        if !self.game.legal_actions(s1).contains(&a1) {
            return Ok(None);
        }
        let cond = belief::condition(self.game, b, sets.alice, s1)?;
        let est = estimate::evaluate(self, &cond.belief, &[a1, a2], estimate, seed)?;
        Ok(Some(est.mean))
    }

    /// Deviation sets, value table and response function for `b`.
    pub fn plan<S: Scalar>(
        &self,
        b: &PublicBelief<G::State, S>,
        seed: u64,
    ) -> Result<Plan<G, S>, PlanError> {
        let sets = self.deviation_sets(b, seed)?;
        let table = self.estimate(b, sets, seed)?;
        let response = self.response_function(&table);
        Ok(Plan { table, response })
    }

    /// The best single deviation pair and its value `q*(b)`.
    pub fn single_pair_sed<S: Scalar>(
        &self,
        b: &PublicBelief<G::State, S>,
        seed: u64,
    ) -> Result<SedPair<S>, PlanError> {
        let sets = self.deviation_sets(b, seed)?;
        Ok(self.estimate(b, sets, seed)?.best_pair())
    }
}
