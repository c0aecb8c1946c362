//! Exact public beliefs over world states.
//!
//! A belief is an enumerated support with weights, kept sorted by world so
//! that equal beliefs compare equal and dumps are stable. Updates return new
//! beliefs.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::blueprint::Blueprint;
use crate::game::{Action, Game, GameError, PlayerId};
use crate::scalar::{self, Scalar};

/// Absolute tolerance on the total weight of a belief.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BeliefError {
    #[error("belief has empty support")]
    Empty,
    #[error("negative weight in belief")]
    NegativeWeight,
    #[error("information state of player {player} has zero probability under the belief")]
    ZeroProbability { player: PlayerId },
    #[error("action {action} of player {player} has zero likelihood in every world of the belief")]
    Contradiction { player: PlayerId, action: Action },
    #[error("belief worlds disagree on the player to move")]
    MixedTurn,
    #[error("belief describes finished games")]
    Terminal,
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Distribution over world states consistent with a shared transcript.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicBelief<St, S> {
    support: Vec<St>,
    weights: Vec<S>,
}

impl<St: Clone + Ord, S: Scalar> PublicBelief<St, S> {
    /// Builds a belief from unnormalised weights. Duplicate worlds are merged
    /// and zero weights dropped.
    pub fn from_weighted(items: Vec<(St, S)>) -> Result<Self, BeliefError> {
        let mut merged: BTreeMap<St, S> = BTreeMap::new();
        for (world, w) in items {
            if w < S::zero() {
                return Err(BeliefError::NegativeWeight);
            }
            if w.is_zero() {
                continue;
            }
            let entry = merged.entry(world).or_insert_with(S::zero);
            *entry = entry.clone() + w;
        }
        let total = scalar::sum(merged.values().cloned());
        if total.is_zero() {
            return Err(BeliefError::Empty);
        }
        let (support, weights) = merged
            .into_iter()
            .map(|(w, p)| (w, p / total.clone()))
            .unzip();
        Ok(Self { support, weights })
    }

    pub fn point(world: St) -> Self {
        Self {
            support: vec![world],
            weights: vec![S::one()],
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[St] {
        &self.support
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&St, &S)> {
        self.support.iter().zip(self.weights.iter())
    }

    pub fn total(&self) -> S {
        scalar::sum(self.weights.iter().cloned())
    }

    pub fn is_normalized(&self) -> bool {
        scalar::approx_eq(&self.total(), &S::one(), WEIGHT_TOLERANCE)
            && self.weights.iter().all(|w| *w >= S::zero())
    }

    /// Weight of `world`, zero when outside the support.
    pub fn weight_of(&self, world: &St) -> S {
        match self.support.binary_search(world) {
            Ok(i) => self.weights[i].clone(),
            Err(_) => S::zero(),
        }
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(self.weights.iter().map(Scalar::to_f64))
    }

    /// `m` independent draws, reproducible from `seed`.
    pub fn sample(&self, m: usize, seed: u64) -> Vec<St> {
        let sampler = self.sampler();
        let mut rng = crate::seed::rng(seed);
        (0..m)
            .map(|_| self.support[sampler.draw(&mut rng)].clone())
            .collect()
    }

    /// Same support with weights converted to `f64`.
    pub fn approximate(&self) -> PublicBelief<St, f64> {
        PublicBelief {
            support: self.support.clone(),
            weights: self.weights.iter().map(Scalar::to_f64).collect(),
        }
    }
}

/// Inverse-CDF sampler over a fixed weight vector.
#[derive(Debug, Clone)]
pub struct Sampler {
    cumulative: Vec<f64>,
}

impl Sampler {
    pub fn new(weights: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .into_iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn draw(&self, rng: &mut dyn RngCore) -> usize {
        let total = *self.cumulative.last().expect("sampler over empty support");
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.cumulative.len() - 1)
    }
}

/// Belief over other players' private states given one player's
/// information state.
#[derive(Debug, Clone)]
pub struct ConditionalBelief<G: Game, S> {
    pub player: PlayerId,
    pub info: G::View,
    /// Marginal probability of `info` under the parent belief.
    pub marginal: S,
    pub belief: PublicBelief<G::State, S>,
}

/// Belief at the root: every chance outcome with its probability.
pub fn initial_belief<G: Game, S: Scalar>(game: &G) -> Result<PublicBelief<G::State, S>, BeliefError> {
    PublicBelief::from_weighted(game.chance_outcomes::<S>())
}

/// Root belief of the players in `group`, who have observed `view` in common.
pub fn initial_group_belief<G: Game, S: Scalar>(
    game: &G,
    group: &[PlayerId],
    view: &G::View,
) -> Result<PublicBelief<G::State, S>, BeliefError> {
    PublicBelief::from_weighted(game.chance_outcomes_matching::<S>(group, view))
}

/// The player to move in every world of `b`.
pub fn acting_player<G: Game, S: Scalar>(
    game: &G,
    b: &PublicBelief<G::State, S>,
) -> Result<PlayerId, BeliefError> {
    let mut worlds = b.support().iter();
    let first = worlds.next().ok_or(BeliefError::Empty)?;
    let player = game.current_player(first).ok_or(BeliefError::Terminal)?;
    if worlds.any(|w| game.current_player(w) != Some(player)) {
        return Err(BeliefError::MixedTurn);
    }
    Ok(player)
}

/// Splits `b` by `player`'s information state, in view order.
pub fn partition<G: Game, S: Scalar>(
    game: &G,
    b: &PublicBelief<G::State, S>,
    player: PlayerId,
) -> Vec<ConditionalBelief<G, S>> {
    let mut groups: BTreeMap<G::View, Vec<(G::State, S)>> = BTreeMap::new();
    for (world, w) in b.iter() {
        groups
            .entry(game.info_state(world, player))
            .or_default()
            .push((world.clone(), w.clone()));
    }
    groups
        .into_iter()
        .map(|(info, items)| {
            let marginal = scalar::sum(items.iter().map(|(_, w)| w.clone()));
            let belief = PublicBelief::from_weighted(items).expect("positive weights");
            ConditionalBelief {
                player,
                info,
                marginal,
                belief,
            }
        })
        .collect()
}

/// Bayes conditioning of `b` on `player` holding information state `info`.
pub fn condition<G: Game, S: Scalar>(
    game: &G,
    b: &PublicBelief<G::State, S>,
    player: PlayerId,
    info: &G::View,
) -> Result<ConditionalBelief<G, S>, BeliefError> {
    let items: Vec<(G::State, S)> = b
        .iter()
        .filter(|(world, _)| game.info_state(world, player) == *info)
        .map(|(world, w)| (world.clone(), w.clone()))
        .collect();
    if items.is_empty() {
        return Err(BeliefError::ZeroProbability { player });
    }
    let marginal = scalar::sum(items.iter().map(|(_, w)| w.clone()));
    Ok(ConditionalBelief {
        player,
        info: info.clone(),
        marginal,
        belief: PublicBelief::from_weighted(items)?,
    })
}

/// How an observed action reweights the worlds it is applied to.
#[derive(Debug, Clone, Copy)]
pub enum Evidence<'a, B> {
    /// Weight each world by the blueprint probability of the action.
    Blueprint(&'a B),
    /// Keep every world in which the action is legal (used for declared
    /// deviations and their responses).
    Uninformative,
}

/// Advances every world by `action`, reweights by the evidence, and keeps
/// successors whose `group` view equals `observed`.
pub fn filter_update<G: Game, B: Blueprint<G>, S: Scalar>(
    game: &G,
    b: &PublicBelief<G::State, S>,
    action: Action,
    evidence: Evidence<'_, B>,
    group: &[PlayerId],
    observed: &G::View,
) -> Result<PublicBelief<G::State, S>, BeliefError> {
    let player = acting_player(game, b)?;
    let mut next = Vec::new();
    let mut any_likely = false;
    for (world, w) in b.iter() {
        let info = game.info_state(world, player);
        if !game.legal_actions(&info).contains(&action) {
            continue;
        }
        let likelihood = match evidence {
            Evidence::Blueprint(pi) => pi.probability::<S>(game, &info, action),
            Evidence::Uninformative => S::one(),
        };
        if likelihood.is_zero() {
            continue;
        }
        any_likely = true;
        for (t, q) in game.outcomes::<S>(world, action)? {
            if game.view(&t.next, group) == *observed {
                next.push((t.next, w.clone() * likelihood.clone() * q));
            }
        }
    }
    if !any_likely {
        return Err(BeliefError::Contradiction { player, action });
    }
    PublicBelief::from_weighted(next).map_err(|e| match e {
        BeliefError::Empty => BeliefError::Contradiction { player, action },
        other => other,
    })
}

/// One line per world: weight, then the world's public-state-free encoding.
pub fn dump<G: Game, S: Scalar>(game: &G, b: &PublicBelief<G::State, S>) -> String {
    let players: Vec<PlayerId> = (0..game.num_players()).collect();
    let mut lines: Vec<(String, String)> = b
        .iter()
        .map(|(world, w)| {
            let key = players
                .iter()
                .map(|&p| game.view_key(&game.info_state(world, p)))
                .collect::<Vec<_>>()
                .join(" | ");
            (key, format!("{w}"))
        })
        .collect();
    lines.sort();
    let mut out = String::new();
    for (key, w) in lines {
        let _ = writeln!(out, "{w}\t{key}");
    }
    out
}
