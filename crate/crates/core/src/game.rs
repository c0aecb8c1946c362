//! Turn-based cooperative games with publicly observed actions.
//!
//! A [`Game`] exposes full world states, per-group views of them, and both a
//! sampling and an enumerating transition function. Actions are indices into
//! a player's action space; the index order is the public total order used
//! for every tie-break.

use std::fmt::Debug;
use std::hash::Hash;

use rand::RngCore;
use thiserror::Error;

use crate::blueprint::Blueprint;
use crate::scalar::Scalar;

pub type Action = usize;
pub type PlayerId = usize;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GameError {
    #[error("player {player} cannot play action {action}: {reason}")]
    IllegalAction {
        player: PlayerId,
        action: Action,
        reason: String,
    },
    #[error("the game is already over")]
    Terminal,
    #[error("information states do not describe one reachable history: {0}")]
    InconsistentViews(String),
    #[error("invalid game parameters: {0}")]
    InvalidParams(String),
    #[error("trajectory exceeded the horizon of {0} turns")]
    HorizonExceeded(usize),
    #[error("enumeration budget of {limit} nodes exhausted")]
    BudgetExhausted { limit: usize },
}

/// Result of applying one action.
#[derive(Debug, Clone)]
pub struct Transition<S> {
    pub next: S,
    pub reward: f64,
}

/// A cooperative game with sequential, publicly observable actions.
///
/// `view(state, group)` is what every member of `group` observes in common:
/// the public transcript plus whatever private information all of them see.
/// A single-member group yields that player's information state, the full
/// player set yields the public state. Views must be functions of the
/// observation history only, so two histories with the same projection give
/// equal views.
///
/// Chance resolved at the start is listed by [`Game::chance_outcomes`]. Any
/// later randomness (for example the order of an unseen deck) lives in
/// `step`/`outcomes`; states produced by [`Game::deal`] have it fixed in
/// advance so replaying a history is deterministic.
pub trait Game: Send + Sync {
    type State: Clone + Ord + Debug + Send + Sync;
    type View: Clone + Ord + Hash + Debug + Send + Sync;

    fn name(&self) -> &str;
    fn num_players(&self) -> usize;
    fn num_actions(&self, player: PlayerId) -> usize;
    fn action_label(&self, player: PlayerId, action: Action) -> String;
    /// Upper bound on the number of turns of any trajectory.
    fn horizon(&self) -> usize;
    /// Smallest and largest achievable episode return.
    fn return_bounds(&self) -> (f64, f64);

    /// Initial worlds with positive probability, in a fixed order.
    fn chance_outcomes<S: Scalar>(&self) -> Vec<(Self::State, S)>;

    /// Initial worlds whose `group` view equals `view`, unnormalised.
    fn chance_outcomes_matching<S: Scalar>(
        &self,
        group: &[PlayerId],
        view: &Self::View,
    ) -> Vec<(Self::State, S)> {
        self.chance_outcomes::<S>()
            .into_iter()
            .filter(|(w, _)| self.view(w, group) == *view)
            .collect()
    }

    /// Samples a fully resolved initial world.
    fn deal(&self, rng: &mut dyn RngCore) -> Self::State;

    /// Player to move, `None` once the game is over.
    fn current_player(&self, state: &Self::State) -> Option<PlayerId>;

    /// Legal actions at an information state; empty when the game is over.
    fn legal_actions(&self, info: &Self::View) -> Vec<Action>;

    fn view(&self, state: &Self::State, group: &[PlayerId]) -> Self::View;

    /// Samples the successor of `state` under `action`.
    fn step(
        &self,
        state: &Self::State,
        action: Action,
        rng: &mut dyn RngCore,
    ) -> Result<Transition<Self::State>, GameError>;

    /// All successors of `state` under `action` with their probabilities.
    fn outcomes<S: Scalar>(
        &self,
        state: &Self::State,
        action: Action,
    ) -> Result<Vec<(Transition<Self::State>, S)>, GameError>;

    /// Rebuilds a world from information states of several players.
    fn join_views(&self, views: &[(PlayerId, &Self::View)]) -> Result<Self::State, GameError>;

    /// Stable textual key of a view, used by tabular blueprints and dumps.
    fn view_key(&self, view: &Self::View) -> String;

    /// Human-readable rendering of a view for the terminal front end.
    fn describe_view(&self, view: &Self::View) -> String {
        self.view_key(view)
    }

    fn info_state(&self, state: &Self::State, player: PlayerId) -> Self::View {
        self.view(state, &[player])
    }

    fn public_state(&self, state: &Self::State) -> Self::View {
        let all: Vec<PlayerId> = (0..self.num_players()).collect();
        self.view(state, &all)
    }

    fn is_terminal(&self, state: &Self::State) -> bool {
        self.current_player(state).is_none()
    }

    /// Legal actions of the player to move in `state`.
    fn legal_in(&self, state: &Self::State) -> Vec<Action> {
        match self.current_player(state) {
            Some(p) => self.legal_actions(&self.info_state(state, p)),
            None => Vec::new(),
        }
    }
}

/// Independent draw of the initial world (the chance player's move).
pub fn chance_init<G: Game>(game: &G, seed: u64) -> G::State {
    game.deal(&mut crate::seed::rng(seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Turn {
    pub player: PlayerId,
    pub action: Action,
    pub reward: f64,
}

/// Initial world plus the ordered list of actions taken from it.
#[derive(Debug, Clone)]
pub struct History<G: Game> {
    pub initial: G::State,
    pub turns: Vec<Turn>,
}

impl<G: Game> History<G> {
    pub fn new(initial: G::State) -> Self {
        Self {
            initial,
            turns: Vec::new(),
        }
    }

    pub fn total_return(&self) -> f64 {
        self.turns.iter().map(|t| t.reward).sum()
    }

    /// Re-simulates the recorded actions and returns every visited state
    /// (initial state first). Fails if an action is illegal or the recorded
    /// rewards are not reproduced.
    pub fn replay(&self, game: &G) -> Result<Vec<G::State>, GameError> {
        let mut rng = crate::seed::rng(0);
        let mut states = vec![self.initial.clone()];
        for turn in &self.turns {
            let state = states.last().expect("non-empty");
            if game.current_player(state) != Some(turn.player) {
                return Err(GameError::IllegalAction {
                    player: turn.player,
                    action: turn.action,
                    reason: "not this player's turn".into(),
                });
            }
            let t = game.step(state, turn.action, &mut rng)?;
            if t.reward != turn.reward {
                return Err(GameError::InconsistentViews(format!(
                    "replayed reward {} differs from recorded {}",
                    t.reward, turn.reward
                )));
            }
            states.push(t.next);
        }
        Ok(states)
    }

    /// Information states of `player` along the history.
    pub fn information_states(&self, game: &G, player: PlayerId) -> Result<Vec<G::View>, GameError> {
        Ok(self.replay(game)?.iter().map(|s| game.info_state(s, player)).collect())
    }

    pub fn public_states(&self, game: &G) -> Result<Vec<G::View>, GameError> {
        Ok(self.replay(game)?.iter().map(|s| game.public_state(s)).collect())
    }
}

/// Plays `prefix` from `world`, then follows the blueprint to the end and
/// returns the undiscounted total reward.
pub fn rollout<G: Game, B: Blueprint<G>>(
    game: &G,
    world: &G::State,
    blueprint: &B,
    prefix: &[Action],
    rng: &mut dyn RngCore,
) -> Result<f64, GameError> {
    let mut state = world.clone();
    let mut total = 0.0;
    let mut forced = prefix.iter().peekable();
    for _ in 0..game.horizon() {
        let Some(player) = game.current_player(&state) else {
            break;
        };
        let action = match forced.next() {
            Some(&a) => a,
            None => blueprint.sample(game, &game.info_state(&state, player), rng),
        };
        let t = game.step(&state, action, rng)?;
        total += t.reward;
        state = t.next;
    }
    if forced.peek().is_some() {
        return Err(GameError::Terminal);
    }
    if !game.is_terminal(&state) {
        return Err(GameError::HorizonExceeded(game.horizon()));
    }
    Ok(total)
}

/// [`rollout`] from the world jointly described by two information states.
pub fn rollout_from_views<G: Game, B: Blueprint<G>>(
    game: &G,
    first: (PlayerId, &G::View),
    second: (PlayerId, &G::View),
    blueprint: &B,
    prefix: &[Action],
    seed: u64,
) -> Result<f64, GameError> {
    let world = game.join_views(&[first, second])?;
    rollout(game, &world, blueprint, prefix, &mut crate::seed::rng(seed))
}

/// Expected return of `prefix` then blueprint play, by enumerating every
/// blueprint action and chance outcome. `budget` counts visited nodes.
pub fn exact_return<G: Game, B: Blueprint<G>, S: Scalar>(
    game: &G,
    world: &G::State,
    blueprint: &B,
    prefix: &[Action],
    budget: &mut Budget,
) -> Result<S, GameError> {
    exact_return_at(game, world, blueprint, prefix, budget, 0)
}

fn exact_return_at<G: Game, B: Blueprint<G>, S: Scalar>(
    game: &G,
    state: &G::State,
    blueprint: &B,
    prefix: &[Action],
    budget: &mut Budget,
    depth: usize,
) -> Result<S, GameError> {
    budget.spend()?;
    let Some(player) = game.current_player(state) else {
        return if prefix.is_empty() {
            Ok(S::zero())
        } else {
            Err(GameError::Terminal)
        };
    };
    if depth >= game.horizon() {
        return Err(GameError::HorizonExceeded(game.horizon()));
    }
    let choices: Vec<(Action, S)> = match prefix.split_first() {
        Some((&a, _)) => vec![(a, S::one())],
        None => blueprint.distribution::<S>(game, &game.info_state(state, player)),
    };
    let rest = prefix.get(1..).unwrap_or(&[]);
    let mut value = S::zero();
    for (action, p) in choices {
        if p.is_zero() {
            continue;
        }
        for (t, q) in game.outcomes::<S>(state, action)? {
            let future: S = exact_return_at(game, &t.next, blueprint, rest, budget, depth + 1)?;
            value = value + p.clone() * q * (S::from_f64(t.reward) + future);
        }
    }
    Ok(value)
}

/// Node budget for exact enumeration.
#[derive(Debug, Clone)]
pub struct Budget {
    limit: usize,
    used: usize,
}

impl Budget {
    pub fn new(limit: usize) -> Self {
        Self { limit, used: 0 }
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn spend(&mut self) -> Result<(), GameError> {
        self.used += 1;
        if self.used > self.limit {
            Err(GameError::BudgetExhausted { limit: self.limit })
        } else {
            Ok(())
        }
    }
}
