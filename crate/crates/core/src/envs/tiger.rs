//! Trampoline-tiger: the smallest game with a self-explaining deviation.
//!
//! Alice alone sees whether the lever opens a trampoline or a tiger cage.
//! She may jump, then Bob may pull the lever. Pulling with the trampoline
//! behind it rescues a jumper; pulling on the tiger, or jumping without a
//! pull, is a disaster.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::game::{Action, Game, GameError, PlayerId, Transition};
use crate::scalar::Scalar;

pub const ALICE: PlayerId = 0;
pub const BOB: PlayerId = 1;

pub const NOOP: Action = 0;
pub const JUMP: Action = 1;
pub const PULL: Action = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lever {
    Tiger,
    Trampoline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TigerParams {
    /// Probability of the trampoline.
    pub p: f64,
    /// Jump without a pull.
    pub fall: f64,
    /// Pull on the tiger cage, whether or not Alice jumped.
    pub eaten: f64,
    /// Jump followed by a pull on the trampoline.
    pub rescue: f64,
}

impl Default for TigerParams {
    fn default() -> Self {
        Self {
            p: 0.1,
            fall: -10.0,
            eaten: -10.0,
            rescue: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrampolineTiger {
    params: TigerParams,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TigerState {
    pub lever: Lever,
    pub alice: Option<Action>,
    pub bob: Option<Action>,
}

/// `lever` is present only when Alice is in the observing group.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TigerView {
    pub owner: Option<PlayerId>,
    pub lever: Option<Lever>,
    pub alice: Option<Action>,
    pub bob: Option<Action>,
}

impl TrampolineTiger {
    pub fn new(params: TigerParams) -> Result<Self, GameError> {
        if !(0.0..=1.0).contains(&params.p) {
            return Err(GameError::InvalidParams(format!("p = {} is not a probability", params.p)));
        }
        Ok(Self { params })
    }

    pub fn with_p(p: f64) -> Result<Self, GameError> {
        Self::new(TigerParams { p, ..TigerParams::default() })
    }

    pub fn params(&self) -> &TigerParams {
        &self.params
    }

    pub fn payoff(&self, lever: Lever, alice: Action, bob: Action) -> f64 {
        let (jump, pull) = (alice == JUMP, bob == PULL);
        match (jump, pull, lever) {
            (true, false, _) => self.params.fall,
            (_, true, Lever::Tiger) => self.params.eaten,
            (true, true, Lever::Trampoline) => self.params.rescue,
            _ => 0.0,
        }
    }

    pub fn world(&self, lever: Lever) -> TigerState {
        TigerState {
            lever,
            alice: None,
            bob: None,
        }
    }

    fn apply(&self, state: &TigerState, action: Action) -> Result<Transition<TigerState>, GameError> {
        let player = self.current_player(state).ok_or(GameError::Terminal)?;
        if action > 1 {
            return Err(GameError::IllegalAction {
                player,
                action,
                reason: "only actions 0 and 1 exist".into(),
            });
        }
        let mut next = state.clone();
        let reward = if player == ALICE {
            next.alice = Some(action);
            0.0
        } else {
            next.bob = Some(action);
            self.payoff(state.lever, state.alice.expect("alice moved"), action)
        };
        Ok(Transition { next, reward })
    }
}

impl Default for TrampolineTiger {
    fn default() -> Self {
        Self {
            params: TigerParams::default(),
        }
    }
}

fn lever_name(l: Lever) -> &'static str {
    match l {
        Lever::Tiger => "tiger",
        Lever::Trampoline => "trampoline",
    }
}

impl Game for TrampolineTiger {
    type State = TigerState;
    type View = TigerView;

    fn name(&self) -> &str {
        "trampoline-tiger"
    }

    fn num_players(&self) -> usize {
        2
    }

    fn num_actions(&self, _player: PlayerId) -> usize {
        2
    }

    fn action_label(&self, player: PlayerId, action: Action) -> String {
        match (player, action) {
            (_, NOOP) => "noop".into(),
            (ALICE, JUMP) => "jump".into(),
            (BOB, PULL) => "pull".into(),
            _ => format!("#{action}"),
        }
    }

    fn horizon(&self) -> usize {
        2
    }

    fn return_bounds(&self) -> (f64, f64) {
        let mut values = vec![];
        for lever in [Lever::Tiger, Lever::Trampoline] {
            for a in 0..2 {
                for b in 0..2 {
                    values.push(self.payoff(lever, a, b));
                }
            }
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    fn chance_outcomes<S: Scalar>(&self) -> Vec<(TigerState, S)> {
        let p = S::from_f64(self.params.p);
        let q = S::one() - p.clone();
        [(Lever::Tiger, q), (Lever::Trampoline, p)]
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(l, w)| (self.world(l), w))
            .collect()
    }

    fn deal(&self, rng: &mut dyn RngCore) -> TigerState {
        let u: f64 = rng.random();
        self.world(if u < self.params.p { Lever::Trampoline } else { Lever::Tiger })
    }

    fn current_player(&self, state: &TigerState) -> Option<PlayerId> {
        match (state.alice, state.bob) {
            (None, _) => Some(ALICE),
            (Some(_), None) => Some(BOB),
            _ => None,
        }
    }

    fn legal_actions(&self, info: &TigerView) -> Vec<Action> {
        let to_move = match (info.alice, info.bob) {
            (None, _) => Some(ALICE),
            (Some(_), None) => Some(BOB),
            _ => None,
        };
        if to_move.is_some() && to_move == info.owner {
            vec![0, 1]
        } else {
            vec![]
        }
    }

    fn view(&self, state: &TigerState, group: &[PlayerId]) -> TigerView {
        let owner = match group {
            [p] => Some(*p),
            _ => None,
        };
        let sees_lever = !group.is_empty() && group.iter().all(|&p| p == ALICE);
        TigerView {
            owner,
            lever: sees_lever.then_some(state.lever),
            alice: state.alice,
            bob: state.bob,
        }
    }

    fn step(&self, state: &TigerState, action: Action, _rng: &mut dyn RngCore) -> Result<Transition<TigerState>, GameError> {
        self.apply(state, action)
    }

    fn outcomes<S: Scalar>(&self, state: &TigerState, action: Action) -> Result<Vec<(Transition<TigerState>, S)>, GameError> {
        Ok(vec![(self.apply(state, action)?, S::one())])
    }

    fn join_views(&self, views: &[(PlayerId, &TigerView)]) -> Result<TigerState, GameError> {
        let mut lever = None;
        let first = views
            .first()
            .ok_or_else(|| GameError::InconsistentViews("no views".into()))?
            .1;
        for (_, v) in views {
            if (v.alice, v.bob) != (first.alice, first.bob) {
                return Err(GameError::InconsistentViews("different action histories".into()));
            }
            if let Some(l) = v.lever {
                if lever.is_some_and(|m| m != l) {
                    return Err(GameError::InconsistentViews("different levers".into()));
                }
                lever = Some(l);
            }
        }
        let lever = lever.ok_or_else(|| GameError::InconsistentViews("no view reveals the lever".into()))?;
        Ok(TigerState {
            lever,
            alice: first.alice,
            bob: first.bob,
        })
    }

    fn view_key(&self, view: &TigerView) -> String {
        let owner = match view.owner {
            Some(ALICE) => "alice",
            Some(BOB) => "bob",
            Some(_) => "?",
            None => "public",
        };
        let lever = view.lever.map(lever_name).unwrap_or("?");
        let mut moves = Vec::new();
        if let Some(a) = view.alice {
            moves.push(self.action_label(ALICE, a));
        }
        if let Some(b) = view.bob {
            moves.push(self.action_label(BOB, b));
        }
        format!("{owner}:{lever}:{}", moves.join(","))
    }

    fn describe_view(&self, view: &TigerView) -> String {
        let mut out = String::new();
        if let Some(l) = view.lever {
            out.push_str(&format!("The lever leads to the {}.\n", lever_name(l)));
        } else {
            out.push_str("You cannot see what is behind the lever.\n");
        }
        match view.alice {
            None => out.push_str("Alice has not moved yet."),
            Some(a) => out.push_str(&format!("Alice played {}.", self.action_label(ALICE, a))),
        }
        if let Some(b) = view.bob {
            out.push_str(&format!(" Bob played {}.", self.action_label(BOB, b)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payoff_table() {
        let g = TrampolineTiger::default();
        assert_eq!(g.payoff(Lever::Tiger, JUMP, NOOP), -10.0);
        assert_eq!(g.payoff(Lever::Trampoline, JUMP, NOOP), -10.0);
        assert_eq!(g.payoff(Lever::Tiger, JUMP, PULL), -10.0);
        assert_eq!(g.payoff(Lever::Tiger, NOOP, PULL), -10.0);
        assert_eq!(g.payoff(Lever::Trampoline, JUMP, PULL), 1.0);
        assert_eq!(g.payoff(Lever::Trampoline, NOOP, PULL), 0.0);
        assert_eq!(g.payoff(Lever::Trampoline, NOOP, NOOP), 0.0);
        assert_eq!(g.return_bounds(), (-10.0, 1.0));
    }

    #[test]
    fn only_alice_sees_the_lever() {
        let g = TrampolineTiger::default();
        let s = g.world(Lever::Trampoline);
        assert_eq!(g.info_state(&s, ALICE).lever, Some(Lever::Trampoline));
        assert_eq!(g.info_state(&s, BOB).lever, None);
        assert_eq!(g.public_state(&s).lever, None);
        assert_eq!(g.legal_actions(&g.info_state(&s, ALICE)), vec![0, 1]);
        assert!(g.legal_actions(&g.info_state(&s, BOB)).is_empty());
    }

    #[test]
    fn chance_drops_zero_branches() {
        let g = TrampolineTiger::with_p(0.0).unwrap();
        assert_eq!(g.chance_outcomes::<f64>().len(), 1);
        assert!(TrampolineTiger::with_p(1.5).is_err());
    }
}
