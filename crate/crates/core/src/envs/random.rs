//! Random two-turn cooperative games with tabular blueprints.
//!
//! Chance draws a private state for each player (`s1` seen by Alice, `s2` by
//! Bob) from a random joint table. Alice moves, then Bob, then the game pays
//! `r(s1, s2, a1, a2)`. Legal actions may depend on the mover's own state.

use num_rational::BigRational;
use rand::{Rng, RngCore};

use crate::blueprint::TabularBlueprint;
use crate::game::{Action, Game, GameError, PlayerId, Transition};
use crate::scalar::Scalar;
use crate::seed;

pub const ALICE: PlayerId = 0;
pub const BOB: PlayerId = 1;

/// Reward values drawn for each cell.
pub const REWARDS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub s1: usize,
    pub s2: usize,
    pub a1: usize,
    pub a2: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { s1: 4, s2: 4, a1: 3, a2: 3 }
    }
}

#[derive(Debug, Clone)]
pub struct TwoTurnGame {
    pub n1: usize,
    pub n2: usize,
    pub a1: usize,
    pub a2: usize,
    /// Unnormalised joint weights `w[s1][s2]`.
    pub weights: Vec<Vec<u32>>,
    pub legal1: Vec<Vec<Action>>,
    pub legal2: Vec<Vec<Action>>,
    /// `reward[s1][s2][a1][a2]`.
    pub reward: Vec<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TwoTurnState {
    pub s1: usize,
    pub s2: usize,
    pub a1: Option<Action>,
    pub a2: Option<Action>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TwoTurnView {
    pub owner: Option<PlayerId>,
    pub s1: Option<usize>,
    pub s2: Option<usize>,
    pub a1: Option<Action>,
    pub a2: Option<Action>,
}

fn legal_subset(rng: &mut impl Rng, n: usize) -> Vec<Action> {
    loop {
        let v: Vec<Action> = (0..n).filter(|_| rng.random_bool(0.8)).collect();
        if !v.is_empty() {
            return v;
        }
    }
}

impl TwoTurnGame {
    /// Draws a game with sizes up to `limits`.
    pub fn generate(seed: u64, limits: Limits) -> Self {
        let mut rng = seed::rng(seed);
        let n1 = rng.random_range(1..=limits.s1);
        let n2 = rng.random_range(1..=limits.s2);
        let a1 = rng.random_range(2..=limits.a1.max(2));
        let a2 = rng.random_range(1..=limits.a2);
        let mut weights: Vec<Vec<u32>> = (0..n1)
            .map(|_| (0..n2).map(|_| rng.random_range(0..=4)).collect())
            .collect();
        if weights.iter().flatten().all(|&w| w == 0) {
            weights[0][0] = 1;
        }
        let legal1 = (0..n1).map(|_| legal_subset(&mut rng, a1)).collect();
        let legal2 = (0..n2).map(|_| legal_subset(&mut rng, a2)).collect();
        let reward = (0..n1)
            .map(|_| {
                (0..n2)
                    .map(|_| {
                        (0..a1)
                            .map(|_| (0..a2).map(|_| REWARDS[rng.random_range(0..REWARDS.len())]).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            n1,
            n2,
            a1,
            a2,
            weights,
            legal1,
            legal2,
            reward,
        }
    }

    pub fn world(&self, s1: usize, s2: usize) -> TwoTurnState {
        TwoTurnState { s1, s2, a1: None, a2: None }
    }

    fn apply(&self, s: &TwoTurnState, a: Action) -> Result<Transition<TwoTurnState>, GameError> {
        let player = self.current_player(s).ok_or(GameError::Terminal)?;
        let legal = if player == ALICE { &self.legal1[s.s1] } else { &self.legal2[s.s2] };
        if !legal.contains(&a) {
            return Err(GameError::IllegalAction {
                player,
                action: a,
                reason: "not legal in this private state".into(),
            });
        }
        let mut next = *s;
        let reward = if player == ALICE {
            next.a1 = Some(a);
            0.0
        } else {
            next.a2 = Some(a);
            self.reward[s.s1][s.s2][s.a1.expect("alice moved")][a]
        };
        Ok(Transition { next, reward })
    }

    /// Random blueprint over legal actions. Some of Alice's actions are
    /// never played in any state, so short deviation lists are common.
    pub fn random_blueprint(&self, seed: u64) -> TabularBlueprint {
        let mut rng = seed::rng(seed);
        let mut table = TabularBlueprint::new(format!("random-{seed}"));
        let excluded: Vec<bool> = (0..self.a1).map(|_| rng.random_bool(0.4)).collect();
        for s1 in 0..self.n1 {
            let mut w: Vec<(Action, BigRational)> = self.legal1[s1]
                .iter()
                .map(|&a| {
                    let x = if excluded[a] { 0 } else { rng.random_range(0..=3) };
                    (a, BigRational::from_ratio(x, 1))
                })
                .collect();
            if w.iter().all(|(_, x)| x == &BigRational::from_ratio(0, 1)) {
                w[0].1 = BigRational::from_ratio(1, 1);
            }
            let info = self.view(&self.world(s1, 0), &[ALICE]);
            table.insert(self.view_key(&info), w);
        }
        for s2 in 0..self.n2 {
            for a1 in 0..self.a1 {
                let w: Vec<(Action, BigRational)> = self.legal2[s2]
                    .iter()
                    .map(|&a| (a, BigRational::from_ratio(rng.random_range(0..=3), 1)))
                    .collect();
                let mut st = self.world(0, s2);
                st.a1 = Some(a1);
                table.insert(self.view_key(&self.view(&st, &[BOB])), w);
            }
        }
        table
    }
}

impl Game for TwoTurnGame {
    type State = TwoTurnState;
    type View = TwoTurnView;

    fn name(&self) -> &str {
        "random-two-turn"
    }

    fn num_players(&self) -> usize {
        2
    }

    fn num_actions(&self, player: PlayerId) -> usize {
        if player == ALICE { self.a1 } else { self.a2 }
    }

    fn action_label(&self, player: PlayerId, action: Action) -> String {
        format!("{}{action}", if player == ALICE { 'a' } else { 'b' })
    }

    fn horizon(&self) -> usize {
        2
    }

    fn return_bounds(&self) -> (f64, f64) {
        (REWARDS[0], REWARDS[REWARDS.len() - 1])
    }

    fn chance_outcomes<S: Scalar>(&self) -> Vec<(TwoTurnState, S)> {
        let total: u32 = self.weights.iter().flatten().sum();
        let mut out = Vec::new();
        for s1 in 0..self.n1 {
            for s2 in 0..self.n2 {
                let w = self.weights[s1][s2];
                if w > 0 {
                    out.push((self.world(s1, s2), S::from_ratio(w as i64, total as i64)));
                }
            }
        }
        out
    }

    fn deal(&self, rng: &mut dyn RngCore) -> TwoTurnState {
        let total: u32 = self.weights.iter().flatten().sum();
        let mut u = rng.random_range(0..total);
        for s1 in 0..self.n1 {
            for s2 in 0..self.n2 {
                let w = self.weights[s1][s2];
                if u < w {
                    return self.world(s1, s2);
                }
                u -= w;
            }
        }
        unreachable!("weights sum to total")
    }

    fn current_player(&self, s: &TwoTurnState) -> Option<PlayerId> {
        match (s.a1, s.a2) {
            (None, _) => Some(ALICE),
            (Some(_), None) => Some(BOB),
            _ => None,
        }
    }

    fn legal_actions(&self, v: &TwoTurnView) -> Vec<Action> {
        match (v.owner, v.a1, v.a2) {
            (Some(ALICE), None, _) => v.s1.map(|s| self.legal1[s].clone()).unwrap_or_default(),
            (Some(BOB), Some(_), None) => v.s2.map(|s| self.legal2[s].clone()).unwrap_or_default(),
            _ => Vec::new(),
        }
    }

    fn view(&self, s: &TwoTurnState, group: &[PlayerId]) -> TwoTurnView {
        let only = |p: PlayerId| !group.is_empty() && group.iter().all(|&q| q == p);
        TwoTurnView {
            owner: match group {
                [p] => Some(*p),
                _ => None,
            },
            s1: only(ALICE).then_some(s.s1),
            s2: only(BOB).then_some(s.s2),
            a1: s.a1,
            a2: s.a2,
        }
    }

    fn step(&self, s: &TwoTurnState, a: Action, _rng: &mut dyn RngCore) -> Result<Transition<TwoTurnState>, GameError> {
        self.apply(s, a)
    }

    fn outcomes<S: Scalar>(&self, s: &TwoTurnState, a: Action) -> Result<Vec<(Transition<TwoTurnState>, S)>, GameError> {
        Ok(vec![(self.apply(s, a)?, S::one())])
    }

    fn join_views(&self, views: &[(PlayerId, &TwoTurnView)]) -> Result<TwoTurnState, GameError> {
        let s1 = views.iter().find_map(|(_, v)| v.s1);
        let s2 = views.iter().find_map(|(_, v)| v.s2);
        let first = views.first().ok_or_else(|| GameError::InconsistentViews("no views".into()))?.1;
        match (s1, s2) {
            (Some(s1), Some(s2)) => Ok(TwoTurnState {
                s1,
                s2,
                a1: first.a1,
                a2: first.a2,
            }),
            _ => Err(GameError::InconsistentViews("both private states are needed".into())),
        }
    }

    fn view_key(&self, v: &TwoTurnView) -> String {
        let opt = |x: Option<usize>| x.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
        let owner = match v.owner {
            Some(ALICE) => "alice",
            Some(_) => "bob",
            None => "public",
        };
        format!("{owner}:{}:{}:{}:{}", opt(v.s1), opt(v.s2), opt(v.a1), opt(v.a2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blueprint::{is_valid_distribution, Blueprint};

    #[test]
    fn generated_games_respect_limits() {
        for seed in 0..30 {
            let g = TwoTurnGame::generate(seed, Limits::default());
            assert!(g.n1 <= 4 && g.n2 <= 4 && g.a1 <= 3 && g.a2 <= 3);
            let total: f64 = g.chance_outcomes::<f64>().iter().map(|(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-12);
            let pi = g.random_blueprint(seed);
            for s1 in 0..g.n1 {
                let info = g.view(&g.world(s1, 0), &[ALICE]);
                let d = pi.distribution::<f64>(&g, &info);
                assert!(is_valid_distribution(&d, &g.legal_actions(&info), 1e-12));
            }
        }
    }
}
