//! Common-knowledge blueprint policies and their evaluation.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, RngCore};
use thiserror::Error;

use crate::belief::{self, BeliefError, PublicBelief};
use crate::game::{self, Action, Budget, Game, PlayerId};
use crate::scalar::{self, Scalar};
use crate::seed;

/// Node limit used by exact evaluation unless a caller passes its own.
pub const DEFAULT_GUARD: usize = 1_000_000;

/// A policy every player knows, mapping an information state to a
/// distribution over that player's legal actions.
///
/// Implementations must be pure: equal views give equal distributions.
pub trait Blueprint<G: Game>: Send + Sync {
    fn name(&self) -> String;

    fn is_deterministic(&self) -> bool;

    /// Support and probabilities, restricted to legal actions, in action order.
    fn distribution<S: Scalar>(&self, game: &G, info: &G::View) -> Vec<(Action, S)>;

    fn probability<S: Scalar>(&self, game: &G, info: &G::View, action: Action) -> S {
        self.distribution::<S>(game, info)
            .into_iter()
            .find(|(a, _)| *a == action)
            .map(|(_, p)| p)
            .unwrap_or_else(S::zero)
    }

    /// Draws one action. Panics on a terminal view.
    fn sample(&self, game: &G, info: &G::View, rng: &mut dyn RngCore) -> Action {
        let dist = self.distribution::<f64>(game, info);
        if dist.len() == 1 {
            return dist[0].0;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(a, p) in &dist {
            acc += p;
            if u < acc {
                return a;
            }
        }
        dist.last().expect("blueprint queried at a terminal state").0
    }
}

/// Always the lowest-index legal action. Environments list their pass
/// action first, so this is the "never do anything" convention.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoopBlueprint;

impl<G: Game> Blueprint<G> for NoopBlueprint {
    fn name(&self) -> String {
        "noop".into()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn distribution<S: Scalar>(&self, game: &G, info: &G::View) -> Vec<(Action, S)> {
        game.legal_actions(info)
            .first()
            .map(|&a| vec![(a, S::one())])
            .unwrap_or_default()
    }

    fn sample(&self, game: &G, info: &G::View, _rng: &mut dyn RngCore) -> Action {
        *game.legal_actions(info).first().expect("blueprint queried at a terminal state")
    }
}

/// Uniform over legal actions.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformBlueprint;

impl<G: Game> Blueprint<G> for UniformBlueprint {
    fn name(&self) -> String {
        "uniform".into()
    }

    fn is_deterministic(&self) -> bool {
        false
    }

    fn distribution<S: Scalar>(&self, game: &G, info: &G::View) -> Vec<(Action, S)> {
        let legal = game.legal_actions(info);
        let n = legal.len() as i64;
        legal.into_iter().map(|a| (a, S::from_ratio(1, n))).collect()
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone)]
struct TableRow {
    approx: Vec<(Action, f64)>,
    exact: Vec<(Action, BigRational)>,
}

/// Explicit table from information-state key to action weights.
///
/// Text form, one state per line:
///
/// ```text
/// # comment
/// <view key> => <action>:<weight> <action>:<weight> ...
/// ```
///
/// Weights may be decimals or `p/q` fractions and are renormalised over the
/// legal actions. States missing from the table fall back to uniform play.
#[derive(Debug, Clone, Default)]
pub struct TabularBlueprint {
    name: String,
    rows: HashMap<String, TableRow>,
}

impl TabularBlueprint {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            rows: HashMap::new(),
        }
    }

    /// Sets the weights for one key. Negative weights are clamped to zero.
    pub fn insert(&mut self, key: impl Into<String>, weights: Vec<(Action, BigRational)>) {
        let exact: Vec<(Action, BigRational)> = weights
            .into_iter()
            .map(|(a, w)| (a, if w < BigRational::zero() { BigRational::zero() } else { w }))
            .collect();
        let approx = exact.iter().map(|(a, w)| (*a, Scalar::to_f64(w))).collect();
        self.rows.insert(key.into(), TableRow { approx, exact });
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, TableError> {
        let mut table = Self::new(name);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| TableError::Parse {
                line: i + 1,
                message: message.to_string(),
            };
            let (key, entries) = line.split_once("=>").ok_or_else(|| err("missing '=>'"))?;
            let mut weights = Vec::new();
            for entry in entries.split_whitespace() {
                let (a, w) = entry.split_once(':').ok_or_else(|| err("expected action:weight"))?;
                let a: Action = a.parse().map_err(|_| err("bad action index"))?;
                let w = scalar::parse_rational(w).ok_or_else(|| err("bad weight"))?;
                weights.push((a, w));
            }
            table.insert(key.trim(), weights);
        }
        Ok(table)
    }

    pub fn to_text(&self) -> String {
        let mut keys: Vec<&String> = self.rows.keys().collect();
        keys.sort();
        let mut out = String::new();
        for key in keys {
            let row = &self.rows[key];
            let entries: Vec<String> = row.exact.iter().map(|(a, w)| format!("{a}:{w}")).collect();
            out.push_str(&format!("{key} => {}\n", entries.join(" ")));
        }
        out
    }
}

impl<G: Game> Blueprint<G> for TabularBlueprint {
    fn name(&self) -> String {
        format!("tabular:{}", self.name)
    }

    fn is_deterministic(&self) -> bool {
        self.rows
            .values()
            .all(|r| r.approx.iter().filter(|(_, w)| *w > 0.0).count() <= 1)
    }

    fn distribution<S: Scalar>(&self, game: &G, info: &G::View) -> Vec<(Action, S)> {
        let legal = game.legal_actions(info);
        let Some(row) = self.rows.get(&game.view_key(info)) else {
            return UniformBlueprint.distribution(game, info);
        };
        let mut picked: Vec<(Action, S)> = Vec::new();
        for &a in &legal {
            let approx = row.approx.iter().find(|(b, _)| *b == a).map(|(_, w)| *w);
            let exact = row.exact.iter().find(|(b, _)| *b == a).map(|(_, w)| w);
            if let (Some(approx), Some(exact)) = (approx, exact) {
                if approx > 0.0 || !exact.is_zero() {
                    picked.push((a, S::from_parts(approx, exact)));
                }
            }
        }
        let total = scalar::sum(picked.iter().map(|(_, w)| w.clone()));
        if total.is_zero() {
            return UniformBlueprint.distribution(game, info);
        }
        picked.into_iter().map(|(a, w)| (a, w / total.clone())).collect()
    }
}

/// How a quantity is computed: full enumeration or an `n`-sample average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimate {
    Exact,
    Samples(usize),
}

/// Blueprint action probabilities of the acting player, averaged over the
/// belief.
#[derive(Debug, Clone, PartialEq)]
pub struct BlueprintMarginal<S> {
    pub player: PlayerId,
    /// Indexed by action.
    pub probs: Vec<S>,
    /// `None` for the exact marginal.
    pub samples: Option<usize>,
}

impl<S: Scalar> BlueprintMarginal<S> {
    pub fn prob(&self, action: Action) -> S {
        self.probs.get(action).cloned().unwrap_or_else(S::zero)
    }
}

/// `P_pi(a) = sum over s1 of b(s1) * pi(a | s1)`, exactly or from `m` draws.
pub fn marginal<G: Game, B: Blueprint<G>, S: Scalar>(
    game: &G,
    pi: &B,
    b: &PublicBelief<G::State, S>,
    estimate: Estimate,
    seed: u64,
) -> Result<BlueprintMarginal<S>, BeliefError> {
    let player = belief::acting_player(game, b)?;
    let mut probs = vec![S::zero(); game.num_actions(player)];
    let mut add = |world: &G::State, weight: S| {
        for (a, p) in pi.distribution::<S>(game, &game.info_state(world, player)) {
            probs[a] = probs[a].clone() + weight.clone() * p;
        }
    };
    let samples = match estimate {
        Estimate::Exact => {
            for (world, w) in b.iter() {
                add(world, w.clone());
            }
            None
        }
        Estimate::Samples(m) => {
            let share = S::from_ratio(1, m.max(1) as i64);
            for world in b.sample(m, seed) {
                add(&world, share.clone());
            }
            Some(m)
        }
    };
    Ok(BlueprintMarginal {
        player,
        probs,
        samples,
    })
}

/// Blueprint value `q_pi(b, s1)` of `player` holding `info`.
pub fn bp_value<G: Game, B: Blueprint<G>, S: Scalar>(
    game: &G,
    b: &PublicBelief<G::State, S>,
    player: PlayerId,
    info: &G::View,
    pi: &B,
    estimate: Estimate,
    seed: u64,
) -> Result<S, BeliefError> {
    let cond = belief::condition(game, b, player, info)?;
    match estimate {
        Estimate::Exact => {
            let mut budget = Budget::new(DEFAULT_GUARD);
            let mut value = S::zero();
            for (world, w) in cond.belief.iter() {
                let v: S = game::exact_return(game, world, pi, &[], &mut budget)?;
                value = value + w.clone() * v;
            }
            Ok(value)
        }
        Estimate::Samples(n) => {
            let worlds = cond.belief.sample(n, seed::derive(seed, 0));
            let mut total = 0.0;
            for (j, world) in worlds.iter().enumerate() {
                let mut rng = seed::LazyRng::new(seed::derive(seed, 1 + j as u64));
                total += game::rollout(game, world, pi, &[], &mut rng)?;
            }
            Ok(S::from_f64(total / n.max(1) as f64))
        }
    }
}

/// Checks that a distribution is supported on legal actions and sums to one.
pub fn is_valid_distribution<S: Scalar>(dist: &[(Action, S)], legal: &[Action], tol: f64) -> bool {
    let total = scalar::sum(dist.iter().map(|(_, p)| p.clone()));
    dist.iter().all(|(a, p)| legal.contains(a) && *p >= S::zero())
        && (dist.is_empty() && legal.is_empty() || scalar::approx_eq(&total, &S::one(), tol))
}

impl<G: Game, B: Blueprint<G>> Blueprint<G> for &B {
    fn name(&self) -> String {
        (**self).name()
    }

    fn is_deterministic(&self) -> bool {
        (**self).is_deterministic()
    }

    fn distribution<S: Scalar>(&self, game: &G, info: &G::View) -> Vec<(Action, S)> {
        (**self).distribution(game, info)
    }

    fn sample(&self, game: &G, info: &G::View, rng: &mut dyn RngCore) -> Action {
        (**self).sample(game, info, rng)
    }
}
