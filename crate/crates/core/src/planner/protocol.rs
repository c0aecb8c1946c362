use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::belief::{self, Evidence, PublicBelief};
use crate::blueprint::Blueprint;
use crate::game::{self, Action, Game, GameError, History, PlayerId, Turn};

use crate::scalar::Scalar;
use crate::seed;

use super::{Plan, PlanError, Planner, PlannerConfig, Variant};

/// Which policy controls every seat during an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerKind {
    Blueprint,
    Sparta,
    ImprovisedE,
    ImprovisedP,
}

impl PlannerKind {
    pub fn variant(&self) -> Option<Variant> {
        match self {
            PlannerKind::ImprovisedE => Some(Variant::Expected),
            PlannerKind::ImprovisedP => Some(Variant::Probability),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PlannerKind::Blueprint => "blueprint",
            PlannerKind::Sparta => "sparta",
            PlannerKind::ImprovisedE => "improvised-e",
            PlannerKind::ImprovisedP => "improvised-p",
        }
    }
}

impl std::str::FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "blueprint" => Ok(PlannerKind::Blueprint),
            "sparta" => Ok(PlannerKind::Sparta),
            "improvised-e" => Ok(PlannerKind::ImprovisedE),
            "improvised-p" => Ok(PlannerKind::ImprovisedP),
            other => Err(format!("unknown planner '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOptions {
    pub kind: PlannerKind,
    /// Turns at which the search runs; every turn when `None`. Other turns
    /// follow the blueprint (responses to a deviation are still played).
    pub plan_turns: Option<BTreeSet<usize>>,
}

impl ProtocolOptions {
    pub fn new(kind: PlannerKind) -> Self {
        Self {
            kind,
            plan_turns: None,
        }
    }

    pub fn only_at(mut self, turns: impl IntoIterator<Item = usize>) -> Self {
        self.plan_turns = Some(turns.into_iter().collect());
        self
    }

    fn plans_at(&self, turn: usize) -> bool {
        self.plan_turns.as_ref().is_none_or(|s| s.contains(&turn))
    }
}

/// What the controlling planner did on one turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnAnnotation {
    pub turn: usize,
    pub player: PlayerId,
    pub action: Action,
    pub label: String,
    /// The actor left the blueprint on purpose.
    pub deviated: bool,
    /// The actor recognised the previous action as a deviation and answered it.
    pub detected: bool,
    pub responds_to: Option<usize>,
    /// For a deviation: the response the actor expects (argmax of its `f`).
    pub assumed_response: Option<Action>,
    /// Chosen outside the planner, for example by a human seat.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub external: bool,
}

impl TurnAnnotation {
    fn informative(&self) -> bool {
        !(self.deviated || self.detected || self.external)
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeOutcome<G: Game> {
    pub seed: u64,
    pub history: History<G>,
    pub annotations: Vec<TurnAnnotation>,
    pub total_return: f64,
}

/// Lazily filtered group beliefs along the true trajectory.
struct Tracker<'a, G: Game, B, S> {
    game: &'a G,
    pi: &'a B,
    states: Vec<G::State>,
    informative: Vec<(Action, bool)>,
    cache: BTreeMap<Vec<PlayerId>, (usize, PublicBelief<G::State, S>)>,
}

impl<'a, G: Game, B: Blueprint<G>, S: Scalar> Tracker<'a, G, B, S> {
    fn new(game: &'a G, pi: &'a B, initial: G::State) -> Self {
        Self {
            game,
            pi,
            states: vec![initial],
            informative: Vec::new(),
            cache: BTreeMap::new(),
        }
    }

    fn push(&mut self, action: Action, informative: bool, next: G::State) {
        self.informative.push((action, informative));
        self.states.push(next);
    }

    /// Belief of `group` at the start of `turn`.
    fn belief(&mut self, turn: usize, group: &[PlayerId]) -> Result<PublicBelief<G::State, S>, (usize, PlanError)> {
        let mut key = group.to_vec();
        key.sort_unstable();
        let (start, mut b) = match self.cache.get(&key) {
            Some((t, b)) if *t <= turn => (*t, b.clone()),
            _ => {
                let view = self.game.view(&self.states[0], &key);
                let b = belief::initial_group_belief(self.game, &key, &view).map_err(|e| (0, e.into()))?;
                (0, b)
            }
        };
        for k in start..turn {
            let (action, informative) = self.informative[k];
            let evidence = if informative {
                Evidence::Blueprint(self.pi)
            } else {
                Evidence::Uninformative
            };
            let observed = self.game.view(&self.states[k + 1], &key);
            b = belief::filter_update(self.game, &b, action, evidence, &key, &observed)
                .map_err(|e| (k, e.into()))?;
        }
        self.cache.insert(key, (turn, b.clone()));
        Ok(b)
    }
}

fn transcript<G: Game>(game: &G, annotations: &[TurnAnnotation]) -> String {
    let mut out = String::new();
    for a in annotations {
        let _ = write!(out, "{:>3} p{} {}", a.turn, a.player, game.action_label(a.player, a.action));
        if a.deviated {
            out.push_str(" [deviation]");
        }
        if let Some(t) = a.responds_to {
            let _ = write!(out, " [response to {t}]");
        }
        out.push('\n');
    }
    out
}

/// Plays one episode from a freshly dealt world.
pub fn run_episode<G: Game, B: Blueprint<G>, S: Scalar>(
    game: &G,
    pi: &B,
    config: &PlannerConfig,
    options: &ProtocolOptions,
    seed: u64,
) -> Result<EpisodeOutcome<G>, PlanError> {
    let initial = game::chance_init(game, seed::derive(seed, seed::stream::CHANCE));
    run_episode_from::<G, B, S>(game, pi, config, options, initial, seed)
}

/// Plays one episode from `initial`; see [`EpisodeDriver`].
pub fn run_episode_from<G: Game, B: Blueprint<G>, S: Scalar>(
    game: &G,
    pi: &B,
    config: &PlannerConfig,
    options: &ProtocolOptions,
    initial: G::State,
    seed: u64,
) -> Result<EpisodeOutcome<G>, PlanError> {
    let mut driver: EpisodeDriver<'_, G, B, S> = EpisodeDriver::new(game, pi, config, options, initial, seed)?;
    while driver.current_player().is_some() {
        let ann = driver.decide()?;
        driver.apply(ann)?;
    }
    Ok(driver.finish())
}

/// Turn-by-turn episode execution.
///
/// Each seat runs its own planner with `planner_seed(seed, player)`. A
/// player whose predecessor took an action in `D` of the belief at that turn
/// answers with `bob_respond`; the turn after a response follows the
/// blueprint. Deviation, response and externally chosen turns update
/// beliefs without blueprint likelihoods.
pub struct EpisodeDriver<'a, G: Game, B, S> {
    game: &'a G,
    pi: &'a B,
    cfg: PlannerConfig,
    options: ProtocolOptions,
    seed: u64,
    state: G::State,
    history: History<G>,
    annotations: Vec<TurnAnnotation>,
    tracker: Tracker<'a, G, B, S>,
    shared: Option<(usize, Plan<G, S>)>,
    step_rng: rand_chacha::ChaCha8Rng,
}

impl<'a, G: Game, B: Blueprint<G>, S: Scalar> EpisodeDriver<'a, G, B, S> {
    pub fn new(
        game: &'a G,
        pi: &'a B,
        config: &PlannerConfig,
        options: &ProtocolOptions,
        initial: G::State,
        seed: u64,
    ) -> Result<Self, PlanError> {
        let mut cfg = config.clone();
        if let Some(v) = options.kind.variant() {
            cfg.variant = v;
        }
        cfg.validate()?;
        Ok(Self {
            game,
            pi,
            cfg,
            options: options.clone(),
            seed,
            state: initial.clone(),
            history: History::new(initial.clone()),
            annotations: Vec::new(),
            tracker: Tracker::new(game, pi, initial),
            shared: None,
            step_rng: seed::rng(seed::derive_path(seed, &[seed::stream::CHANCE, 1])),
        })
    }

    pub fn state(&self) -> &G::State {
        &self.state
    }

    pub fn annotations(&self) -> &[TurnAnnotation] {
        &self.annotations
    }

    pub fn current_player(&self) -> Option<PlayerId> {
        self.game.current_player(&self.state)
    }

    fn turn(&self) -> usize {
        self.annotations.len()
    }

    fn blank(&self, player: PlayerId) -> TurnAnnotation {
        TurnAnnotation {
            turn: self.turn(),
            player,
            action: 0,
            label: String::new(),
            deviated: false,
            detected: false,
            responds_to: None,
            assumed_response: None,
            external: false,
        }
    }

    /// Annotation for an action chosen outside the planner (a human seat).
    pub fn external(&self, action: Action) -> Result<TurnAnnotation, PlanError> {
        let p = self.current_player().ok_or(GameError::Terminal)?;
        let mut ann = self.blank(p);
        ann.action = action;
        ann.external = true;
        Ok(ann)
    }

    fn protocol_error(&self, (at, e): (usize, PlanError)) -> PlanError {
        match e {
            PlanError::Belief(_) => PlanError::Protocol {
                turn: at,
                message: e.to_string(),
                transcript: transcript(self.game, &self.annotations),
            },
            other => other,
        }
    }

    /// The controlling planner's choice for the player to move.
    pub fn decide(&mut self) -> Result<TurnAnnotation, PlanError> {
        let game = self.game;
        let pi = self.pi;
        let p = self.current_player().ok_or(GameError::Terminal)?;
        let turn = self.turn();
        if turn >= game.horizon() {
            return Err(GameError::HorizonExceeded(game.horizon()).into());
        }
        let n = game.num_players();
        let info = game.info_state(&self.state, p);
        let pseed = seed::derive(seed::planner_seed(self.seed, p), turn as u64);
        let mut ann = self.blank(p);
        let bp_action = |s: u64| {
            let mut rng = seed::rng(seed::derive(s, seed::stream::BLUEPRINT));
            pi.sample(game, &info, &mut rng)
        };
        let cfg = self.cfg.clone();
        let planner = Planner::new(game, pi, &cfg);
        let plans_now = self.options.plans_at(turn);

        let action = match self.options.kind {
            PlannerKind::Blueprint => bp_action(pseed),
            PlannerKind::Sparta if plans_now => {
                let b = self.tracker.belief(turn, &[p]).map_err(|e| self.protocol_error(e))?;
                let d = planner.sparta_step(&b, &info, pseed)?;
                ann.deviated = d.deviated;
                d.action
            }
            PlannerKind::Sparta => bp_action(pseed),
            PlannerKind::ImprovisedE | PlannerKind::ImprovisedP => {
                let prev = self.annotations.last().cloned();
                let mut chosen = None;
                let after_response = prev.as_ref().is_some_and(|a| a.detected);
                if let Some(prev) = prev {
                    if (prev.player + 1) % n == p && !prev.detected && self.options.plans_at(prev.turn) {
                        let b_prev = self
                            .tracker
                            .belief(prev.turn, &[prev.player, p])
                            .map_err(|e| self.protocol_error(e))?;
                        let sets = planner.deviation_sets(&b_prev, pseed)?;
                        if sets.is_deviation(prev.action) {
                            let plan = match self.shared.take() {
                                Some((t, plan)) if cfg.share_response && t == prev.turn => plan,
                                _ => planner.plan(&b_prev, pseed)?,
                            };
                            let a2 = planner
                                .bob_respond(&plan, prev.action)?
                                .ok_or(PlanError::MissingResponse { action: prev.action })?;
                            ann.detected = true;
                            ann.responds_to = Some(prev.turn);
                            chosen = Some(a2);
                        }
                    }
                }
                match chosen {
                    Some(a) => a,
                    None if !after_response && plans_now => {
                        let group = [p, planner.responder(p)];
                        let b = self.tracker.belief(turn, &group).map_err(|e| self.protocol_error(e))?;
                        let plan = planner.plan(&b, pseed)?;
                        let d = planner.alice_decide(&b, &info, &plan, pseed)?;
                        if d.deviated {
                            ann.deviated = true;
                            ann.assumed_response = plan.response.as_ref().and_then(|f| f.argmax(d.action));
                            if cfg.share_response {
                                self.shared = Some((turn, plan));
                            }
                        }
                        d.action
                    }
                    None => bp_action(pseed),
                }
            }
        };
        ann.action = action;
        Ok(ann)
    }

    /// Plays the annotated action and returns its reward.
    pub fn apply(&mut self, mut ann: TurnAnnotation) -> Result<f64, PlanError> {
        let p = self.current_player().ok_or(GameError::Terminal)?;
        let t = self.game.step(&self.state, ann.action, &mut self.step_rng)?;
        ann.turn = self.turn();
        ann.player = p;
        ann.label = self.game.action_label(p, ann.action);
        self.history.turns.push(Turn {
            player: p,
            action: ann.action,
            reward: t.reward,
        });
        self.tracker.push(ann.action, ann.informative(), t.next.clone());
        self.annotations.push(ann);
        self.state = t.next;
        Ok(t.reward)
    }

    pub fn finish(self) -> EpisodeOutcome<G> {
        let total_return = self.history.total_return();
        EpisodeOutcome {
            seed: self.seed,
            history: self.history,
            annotations: self.annotations,
            total_return,
        }
    }
}

/// Expected episode return over the initial deal: the protocol is run once
/// from every chance outcome (with the same `seed`) and the returns are
/// averaged with the outcome probabilities. Exact for games whose only
/// chance event is the deal and planners that are deterministic per world.
pub fn exact_episode_value<G: Game, B: Blueprint<G>, S: Scalar>(
    game: &G,
    pi: &B,
    config: &PlannerConfig,
    options: &ProtocolOptions,
    seed: u64,
) -> Result<S, PlanError> {
    let mut value = S::zero();
    for (world, p) in game.chance_outcomes::<S>() {
        let out = run_episode_from::<G, B, S>(game, pi, config, options, world, seed)?;
        value = value + p * S::from_f64(out.total_return);
    }
    Ok(value)
}
