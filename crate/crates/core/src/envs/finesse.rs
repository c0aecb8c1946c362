//! The vanilla finesse in mini-Hanabi.
//!
//! Player 1 hints player 3's card `Y`, which is one rank above the newest,
//! unhinted card `X` of player 2. Read literally the hint says "play `Y`"
//! although `Y` is not playable yet; it only works if player 2 blind-plays
//! `X` first, after which player 3's ordinary convention plays `Y`.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blueprint::Blueprint;
use crate::game::{self, Action, Game, GameError, History, PlayerId, Turn};
use crate::planner::TurnAnnotation;
use crate::seed;

use super::hanabi::{hint_focus, Card, HanabiState, Hint, MiniHanabi, Move};

/// Turns before this index are never mined.
pub const FIRST_MINED_TURN: usize = 2;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FinesseError {
    #[error("state at turn {turn} does not match the finesse pattern")]
    NotFinesseAble { turn: usize },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// The concrete finesse available in a state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinessePattern {
    pub hinter: PlayerId,
    pub blind_player: PlayerId,
    pub hinted: PlayerId,
    /// The misleading hint to player 3.
    pub hint: Action,
    /// Player 2's newest slot, to be blind-played.
    pub blind_slot: usize,
    /// Player 3's slot marked by the hint.
    pub designated_slot: usize,
    pub blind_card: Card,
    pub designated_card: Card,
}

/// Matches the finesse pattern for the player to move in `state`.
pub fn finesse_pattern(game: &MiniHanabi, state: &HanabiState) -> Option<FinessePattern> {
    let n = game.num_players();
    if n < 3 || state.over || state.hints == 0 || (state.turn as usize) < FIRST_MINED_TURN {
        return None;
    }
    let p1 = state.current as usize;
    let p2 = (p1 + 1) % n;
    let p3 = (p1 + 2) % n;
    let (blind_slot, x) = state.hands[p2].iter().enumerate().max_by_key(|(_, s)| s.drawn)?;
    if x.flagged || x.color_hinted || x.rank_hinted || !game.is_playable(&state.fireworks, x.card) {
        return None;
    }
    let cards: Vec<(Card, bool)> = state.hands[p3].iter().map(|s| (s.card, s.flagged)).collect();
    for (i, y) in state.hands[p3].iter().enumerate() {
        if y.flagged || y.color_hinted || y.rank_hinted {
            continue;
        }
        if y.card.color != x.card.color || y.card.rank != x.card.rank + 1 {
            continue;
        }
        for hint in [Hint::Color(y.card.color), Hint::Rank(y.card.rank)] {
            if hint_focus(&cards, hint).1 == Some(i) {
                return Some(FinessePattern {
                    hinter: p1,
                    blind_player: p2,
                    hinted: p3,
                    hint: game.encode(Move::Hint { offset: 2, hint }),
                    blind_slot,
                    designated_slot: i,
                    blind_card: x.card,
                    designated_card: y.card,
                });
            }
        }
    }
    None
}

/// A finesse-able state reached by blueprint self-play.
#[derive(Debug, Clone, PartialEq)]
pub struct FinesseSituation {
    pub seed: u64,
    pub turn: usize,
    pub state: HanabiState,
    pub pattern: FinessePattern,
}

/// Serializable form of a [`FinesseSituation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SituationRecord {
    pub seed: u64,
    pub turn: usize,
    /// Full-information key of the state.
    pub deal: String,
    pub pattern: FinessePattern,
}

impl FinesseSituation {
    pub fn record(&self, game: &MiniHanabi) -> SituationRecord {
        SituationRecord {
            seed: self.seed,
            turn: self.turn,
            deal: game.view_key(&game.view(&self.state, &[])),
            pattern: self.pattern.clone(),
        }
    }
}

/// The dealt world of episode `seed`, as used by the episode runner.
pub fn dealt(game: &MiniHanabi, seed: u64) -> HanabiState {
    game::chance_init(game, seed::derive(seed, seed::stream::CHANCE))
}

/// Every finesse-able state visited by blueprint self-play, in seed order.
pub fn mine_finesse_able<B: Blueprint<MiniHanabi>>(game: &MiniHanabi, pi: &B, seeds: Range<u64>) -> Vec<FinesseSituation> {
    let mut out = Vec::new();
    if game.num_players() < 3 {
        return out;
    }
    for s in seeds {
        let mut state = dealt(game, s);
        let mut rng = seed::rng(0);
        for turn in 0..game.horizon() {
            let Some(p) = game.current_player(&state) else {
                break;
            };
            if let Some(pattern) = finesse_pattern(game, &state) {
                out.push(FinesseSituation {
                    seed: s,
                    turn,
                    state: state.clone(),
                    pattern,
                });
            }
            let a = pi.sample(game, &game.info_state(&state, p), &mut rng);
            state = game.step(&state, a, &mut rng).expect("blueprint plays legal actions").next;
        }
    }
    out
}

/// Forces the hint and the blind play, then asks whether the blueprint's
/// player 3 plays the designated card.
pub fn check_finesse_complete<B: Blueprint<MiniHanabi>>(game: &MiniHanabi, state: &HanabiState, pi: &B) -> Result<bool, FinesseError> {
    let pattern = finesse_pattern(game, state).ok_or(FinesseError::NotFinesseAble {
        turn: state.turn as usize,
    })?;
    let mut rng = seed::rng(0);
    let after_hint = game.step(state, pattern.hint, &mut rng)?.next;
    let after_blind = game.step(&after_hint, game.encode(Move::Play(pattern.blind_slot)), &mut rng)?.next;
    if game.current_player(&after_blind) != Some(pattern.hinted) {
        return Ok(false);
    }
    let info = game.info_state(&after_blind, pattern.hinted);
    Ok(pi.distribution::<f64>(game, &info) == vec![(game.encode(Move::Play(pattern.designated_slot)), 1.0)])
}

/// The first finesse-complete situation of each seed that has one.
pub fn mine_finesse_complete<B: Blueprint<MiniHanabi>>(game: &MiniHanabi, pi: &B, seeds: Range<u64>) -> Vec<FinesseSituation> {
    let mut out: Vec<FinesseSituation> = Vec::new();
    for s in mine_finesse_able(game, pi, seeds) {
        if out.last().is_some_and(|last| last.seed == s.seed) {
            continue;
        }
        if check_finesse_complete(game, &s.state, pi) == Ok(true) {
            out.push(s);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinesseRecord {
    pub hint_turn: usize,
    pub hinter: PlayerId,
    pub hinted: PlayerId,
    pub blind_player: PlayerId,
    pub blind_play_turn: Option<usize>,
    pub designated_play_turn: Option<usize>,
    pub designated_card: Card,
    pub blind_card: Option<Card>,
    pub completed: bool,
}

/// Finds deviation hints that follow the finesse pattern and reports how
/// far each got.
pub fn classify_finesse(
    game: &MiniHanabi,
    history: &History<MiniHanabi>,
    annotations: &[TurnAnnotation],
) -> Result<Vec<FinesseRecord>, GameError> {
    let n = game.num_players();
    if n < 3 || !annotations.iter().any(|a| a.deviated) {
        return Ok(Vec::new());
    }
    let states = history.replay(game)?;
    let turns: &[Turn] = &history.turns;
    let mut out = Vec::new();
    for ann in annotations.iter().filter(|a| a.deviated) {
        let k = ann.turn;
        let Some(Move::Hint { offset: 2, hint }) = game.decode(turns[k].action) else {
            continue;
        };
        let state = &states[k];
        let hinter = turns[k].player;
        let blind_player = (hinter + 1) % n;
        let hinted = (hinter + 2) % n;
        let cards: Vec<(Card, bool)> = state.hands[hinted].iter().map(|s| (s.card, s.flagged)).collect();
        let Some(focus) = hint_focus(&cards, hint).1 else {
            continue;
        };
        let designated_card = cards[focus].0;
        if game.is_playable(&state.fireworks, designated_card) {
            continue;
        }
        let mut record = FinesseRecord {
            hint_turn: k,
            hinter,
            hinted,
            blind_player,
            blind_play_turn: None,
            designated_play_turn: None,
            designated_card,
            blind_card: None,
            completed: false,
        };
        if let (Some(t1), Some(s1)) = (turns.get(k + 1), states.get(k + 1)) {
            let newest = s1.hands[blind_player].iter().enumerate().max_by_key(|(_, s)| s.drawn);
            if let Some((slot, x)) = newest {
                let unhinted = !(x.flagged || x.color_hinted || x.rank_hinted);
                if t1.player == blind_player && unhinted && game.decode(t1.action) == Some(Move::Play(slot)) {
                    record.blind_play_turn = Some(k + 1);
                    record.blind_card = Some(x.card);
                }
            }
        }
        if record.blind_play_turn.is_some() {
            if let Some(t2) = turns.get(k + 2) {
                if t2.player == hinted && game.decode(t2.action) == Some(Move::Play(focus)) && t2.reward > 0.0 {
                    record.designated_play_turn = Some(k + 2);
                    record.completed = true;
                }
            }
        }
        out.push(record);
    }
    Ok(out)
}

/// Blueprint self-play from `situation`'s seed with the finesse hint and
/// blind play forced, annotated as a deviation and its response.
pub fn forced_finesse<B: Blueprint<MiniHanabi>>(
    game: &MiniHanabi,
    pi: &B,
    situation: &FinesseSituation,
) -> Result<(History<MiniHanabi>, Vec<TurnAnnotation>), GameError> {
    let mut state = dealt(game, situation.seed);
    let mut history = History::new(state.clone());
    let mut annotations = Vec::new();
    let mut rng = seed::rng(0);
    let hint_turn = situation.turn;
    for turn in 0..game.horizon() {
        let Some(p) = game.current_player(&state) else {
            break;
        };
        let action = if turn == hint_turn {
            situation.pattern.hint
        } else if turn == hint_turn + 1 {
            game.encode(Move::Play(situation.pattern.blind_slot))
        } else {
            pi.sample(game, &game.info_state(&state, p), &mut rng)
        };
        let t = game.step(&state, action, &mut rng)?;
        history.turns.push(Turn {
            player: p,
            action,
            reward: t.reward,
        });
        annotations.push(TurnAnnotation {
            turn,
            player: p,
            action,
            label: game.action_label(p, action),
            deviated: turn == hint_turn,
            detected: turn == hint_turn + 1,
            responds_to: (turn == hint_turn + 1).then_some(hint_turn),
            assumed_response: (turn == hint_turn).then(|| game.encode(Move::Play(situation.pattern.blind_slot))),
            external: false,
        });
        state = t.next;
    }
    Ok((history, annotations))
}
