//! Scaled-down Hanabi.
//!
//! Players hold their cards facing outwards: everyone sees every hand but
//! their own. On a turn a player plays a card (scoring if it extends its
//! colour's firework, costing a life otherwise), discards a card (regaining a
//! hint token, capped at the starting amount), or spends a token to point
//! out all cards of one colour or rank in a partner's hand. Losing the last
//! life ends the game with score 0.
//!
//! Hands are ordered oldest to newest; the last slot is the newest draw.
//! Each hint also marks one touched card as "play me": the lowest-index
//! touched card not already marked. Knowledge is positive only (which cards
//! were touched by colour or rank hints).

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::blueprint::Blueprint;
use crate::game::{Action, Game, GameError, PlayerId, Transition};
use crate::scalar::Scalar;

const COLOR_NAMES: &[u8] = b"RGBYWPOC";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HanabiParams {
    pub colors: usize,
    pub ranks: usize,
    /// Copies of each rank per colour, lowest rank first.
    pub duplicates: Vec<usize>,
    pub hand_size: usize,
    pub players: usize,
    pub hint_tokens: usize,
    pub life_tokens: usize,
    /// Turns played after the last card is drawn; defaults to one per player.
    pub grace_turns: Option<usize>,
}

impl Default for HanabiParams {
    fn default() -> Self {
        Self {
            colors: 3,
            ranks: 3,
            duplicates: vec![2, 2, 1],
            hand_size: 2,
            players: 3,
            hint_tokens: 4,
            life_tokens: 3,
            grace_turns: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Card {
    pub color: u8,
    /// Zero-based; shown one-based.
    pub rank: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub card: Card,
    /// Global draw counter at the time the card entered the hand.
    pub drawn: u16,
    pub color_hinted: bool,
    pub rank_hinted: bool,
    pub flagged: bool,
}

/// Undrawn cards: a fixed order in dealt games, a multiset in beliefs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Deck {
    /// Next card last.
    Ordered(Vec<Card>),
    /// Count per card type.
    Counts(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HanabiState {
    pub hands: Vec<Vec<Slot>>,
    pub deck: Deck,
    pub fireworks: Vec<u8>,
    /// Count per card type, including misplayed cards.
    pub discards: Vec<u8>,
    pub hints: u8,
    pub lives: u8,
    pub score: u8,
    pub turn: u16,
    pub current: u8,
    pub draws: u16,
    pub final_turns: Option<u8>,
    pub over: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotView {
    /// Present when every observer can see the card.
    pub card: Option<Card>,
    pub color: Option<u8>,
    pub rank: Option<u8>,
    pub drawn: u16,
    pub color_hinted: bool,
    pub rank_hinted: bool,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HanabiView {
    pub observers: u32,
    pub owner: Option<u8>,
    pub hands: Vec<Vec<SlotView>>,
    pub deck_len: u8,
    pub fireworks: Vec<u8>,
    pub discards: Vec<u8>,
    pub hints: u8,
    pub lives: u8,
    pub score: u8,
    pub turn: u16,
    pub current: u8,
    pub draws: u16,
    pub final_turns: Option<u8>,
    pub over: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hint {
    Color(u8),
    Rank(u8),
}

impl Hint {
    pub fn touches(&self, card: Card) -> bool {
        match *self {
            Hint::Color(c) => card.color == c,
            Hint::Rank(r) => card.rank == r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Play(usize),
    Discard(usize),
    /// `offset` seats after the hinter, `1..players`.
    Hint { offset: usize, hint: Hint },
}

/// Touched slots and the one that receives the play mark.
pub fn hint_focus(hand: &[(Card, bool)], hint: Hint) -> (Vec<usize>, Option<usize>) {
    let touched: Vec<usize> = (0..hand.len()).filter(|&i| hint.touches(hand[i].0)).collect();
    let focus = touched.iter().copied().find(|&i| !hand[i].1);
    (touched, focus)
}

#[derive(Debug, Clone)]
pub struct MiniHanabi {
    params: HanabiParams,
    grace: usize,
    total_cards: usize,
}

impl MiniHanabi {
    pub fn new(params: HanabiParams) -> Result<Self, GameError> {
        let bad = |m: String| Err(GameError::InvalidParams(m));
        if params.colors == 0 || params.colors > COLOR_NAMES.len() {
            return bad(format!("colors must be in 1..={}", COLOR_NAMES.len()));
        }
        if params.ranks == 0 || params.ranks > 9 {
            return bad("ranks must be in 1..=9".into());
        }
        if params.duplicates.len() != params.ranks || params.duplicates.contains(&0) {
            return bad("duplicates needs one positive count per rank".into());
        }
        if params.players < 2 || params.players > 8 {
            return bad("players must be in 2..=8".into());
        }
        if params.hand_size == 0 {
            return bad("hand size must be positive".into());
        }
        if params.life_tokens == 0 || params.life_tokens > 255 || params.hint_tokens > 255 {
            return bad("token counts must be in range".into());
        }
        let total_cards = params.colors * params.duplicates.iter().sum::<usize>();
        if total_cards < params.players * params.hand_size {
            return bad(format!(
                "deck of {total_cards} cards cannot deal {} hands of {}",
                params.players, params.hand_size
            ));
        }
        if total_cards > 255 {
            return bad("deck too large".into());
        }
        let grace = params.grace_turns.unwrap_or(params.players);
        if grace == 0 || grace > params.players {
            return bad("grace turns must be in 1..=players".into());
        }
        Ok(Self {
            params,
            grace,
            total_cards,
        })
    }

    pub fn params(&self) -> &HanabiParams {
        &self.params
    }

    pub fn max_score(&self) -> usize {
        self.params.colors * self.params.ranks
    }

    fn types(&self) -> usize {
        self.params.colors * self.params.ranks
    }

    fn type_of(&self, c: Card) -> usize {
        c.color as usize * self.params.ranks + c.rank as usize
    }

    fn card_of(&self, t: usize) -> Card {
        Card {
            color: (t / self.params.ranks) as u8,
            rank: (t % self.params.ranks) as u8,
        }
    }

    fn full_counts(&self) -> Vec<u8> {
        (0..self.types())
            .map(|t| self.params.duplicates[t % self.params.ranks] as u8)
            .collect()
    }

    pub fn card_label(&self, c: Card) -> String {
        format!("{}{}", COLOR_NAMES[c.color as usize] as char, c.rank + 1)
    }

    pub fn encode(&self, m: Move) -> Action {
        let h = self.params.hand_size;
        let k = self.params.colors + self.params.ranks;
        match m {
            Move::Play(i) => i,
            Move::Discard(i) => h + i,
            Move::Hint { offset, hint } => {
                let base = 2 * h + (offset - 1) * k;
                match hint {
                    Hint::Color(c) => base + c as usize,
                    Hint::Rank(r) => base + self.params.colors + r as usize,
                }
            }
        }
    }

    pub fn decode(&self, a: Action) -> Option<Move> {
        let h = self.params.hand_size;
        let k = self.params.colors + self.params.ranks;
        if a < h {
            return Some(Move::Play(a));
        }
        if a < 2 * h {
            return Some(Move::Discard(a - h));
        }
        let rest = a - 2 * h;
        let offset = rest / k + 1;
        if offset >= self.params.players {
            return None;
        }
        let j = rest % k;
        let hint = if j < self.params.colors {
            Hint::Color(j as u8)
        } else {
            Hint::Rank((j - self.params.colors) as u8)
        };
        Some(Move::Hint { offset, hint })
    }

    /// Every hint action to the player `offset` seats ahead.
    pub fn hint_actions(&self, offset: usize) -> Vec<Action> {
        (0..self.num_actions(0))
            .filter(|&a| matches!(self.decode(a), Some(Move::Hint { offset: o, .. }) if o == offset))
            .collect()
    }

    pub fn play_actions(&self) -> Vec<Action> {
        (0..self.params.hand_size).map(|i| self.encode(Move::Play(i))).collect()
    }

    pub fn is_playable(&self, fireworks: &[u8], c: Card) -> bool {
        fireworks[c.color as usize] == c.rank
    }

    pub fn deck_len(&self, deck: &Deck) -> usize {
        match deck {
            Deck::Ordered(v) => v.len(),
            Deck::Counts(c) => c.iter().map(|&x| x as usize).sum(),
        }
    }

    /// A dealt game with hands taken from the back of `deck`.
    pub fn from_deck(&self, mut deck: Vec<Card>) -> Result<HanabiState, GameError> {
        let mut check = deck.iter().map(|&c| self.type_of(c)).collect::<Vec<_>>();
        check.sort_unstable();
        let mut expect: Vec<usize> = Vec::new();
        for (t, &n) in self.full_counts().iter().enumerate() {
            expect.extend(std::iter::repeat_n(t, n as usize));
        }
        if check != expect {
            return Err(GameError::InvalidParams("deck is not a permutation of the card set".into()));
        }
        let mut draws = 0u16;
        let mut hands = Vec::new();
        for _ in 0..self.params.players {
            let mut hand = Vec::new();
            for _ in 0..self.params.hand_size {
                let card = deck.pop().expect("deck size checked");
                hand.push(Slot {
                    card,
                    drawn: draws,
                    color_hinted: false,
                    rank_hinted: false,
                    flagged: false,
                });
                draws += 1;
            }
            hands.push(hand);
        }
        let mut state = self.empty_state(hands, Deck::Ordered(deck));
        state.draws = draws;
        if self.deck_len(&state.deck) == 0 {
            state.final_turns = Some(self.grace as u8);
        }
        Ok(state)
    }

    fn empty_state(&self, hands: Vec<Vec<Slot>>, deck: Deck) -> HanabiState {
        HanabiState {
            hands,
            deck,
            fireworks: vec![0; self.params.colors],
            discards: vec![0; self.types()],
            hints: self.params.hint_tokens as u8,
            lives: self.params.life_tokens as u8,
            score: 0,
            turn: 0,
            current: 0,
            draws: 0,
            final_turns: None,
            over: false,
        }
    }

    /// Everything except the draw: returns the successor before drawing,
    /// whether a card must be drawn, and the reward.
    fn act(&self, state: &HanabiState, action: Action) -> Result<(HanabiState, bool, f64), GameError> {
        if state.over {
            return Err(GameError::Terminal);
        }
        let p = state.current as usize;
        let illegal = |reason: &str| GameError::IllegalAction {
            player: p,
            action,
            reason: reason.to_string(),
        };
        let m = self.decode(action).ok_or_else(|| illegal("no such action"))?;
        let mut s = state.clone();
        let mut reward = 0.0;
        let mut draw = false;
        match m {
            Move::Play(i) | Move::Discard(i) if i >= s.hands[p].len() => return Err(illegal("empty slot")),
            Move::Play(i) => {
                let card = s.hands[p].remove(i).card;
                draw = true;
                if self.is_playable(&s.fireworks, card) {
                    s.fireworks[card.color as usize] += 1;
                    s.score += 1;
                    reward = 1.0;
                } else {
                    let t = self.type_of(card);
                    s.discards[t] += 1;
                    s.lives -= 1;
                    if s.lives == 0 {
                        reward = -(s.score as f64);
                        s.score = 0;
                        s.over = true;
                    }
                }
            }
            Move::Discard(i) => {
                let card = s.hands[p].remove(i).card;
                let t = self.type_of(card);
                s.discards[t] += 1;
                s.hints = (s.hints + 1).min(self.params.hint_tokens as u8);
                draw = true;
            }
            Move::Hint { offset, hint } => {
                if s.hints == 0 {
                    return Err(illegal("no hint tokens left"));
                }
                let target = (p + offset) % self.params.players;
                let cards: Vec<(Card, bool)> = s.hands[target].iter().map(|x| (x.card, x.flagged)).collect();
                let (touched, focus) = hint_focus(&cards, hint);
                if touched.is_empty() {
                    return Err(illegal("hint touches no card"));
                }
                for &i in &touched {
                    match hint {
                        Hint::Color(_) => s.hands[target][i].color_hinted = true,
                        Hint::Rank(_) => s.hands[target][i].rank_hinted = true,
                    }
                }
                if let Some(f) = focus {
                    s.hands[target][f].flagged = true;
                }
                s.hints -= 1;
            }
        }
        if s.over {
            s.turn += 1;
            return Ok((s, false, reward));
        }
        if self.deck_len(&s.deck) == 0 {
            draw = false;
        }
        Ok((s, draw, reward))
    }

    fn put_drawn(&self, s: &mut HanabiState, card: Card) {
        let p = s.current as usize;
        s.hands[p].push(Slot {
            card,
            drawn: s.draws,
            color_hinted: false,
            rank_hinted: false,
            flagged: false,
        });
        s.draws += 1;
    }

    /// Turn bookkeeping after the draw (if any).
    fn finish(&self, s: &mut HanabiState, drew: bool) {
        if s.over {
            return;
        }
        s.turn += 1;
        let countdown = s.final_turns.is_some();
        if let Some(left) = s.final_turns.as_mut() {
            if countdown && !drew {
                *left -= 1;
            }
        }
        if drew && self.deck_len(&s.deck) == 0 && s.final_turns.is_none() {
            s.final_turns = Some(self.grace as u8);
        }
        if s.score as usize == self.max_score() || s.final_turns == Some(0) {
            s.over = true;
        }
        s.current = ((s.current as usize + 1) % self.params.players) as u8;
    }

    fn slot_view(&self, slot: &Slot, visible: bool) -> SlotView {
        SlotView {
            card: visible.then_some(slot.card),
            color: (visible || slot.color_hinted).then_some(slot.card.color),
            rank: (visible || slot.rank_hinted).then_some(slot.card.rank),
            drawn: slot.drawn,
            color_hinted: slot.color_hinted,
            rank_hinted: slot.rank_hinted,
            flagged: slot.flagged,
        }
    }

    /// Worlds agreeing with `view` on every visible card, with hidden slots
    /// filled from the unseen cards. Weights are sequential draw
    /// probabilities.
    fn enumerate_hidden<S: Scalar>(&self, view: &HanabiView) -> Vec<(HanabiState, S)> {
        let mut pool = self.full_counts();
        let take = |pool: &mut Vec<u8>, c: Card| -> bool {
            let t = self.type_of(c);
            if pool[t] == 0 {
                return false;
            }
            pool[t] -= 1;
            true
        };
        for (color, &n) in view.fireworks.iter().enumerate() {
            for rank in 0..n {
                if !take(&mut pool, Card { color: color as u8, rank }) {
                    return Vec::new();
                }
            }
        }
        for (t, &n) in view.discards.iter().enumerate() {
            for _ in 0..n {
                if !take(&mut pool, self.card_of(t)) {
                    return Vec::new();
                }
            }
        }
        let mut hidden = Vec::new();
        for (q, hand) in view.hands.iter().enumerate() {
            for (i, sv) in hand.iter().enumerate() {
                match sv.card {
                    Some(c) => {
                        if !take(&mut pool, c) {
                            return Vec::new();
                        }
                    }
                    None => hidden.push((q, i)),
                }
            }
        }
        let template: Vec<Vec<Slot>> = view
            .hands
            .iter()
            .map(|hand| {
                hand.iter()
                    .map(|sv| Slot {
                        card: sv.card.unwrap_or(Card { color: 0, rank: 0 }),
                        drawn: sv.drawn,
                        color_hinted: sv.color_hinted,
                        rank_hinted: sv.rank_hinted,
                        flagged: sv.flagged,
                    })
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        let mut hands = template;
        self.fill(view, &hidden, 0, &mut hands, &mut pool, S::one(), &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn fill<S: Scalar>(
        &self,
        view: &HanabiView,
        hidden: &[(usize, usize)],
        k: usize,
        hands: &mut Vec<Vec<Slot>>,
        pool: &mut Vec<u8>,
        weight: S,
        out: &mut Vec<(HanabiState, S)>,
    ) {
        if k == hidden.len() {
            if pool.iter().map(|&x| x as usize).sum::<usize>() != view.deck_len as usize {
                return;
            }
            out.push((
                HanabiState {
                    hands: hands.clone(),
                    deck: Deck::Counts(pool.clone()),
                    fireworks: view.fireworks.clone(),
                    discards: view.discards.clone(),
                    hints: view.hints,
                    lives: view.lives,
                    score: view.score,
                    turn: view.turn,
                    current: view.current,
                    draws: view.draws,
                    final_turns: view.final_turns,
                    over: view.over,
                },
                weight,
            ));
            return;
        }
        let (q, i) = hidden[k];
        let sv = &view.hands[q][i];
        let total: i64 = pool.iter().map(|&x| x as i64).sum();
        for t in 0..pool.len() {
            if pool[t] == 0 {
                continue;
            }
            let card = self.card_of(t);
            if sv.color.is_some_and(|c| c != card.color) || sv.rank.is_some_and(|r| r != card.rank) {
                continue;
            }
            let w = weight.clone() * S::from_ratio(pool[t] as i64, total);
            pool[t] -= 1;
            hands[q][i].card = card;
            self.fill(view, hidden, k + 1, hands, pool, w, out);
            pool[t] += 1;
        }
    }

    fn group_mask(group: &[PlayerId]) -> u32 {
        group.iter().fold(0u32, |m, &p| m | (1 << p))
    }

    fn hand_tokens(&self, hand: &[SlotView]) -> String {
        hand.iter()
            .map(|s| {
                let mut t = match s.card {
                    Some(c) => self.card_label(c),
                    None => format!(
                        "?{}{}",
                        s.color.map(|c| COLOR_NAMES[c as usize] as char).unwrap_or('?'),
                        s.rank.map(|r| char::from(b'1' + r)).unwrap_or('?')
                    ),
                };
                if s.color_hinted {
                    t.push('c');
                }
                if s.rank_hinted {
                    t.push('r');
                }
                if s.flagged {
                    t.push('*');
                }
                t
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl Default for MiniHanabi {
    fn default() -> Self {
        Self::new(HanabiParams::default()).expect("default parameters are valid")
    }
}

impl Game for MiniHanabi {
    type State = HanabiState;
    type View = HanabiView;

    fn name(&self) -> &str {
        "mini-hanabi"
    }

    fn num_players(&self) -> usize {
        self.params.players
    }

    fn num_actions(&self, _player: PlayerId) -> usize {
        2 * self.params.hand_size + (self.params.players - 1) * (self.params.colors + self.params.ranks)
    }

    fn action_label(&self, _player: PlayerId, action: Action) -> String {
        match self.decode(action) {
            Some(Move::Play(i)) => format!("play {i}"),
            Some(Move::Discard(i)) => format!("discard {i}"),
            Some(Move::Hint { offset, hint }) => match hint {
                Hint::Color(c) => format!("hint +{offset} {}", COLOR_NAMES[c as usize] as char),
                Hint::Rank(r) => format!("hint +{offset} {}", r + 1),
            },
            None => format!("#{action}"),
        }
    }

    fn horizon(&self) -> usize {
        2 * self.total_cards + self.params.hint_tokens + self.params.players
    }

    fn return_bounds(&self) -> (f64, f64) {
        (0.0, self.max_score() as f64)
    }

    fn chance_outcomes<S: Scalar>(&self) -> Vec<(HanabiState, S)> {
        let mut s = self.empty_state(Vec::new(), Deck::Counts(self.full_counts()));
        let mut draws = 0;
        for _ in 0..self.params.players {
            let hand = (0..self.params.hand_size)
                .map(|_| {
                    draws += 1;
                    Slot {
                        card: Card { color: 0, rank: 0 },
                        drawn: draws - 1,
                        color_hinted: false,
                        rank_hinted: false,
                        flagged: false,
                    }
                })
                .collect();
            s.hands.push(hand);
        }
        s.draws = draws;
        let mut hidden = self.view(&s, &[]);
        for hand in hidden.hands.iter_mut() {
            for slot in hand.iter_mut() {
                slot.card = None;
                slot.color = None;
                slot.rank = None;
            }
        }
        hidden.deck_len = (self.total_cards - self.params.players * self.params.hand_size) as u8;
        if hidden.deck_len == 0 {
            hidden.final_turns = Some(self.grace as u8);
        }
        self.enumerate_hidden(&hidden)
    }

    fn chance_outcomes_matching<S: Scalar>(&self, _group: &[PlayerId], view: &HanabiView) -> Vec<(HanabiState, S)> {
        self.enumerate_hidden(view)
    }

    fn deal(&self, rng: &mut dyn RngCore) -> HanabiState {
        let mut deck: Vec<Card> = Vec::with_capacity(self.total_cards);
        for (t, &n) in self.full_counts().iter().enumerate() {
            deck.extend(std::iter::repeat_n(self.card_of(t), n as usize));
        }
        deck.shuffle(rng);
        self.from_deck(deck).expect("full deck")
    }

    fn current_player(&self, state: &HanabiState) -> Option<PlayerId> {
        (!state.over).then_some(state.current as usize)
    }

    fn legal_actions(&self, info: &HanabiView) -> Vec<Action> {
        if info.over || info.owner != Some(info.current) {
            return Vec::new();
        }
        let p = info.current as usize;
        let n = self.params.players;
        let len = info.hands[p].len();
        let mut out: Vec<Action> = (0..len).map(|i| self.encode(Move::Play(i))).collect();
        out.extend((0..len).map(|i| self.encode(Move::Discard(i))));
        if info.hints > 0 {
            for offset in 1..n {
                let hand = &info.hands[(p + offset) % n];
                let hints = (0..self.params.colors)
                    .map(|c| Hint::Color(c as u8))
                    .chain((0..self.params.ranks).map(|r| Hint::Rank(r as u8)));
                for hint in hints {
                    if hand.iter().any(|s| s.card.is_some_and(|c| hint.touches(c))) {
                        out.push(self.encode(Move::Hint { offset, hint }));
                    }
                }
            }
        }
        out
    }

    fn view(&self, state: &HanabiState, group: &[PlayerId]) -> HanabiView {
        let mask = Self::group_mask(group);
        HanabiView {
            observers: mask,
            owner: match group {
                [p] => Some(*p as u8),
                _ => None,
            },
            hands: state
                .hands
                .iter()
                .enumerate()
                .map(|(q, hand)| {
                    let visible = mask & (1 << q) == 0;
                    hand.iter().map(|s| self.slot_view(s, visible)).collect()
                })
                .collect(),
            deck_len: self.deck_len(&state.deck) as u8,
            fireworks: state.fireworks.clone(),
            discards: state.discards.clone(),
            hints: state.hints,
            lives: state.lives,
            score: state.score,
            turn: state.turn,
            current: state.current,
            draws: state.draws,
            final_turns: state.final_turns,
            over: state.over,
        }
    }

    fn step(&self, state: &HanabiState, action: Action, rng: &mut dyn RngCore) -> Result<Transition<HanabiState>, GameError> {
        let (mut s, draw, reward) = self.act(state, action)?;
        if draw {
            let card = match &mut s.deck {
                Deck::Ordered(v) => v.pop().expect("non-empty deck"),
                Deck::Counts(counts) => {
                    let total: u32 = counts.iter().map(|&x| x as u32).sum();
                    let mut u = rng.random_range(0..total);
                    let mut t = 0;
                    while u >= counts[t] as u32 {
                        u -= counts[t] as u32;
                        t += 1;
                    }
                    counts[t] -= 1;
                    self.card_of(t)
                }
            };
            self.put_drawn(&mut s, card);
        }
        self.finish(&mut s, draw);
        Ok(Transition { next: s, reward })
    }

    fn outcomes<S: Scalar>(&self, state: &HanabiState, action: Action) -> Result<Vec<(Transition<HanabiState>, S)>, GameError> {
        let (s, draw, reward) = self.act(state, action)?;
        if !draw {
            let mut next = s;
            self.finish(&mut next, false);
            return Ok(vec![(Transition { next, reward }, S::one())]);
        }
        match &s.deck {
            Deck::Ordered(v) => {
                let mut next = s.clone();
                let card = *v.last().expect("non-empty deck");
                if let Deck::Ordered(v) = &mut next.deck {
                    v.pop();
                }
                self.put_drawn(&mut next, card);
                self.finish(&mut next, true);
                Ok(vec![(Transition { next, reward }, S::one())])
            }
            Deck::Counts(counts) => {
                let total: i64 = counts.iter().map(|&x| x as i64).sum();
                let mut out = Vec::new();
                for t in 0..counts.len() {
                    if counts[t] == 0 {
                        continue;
                    }
                    let mut next = s.clone();
                    if let Deck::Counts(c) = &mut next.deck {
                        c[t] -= 1;
                    }
                    self.put_drawn(&mut next, self.card_of(t));
                    self.finish(&mut next, true);
                    out.push((Transition { next, reward }, S::from_ratio(counts[t] as i64, total)));
                }
                Ok(out)
            }
        }
    }

    fn join_views(&self, views: &[(PlayerId, &HanabiView)]) -> Result<HanabiState, GameError> {
        let (_, base) = views.first().ok_or_else(|| GameError::InconsistentViews("no views".into()))?;
        let mut hands: Vec<Vec<SlotView>> = base.hands.clone();
        for (_, v) in views {
            if v.hands.len() != base.hands.len()
                || (v.turn, v.current, v.hints, v.lives, v.deck_len) != (base.turn, base.current, base.hints, base.lives, base.deck_len)
                || v.fireworks != base.fireworks
                || v.discards != base.discards
            {
                return Err(GameError::InconsistentViews("public state differs".into()));
            }
            for (q, hand) in v.hands.iter().enumerate() {
                if hand.len() != hands[q].len() {
                    return Err(GameError::InconsistentViews("hand sizes differ".into()));
                }
                for (i, sv) in hand.iter().enumerate() {
                    match (sv.card, hands[q][i].card) {
                        (Some(a), Some(b)) if a != b => {
                            return Err(GameError::InconsistentViews(format!("slot {i} of player {q} differs")))
                        }
                        (Some(_), None) => hands[q][i] = sv.clone(),
                        _ => {}
                    }
                }
            }
        }
        let mut joined: HanabiView = (*base).clone();
        for (q, hand) in hands.iter().enumerate() {
            if hand.iter().any(|s| s.card.is_none()) {
                return Err(GameError::InconsistentViews(format!("no view shows the hand of player {q}")));
            }
        }
        joined.hands = hands;
        let mut worlds = self.enumerate_hidden::<f64>(&joined);
        match worlds.len() {
            1 => Ok(worlds.pop().expect("one world").0),
            _ => Err(GameError::InconsistentViews("cards exceed the deck composition".into())),
        }
    }

    fn view_key(&self, v: &HanabiView) -> String {
        let mut out = String::new();
        let owner = v.owner.map(|o| o.to_string()).unwrap_or_else(|| format!("m{:x}", v.observers));
        let _ = write!(
            out,
            "o{owner}|t{}|p{}|h{}l{}|d{}|f{}|x{}",
            v.turn,
            v.current,
            v.hints,
            v.lives,
            v.deck_len,
            v.fireworks.iter().map(|f| f.to_string()).collect::<String>(),
            v.discards.iter().map(|f| f.to_string()).collect::<String>()
        );
        for hand in &v.hands {
            let _ = write!(out, "|{}", self.hand_tokens(hand));
        }
        if v.over {
            out.push_str("|end");
        }
        out
    }

    fn describe_view(&self, v: &HanabiView) -> String {
        let mut out = String::new();
        let fw: Vec<String> = v
            .fireworks
            .iter()
            .enumerate()
            .map(|(c, &n)| format!("{}:{n}", COLOR_NAMES[c] as char))
            .collect();
        let _ = writeln!(
            out,
            "turn {}  score {}  hints {}  lives {}  deck {}  fireworks {}",
            v.turn,
            v.score,
            v.hints,
            v.lives,
            v.deck_len,
            fw.join(" ")
        );
        for (q, hand) in v.hands.iter().enumerate() {
            let me = if v.owner == Some(q as u8) { " (you)" } else { "" };
            let _ = writeln!(out, "  player {q}{me}: {}", self.hand_tokens(hand));
        }
        out
    }
}

/// Convention policy:
/// 1. play the lowest own card marked "play me";
/// 2. with a token left, point out a partner's playable, unmarked card that
///    has no marked copy in view, nearest partner and lowest slot first, by
///    colour if the colour hint would mark it, else by rank;
/// 3. discard the oldest unmarked card.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScriptedHanabi;

impl ScriptedHanabi {
    pub fn choose(&self, game: &MiniHanabi, v: &HanabiView) -> Option<Action> {
        let p = v.owner? as usize;
        if v.over || p != v.current as usize {
            return None;
        }
        let own = &v.hands[p];
        if let Some(i) = own.iter().position(|s| s.flagged) {
            return Some(game.encode(Move::Play(i)));
        }
        let n = game.num_players();
        if v.hints > 0 {
            let marked: Vec<Card> = v
                .hands
                .iter()
                .flatten()
                .filter(|s| s.flagged)
                .filter_map(|s| s.card)
                .collect();
            for offset in 1..n {
                let hand = &v.hands[(p + offset) % n];
                let cards: Vec<(Card, bool)> = hand
                    .iter()
                    .map(|s| (s.card.expect("partner cards are visible"), s.flagged))
                    .collect();
                for (i, &(card, flagged)) in cards.iter().enumerate() {
                    if flagged || !game.is_playable(&v.fireworks, card) || marked.contains(&card) {
                        continue;
                    }
                    for hint in [Hint::Color(card.color), Hint::Rank(card.rank)] {
                        if hint_focus(&cards, hint).1 == Some(i) {
                            return Some(game.encode(Move::Hint { offset, hint }));
                        }
                    }
                }
            }
        }
        let oldest = own
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.flagged)
            .min_by_key(|(_, s)| s.drawn)
            .map(|(i, _)| i)
            .unwrap_or(0);
        Some(game.encode(Move::Discard(oldest)))
    }
}

impl Blueprint<MiniHanabi> for ScriptedHanabi {
    fn name(&self) -> String {
        "scripted-hanabi".into()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn distribution<S: Scalar>(&self, game: &MiniHanabi, info: &HanabiView) -> Vec<(Action, S)> {
        self.choose(game, info).map(|a| vec![(a, S::one())]).unwrap_or_default()
    }

    fn sample(&self, game: &MiniHanabi, info: &HanabiView, _rng: &mut dyn RngCore) -> Action {
        self.choose(game, info).expect("blueprint queried at a terminal state")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn card(color: u8, rank: u8) -> Card {
        Card { color, rank }
    }

    #[test]
    fn action_codes_round_trip() {
        let g = MiniHanabi::default();
        for a in 0..g.num_actions(0) {
            let m = g.decode(a).unwrap();
            assert_eq!(g.encode(m), a);
        }
        assert_eq!(g.decode(g.num_actions(0)), None);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let small = HanabiParams {
            players: 8,
            hand_size: 5,
            ..HanabiParams::default()
        };
        assert!(MiniHanabi::new(small).is_err());
        let one = HanabiParams {
            players: 1,
            ..HanabiParams::default()
        };
        assert!(MiniHanabi::new(one).is_err());
    }

    #[test]
    fn deal_is_a_permutation() {
        let g = MiniHanabi::default();
        let s = g.deal(&mut crate::seed::rng(5));
        let mut count = g.deck_len(&s.deck);
        for h in &s.hands {
            count += h.len();
        }
        assert_eq!(count, 15);
        assert!(g.chance_outcomes_matching::<f64>(&[0], &g.info_state(&s, 0)).len() > 1);
    }

    #[test]
    fn hint_marks_lowest_unmarked_touched_card() {
        let hand = [(card(0, 1), true), (card(0, 2), false), (card(1, 0), false)];
        assert_eq!(hint_focus(&hand, Hint::Color(0)), (vec![0, 1], Some(1)));
        assert_eq!(hint_focus(&hand, Hint::Rank(0)), (vec![2], Some(2)));
        assert_eq!(hint_focus(&hand, Hint::Rank(1)), (vec![0], None));
    }
}
