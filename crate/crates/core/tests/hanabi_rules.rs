use rand::RngCore;
use sedplan::envs::finesse::{self, dealt, finesse_pattern, forced_finesse, FinesseError};
use sedplan::envs::hanabi::{Card, Hint, Move};
use sedplan::envs::{check_finesse_complete, classify_finesse, mine_finesse_able, HanabiParams, MiniHanabi, ScriptedHanabi};
use sedplan::planner::TurnAnnotation;
use sedplan::{seed, Action, Blueprint, Game, History, Scalar};

fn card(label: &str) -> Card {
    let mut ch = label.chars();
    let color = "RGB".find(ch.next().unwrap()).unwrap() as u8;
    let rank = ch.next().unwrap().to_digit(10).unwrap() as u8 - 1;
    Card { color, rank }
}

/// Next card to draw last, hands dealt from the back.
const FINESSE_DECK: [&str; 15] = [
    "G1", "B2", "B1", "G1", "R1", "R3", "G2", "B3", "B2", "R1", "G2", "R2", "R2", "G3", "B1",
];

fn finesse_deal(game: &MiniHanabi) -> sedplan::envs::hanabi::HanabiState {
    game.from_deck(FINESSE_DECK.iter().map(|l| card(l)).collect()).unwrap()
}

fn self_play(game: &MiniHanabi, mut state: sedplan::envs::hanabi::HanabiState, turns: usize) -> sedplan::envs::hanabi::HanabiState {
    let mut rng = seed::rng(0);
    for _ in 0..turns {
        let p = game.current_player(&state).unwrap();
        let a = ScriptedHanabi.choose(game, &game.info_state(&state, p)).unwrap();
        state = game.step(&state, a, &mut rng).unwrap().next;
    }
    state
}

/// Always discards its first card.
struct NeverPlay;

impl Blueprint<MiniHanabi> for NeverPlay {
    fn name(&self) -> String {
        "never-play".into()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn distribution<S: Scalar>(&self, game: &MiniHanabi, _info: &<MiniHanabi as Game>::View) -> Vec<(Action, S)> {
        vec![(game.encode(Move::Discard(0)), S::one())]
    }

    fn sample(&self, game: &MiniHanabi, _info: &<MiniHanabi as Game>::View, _rng: &mut dyn RngCore) -> Action {
        game.encode(Move::Discard(0))
    }
}

#[test]
fn third_bomb_forfeits_the_score() {
    let g = MiniHanabi::default();
    let mut s = finesse_deal(&g);
    s.fireworks = vec![2, 1, 0];
    s.score = 3;
    let mut rng = seed::rng(1);
    let mut total = 3.0;
    let mut bombs = 0;
    while !s.over {
        let p = s.current as usize;
        let unplayable = s.hands[p].iter().position(|x| !g.is_playable(&s.fireworks, x.card));
        let a = match unplayable {
            Some(i) => g.encode(Move::Play(i)),
            None => g.encode(Move::Discard(0)),
        };
        let lives = s.lives;
        let t = g.step(&s, a, &mut rng).unwrap();
        total += t.reward;
        if t.next.lives < lives {
            bombs += 1;
        }
        s = t.next;
    }
    assert_eq!(bombs, 3);
    assert_eq!(s.score, 0);
    assert_eq!(total, 0.0);
}

#[test]
fn no_hints_without_tokens() {
    let g = MiniHanabi::default();
    let mut s = finesse_deal(&g);
    s.hints = 0;
    let legal = g.legal_actions(&g.info_state(&s, 0));
    assert!(!legal.is_empty());
    assert!(legal.iter().all(|&a| !matches!(g.decode(a), Some(Move::Hint { .. }))));
    let hint = g.encode(Move::Hint {
        offset: 1,
        hint: Hint::Color(0),
    });
    assert!(g.step(&s, hint, &mut seed::rng(0)).is_err());
}

#[test]
fn self_play_scores_stay_in_range() {
    let g = MiniHanabi::default();
    for s in 0..200 {
        let mut state = dealt(&g, s);
        let mut rng = seed::rng(s);
        let mut total = 0.0;
        while let Some(p) = g.current_player(&state) {
            let legal = g.legal_actions(&g.info_state(&state, p));
            let a = legal[(rng.next_u32() as usize) % legal.len()];
            let t = g.step(&state, a, &mut rng).unwrap();
            total += t.reward;
            state = t.next;
        }
        assert!(state.score as usize <= g.max_score());
        assert_eq!(total, state.score as f64, "seed {s}");
    }
}

#[test]
fn hand_built_deal_is_finesse_able_at_turn_four() {
    let g = MiniHanabi::default();
    let start = finesse_deal(&g);
    for t in 0..4 {
        assert_eq!(finesse_pattern(&g, &self_play(&g, start.clone(), t)), None, "turn {t}");
    }
    let s = self_play(&g, start, 4);
    assert_eq!((s.turn, s.current), (4, 1));
    let p = finesse_pattern(&g, &s).expect("finesse pattern at turn 4");
    assert_eq!((p.hinter, p.blind_player, p.hinted), (1, 2, 0));
    assert_eq!(p.blind_card, card("B2"));
    assert_eq!(p.designated_card, card("B3"));
    assert_eq!(s.hands[2][p.blind_slot].card, card("B2"));
    assert_eq!(s.hands[0][p.designated_slot].card, card("B3"));
    assert_eq!(check_finesse_complete(&g, &s, &ScriptedHanabi), Ok(true));
    assert_eq!(check_finesse_complete(&g, &s, &NeverPlay), Ok(false));
}

#[test]
fn hinted_blind_card_is_excluded() {
    let g = MiniHanabi::default();
    let mut s = self_play(&g, finesse_deal(&g), 4);
    let p = finesse_pattern(&g, &s).unwrap();
    s.hands[2][p.blind_slot].rank_hinted = true;
    assert_eq!(finesse_pattern(&g, &s), None);
    assert!(matches!(
        check_finesse_complete(&g, &s, &ScriptedHanabi),
        Err(FinesseError::NotFinesseAble { turn: 4 })
    ));
}

#[test]
fn two_players_have_no_finesse() {
    let g = MiniHanabi::new(HanabiParams {
        players: 2,
        ..Default::default()
    })
    .unwrap();
    assert!(mine_finesse_able(&g, &ScriptedHanabi, 0..100).is_empty());
}

#[test]
fn opening_state_is_not_finesse_able() {
    let g = MiniHanabi::default();
    let s = finesse_deal(&g);
    assert!(matches!(
        check_finesse_complete(&g, &s, &ScriptedHanabi),
        Err(FinesseError::NotFinesseAble { turn: 0 })
    ));
}

#[test]
fn mined_situations_complete_under_the_scripted_blueprint() {
    let g = MiniHanabi::default();
    let mined = finesse::mine_finesse_complete(&g, &ScriptedHanabi, 0..300);
    assert!(!mined.is_empty());
    for s in &mined {
        assert!(s.turn >= finesse::FIRST_MINED_TURN);
        assert_eq!(check_finesse_complete(&g, &s.state, &ScriptedHanabi), Ok(true));
        assert!(mine_finesse_able(&g, &ScriptedHanabi, s.seed..s.seed + 1)
            .iter()
            .any(|a| a.turn == s.turn));
    }
    let mut seeds: Vec<u64> = mined.iter().map(|s| s.seed).collect();
    seeds.dedup();
    assert_eq!(seeds.len(), mined.len(), "one situation per seed");
}

fn blueprint_history(g: &MiniHanabi, seed_: u64) -> (History<MiniHanabi>, Vec<TurnAnnotation>) {
    let mut state = dealt(g, seed_);
    let mut history = History::new(state.clone());
    let mut annotations = Vec::new();
    let mut rng = seed::rng(0);
    let mut turn = 0;
    while let Some(p) = g.current_player(&state) {
        let action = ScriptedHanabi.choose(g, &g.info_state(&state, p)).unwrap();
        let t = g.step(&state, action, &mut rng).unwrap();
        history.turns.push(sedplan::game::Turn {
            player: p,
            action,
            reward: t.reward,
        });
        annotations.push(TurnAnnotation {
            turn,
            player: p,
            action,
            label: g.action_label(p, action),
            deviated: false,
            detected: false,
            responds_to: None,
            assumed_response: None,
            external: false,
        });
        state = t.next;
        turn += 1;
    }
    (history, annotations)
}

#[test]
fn classify_blueprint_and_forced_games() {
    let g = MiniHanabi::default();
    let situation = finesse::mine_finesse_complete(&g, &ScriptedHanabi, 0..300).remove(0);

    let (h, a) = blueprint_history(&g, situation.seed);
    assert!(classify_finesse(&g, &h, &a).unwrap().is_empty());

    let (h, a) = forced_finesse(&g, &ScriptedHanabi, &situation).unwrap();
    let records = classify_finesse(&g, &h, &a).unwrap();
    assert_eq!(records.len(), 1);
    let r = &records[0];
    assert!(r.completed);
    assert_eq!(r.hint_turn, situation.turn);
    assert_eq!(r.blind_play_turn, Some(situation.turn + 1));
    assert_eq!(r.designated_play_turn, Some(situation.turn + 2));
    assert_eq!(r.blind_card, Some(situation.pattern.blind_card));
    assert_eq!(r.designated_card, situation.pattern.designated_card);

    // Same hint, but the blind player discards instead.
    let mut h2 = History::new(h.initial.clone());
    let mut state = h.initial.clone();
    let mut rng = seed::rng(0);
    for (k, turn) in h.turns.iter().enumerate() {
        if k > situation.turn + 1 {
            break;
        }
        let action = if k == situation.turn + 1 {
            g.encode(Move::Discard(situation.pattern.blind_slot))
        } else {
            turn.action
        };
        let t = g.step(&state, action, &mut rng).unwrap();
        h2.turns.push(sedplan::game::Turn {
            player: turn.player,
            action,
            reward: t.reward,
        });
        state = t.next;
    }
    let records = classify_finesse(&g, &h2, &a[..h2.turns.len()]).unwrap();
    assert_eq!(records.len(), 1);
    assert!(!records[0].completed);
    assert_eq!(records[0].blind_play_turn, None);
}
