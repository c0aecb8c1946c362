use std::fmt::Write as _;

use crate::belief::{self, Evidence};
use crate::blueprint::Blueprint;
use crate::game::{self, Action, Game, PlayerId};
use crate::planner::{exact_oracle, PlanError, PlannerConfig};
use crate::scalar::Scalar;
use crate::seed;
use crate::Exact;

use super::{ExperimentConfig, HarnessError, Setup};

/// Exact value table for the player to move after `transcript` in the deal
/// of `cfg.seed`, as text. Values print as fractions when `rational`.
pub fn oracle_dump(cfg: &ExperimentConfig, transcript: &[Action], rational: bool) -> Result<String, HarnessError> {
    let search = cfg.planner_config();
    match cfg.resolve()? {
        Setup::Tiger(g, pi) if rational => dump::<_, _, Exact>(&g, &pi, &search, cfg.seed, transcript),
        Setup::Tiger(g, pi) => dump::<_, _, f64>(&g, &pi, &search, cfg.seed, transcript),
        Setup::Hanabi(g, pi) if rational => dump::<_, _, Exact>(&g, &pi, &search, cfg.seed, transcript),
        Setup::Hanabi(g, pi) => dump::<_, _, f64>(&g, &pi, &search, cfg.seed, transcript),
    }
}

fn dump<G: Game, B: Blueprint<G>, S: Scalar>(
    game: &G,
    pi: &B,
    search: &PlannerConfig,
    episode: u64,
    transcript: &[Action],
) -> Result<String, HarnessError> {
    let mut states = vec![game::chance_init(game, seed::derive(episode, seed::stream::CHANCE))];
    let mut rng = seed::rng(seed::derive_path(episode, &[seed::stream::CHANCE, 1]));
    for &a in transcript {
        let next = game.step(states.last().expect("non-empty"), a, &mut rng).map_err(PlanError::from)?;
        states.push(next.next);
    }
    let last = states.last().expect("non-empty");
    let alice = game
        .current_player(last)
        .ok_or_else(|| HarnessError::Config("the transcript ends the game".into()))?;
    let bob = (alice + 1) % game.num_players();
    let mut group: Vec<PlayerId> = vec![alice, bob];
    group.sort_unstable();
    group.dedup();
    let mut b = belief::initial_group_belief::<G, S>(game, &group, &game.view(&states[0], &group)).map_err(PlanError::from)?;
    for (k, &a) in transcript.iter().enumerate() {
        let observed = game.view(&states[k + 1], &group);
        b = belief::filter_update(game, &b, a, Evidence::Blueprint(pi), &group, &observed).map_err(PlanError::from)?;
    }
    let plan = exact_oracle(game, pi, &b, search)?;
    let table = &plan.table;
    let sets = plan.sets();
    let label1 = |a: Action| game.action_label(alice, a);
    let label2 = |a: Action| game.action_label(bob, a);
    let mut out = String::new();
    let _ = writeln!(out, "belief: {} worlds, alice = p{alice}, bob = p{bob}", b.len());
    let d: Vec<String> = sets.deviations.iter().map(|&a| label1(a)).collect();
    let r: Vec<String> = sets.responses.iter().map(|&a| label2(a)).collect();
    let _ = writeln!(out, "D = {{{}}}\nR = {{{}}}", d.join(", "), r.join(", "));
    let _ = writeln!(out, "q_bp = {}", table.blueprint_value());
    let pairs: Vec<(Action, Action)> = sets.pairs().collect();
    let mut header = String::from("info\tweight\tq_bp");
    for &(a1, a2) in &pairs {
        let _ = write!(header, "\t{},{}", label1(a1), label2(a2));
    }
    let _ = writeln!(out, "{header}");
    for row in &table.rows {
        let _ = write!(out, "{}\t{}\t{}", game.view_key(&row.info), row.weight, row.blueprint);
        for v in &row.deviation {
            match v {
                Some(v) => {
                    let _ = write!(out, "\t{v}");
                }
                None => out.push_str("\t-inf"),
            }
        }
        out.push('\n');
    }
    for &(a1, a2) in &pairs {
        let _ = writeln!(
            out,
            "pair {},{}: pooled {} improvement {}",
            label1(a1),
            label2(a2),
            table.pooled_value(a1, a2).expect("pair in table"),
            table.improvement_prob(a1, a2).expect("pair in table"),
        );
    }
    if let Some(f) = &plan.response {
        for &a1 in &sets.deviations {
            let probs: Vec<String> = f.distribution(a1).iter().map(|(a2, p)| format!("{}={p}", label2(*a2))).collect();
            let t = f.temperature(a1).unwrap_or(f64::INFINITY);
            let _ = writeln!(out, "f({}) t={t}: {}", label1(a1), probs.join(" "));
        }
    }
    let best = table.best_pair();
    match best.pair {
        Some((a1, a2)) => {
            let _ = writeln!(out, "best {},{}: value {} gain {}", label1(a1), label2(a2), best.value, best.gain());
        }
        None => {
            let _ = writeln!(out, "best: none, value {}", best.value);
        }
    }
    Ok(out)
}
