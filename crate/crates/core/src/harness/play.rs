use std::io::{BufRead, Write};
use std::path::Path;

use crate::blueprint::Blueprint;
use crate::game::{self, Game, PlayerId};
use crate::planner::{EpisodeDriver, PlannerConfig, ProtocolOptions};
use crate::scalar::Scalar;
use crate::seed;
use crate::Exact;

use super::{ExperimentConfig, HarnessError, Setup};

#[derive(Debug, Clone, PartialEq)]
pub struct PlayOutcome {
    /// False when input ended before the game did.
    pub completed: bool,
    pub total_return: f64,
    /// Public transcript, one line per turn.
    pub transcript: Vec<String>,
}

fn term(e: std::io::Error) -> HarnessError {
    HarnessError::io(Path::new("<terminal>"), e)
}

/// Terminal session for the episode `cfg.seed` with the human at `seat`.
pub fn play_interactive<R: BufRead, W: Write>(
    cfg: &ExperimentConfig,
    seat: PlayerId,
    input: R,
    output: W,
) -> Result<PlayOutcome, HarnessError> {
    let search = cfg.planner_config();
    let options = cfg.protocol();
    let deal = seed::derive(cfg.seed, seed::stream::CHANCE);
    match cfg.resolve()? {
        Setup::Tiger(g, pi) => {
            let initial = game::chance_init(&g, deal);
            if cfg.rational() {
                play_from::<_, _, Exact, _, _>(&g, &pi, &search, &options, seat, initial, cfg.seed, input, output)
            } else {
                play_from::<_, _, f64, _, _>(&g, &pi, &search, &options, seat, initial, cfg.seed, input, output)
            }
        }
        Setup::Hanabi(g, pi) => {
            let initial = game::chance_init(&g, deal);
            play_from::<_, _, f64, _, _>(&g, &pi, &search, &options, seat, initial, cfg.seed, input, output)
        }
    }
}

/// Runs one episode from `initial`, reading the human's moves from `input`.
/// Agents at the other seats follow `options`; the human's turns update
/// their beliefs without blueprint likelihoods.
#[allow(clippy::too_many_arguments)]
pub fn play_from<G: Game, B: Blueprint<G>, S: Scalar, R: BufRead, W: Write>(
    game: &G,
    pi: &B,
    search: &PlannerConfig,
    options: &ProtocolOptions,
    seat: PlayerId,
    initial: G::State,
    seed: u64,
    mut input: R,
    mut output: W,
) -> Result<PlayOutcome, HarnessError> {
    if seat >= game.num_players() {
        return Err(HarnessError::Config(format!(
            "seat {seat} does not exist in a {}-player game",
            game.num_players()
        )));
    }
    let mut driver: EpisodeDriver<'_, G, B, S> = EpisodeDriver::new(game, pi, search, options, initial, seed)?;
    let mut transcript = Vec::new();
    let mut total = 0.0;
    let mut turn = 0;
    while let Some(p) = driver.current_player() {
        let ann = if p == seat {
            let info = game.info_state(driver.state(), p);
            let legal = game.legal_actions(&info);
            writeln!(output, "\nturn {turn}, you are player {p}\n{}", game.describe_view(&info)).map_err(term)?;
            for &a in &legal {
                writeln!(output, "  [{a}] {}", game.action_label(p, a)).map_err(term)?;
            }
            let action = loop {
                write!(output, "> ").map_err(term)?;
                output.flush().map_err(term)?;
                let mut line = String::new();
                if input.read_line(&mut line).map_err(term)? == 0 {
                    writeln!(output, "\ninput closed, game aborted").map_err(term)?;
                    return Ok(PlayOutcome {
                        completed: false,
                        total_return: total,
                        transcript,
                    });
                }
                let text = line.trim();
                let chosen = text
                    .parse::<usize>()
                    .ok()
                    .filter(|a| legal.contains(a))
                    .or_else(|| legal.iter().copied().find(|&a| game.action_label(p, a) == text));
                match chosen {
                    Some(a) => break a,
                    None => writeln!(output, "'{text}' is not a legal action").map_err(term)?,
                }
            };
            driver.external(action)?
        } else {
            driver.decide()?
        };
        let line = format!("{turn:>3} p{p} {}", game.action_label(p, ann.action));
        writeln!(output, "{line}").map_err(term)?;
        transcript.push(line);
        total += driver.apply(ann)?;
        turn += 1;
    }
    writeln!(output, "\ntranscript:").map_err(term)?;
    for line in &transcript {
        writeln!(output, "{line}").map_err(term)?;
    }
    writeln!(output, "return: {total}").map_err(term)?;
    Ok(PlayOutcome {
        completed: true,
        total_return: total,
        transcript,
    })
}
