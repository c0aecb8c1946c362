//! Experiment runner, reports, comparison, terminal play and oracle dumps.

mod compare;
mod config;
mod oracle;
mod play;
mod records;

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::blueprint::Blueprint;
use crate::envs::finesse::{self, FinesseRecord, SituationRecord};
use crate::envs::MiniHanabi;
use crate::game::{Game, GameError, History};
use crate::planner::{run_episode, PlanError, PlannerConfig, TurnAnnotation};
use crate::scalar::Scalar;
use crate::seed;
use crate::Exact;

pub use compare::{compare, compare_paths, load_run, Comparison, PairedRow};
pub use config::{AnyBlueprint, EnvName, ExperimentConfig, HanabiBlueprint, Mode, SeedSet, Setup, OUT_DIR_VAR};
pub use oracle::oracle_dump;
pub use play::{play_from, play_interactive, PlayOutcome};
pub use records::{parse_records, replay_return, EpisodeRecord, SummaryReport, TurnRecord, SUMMARY_COLUMNS};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("format: {0}")]
    Format(String),
    #[error("episode seed {seed}: {source}")]
    Episode { seed: u64, source: PlanError },
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("seed sets differ: {only_a} seeds only in A, {only_b} only in B")]
    MismatchedSeeds { only_a: usize, only_b: usize },
    #[error("environments differ: {0} vs {1}")]
    MismatchedEnv(String, String),
}

impl HarnessError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub summary: SummaryReport,
    pub records: Vec<EpisodeRecord>,
}

/// One scheduled episode.
#[derive(Debug, Clone)]
struct EpisodeSpec {
    seed: u64,
    plan_turns: Option<BTreeSet<usize>>,
    situation: Option<SituationRecord>,
}

/// Runs every episode of `cfg` in seed order, passing each record to `sink`
/// as soon as it is complete.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    sink: &mut dyn FnMut(&EpisodeRecord) -> Result<(), HarnessError>,
) -> Result<RunOutput, HarnessError> {
    let setup = cfg.resolve()?;
    let mut search = cfg.planner_config();
    let (env, blueprint, records) = match &setup {
        Setup::Tiger(game, pi) => {
            let specs = range_specs(cfg);
            let no_finesse = |_: &History<_>, _: &[TurnAnnotation]| Ok(Vec::new());
            let records = dispatch(game, pi, cfg, &search, &specs, no_finesse, sink)?;
            (game.name().to_string(), Blueprint::<crate::envs::TrampolineTiger>::name(pi), records)
        }
        Setup::Hanabi(game, pi) => {
            let specs = match cfg.seeds {
                SeedSet::Range => range_specs(cfg),
                SeedSet::FinesseComplete => {
                    search.deviation_actions.get_or_insert_with(|| game.hint_actions(2));
                    search.response_actions.get_or_insert_with(|| game.play_actions());
                    finesse_specs(game, pi, cfg)?
                }
            };
            let classify = |h: &History<MiniHanabi>, a: &[TurnAnnotation]| finesse::classify_finesse(game, h, a);
            let records = dispatch(game, pi, cfg, &search, &specs, classify, sink)?;
            (game.name().to_string(), pi.name(), records)
        }
    };
    let summary = SummaryReport::from_records(&env, &blueprint, cfg.planner.as_str(), &records);
    Ok(RunOutput { summary, records })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    run_experiment_with(cfg, &mut |_| Ok(()))
}

/// Runs `cfg` and writes `episodes.jsonl` and `summary.tsv` to its output
/// directory. Returns the output and the directory.
pub fn run_to_dir(cfg: &ExperimentConfig) -> Result<(RunOutput, PathBuf), HarnessError> {
    cfg.resolve()?;
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
    let episodes = dir.join("episodes.jsonl");
    let file = fs::File::create(&episodes).map_err(|e| HarnessError::io(&episodes, e))?;
    let mut w = BufWriter::new(file);
    let out = run_experiment_with(cfg, &mut |r| writeln!(w, "{}", r.to_line()).map_err(|e| HarnessError::io(&episodes, e)))?;
    w.flush().map_err(|e| HarnessError::io(&episodes, e))?;
    let summary = dir.join("summary.tsv");
    fs::write(&summary, out.summary.to_tsv()).map_err(|e| HarnessError::io(&summary, e))?;
    Ok((out, dir))
}

fn range_specs(cfg: &ExperimentConfig) -> Vec<EpisodeSpec> {
    (0..cfg.episodes as u64)
        .map(|i| EpisodeSpec {
            seed: seed::episode_seed(cfg.seed, i),
            plan_turns: None,
            situation: None,
        })
        .collect()
}

/// Seeds scanned per mining batch.
const MINE_BATCH: u64 = 256;

fn finesse_specs<B: Blueprint<MiniHanabi>>(
    game: &MiniHanabi,
    pi: &B,
    cfg: &ExperimentConfig,
) -> Result<Vec<EpisodeSpec>, HarnessError> {
    let limit = cfg.seed.saturating_add(1000 * cfg.episodes as u64 + 1000);
    let mut specs = Vec::new();
    let mut start = cfg.seed;
    while specs.len() < cfg.episodes && start < limit {
        let end = start.saturating_add(MINE_BATCH).min(limit);
        for s in finesse::mine_finesse_complete(game, pi, start..end) {
            if specs.len() == cfg.episodes {
                break;
            }
            specs.push(EpisodeSpec {
                seed: s.seed,
                plan_turns: Some(BTreeSet::from([s.turn])),
                situation: Some(s.record(game)),
            });
        }
        start = end;
    }
    if specs.len() < cfg.episodes {
        return Err(HarnessError::Config(format!(
            "only {} finesse-complete seeds in {}..{limit}",
            specs.len(),
            cfg.seed
        )));
    }
    Ok(specs)
}

fn dispatch<G: Game, B: Blueprint<G>>(
    game: &G,
    pi: &B,
    cfg: &ExperimentConfig,
    search: &PlannerConfig,
    specs: &[EpisodeSpec],
    classify: impl Fn(&History<G>, &[TurnAnnotation]) -> Result<Vec<FinesseRecord>, GameError>,
    sink: &mut dyn FnMut(&EpisodeRecord) -> Result<(), HarnessError>,
) -> Result<Vec<EpisodeRecord>, HarnessError> {
    if cfg.rational() {
        run_game::<G, B, Exact>(game, pi, cfg, search, specs, classify, sink)
    } else {
        run_game::<G, B, f64>(game, pi, cfg, search, specs, classify, sink)
    }
}

fn run_game<G: Game, B: Blueprint<G>, S: Scalar>(
    game: &G,
    pi: &B,
    cfg: &ExperimentConfig,
    search: &PlannerConfig,
    specs: &[EpisodeSpec],
    classify: impl Fn(&History<G>, &[TurnAnnotation]) -> Result<Vec<FinesseRecord>, GameError>,
    sink: &mut dyn FnMut(&EpisodeRecord) -> Result<(), HarnessError>,
) -> Result<Vec<EpisodeRecord>, HarnessError> {
    let base = cfg.protocol();
    let mut records = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let mut options = base.clone();
        if spec.plan_turns.is_some() {
            options.plan_turns = spec.plan_turns.clone();
        }
        let started = Instant::now();
        let out = run_episode::<G, B, S>(game, pi, search, &options, spec.seed)
            .map_err(|source| HarnessError::Episode { seed: spec.seed, source })?;
        let mut record = EpisodeRecord::new(i, spec.seed, &out.history, &out.annotations);
        record.finesses = classify(&out.history, &out.annotations).map_err(|e| HarnessError::Episode {
            seed: spec.seed,
            source: e.into(),
        })?;
        record.situation = spec.situation.clone();
        if cfg.wall_time {
            record.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
        }
        sink(&record)?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiger_modes_and_summary_integrity() {
        let exact = ExperimentConfig {
            planner: Mode::ExactOracle,
            episodes: 40,
            ..ExperimentConfig::parse("").unwrap()
        };
        let out = run_experiment(&exact).unwrap();
        for r in &out.records {
            let trampoline = r.total_return == 1.0;
            assert_eq!(r.turns[0].deviated, trampoline, "seed {}", r.seed);
            assert!(r.total_return >= 0.0);
        }
        let back = SummaryReport::from_tsv(&out.summary.to_tsv()).unwrap();
        assert_eq!(back, out.summary);
        for mode in [Mode::Blueprint, Mode::Sparta] {
            let cfg = ExperimentConfig { planner: mode, ..exact.clone() };
            assert_eq!(run_experiment(&cfg).unwrap().summary.mean_return, 0.0);
        }
    }

    #[test]
    fn finesse_seed_set_needs_hanabi() {
        let cfg = ExperimentConfig {
            seeds: SeedSet::FinesseComplete,
            ..Default::default()
        };
        assert!(matches!(run_experiment(&cfg), Err(HarnessError::Config(_))));
    }
}
