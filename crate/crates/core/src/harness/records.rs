//! Episode records (one JSON object per line) and the summary table.
//!
//! `episodes.jsonl` fields: `episode`, `seed`, `total_return`, `turns`
//! (each with `player`, `action`, `label`, `reward`, `deviated`,
//! `detected`), `finesses`, optional `situation` and optional
//! `wall_time_ms`.
//!
//! `summary.tsv` has one header line and one row with the columns of
//! [`SUMMARY_COLUMNS`].

use serde::{Deserialize, Serialize};

use crate::envs::finesse::{FinesseRecord, SituationRecord};
use crate::game::{self, Action, Game, PlayerId};
use crate::planner::TurnAnnotation;
use crate::seed;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub player: PlayerId,
    pub action: Action,
    pub label: String,
    pub reward: f64,
    pub deviated: bool,
    pub detected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub seed: u64,
    pub total_return: f64,
    pub turns: Vec<TurnRecord>,
    #[serde(default)]
    pub finesses: Vec<FinesseRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub situation: Option<SituationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl EpisodeRecord {
    pub fn new(
        episode: usize,
        seed: u64,
        history: &game::History<impl Game>,
        annotations: &[TurnAnnotation],
    ) -> Self {
        let turns = history
            .turns
            .iter()
            .zip(annotations)
            .map(|(t, a)| TurnRecord {
                player: t.player,
                action: t.action,
                label: a.label.clone(),
                reward: t.reward,
                deviated: a.deviated,
                detected: a.detected,
            })
            .collect();
        Self {
            episode,
            seed,
            total_return: history.total_return(),
            turns,
            finesses: Vec::new(),
            situation: None,
            wall_time_ms: None,
        }
    }

    pub fn deviations(&self) -> usize {
        self.turns.iter().filter(|t| t.deviated).count()
    }

    pub fn detections(&self) -> usize {
        self.turns.iter().filter(|t| t.detected).count()
    }

    pub fn completed_finesses(&self) -> usize {
        self.finesses.iter().filter(|f| f.completed).count()
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

pub fn parse_records(text: &str) -> Result<Vec<EpisodeRecord>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| HarnessError::Format(format!("record line {}: {e}", i + 1))))
        .collect()
}

/// Replays a record's actions from the deal of its seed and returns the
/// total reward.
pub fn replay_return<G: Game>(game: &G, record: &EpisodeRecord) -> Result<f64, HarnessError> {
    let mut state = game::chance_init(game, seed::derive(record.seed, seed::stream::CHANCE));
    let mut rng = seed::rng(seed::derive_path(record.seed, &[seed::stream::CHANCE, 1]));
    let mut total = 0.0;
    for t in &record.turns {
        if game.current_player(&state) != Some(t.player) {
            return Err(HarnessError::Format(format!("seed {}: turn order differs on replay", record.seed)));
        }
        let next = game.step(&state, t.action, &mut rng).map_err(|e| HarnessError::Format(e.to_string()))?;
        total += next.reward;
        state = next.next;
    }
    Ok(total)
}

pub const SUMMARY_COLUMNS: [&str; 11] = [
    "env",
    "blueprint",
    "planner",
    "episodes",
    "mean_return",
    "stddev_return",
    "deviations",
    "detections",
    "finesses",
    "completed_finesses",
    "first_seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryReport {
    pub env: String,
    pub blueprint: String,
    pub planner: String,
    pub episodes: usize,
    pub mean_return: f64,
    /// Population standard deviation.
    pub stddev_return: f64,
    pub deviations: usize,
    pub detections: usize,
    pub finesses: usize,
    pub completed_finesses: usize,
    pub first_seed: Option<u64>,
}

impl SummaryReport {
    pub fn from_records(env: &str, blueprint: &str, planner: &str, records: &[EpisodeRecord]) -> Self {
        let n = records.len();
        let mean = if n == 0 {
            0.0
        } else {
            records.iter().map(|r| r.total_return).sum::<f64>() / n as f64
        };
        let var = if n == 0 {
            0.0
        } else {
            records.iter().map(|r| (r.total_return - mean).powi(2)).sum::<f64>() / n as f64
        };
        Self {
            env: env.into(),
            blueprint: blueprint.into(),
            planner: planner.into(),
            episodes: n,
            mean_return: mean,
            stddev_return: var.sqrt(),
            deviations: records.iter().map(EpisodeRecord::deviations).sum(),
            detections: records.iter().map(EpisodeRecord::detections).sum(),
            finesses: records.iter().map(|r| r.finesses.len()).sum(),
            completed_finesses: records.iter().map(EpisodeRecord::completed_finesses).sum(),
            first_seed: records.first().map(|r| r.seed),
        }
    }

    pub fn to_tsv(&self) -> String {
        let row = [
            self.env.clone(),
            self.blueprint.clone(),
            self.planner.clone(),
            self.episodes.to_string(),
            self.mean_return.to_string(),
            self.stddev_return.to_string(),
            self.deviations.to_string(),
            self.detections.to_string(),
            self.finesses.to_string(),
            self.completed_finesses.to_string(),
            self.first_seed.map(|s| s.to_string()).unwrap_or_else(|| "-".into()),
        ];
        format!("{}\n{}\n", SUMMARY_COLUMNS.join("\t"), row.join("\t"))
    }

    pub fn from_tsv(text: &str) -> Result<Self, HarnessError> {
        let bad = |m: &str| HarnessError::Format(format!("summary: {m}"));
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty"))?.split('\t').collect();
        if header != SUMMARY_COLUMNS {
            return Err(bad("unexpected header"));
        }
        let row: Vec<&str> = lines.next().ok_or_else(|| bad("missing row"))?.split('\t').collect();
        if row.len() != SUMMARY_COLUMNS.len() {
            return Err(bad("wrong column count"));
        }
        let num = |i: usize| row[i].parse::<usize>().map_err(|_| bad(SUMMARY_COLUMNS[i]));
        let float = |i: usize| row[i].parse::<f64>().map_err(|_| bad(SUMMARY_COLUMNS[i]));
        Ok(Self {
            env: row[0].into(),
            blueprint: row[1].into(),
            planner: row[2].into(),
            episodes: num(3)?,
            mean_return: float(4)?,
            stddev_return: float(5)?,
            deviations: num(6)?,
            detections: num(7)?,
            finesses: num(8)?,
            completed_finesses: num(9)?,
            first_seed: match row[10] {
                "-" => None,
                s => Some(s.parse().map_err(|_| bad("first_seed"))?),
            },
        })
    }
}
