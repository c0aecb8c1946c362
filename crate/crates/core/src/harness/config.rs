use std::path::{Path, PathBuf};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::blueprint::{Blueprint, NoopBlueprint, TabularBlueprint, UniformBlueprint};
use crate::envs::{HanabiParams, MiniHanabi, ScriptedHanabi, TigerParams, TrampolineTiger};
use crate::game::{Action, Game};
use crate::planner::{PlannerConfig, PlannerKind, ProtocolOptions};
use crate::scalar::Scalar;

use super::HarnessError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_VAR: &str = "SEDPLAN_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvName {
    TrampolineTiger,
    MiniHanabi,
}

impl EnvName {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnvName::TrampolineTiger => "trampoline-tiger",
            EnvName::MiniHanabi => "mini-hanabi",
        }
    }
}

/// Planner mode of a run. `exact-oracle` is IMPROVISED^E with exact
/// enumeration in rational arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Blueprint,
    Sparta,
    ImprovisedE,
    ImprovisedP,
    ExactOracle,
}

impl Mode {
    pub fn kind(&self) -> PlannerKind {
        match self {
            Mode::Blueprint => PlannerKind::Blueprint,
            Mode::Sparta => PlannerKind::Sparta,
            Mode::ImprovisedE | Mode::ExactOracle => PlannerKind::ImprovisedE,
            Mode::ImprovisedP => PlannerKind::ImprovisedP,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::ExactOracle => "exact-oracle",
            other => other.kind().as_str(),
        }
    }
}

/// Which seeds a run plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedSet {
    /// `episode_seed(seed, i)` for `i < episodes`.
    #[default]
    Range,
    /// The first `episodes` seeds from `seed` upward that have a
    /// finesse-complete situation. Search runs only at the mined turn, with
    /// deviations limited to hints two seats ahead and responses to plays
    /// unless the search table says otherwise.
    FinesseComplete,
}

/// A fully specified experiment. Every field has a default, so an empty
/// file is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvName,
    pub tiger: TigerParams,
    pub hanabi: HanabiParams,
    /// `noop`, `uniform`, `scripted-hanabi` or `tabular:<file>`; the
    /// environment's usual blueprint when unset.
    pub blueprint: Option<String>,
    pub planner: Mode,
    pub search: PlannerConfig,
    pub episodes: usize,
    pub seed: u64,
    pub seeds: SeedSet,
    /// Restricts search to these turn indices.
    pub plan_turns: Option<Vec<usize>>,
    pub share_f: bool,
    /// Output directory; `$SEDPLAN_OUT_DIR` or `runs` when unset.
    pub out: Option<PathBuf>,
    /// Adds per-episode wall time to the records, which makes them
    /// non-reproducible.
    pub wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            env: EnvName::TrampolineTiger,
            tiger: TigerParams::default(),
            hanabi: HanabiParams::default(),
            blueprint: None,
            planner: Mode::ImprovisedE,
            search: PlannerConfig::default(),
            episodes: 100,
            seed: 0,
            seeds: SeedSet::Range,
            plan_turns: None,
            share_f: false,
            out: None,
            wall_time: false,
        }
    }
}

impl ExperimentConfig {
    /// Builds a config from a TOML table. `search.eps_q` defaults to 5% of
    /// the return range, or 0.05 for mini-Hanabi.
    pub fn from_table(table: toml::Table) -> Result<Self, HarnessError> {
        let eps_q_set = table
            .get("search")
            .and_then(|s| s.as_table())
            .is_some_and(|s| s.contains_key("eps_q"));
        let mut cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        if !eps_q_set {
            cfg.search.eps_q = match cfg.env {
                EnvName::MiniHanabi => 0.05,
                EnvName::TrampolineTiger => {
                    let (lo, hi) = tiger_bounds(&cfg.tiger);
                    0.05 * (hi - lo)
                }
            };
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        Self::from_table(table)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_VAR).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("runs"))
    }

    pub fn blueprint_name(&self) -> &str {
        match (&self.blueprint, self.env) {
            (Some(name), _) => name,
            (None, EnvName::MiniHanabi) => "scripted-hanabi",
            (None, EnvName::TrampolineTiger) => "noop",
        }
    }

    /// Search parameters after applying the mode and the share-f flag.
    pub fn planner_config(&self) -> PlannerConfig {
        let mut c = self.search.clone();
        c.share_response |= self.share_f;
        if self.planner == Mode::ExactOracle {
            c.exact = true;
        }
        c
    }

    pub fn protocol(&self) -> ProtocolOptions {
        let mut o = ProtocolOptions::new(self.planner.kind());
        if let Some(t) = &self.plan_turns {
            o = o.only_at(t.iter().copied());
        }
        o
    }

    /// Whether episodes run with rational arithmetic.
    pub fn rational(&self) -> bool {
        self.planner == Mode::ExactOracle
    }

    /// Checks everything that can fail before the first episode.
    pub fn resolve(&self) -> Result<Setup, HarnessError> {
        if self.episodes == 0 {
            return Err(HarnessError::Config("episodes must be at least 1".into()));
        }
        self.planner_config().validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.seeds == SeedSet::FinesseComplete && self.env != EnvName::MiniHanabi {
            return Err(HarnessError::Config("finesse-complete seeds need mini-hanabi".into()));
        }
        let base = resolve_blueprint(self.blueprint_name())?;
        let game_err = |e: crate::game::GameError| HarnessError::Config(e.to_string());
        Ok(match self.env {
            EnvName::TrampolineTiger => {
                let game = TrampolineTiger::new(self.tiger.clone()).map_err(game_err)?;
                let pi = match base {
                    Resolved::Plain(b) => b,
                    Resolved::Scripted => {
                        return Err(HarnessError::Config(
                            "scripted-hanabi only applies to mini-hanabi".into(),
                        ))
                    }
                };
                Setup::Tiger(game, pi)
            }
            EnvName::MiniHanabi => {
                let game = MiniHanabi::new(self.hanabi.clone()).map_err(game_err)?;
                let pi = match base {
                    Resolved::Plain(b) => HanabiBlueprint::Plain(b),
                    Resolved::Scripted => HanabiBlueprint::Scripted(ScriptedHanabi),
                };
                Setup::Hanabi(game, pi)
            }
        })
    }
}

fn tiger_bounds(params: &TigerParams) -> (f64, f64) {
    TrampolineTiger::new(params.clone())
        .map(|g| g.return_bounds())
        .unwrap_or((0.0, 1.0))
}

enum Resolved {
    Plain(AnyBlueprint),
    Scripted,
}

fn resolve_blueprint(name: &str) -> Result<Resolved, HarnessError> {
    Ok(match name {
        "noop" => Resolved::Plain(AnyBlueprint::Noop),
        "uniform" => Resolved::Plain(AnyBlueprint::Uniform),
        "scripted-hanabi" => Resolved::Scripted,
        other => match other.strip_prefix("tabular:") {
            Some(path) => Resolved::Plain(AnyBlueprint::Tabular(load_table(Path::new(path))?)),
            None => return Err(HarnessError::Config(format!("unknown blueprint '{other}'"))),
        },
    })
}

fn load_table(path: &Path) -> Result<TabularBlueprint, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
    TabularBlueprint::parse(name, &text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

/// A resolved environment with its blueprint.
pub enum Setup {
    Tiger(TrampolineTiger, AnyBlueprint),
    Hanabi(MiniHanabi, HanabiBlueprint),
}

/// Blueprints that apply to any game.
#[derive(Debug, Clone)]
pub enum AnyBlueprint {
    Noop,
    Uniform,
    Tabular(TabularBlueprint),
}

impl<G: Game> Blueprint<G> for AnyBlueprint {
    fn name(&self) -> String {
        match self {
            AnyBlueprint::Noop => Blueprint::<G>::name(&NoopBlueprint),
            AnyBlueprint::Uniform => Blueprint::<G>::name(&UniformBlueprint),
            AnyBlueprint::Tabular(t) => Blueprint::<G>::name(t),
        }
    }

    fn is_deterministic(&self) -> bool {
        match self {
            AnyBlueprint::Noop => true,
            AnyBlueprint::Uniform => false,
            AnyBlueprint::Tabular(t) => Blueprint::<G>::is_deterministic(t),
        }
    }

    fn distribution<S: Scalar>(&self, game: &G, info: &G::View) -> Vec<(Action, S)> {
        match self {
            AnyBlueprint::Noop => NoopBlueprint.distribution(game, info),
            AnyBlueprint::Uniform => UniformBlueprint.distribution(game, info),
            AnyBlueprint::Tabular(t) => t.distribution(game, info),
        }
    }

    fn sample(&self, game: &G, info: &G::View, rng: &mut dyn RngCore) -> Action {
        match self {
            AnyBlueprint::Noop => NoopBlueprint.sample(game, info, rng),
            AnyBlueprint::Uniform => UniformBlueprint.sample(game, info, rng),
            AnyBlueprint::Tabular(t) => t.sample(game, info, rng),
        }
    }
}

#[derive(Debug, Clone)]
pub enum HanabiBlueprint {
    Scripted(ScriptedHanabi),
    Plain(AnyBlueprint),
}

impl Blueprint<MiniHanabi> for HanabiBlueprint {
    fn name(&self) -> String {
        match self {
            HanabiBlueprint::Scripted(s) => s.name(),
            HanabiBlueprint::Plain(b) => Blueprint::<MiniHanabi>::name(b),
        }
    }

    fn is_deterministic(&self) -> bool {
        match self {
            HanabiBlueprint::Scripted(s) => s.is_deterministic(),
            HanabiBlueprint::Plain(b) => Blueprint::<MiniHanabi>::is_deterministic(b),
        }
    }

    fn distribution<S: Scalar>(&self, game: &MiniHanabi, info: &<MiniHanabi as Game>::View) -> Vec<(Action, S)> {
        match self {
            HanabiBlueprint::Scripted(s) => s.distribution(game, info),
            HanabiBlueprint::Plain(b) => b.distribution(game, info),
        }
    }

    fn sample(&self, game: &MiniHanabi, info: &<MiniHanabi as Game>::View, rng: &mut dyn RngCore) -> Action {
        match self {
            HanabiBlueprint::Scripted(s) => s.sample(game, info, rng),
            HanabiBlueprint::Plain(b) => b.sample(game, info, rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default_tiger_run() {
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg.env, EnvName::TrampolineTiger);
        assert!((cfg.search.eps_q - 0.55).abs() < 1e-12);
        assert_eq!(cfg.blueprint_name(), "noop");
        assert!(cfg.resolve().is_ok());
    }

    #[test]
    fn unknown_names_fail_resolution() {
        let cfg = ExperimentConfig {
            blueprint: Some("nonsense".into()),
            ..Default::default()
        };
        assert!(matches!(cfg.resolve(), Err(HarnessError::Config(_))));
        assert!(ExperimentConfig::parse("env = \"chess\"").is_err());
        assert!(ExperimentConfig::parse("episods = 3").is_err());
        let zero = ExperimentConfig {
            episodes: 0,
            ..Default::default()
        };
        assert!(zero.resolve().is_err());
        let scripted_tiger = ExperimentConfig {
            blueprint: Some("scripted-hanabi".into()),
            ..Default::default()
        };
        assert!(scripted_tiger.resolve().is_err());
    }

    #[test]
    fn hanabi_params_and_eps_q() {
        let cfg = ExperimentConfig::parse("env = \"mini-hanabi\"\n[hanabi]\nplayers = 2\n[search]\nbelief_samples = 50\n").unwrap();
        assert_eq!(cfg.hanabi.players, 2);
        assert_eq!(cfg.search.belief_samples, 50);
        assert_eq!(cfg.search.eps_q, 0.05);
        assert_eq!(cfg.blueprint_name(), "scripted-hanabi");
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = ExperimentConfig {
            planner: Mode::Sparta,
            plan_turns: Some(vec![1, 4]),
            ..Default::default()
        };
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }
}
