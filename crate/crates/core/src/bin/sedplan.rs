use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sedplan::harness::{self, ExperimentConfig, HarnessError};
use sedplan::{Action, Temperature};

#[derive(Parser)]
#[command(name = "sedplan", version, about = "Self-explaining deviation planning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write episodes.jsonl and summary.tsv.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        episodes: Option<usize>,
        /// `range` or `finesse-complete`.
        #[arg(long)]
        seeds: Option<String>,
        /// Comma-separated turn indices at which search runs.
        #[arg(long, value_delimiter = ',')]
        plan_turns: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record per-episode wall time (breaks byte-identical reruns).
        #[arg(long)]
        wall_time: bool,
    },
    /// Paired per-seed comparison of two runs (B minus A).
    Compare { a: PathBuf, b: PathBuf },
    /// Play one episode in the terminal.
    Play {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seat: usize,
    },
    /// Dump the exact value table after a transcript.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Comma-separated action indices played from the deal.
        #[arg(long, value_delimiter = ',')]
        transcript: Vec<Action>,
        /// Print values as exact fractions.
        #[arg(long)]
        rational: bool,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    env: Option<String>,
    #[arg(long)]
    blueprint: Option<String>,
    #[arg(long)]
    planner: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Belief samples.
    #[arg(short = 'M')]
    belief_samples: Option<usize>,
    /// Rollouts per state and pair.
    #[arg(short = 'N')]
    rollout_samples: Option<usize>,
    /// Samples for the final decision.
    #[arg(short = 'K')]
    decision_samples: Option<usize>,
    #[arg(long)]
    eps_p: Option<f64>,
    #[arg(long)]
    eps_q: Option<f64>,
    /// `spread:X`, `range:X` or an absolute temperature.
    #[arg(long)]
    temp: Option<String>,
    #[arg(long)]
    share_f: bool,
    #[arg(long)]
    exact: bool,
    /// Environment parameter such as `tiger.p=0.25` or `hanabi.players=2`.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

fn config_error(m: impl Into<String>) -> HarnessError {
    HarnessError::Config(m.into())
}

fn set(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), HarnessError> {
    let mut keys: Vec<&str> = path.split('.').collect();
    let last = keys.pop().expect("split yields one key");
    let mut t = table;
    for k in keys {
        t = t
            .entry(k)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| config_error(format!("'{k}' is not a table")))?;
    }
    t.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(text: &str) -> toml::Value {
    format!("v = {text}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}

impl Common {
    /// Defaults, then the config file, then flags.
    fn table(&self) -> Result<toml::Table, HarnessError> {
        let mut t = match &self.config {
            Some(path) => std::fs::read_to_string(path)
                .map_err(|e| HarnessError::Io {
                    path: path.clone(),
                    message: e.to_string(),
                })?
                .parse::<toml::Table>()
                .map_err(|e| config_error(format!("{}: {e}", path.display())))?,
            None => toml::Table::new(),
        };
        let s = |x: &str| toml::Value::String(x.to_string());
        let int = |x: u64| -> Result<toml::Value, HarnessError> {
            i64::try_from(x).map(toml::Value::Integer).map_err(|_| config_error("integer out of range"))
        };
        if let Some(v) = &self.env {
            set(&mut t, "env", s(v))?;
        }
        if let Some(v) = &self.blueprint {
            set(&mut t, "blueprint", s(v))?;
        }
        if let Some(v) = &self.planner {
            set(&mut t, "planner", s(v))?;
        }
        if let Some(v) = self.seed {
            set(&mut t, "seed", int(v)?)?;
        }
        if let Some(v) = self.belief_samples {
            set(&mut t, "search.belief_samples", int(v as u64)?)?;
        }
        if let Some(v) = self.rollout_samples {
            set(&mut t, "search.rollout_samples", int(v as u64)?)?;
        }
        if let Some(v) = self.decision_samples {
            set(&mut t, "search.decision_samples", int(v as u64)?)?;
        }
        if let Some(v) = self.eps_p {
            set(&mut t, "search.eps_p", toml::Value::Float(v))?;
        }
        if let Some(v) = self.eps_q {
            set(&mut t, "search.eps_q", toml::Value::Float(v))?;
        }
        if let Some(v) = &self.temp {
            let temp: Temperature = v.parse().map_err(|e: sedplan::planner::ConfigError| config_error(e.to_string()))?;
            set(&mut t, "search.temperature", toml::Value::try_from(temp).expect("temperature serializes"))?;
        }
        if self.share_f {
            set(&mut t, "share_f", toml::Value::Boolean(true))?;
        }
        if self.exact {
            set(&mut t, "search.exact", toml::Value::Boolean(true))?;
        }
        for p in &self.params {
            let (k, v) = p.split_once('=').ok_or_else(|| config_error(format!("expected KEY=VALUE, got '{p}'")))?;
            set(&mut t, k.trim(), parse_value(v.trim()))?;
        }
        Ok(t)
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            common,
            episodes,
            seeds,
            plan_turns,
            out,
            wall_time,
        } => {
            let mut t = common.table()?;
            if let Some(v) = episodes {
                set(&mut t, "episodes", toml::Value::Integer(v as i64))?;
            }
            if let Some(v) = seeds {
                set(&mut t, "seeds", toml::Value::String(v))?;
            }
            if let Some(v) = plan_turns {
                let list = v.into_iter().map(|x| toml::Value::Integer(x as i64)).collect();
                set(&mut t, "plan_turns", toml::Value::Array(list))?;
            }
            if let Some(v) = out {
                set(&mut t, "out", toml::Value::String(v.display().to_string()))?;
            }
            if wall_time {
                set(&mut t, "wall_time", toml::Value::Boolean(true))?;
            }
            let cfg = ExperimentConfig::from_table(t)?;
            let (out, dir) = harness::run_to_dir(&cfg)?;
            print!("{}", out.summary.to_tsv());
            eprintln!("wrote {}", dir.display());
        }
        Command::Compare { a, b } => {
            print!("{}", harness::compare_paths(&a, &b)?.to_tsv());
        }
        Command::Play { common, seat } => {
            let cfg = ExperimentConfig::from_table(common.table()?)?;
            let stdin = io::stdin();
            let outcome = harness::play_interactive(&cfg, seat, stdin.lock(), io::stdout())?;
            if !outcome.completed {
                eprintln!("aborted");
            }
        }
        Command::Oracle {
            common,
            transcript,
            rational,
        } => {
            let cfg = ExperimentConfig::from_table(common.table()?)?;
            print!("{}", harness::oracle_dump(&cfg, &transcript, rational)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HarnessError::Config(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
