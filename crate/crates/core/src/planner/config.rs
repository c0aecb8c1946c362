use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blueprint::DEFAULT_GUARD;
use crate::game::{Action, Game};

/// Which quantity the response function softmaxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Pooled expected value `E[max(hat_q, q_pi)]`.
    Expected,
    /// Probability that the pair improves on the blueprint.
    Probability,
}

/// Softmax temperature of the response function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "scale", rename_all = "kebab-case")]
pub enum Temperature {
    /// Fixed temperature.
    Absolute(f64),
    /// Scale times the width of the game's return range.
    ReturnRange(f64),
    /// Scale times the spread (max minus min) of the values in the row
    /// being softmaxed. A row of equal values gives the uniform response.
    ValueSpread(f64),
}

impl Temperature {
    pub fn scale(&self) -> f64 {
        match *self {
            Temperature::Absolute(t) | Temperature::ReturnRange(t) | Temperature::ValueSpread(t) => t,
        }
    }
}

/// `spread:X`, `range:X`, `abs:X`, or a bare number for an absolute
/// temperature.
impl std::str::FromStr for Temperature {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::Parse {
            what: "temperature",
            value: s.to_string(),
        };
        let (kind, x) = s.split_once(':').unwrap_or(("abs", s));
        let x: f64 = x.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "abs" => Ok(Temperature::Absolute(x)),
            "range" => Ok(Temperature::ReturnRange(x)),
            "spread" => Ok(Temperature::ValueSpread(x)),
            _ => Err(bad()),
        }
    }
}

impl Default for Temperature {
    fn default() -> Self {
        Temperature::ValueSpread(0.1)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ConfigError {
    #[error("{0} must be at least 1")]
    ZeroSamples(&'static str),
    #[error("eps_p must lie in [0, 1), got {0}")]
    EpsP(f64),
    #[error("eps_q must be finite and non-negative, got {0}")]
    EpsQ(f64),
    #[error("temperature scale must be finite and positive, got {0}")]
    Temperature(f64),
    #[error("value is not a valid {what}: {value}")]
    Parse { what: &'static str, value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// `M`: belief samples for the marginal and the value table.
    pub belief_samples: usize,
    /// `N`: rollouts per sampled information state and pair.
    pub rollout_samples: usize,
    /// `K`: samples for Alice's final decision, `10000 / |A1|` when unset.
    pub decision_samples: Option<usize>,
    pub eps_p: f64,
    pub eps_q: f64,
    pub temperature: Temperature,
    pub variant: Variant,
    /// Enumerate beliefs and rollouts instead of sampling.
    pub exact: bool,
    /// Bob reuses Alice's response function instead of recomputing it.
    pub share_response: bool,
    /// Node limit of exact enumeration.
    pub guard: usize,
    /// Restricts the deviation candidates when set.
    pub deviation_actions: Option<Vec<Action>>,
    /// Restricts the response candidates when set.
    pub response_actions: Option<Vec<Action>>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            belief_samples: 1000,
            rollout_samples: 100,
            decision_samples: None,
            eps_p: 0.0,
            eps_q: 0.05,
            temperature: Temperature::default(),
            variant: Variant::Expected,
            exact: false,
            share_response: false,
            guard: DEFAULT_GUARD,
            deviation_actions: None,
            response_actions: None,
        }
    }
}

impl PlannerConfig {
    /// Defaults with `eps_q` scaled to the game's return range.
    pub fn for_game<G: Game>(game: &G) -> Self {
        let (lo, hi) = game.return_bounds();
        Self {
            eps_q: 0.05 * (hi - lo),
            ..Self::default()
        }
    }

    pub fn exact(mut self) -> Self {
        self.exact = true;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.belief_samples == 0 {
            return Err(ConfigError::ZeroSamples("M"));
        }
        if self.rollout_samples == 0 {
            return Err(ConfigError::ZeroSamples("N"));
        }
        if self.decision_samples == Some(0) {
            return Err(ConfigError::ZeroSamples("K"));
        }
        if !(0.0..1.0).contains(&self.eps_p) {
            return Err(ConfigError::EpsP(self.eps_p));
        }
        if !self.eps_q.is_finite() || self.eps_q < 0.0 {
            return Err(ConfigError::EpsQ(self.eps_q));
        }
        let t = self.temperature.scale();
        if !t.is_finite() || t <= 0.0 {
            return Err(ConfigError::Temperature(t));
        }
        Ok(())
    }

    /// `K` for a player with `actions` actions.
    pub fn decision_samples_for(&self, actions: usize) -> usize {
        self.decision_samples
            .unwrap_or_else(|| 10_000 / actions.max(1))
            .max(1)
    }

    pub fn allows_deviation(&self, a: Action) -> bool {
        self.deviation_actions.as_ref().is_none_or(|set| set.contains(&a))
    }

    pub fn allows_response(&self, a: Action) -> bool {
        self.response_actions.as_ref().is_none_or(|set| set.contains(&a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        assert_eq!(PlannerConfig::default().validate(), Ok(()));
        assert_eq!(PlannerConfig::default().decision_samples_for(20), 500);
    }

    #[test]
    fn bad_values_are_rejected() {
        let base = PlannerConfig::default();
        let cases = [
            PlannerConfig { belief_samples: 0, ..base.clone() },
            PlannerConfig { rollout_samples: 0, ..base.clone() },
            PlannerConfig { decision_samples: Some(0), ..base.clone() },
            PlannerConfig { eps_p: 1.0, ..base.clone() },
            PlannerConfig { eps_p: -0.1, ..base.clone() },
            PlannerConfig { eps_q: f64::NAN, ..base.clone() },
            PlannerConfig { temperature: Temperature::Absolute(0.0), ..base.clone() },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn round_trips_through_toml() {
        let c = PlannerConfig {
            temperature: Temperature::ReturnRange(0.2),
            deviation_actions: Some(vec![1, 2]),
            ..PlannerConfig::default()
        };
        let text = toml::to_string(&c).unwrap();
        let back: PlannerConfig = toml::from_str(&text).unwrap();
        assert_eq!(c, back);
    }
}
