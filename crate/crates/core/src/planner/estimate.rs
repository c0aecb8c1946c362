use std::collections::BTreeMap;

use crate::belief::{self, ConditionalBelief, PublicBelief};
use crate::blueprint::{Blueprint, Estimate};
use crate::game::{self, Action, Budget, Game, GameError};
use crate::scalar::{self, Scalar};
use crate::seed;

use super::{DeviationSets, PlanError, Planner};

/// Mean and standard error of one estimated value.
#[derive(Debug, Clone)]
pub(crate) struct Measured<S> {
    pub mean: S,
    pub stderr: f64,
}

pub(crate) fn budget_error(e: GameError, budget: &Budget) -> PlanError {
    match e {
        GameError::BudgetExhausted { limit } => PlanError::TooLarge {
            needed: budget.used(),
            limit,
        },
        other => other.into(),
    }
}

/// Value of `prefix` then blueprint play under the belief `b`.
///
/// Sampled estimates draw worlds from `derive(seed, 0)` and roll out world
/// `j` with `derive(seed, 1 + j)`, so calls sharing a seed share both.
pub(crate) fn evaluate<G: Game, B: Blueprint<G>, S: Scalar>(
    planner: &Planner<'_, G, B>,
    b: &PublicBelief<G::State, S>,
    prefix: &[Action],
    estimate: Estimate,
    seed: u64,
) -> Result<Measured<S>, PlanError> {
    match estimate {
        Estimate::Exact => {
            let mut budget = Budget::new(planner.config.guard);
            let mean = exact_mean(planner, b, prefix, &mut budget)?;
            Ok(Measured { mean, stderr: 0.0 })
        }
        Estimate::Samples(n) => {
            let worlds = b.sample(n, seed::derive(seed, 0));
            rollout_mean(planner, &worlds, prefix, seed)
        }
    }
}

fn exact_mean<G: Game, B: Blueprint<G>, S: Scalar>(
    planner: &Planner<'_, G, B>,
    b: &PublicBelief<G::State, S>,
    prefix: &[Action],
    budget: &mut Budget,
) -> Result<S, PlanError> {
    let mut value = S::zero();
    for (world, w) in b.iter() {
        let v: S = game::exact_return(planner.game, world, planner.blueprint, prefix, budget)
            .map_err(|e| budget_error(e, budget))?;
        value = value + w.clone() * v;
    }
    Ok(value)
}

fn rollout_mean<G: Game, B: Blueprint<G>, S: Scalar>(
    planner: &Planner<'_, G, B>,
    worlds: &[G::State],
    prefix: &[Action],
    seed: u64,
) -> Result<Measured<S>, PlanError> {
    let n = worlds.len().max(1) as f64;
    let mut sum = 0.0;
    let mut sq = 0.0;
    for (j, world) in worlds.iter().enumerate() {
        let mut rng = seed::LazyRng::new(seed::derive(seed, 1 + j as u64));
        let r = game::rollout(planner.game, world, planner.blueprint, prefix, &mut rng)?;
        sum += r;
        sq += r * r;
    }
    let mean = sum / n;
    let var = if worlds.len() > 1 {
        ((sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(Measured {
        mean: S::from_f64(mean),
        stderr: (var / n).sqrt(),
    })
}

/// One row of the value table: a sampled (or enumerated) information state
/// of the acting player.
#[derive(Debug, Clone)]
pub struct StateRow<G: Game, S> {
    pub info: G::View,
    /// `b(s1)` when exact, `1/M` when sampled.
    pub weight: S,
    /// `q_pi(b, s1)`.
    pub blueprint: S,
    pub blueprint_se: f64,
    /// `hat_q` over `D × R` in row-major order; `None` is minus infinity.
    pub deviation: Vec<Option<S>>,
    pub deviation_se: Vec<f64>,
}

/// The best deviation pair for a belief.
#[derive(Debug, Clone, PartialEq)]
pub struct SedPair<S> {
    /// `None` when `D × R` is empty.
    pub pair: Option<(Action, Action)>,
    /// `q*(b)`: the pooled value of `pair`, or the blueprint value without one.
    pub value: S,
    pub blueprint: S,
}

impl<S: Scalar> SedPair<S> {
    pub fn gain(&self) -> S {
        self.value.clone() - self.blueprint.clone()
    }
}

/// Value table of all deviation pairs for one belief.
#[derive(Debug, Clone)]
pub struct QEstimates<G: Game, S> {
    pub sets: DeviationSets<S>,
    pub rows: Vec<StateRow<G, S>>,
    /// `E_s1[max(hat_q, q_pi)]` per pair.
    pub pooled: Vec<S>,
    /// `E_s1[1{hat_q > q_pi}]` per pair.
    pub improvement: Vec<S>,
    pub exact: bool,
}

impl<G: Game, S: Scalar> QEstimates<G, S> {
    pub fn from_rows(sets: DeviationSets<S>, rows: Vec<StateRow<G, S>>, exact: bool) -> Self {
        let pairs = sets.pair_count();
        let mut pooled = vec![S::zero(); pairs];
        let mut improvement = vec![S::zero(); pairs];
        for row in &rows {
            for k in 0..pairs {
                let (best, gain) = match &row.deviation[k] {
                    Some(v) if *v > row.blueprint => (v.clone(), true),
                    _ => (row.blueprint.clone(), false),
                };
                pooled[k] = pooled[k].clone() + row.weight.clone() * best;
                if gain {
                    improvement[k] = improvement[k].clone() + row.weight.clone();
                }
            }
        }
        Self {
            sets,
            rows,
            pooled,
            improvement,
            exact,
        }
    }

    pub fn pooled_value(&self, a1: Action, a2: Action) -> Option<S> {
        self.sets.pair_index(a1, a2).map(|k| self.pooled[k].clone())
    }

    pub fn improvement_prob(&self, a1: Action, a2: Action) -> Option<S> {
        self.sets.pair_index(a1, a2).map(|k| self.improvement[k].clone())
    }

    /// `E_s1[q_pi(b, s1)]`.
    pub fn blueprint_value(&self) -> S {
        scalar::sum(self.rows.iter().map(|r| r.weight.clone() * r.blueprint.clone()))
    }

    pub fn row(&self, info: &G::View) -> Option<&StateRow<G, S>> {
        self.rows.iter().find(|r| r.info == *info)
    }

    /// `hat_q` recorded for `info`, if `info` has a row and the pair is in
    /// `D × R`.
    pub fn hat_q(&self, info: &G::View, a1: Action, a2: Action) -> Option<Option<S>> {
        let k = self.sets.pair_index(a1, a2)?;
        Some(self.row(info)?.deviation[k].clone())
    }

    /// Maximises the pooled value; ties go to the lowest `(a1, a2)`.
    pub fn best_pair(&self) -> SedPair<S> {
        let blueprint = self.blueprint_value();
        match scalar::argmax_first(&self.pooled) {
            Some(k) => SedPair {
                pair: self.sets.pairs().nth(k),
                value: self.pooled[k].clone(),
                blueprint,
            },
            None => SedPair {
                pair: None,
                value: blueprint.clone(),
                blueprint,
            },
        }
    }
}

impl<G: Game, B: Blueprint<G>> Planner<'_, G, B> {
    /// Fills the value table for `sets`, exactly or following the sampled
    /// scheme: `M` belief draws, and for each draw `N` conditional rollouts
    /// shared by the blueprint and every pair.
    pub fn estimate<S: Scalar>(
        &self,
        b: &PublicBelief<G::State, S>,
        sets: DeviationSets<S>,
        seed: u64,
    ) -> Result<QEstimates<G, S>, PlanError> {
        let pairs: Vec<(Action, Action)> = sets.pairs().collect();
        let alice = sets.alice;
        let row_for = |cond: &ConditionalBelief<G, S>,
                       weight: S,
                       estimate: Estimate,
                       row_seed: u64,
                       budget: &mut Budget|
         -> Result<StateRow<G, S>, PlanError> {
            let legal = self.game.legal_actions(&cond.info);
            // Same draws as `evaluate` with `row_seed`, taken once per row.
            let worlds = match estimate {
                Estimate::Samples(n) => cond.belief.sample(n, seed::derive(row_seed, 0)),
                Estimate::Exact => Vec::new(),
            };
            let measure = |prefix: &[Action], budget: &mut Budget| -> Result<Measured<S>, PlanError> {
                match estimate {
                    Estimate::Exact => Ok(Measured {
                        mean: exact_mean(self, &cond.belief, prefix, budget)?,
                        stderr: 0.0,
                    }),
                    Estimate::Samples(_) => rollout_mean(self, &worlds, prefix, row_seed),
                }
            };
            let bp = measure(&[], budget)?;
            let mut deviation = Vec::with_capacity(pairs.len());
            let mut deviation_se = Vec::with_capacity(pairs.len());
            for &(a1, a2) in &pairs {
                if legal.contains(&a1) {
                    let m = measure(&[a1, a2], budget)?;
                    deviation.push(Some(m.mean));
                    deviation_se.push(m.stderr);
                } else {
                    deviation.push(None);
                    deviation_se.push(0.0);
                }
            }
            Ok(StateRow {
                info: cond.info.clone(),
                weight,
                blueprint: bp.mean,
                blueprint_se: bp.stderr,
                deviation,
                deviation_se,
            })
        };

        let mut budget = Budget::new(self.config.guard);
        let mut rows = Vec::new();
        if self.config.exact {
            for cond in belief::partition(self.game, b, alice) {
                let weight = cond.marginal.clone();
                rows.push(row_for(&cond, weight, Estimate::Exact, 0, &mut budget)?);
            }
        } else {
            let m = self.config.belief_samples;
            let n = self.config.rollout_samples;
            let share = S::from_ratio(1, m as i64);
            let mut cache: BTreeMap<G::View, ConditionalBelief<G, S>> = BTreeMap::new();
            for (i, world) in b.sample(m, seed::derive(seed, 0)).iter().enumerate() {
                let info = self.game.info_state(world, alice);
                if !cache.contains_key(&info) {
                    let cond = belief::condition(self.game, b, alice, &info)?;
                    cache.insert(info.clone(), cond);
                }
                let row_seed = seed::derive(seed, 1 + i as u64);
                rows.push(row_for(&cache[&info], share.clone(), Estimate::Samples(n), row_seed, &mut budget)?);
            }
        }
        Ok(QEstimates::from_rows(sets, rows, self.config.exact))
    }
}
