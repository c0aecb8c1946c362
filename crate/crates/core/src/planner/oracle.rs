use crate::belief::PublicBelief;
use crate::blueprint::Blueprint;
use crate::game::Game;
use crate::scalar::{self, Scalar};

use super::{Plan, PlanError, Planner, PlannerConfig, QEstimates, ResponseFunction};

/// Exact value table and response function by full enumeration.
///
/// Fails with [`PlanError::TooLarge`] before doing any work when
/// `|support| * (1 + |D||R|)` exceeds `config.guard`, and also when the
/// enumeration itself visits more than `guard` nodes.
pub fn exact_oracle<G: Game, B: Blueprint<G>, S: Scalar>(
    game: &G,
    blueprint: &B,
    b: &PublicBelief<G::State, S>,
    config: &PlannerConfig,
) -> Result<Plan<G, S>, PlanError> {
    let exact = config.clone().exact();
    let planner = Planner::new(game, blueprint, &exact);
    let sets = planner.deviation_sets(b, 0)?;
    let needed = b.len().saturating_mul(1 + sets.pair_count());
    if needed > config.guard {
        return Err(PlanError::TooLarge {
            needed,
            limit: config.guard,
        });
    }
    let table = planner.estimate(b, sets, 0)?;
    let response = planner.response_function(&table);
    Ok(Plan { table, response })
}

/// Both sides of the pooling inequality for a fixed response function.
#[derive(Debug, Clone, PartialEq)]
pub struct JensenSides<S> {
    /// `E_s1[max(q_pi, max_a1 E_f hat_q)]`: each state picks its own `a1`.
    pub per_state: S,
    /// `max_a1 E_s1[max(q_pi, E_f hat_q)]`: one `a1` for the whole belief.
    pub pooled: S,
}

pub fn jensen_sides<G: Game, S: Scalar>(table: &QEstimates<G, S>, f: &ResponseFunction<S>) -> JensenSides<S> {
    let sets = &table.sets;
    let width = sets.responses.len();
    let value = |row: &super::StateRow<G, S>, d: usize| -> Option<S> {
        let probs = f.row(sets.deviations[d])?;
        let mut acc = S::zero();
        for (r, p) in probs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            acc = acc + p.clone() * row.deviation[d * width + r].clone()?;
        }
        Some(acc)
    };
    let floor = |row: &super::StateRow<G, S>, v: Option<S>| match v {
        Some(v) if v > row.blueprint => v,
        _ => row.blueprint.clone(),
    };
    let per_state = scalar::sum(table.rows.iter().map(|row| {
        let best = (0..sets.deviations.len())
            .map(|d| floor(row, value(row, d)))
            .fold(row.blueprint.clone(), scalar::max);
        row.weight.clone() * best
    }));
    let pooled = (0..sets.deviations.len())
        .map(|d| scalar::sum(table.rows.iter().map(|row| row.weight.clone() * floor(row, value(row, d)))))
        .fold(table.blueprint_value(), scalar::max);
    JensenSides { per_state, pooled }
}
