use crate::blueprint::Blueprint;
use crate::game::{Action, Game};
use crate::scalar::{self, Scalar};

use super::{Planner, QEstimates, Temperature, Variant};

/// `softmax(values / t)`, computed after subtracting the maximum.
pub fn softmax<S: Scalar>(values: &[S], t: f64) -> Vec<S> {
    if values.is_empty() {
        return Vec::new();
    }
    let top = values
        .iter()
        .cloned()
        .reduce(scalar::max)
        .expect("non-empty");
    let inv_t = S::from_f64(1.0 / t);
    let e: Vec<S> = values
        .iter()
        .map(|v| ((v.clone() - top.clone()) * inv_t.clone()).exp())
        .collect();
    let total = scalar::sum(e.iter().cloned());
    e.into_iter().map(|x| x / total.clone()).collect()
}

/// `f(a1)`: Bob's inferred distribution over responses for each deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseFunction<S> {
    pub variant: Variant,
    pub responses: Vec<Action>,
    /// One row per deviation, in `D` order: action, temperature used, and
    /// probabilities aligned with `responses`.
    pub rows: Vec<(Action, f64, Vec<S>)>,
}

impl<S: Scalar> ResponseFunction<S> {
    pub fn row(&self, a1: Action) -> Option<&[S]> {
        self.rows
            .iter()
            .find(|(a, _, _)| *a == a1)
            .map(|(_, _, p)| p.as_slice())
    }

    pub fn temperature(&self, a1: Action) -> Option<f64> {
        self.rows.iter().find(|(a, _, _)| *a == a1).map(|(_, t, _)| *t)
    }

    pub fn prob(&self, a1: Action, a2: Action) -> Option<S> {
        let k = self.responses.iter().position(|&a| a == a2)?;
        self.row(a1).map(|p| p[k].clone())
    }

    /// Support of `f(a1)` with probabilities.
    pub fn distribution(&self, a1: Action) -> Vec<(Action, S)> {
        self.row(a1)
            .map(|p| self.responses.iter().copied().zip(p.iter().cloned()).collect())
            .unwrap_or_default()
    }

    /// Bob's response: the most likely action, lowest index on ties.
    pub fn argmax(&self, a1: Action) -> Option<Action> {
        let p = self.row(a1)?;
        scalar::argmax_first(p).map(|k| self.responses[k])
    }
}

impl<G: Game, B: Blueprint<G>> Planner<'_, G, B> {
    /// Softmax of the pooled value (or improvement probability) over `R`,
    /// separately for each deviation. `None` when `D × R` is empty.
    pub fn response_function<S: Scalar>(&self, table: &QEstimates<G, S>) -> Option<ResponseFunction<S>> {
        let sets = &table.sets;
        if sets.is_empty() {
            return None;
        }
        let variant = self.config.variant;
        let source = match variant {
            Variant::Expected => &table.pooled,
            Variant::Probability => &table.improvement,
        };
        let width = sets.responses.len();
        let (lo, hi) = self.game.return_bounds();
        let rows = sets
            .deviations
            .iter()
            .enumerate()
            .map(|(d, &a1)| {
                let values = &source[d * width..(d + 1) * width];
                let (t, probs) = softmax_row(values, self.config.temperature, hi - lo);
                (a1, t, probs)
            })
            .collect();
        Some(ResponseFunction {
            variant,
            responses: sets.responses.clone(),
            rows,
        })
    }
}

fn softmax_row<S: Scalar>(values: &[S], temperature: Temperature, range: f64) -> (f64, Vec<S>) {
    let t = match temperature {
        Temperature::Absolute(t) => t,
        Temperature::ReturnRange(c) => c * range,
        Temperature::ValueSpread(c) => {
            let f: Vec<f64> = values.iter().map(Scalar::to_f64).collect();
            let spread = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - f.iter().cloned().fold(f64::INFINITY, f64::min);
            if spread <= 0.0 {
                let n = values.len() as i64;
                return (f64::INFINITY, values.iter().map(|_| S::from_ratio(1, n)).collect());
            }
            c * spread
        }
    };
    (t, softmax(values, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_sums_to_one_and_orders() {
        let p = softmax(&[0.0f64, 1.0, 2.0], 1.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[0] < p[1] && p[1] < p[2]);
    }

    #[test]
    fn softmax_is_stable_for_tiny_temperatures() {
        let p = softmax(&[0.0f64, 0.1], 1e-6);
        assert_eq!(p, vec![0.0, 1.0]);
        let p = softmax(&[0.5f64, 0.5], 1e-9);
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn huge_temperature_is_near_uniform() {
        let p = softmax(&[0.0f64, 10.0], 1e9);
        assert!((p[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn spread_temperature() {
        let (t, p) = softmax_row(&[0.0f64, 0.1], Temperature::ValueSpread(0.1), 11.0);
        assert!((t - 0.01).abs() < 1e-15);
        assert!((p[1] - 1.0 / (1.0 + (-10.0f64).exp())).abs() < 1e-12);
        let (_, p) = softmax_row(&[0.3f64, 0.3, 0.3], Temperature::ValueSpread(0.1), 11.0);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        let (t, _) = softmax_row(&[0.0f64, 0.1], Temperature::ReturnRange(0.1), 11.0);
        assert!((t - 1.1).abs() < 1e-12);
    }
}
