//! Search for self-explaining deviations in cooperative partially
//! observable games.
//!
//! Core types are generic over a [`Scalar`]: `f32`, `f64`, or the exact
//! rational [`Exact`]. The aliases below fix the common instantiations.

pub mod belief;
pub mod blueprint;
pub mod envs;
pub mod game;
pub mod harness;
pub mod planner;
pub mod scalar;
pub mod seed;

pub use belief::{BeliefError, Evidence, PublicBelief};
pub use blueprint::{Blueprint, Estimate, NoopBlueprint, TabularBlueprint, UniformBlueprint};
pub use game::{Action, Game, GameError, History, PlayerId};
pub use planner::{
    DeviationSets, Plan, PlanError, Planner, PlannerConfig, PlannerKind, ProtocolOptions, QEstimates,
    ResponseFunction, Temperature, Variant,
};
pub use scalar::Scalar;

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;

/// Belief with `f64` weights.
pub type Belief<G> = PublicBelief<<G as Game>::State, f64>;
/// Belief with exact rational weights.
pub type ExactBelief<G> = PublicBelief<<G as Game>::State, Exact>;

/// Value table in `f64`.
pub type Table<G> = QEstimates<G, f64>;
/// Value table in exact arithmetic.
pub type ExactTable<G> = QEstimates<G, Exact>;
