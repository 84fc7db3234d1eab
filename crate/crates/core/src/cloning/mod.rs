//! The cloning challenge.
//!
//! Peter prepares one particle by measuring it with a measurement Alice does
//! not know, and hands it over. Alice holds `N - 1` further particles in
//! unknown states, runs a [`CloningStrategy`] (a decision tree of
//! manipulations and measurements), and returns two particles. Peter
//! re-measures each with his preparation measurement; Alice passes iff both
//! outcomes equal his original one.
//!
//! [`run_challenge`] plays the game by sampling. [`exact_pass_probability`]
//! and [`search_strategies`] compute pass probabilities exactly by
//! propagating rational weights through the finite state space.
//! [`failure_certificate`] gives the per-branch failure floor implied by the
//! column rule.

mod certificate;
mod challenge;
mod exact;
mod sampler;
mod search;
mod strategy;

pub use certificate::failure_certificate;
pub use challenge::{
    peter_prepare, run_challenge, BranchStats, ChallengeConfig, ChallengeMode, ChallengeResult,
    CopyTally, PreparationRecord,
};
pub use exact::exact_pass_probability;
pub use sampler::OutcomeSetSampler;
pub use search::{search_strategies, Catalog, CatalogEntry, SearchConfig, SearchOutcome};
pub use strategy::{ActionNode, AliceAction, CloningStrategy, StrategyNode};

use thiserror::Error;

use crate::spacetime::SpacetimeError;
use crate::theory::TheoryError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CloningError {
    #[error("strategy references particle {index}, but Alice holds {available}")]
    UnavailableParticle { index: usize, available: usize },
    #[error("strategy is malformed: {0}")]
    MalformedStrategy(String),
    #[error("preparation measurements must act on exactly one particle")]
    PreparationArity,
    #[error("at least one preparation measurement is required")]
    NoPreparations,
    #[error("designated columns must be distinct and within 1..={width}, got ({first}, {second})")]
    InvalidColumns {
        first: usize,
        second: usize,
        width: usize,
    },
    #[error("search exceeded the node budget of {budget}")]
    BudgetExceeded { budget: u64 },
    #[error("unsupported search size: {0}")]
    UnsupportedSearch(String),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Spacetime(#[from] SpacetimeError),
}
