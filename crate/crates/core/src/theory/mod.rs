//! State model, measurements, manipulations and epistemic bookkeeping.

mod bijection;
mod enumerate;
mod measurement;
mod mixture;
mod state;

pub use bijection::{apply_local_map, rotation, Bijection};
pub use enumerate::{enumerate_valid_measurements, set_partitions, MeasurementFamily};
pub use measurement::{
    find_outcome, measure, posterior_mixture, retrodict, validate_measurement,
    validate_outcome_set, Measurement, MeasurementDef, OutcomeSet, Rule, ValidityReport, Violation,
};
pub use mixture::Mixture;
pub use state::{HiddenSystem, ParticleState, SystemState, N_MAX};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("particle value {0} is not one of 0, 1, 2, 3")]
    InvalidParticleValue(i64),
    #[error("a system must have between 1 and {max} particles, got {count}", max = N_MAX)]
    InvalidParticleCount { count: usize },
    #[error("empty outcome set")]
    EmptyOutcomeSet,
    #[error("rows of an outcome set must all have the same particle count")]
    RaggedRows,
    #[error("state space too large for explicit validation ({num_particles} particles, limit {max})", max = N_MAX)]
    StateSpaceTooLarge { num_particles: usize },
    #[error("expected a {expected}-particle state, got {found} particles")]
    ParticleCountMismatch { expected: usize, found: usize },
    #[error("particle index {index} out of range 1..={len}")]
    ParticleIndexOutOfRange { index: usize, len: usize },
    #[error("rotation amount {0} is not one of 0, 1, 2, 3")]
    InvalidRotation(i64),
    #[error("table {0:?} is not a bijection on {{0,1,2,3}}")]
    NotABijection([u8; 4]),
    #[error("outcome {outcome} out of range (measurement has {outcomes} outcomes)")]
    OutcomeOutOfRange { outcome: usize, outcomes: usize },
    #[error("outcome impossible under prior")]
    OutcomeImpossible,
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("invalid measurement: {0}")]
    Invalid(Violation),
    #[error("enumeration of {num_particles}-particle measurements is not supported for family {family:?}")]
    UnsupportedEnumeration {
        num_particles: usize,
        family: MeasurementFamily,
    },
}
