use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::state_count;
use super::{Mixture, SystemState, TheoryError, N_MAX};
use crate::Prob;

/// The rule of the theory a [`Violation`] breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Postulate 2: outcome sets are sets, pairwise disjoint, and cover all states.
    Partition,
    /// Postulate 5: every column shows two or more values, each in at least a
    /// quarter of the rows.
    Column,
    /// Rows do not match the measurement's particle count.
    Shape,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Partition => write!(f, "postulate 2"),
            Rule::Column => write!(f, "postulate 5"),
            Rule::Shape => write!(f, "shape"),
        }
    }
}

/// The first constraint a candidate outcome set or measurement fails.
///
/// `outcome` is `None` when an outcome set is validated on its own. Columns
/// are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    DuplicateRow {
        outcome: Option<usize>,
        row: SystemState,
    },
    SingleValuedColumn {
        outcome: Option<usize>,
        column: usize,
        value: u8,
    },
    RareValue {
        outcome: Option<usize>,
        column: usize,
        value: u8,
        count: usize,
        rows: usize,
    },
    EmptyOutcome {
        outcome: usize,
    },
    WrongParticleCount {
        outcome: usize,
        row: SystemState,
        expected: usize,
    },
    Overlap {
        state: SystemState,
        first: usize,
        second: usize,
    },
    Missing {
        state: SystemState,
    },
}

impl Violation {
    pub fn rule(&self) -> Rule {
        match self {
            Violation::DuplicateRow { .. }
            | Violation::Overlap { .. }
            | Violation::Missing { .. } => Rule::Partition,
            Violation::SingleValuedColumn { .. }
            | Violation::RareValue { .. }
            | Violation::EmptyOutcome { .. } => Rule::Column,
            Violation::WrongParticleCount { .. } => Rule::Shape,
        }
    }

    fn with_outcome(self, r: usize) -> Self {
        match self {
            Violation::DuplicateRow { row, .. } => Violation::DuplicateRow {
                outcome: Some(r),
                row,
            },
            Violation::SingleValuedColumn { column, value, .. } => Violation::SingleValuedColumn {
                outcome: Some(r),
                column,
                value,
            },
            Violation::RareValue {
                column,
                value,
                count,
                rows,
                ..
            } => Violation::RareValue {
                outcome: Some(r),
                column,
                value,
                count,
                rows,
            },
            other => other,
        }
    }
}

fn outcome_prefix(outcome: &Option<usize>) -> String {
    match outcome {
        Some(r) => format!("outcome {r}: "),
        None => String::new(),
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated: ", self.rule())?;
        match self {
            Violation::DuplicateRow { outcome, row } => {
                write!(f, "{}duplicate row {row}", outcome_prefix(outcome))
            }
            Violation::SingleValuedColumn {
                outcome,
                column,
                value,
            } => write!(
                f,
                "{}column {column} contains only the value {value}",
                outcome_prefix(outcome)
            ),
            Violation::RareValue {
                outcome,
                column,
                value,
                count,
                rows,
            } => write!(
                f,
                "{}value {value} occurs in column {column} only {count} of {rows} times (below 25%)",
                outcome_prefix(outcome)
            ),
            Violation::EmptyOutcome { outcome } => write!(f, "outcome {outcome} is empty"),
            Violation::WrongParticleCount {
                outcome,
                row,
                expected,
            } => write!(
                f,
                "outcome {outcome}: row {row} does not have {expected} particles"
            ),
            Violation::Overlap {
                state,
                first,
                second,
            } => write!(f, "state {state} appears in outcomes {first} and {second}"),
            Violation::Missing { state } => write!(f, "state {state} is in no outcome set"),
        }
    }
}

/// Pass/fail verdict with the first violated constraint on failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidityReport {
    violation: Option<Violation>,
}

impl ValidityReport {
    pub fn valid() -> Self {
        ValidityReport { violation: None }
    }

    pub fn invalid(v: Violation) -> Self {
        ValidityReport { violation: Some(v) }
    }

    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }

    pub fn violation(&self) -> Option<&Violation> {
        self.violation.as_ref()
    }

    pub fn into_result(self) -> Result<(), TheoryError> {
        match self.violation {
            None => Ok(()),
            Some(v) => Err(TheoryError::Invalid(v)),
        }
    }
}

/// Checks the set and column rules for one outcome set.
///
/// Errors (as opposed to an invalid report) are reserved for inputs that are
/// not a matrix at all: no rows, or rows of different lengths.
pub fn validate_outcome_set(rows: &[SystemState]) -> Result<ValidityReport, TheoryError> {
    let first = rows.first().ok_or(TheoryError::EmptyOutcomeSet)?;
    let width = first.num_particles();
    if rows.iter().any(|r| r.num_particles() != width) {
        return Err(TheoryError::RaggedRows);
    }

    let mut seen = std::collections::HashSet::with_capacity(rows.len());
    for row in rows {
        if !seen.insert(row) {
            return Ok(ValidityReport::invalid(Violation::DuplicateRow {
                outcome: None,
                row: row.clone(),
            }));
        }
    }

    let len = rows.len();
    for column in 0..width {
        let mut counts = [0usize; 4];
        for row in rows {
            counts[row.particles()[column].value() as usize] += 1;
        }
        let present: Vec<u8> = (0..4u8).filter(|&v| counts[v as usize] > 0).collect();
        if present.len() < 2 {
            return Ok(ValidityReport::invalid(Violation::SingleValuedColumn {
                outcome: None,
                column: column + 1,
                value: present[0],
            }));
        }
        for v in present {
            let count = counts[v as usize];
            if 4 * count < len {
                return Ok(ValidityReport::invalid(Violation::RareValue {
                    outcome: None,
                    column: column + 1,
                    value: v,
                    count,
                    rows: len,
                }));
            }
        }
    }
    Ok(ValidityReport::valid())
}

/// One outcome set `A_r`: a valid matrix of distinct states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutcomeSet {
    label: usize,
    rows: Vec<SystemState>,
}

impl OutcomeSet {
    /// Validates `rows` and labels the set as outcome 0.
    pub fn new(rows: Vec<SystemState>) -> Result<Self, TheoryError> {
        Self::with_label(0, rows)
    }

    pub fn with_label(label: usize, rows: Vec<SystemState>) -> Result<Self, TheoryError> {
        validate_outcome_set(&rows)?.into_result()?;
        Ok(OutcomeSet { label, rows })
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn rows(&self) -> &[SystemState] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn num_particles(&self) -> usize {
        self.rows[0].num_particles()
    }

    pub fn contains(&self, x: &SystemState) -> bool {
        self.rows.contains(x)
    }
}

/// Wire form of a measurement: `{"num_particles": N, "outcomes": [[[..]..]..]}`.
///
/// Carries no validity guarantee; convert with `Measurement::try_from`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementDef {
    pub num_particles: usize,
    pub outcomes: Vec<Vec<SystemState>>,
}

/// Checks that `def` describes a valid measurement: every outcome set obeys
/// the set and column rules, and together they partition all `4^N` states.
pub fn validate_measurement(def: &MeasurementDef) -> Result<ValidityReport, TheoryError> {
    let n = def.num_particles;
    if n == 0 {
        return Err(TheoryError::InvalidParticleCount { count: 0 });
    }
    if n > N_MAX {
        return Err(TheoryError::StateSpaceTooLarge { num_particles: n });
    }

    for (r, rows) in def.outcomes.iter().enumerate() {
        if rows.is_empty() {
            return Ok(ValidityReport::invalid(Violation::EmptyOutcome {
                outcome: r,
            }));
        }
        if let Some(row) = rows.iter().find(|row| row.num_particles() != n) {
            return Ok(ValidityReport::invalid(Violation::WrongParticleCount {
                outcome: r,
                row: row.clone(),
                expected: n,
            }));
        }
        let report = validate_outcome_set(rows)?;
        if let Some(v) = report.violation {
            return Ok(ValidityReport::invalid(v.with_outcome(r)));
        }
    }

    let mut owner: Vec<Option<usize>> = vec![None; state_count(n)];
    for (r, rows) in def.outcomes.iter().enumerate() {
        for row in rows {
            let slot = &mut owner[row.index()];
            if let Some(first) = *slot {
                return Ok(ValidityReport::invalid(Violation::Overlap {
                    state: row.clone(),
                    first,
                    second: r,
                }));
            }
            *slot = Some(r);
        }
    }

    if let Some(i) = owner.iter().position(Option::is_none) {
        return Ok(ValidityReport::invalid(Violation::Missing {
            state: SystemState::from_index(i, n),
        }));
    }
    Ok(ValidityReport::valid())
}

/// A validated measurement: `R` labeled outcome sets partitioning all states.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MeasurementDef", into = "MeasurementDef")]
pub struct Measurement {
    num_particles: usize,
    outcomes: Vec<OutcomeSet>,
    // outcome index of every state, by `SystemState::index`
    lookup: Vec<u16>,
}

impl Measurement {
    /// Builds and validates a measurement from its outcome sets.
    pub fn from_outcomes(
        num_particles: usize,
        outcomes: Vec<Vec<SystemState>>,
    ) -> Result<Self, TheoryError> {
        Self::try_from(MeasurementDef {
            num_particles,
            outcomes,
        })
    }

    /// Convenience constructor from raw value rows.
    pub fn from_values(num_particles: usize, outcomes: &[&[&[u8]]]) -> Result<Self, TheoryError> {
        let outcomes = outcomes
            .iter()
            .map(|rows| {
                rows.iter()
                    .map(|v| SystemState::from_values(v))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_outcomes(num_particles, outcomes)
    }

    pub fn num_particles(&self) -> usize {
        self.num_particles
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcome_sets(&self) -> &[OutcomeSet] {
        &self.outcomes
    }

    pub fn outcome_set(&self, r: usize) -> Result<&OutcomeSet, TheoryError> {
        self.outcomes.get(r).ok_or(TheoryError::OutcomeOutOfRange {
            outcome: r,
            outcomes: self.outcomes.len(),
        })
    }

    /// Outcome for a state given by its base-4 index. Panics if out of range.
    pub fn outcome_of_index(&self, index: usize) -> usize {
        self.lookup[index] as usize
    }

    pub fn to_def(&self) -> MeasurementDef {
        MeasurementDef {
            num_particles: self.num_particles,
            outcomes: self.outcomes.iter().map(|o| o.rows.clone()).collect(),
        }
    }

    /// Canonical relabeling: rows sorted within each set, sets ordered by
    /// their least state.
    pub fn canonical(&self) -> Measurement {
        let mut blocks: Vec<Vec<SystemState>> = self
            .outcomes
            .iter()
            .map(|o| {
                let mut rows = o.rows.clone();
                rows.sort();
                rows
            })
            .collect();
        blocks.sort_by(|a, b| a[0].cmp(&b[0]));
        Measurement::from_outcomes(self.num_particles, blocks)
            .expect("relabeling preserves validity")
    }

    /// Equal up to outcome relabeling and row order.
    pub fn equivalent(&self, other: &Measurement) -> bool {
        self.canonical() == other.canonical()
    }
}

impl TryFrom<MeasurementDef> for Measurement {
    type Error = TheoryError;

    fn try_from(def: MeasurementDef) -> Result<Self, Self::Error> {
        validate_measurement(&def)?.into_result()?;
        let n = def.num_particles;
        let mut lookup = vec![0u16; state_count(n)];
        let outcomes = def
            .outcomes
            .into_iter()
            .enumerate()
            .map(|(r, rows)| {
                for row in &rows {
                    lookup[row.index()] = r as u16;
                }
                OutcomeSet { label: r, rows }
            })
            .collect();
        Ok(Measurement {
            num_particles: n,
            outcomes,
            lookup,
        })
    }
}

impl From<Measurement> for MeasurementDef {
    fn from(m: Measurement) -> Self {
        m.to_def()
    }
}

fn check_arity(m: &Measurement, x: &SystemState) -> Result<(), TheoryError> {
    if x.num_particles() != m.num_particles {
        return Err(TheoryError::ParticleCountMismatch {
            expected: m.num_particles,
            found: x.num_particles(),
        });
    }
    Ok(())
}

/// The unique outcome `r` with `x ∈ A_r`.
pub fn find_outcome(m: &Measurement, x: &SystemState) -> Result<usize, TheoryError> {
    check_arity(m, x)?;
    Ok(m.outcome_of_index(x.index()))
}

/// Measures `x`: returns the outcome and a post-measurement state drawn
/// uniformly from the rows of that outcome set.
pub fn measure<R: Rng + ?Sized>(
    m: &Measurement,
    x: &SystemState,
    rng: &mut R,
) -> Result<(usize, SystemState), TheoryError> {
    let r = find_outcome(m, x)?;
    let rows = &m.outcomes[r].rows;
    let post = rows[rng.random_range(0..rows.len())].clone();
    Ok((r, post))
}

/// Epistemic state of anyone who knows that `m` gave outcome `r`.
pub fn posterior_mixture(m: &Measurement, r: usize) -> Result<Mixture, TheoryError> {
    Mixture::uniform(m.outcome_set(r)?.rows.clone())
}

/// Distribution of the pre-measurement state given `prior` and outcome `r`.
pub fn retrodict(prior: &Mixture, m: &Measurement, r: usize) -> Result<Mixture, TheoryError> {
    m.outcome_set(r)?;
    if prior.num_particles() != m.num_particles {
        return Err(TheoryError::ParticleCountMismatch {
            expected: m.num_particles,
            found: prior.num_particles(),
        });
    }
    let kept: Vec<(SystemState, Prob)> = prior
        .entries()
        .iter()
        .filter(|(s, _)| m.outcome_of_index(s.index()) == r)
        .cloned()
        .collect();
    if kept.is_empty() {
        return Err(TheoryError::OutcomeImpossible);
    }
    Mixture::from_weights(kept)
}
