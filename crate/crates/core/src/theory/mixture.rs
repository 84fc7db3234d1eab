use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{SystemState, TheoryError};
use crate::prob::{self, Prob};

/// An epistemic state: a finite distribution over ontic states with exact
/// probabilities. Entries are kept sorted by state, so two mixtures are equal
/// iff they describe the same distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<MixtureEntry>", into = "Vec<MixtureEntry>")]
pub struct Mixture {
    entries: Vec<(SystemState, Prob)>,
}

/// Wire form of one mixture entry: `{"state": [...], "p": "num/den"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureEntry {
    pub state: SystemState,
    #[serde(with = "prob::as_string")]
    pub p: Prob,
}

impl Mixture {
    pub fn new(mut entries: Vec<(SystemState, Prob)>) -> Result<Self, TheoryError> {
        let invalid = |msg: &str| Err(TheoryError::InvalidMixture(msg.to_owned()));
        let Some(first) = entries.first() else {
            return invalid("empty support");
        };
        let n = first.0.num_particles();
        if entries.iter().any(|(s, _)| s.num_particles() != n) {
            return invalid("states have different particle counts");
        }
        if entries.iter().any(|(_, p)| *p <= Prob::zero()) {
            return invalid("probabilities must be positive");
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return invalid("duplicate support entry");
        }
        let total: Prob = entries.iter().map(|(_, p)| *p).sum();
        if total != Prob::one() {
            return Err(TheoryError::InvalidMixture(format!(
                "probabilities sum to {}",
                prob::format_prob(&total)
            )));
        }
        Ok(Mixture { entries })
    }

    /// Normalizes positive weights into a mixture.
    pub fn from_weights(weights: Vec<(SystemState, Prob)>) -> Result<Self, TheoryError> {
        let total: Prob = weights.iter().map(|(_, w)| *w).sum();
        if total <= Prob::zero() {
            return Err(TheoryError::InvalidMixture("zero total weight".into()));
        }
        Self::new(weights.into_iter().map(|(s, w)| (s, w / total)).collect())
    }

    /// Equal weight on each of the distinct `states`.
    pub fn uniform(states: Vec<SystemState>) -> Result<Self, TheoryError> {
        let p = Prob::new(1, states.len().max(1) as i64);
        Self::new(states.into_iter().map(|s| (s, p)).collect())
    }

    pub fn point(state: SystemState) -> Self {
        Mixture {
            entries: vec![(state, Prob::one())],
        }
    }

    pub fn num_particles(&self) -> usize {
        self.entries[0].0.num_particles()
    }

    pub fn entries(&self) -> &[(SystemState, Prob)] {
        &self.entries
    }

    pub fn probability(&self, state: &SystemState) -> Prob {
        self.entries
            .binary_search_by(|(s, _)| s.cmp(state))
            .map(|i| self.entries[i].1)
            .unwrap_or_else(|_| Prob::zero())
    }

    /// Marginal distribution of the 1-based particle `index`.
    pub fn marginal(&self, index: usize) -> Result<[Prob; 4], TheoryError> {
        let len = self.num_particles();
        if index == 0 || index > len {
            return Err(TheoryError::ParticleIndexOutOfRange { index, len });
        }
        let mut out = [Prob::zero(); 4];
        for (s, p) in &self.entries {
            out[s.particles()[index - 1].value() as usize] += *p;
        }
        Ok(out)
    }

    /// Draws an ontic state from the mixture.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SystemState {
        let den = self
            .entries
            .iter()
            .fold(1i64, |acc, (_, p)| lcm(acc, *p.denom()));
        let mut ticket = rng.random_range(0..den);
        for (s, p) in &self.entries {
            let share = p.numer() * (den / p.denom());
            if ticket < share {
                return s.clone();
            }
            ticket -= share;
        }
        unreachable!("probabilities sum to one")
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

impl TryFrom<Vec<MixtureEntry>> for Mixture {
    type Error = TheoryError;

    fn try_from(v: Vec<MixtureEntry>) -> Result<Self, Self::Error> {
        Mixture::new(v.into_iter().map(|e| (e.state, e.p)).collect())
    }
}

impl From<Mixture> for Vec<MixtureEntry> {
    fn from(m: Mixture) -> Self {
        m.entries
            .into_iter()
            .map(|(state, p)| MixtureEntry { state, p })
            .collect()
    }
}
