use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Bijection, Measurement, TheoryError};

/// Largest particle count for which measurements are validated explicitly
/// (4^8 = 65,536 joint states).
pub const N_MAX: usize = 8;

/// The hidden value of one particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct ParticleState(u8);

impl ParticleState {
    pub const ALL: [ParticleState; 4] = [
        ParticleState(0),
        ParticleState(1),
        ParticleState(2),
        ParticleState(3),
    ];

    pub fn new(value: u8) -> Result<Self, TheoryError> {
        Self::try_from(value as i64)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// `(self + k) mod 4`.
    pub fn shifted(self, k: u8) -> Self {
        ParticleState((self.0 + k % 4) % 4)
    }

    pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        ParticleState(rng.random_range(0..4))
    }
}

impl TryFrom<i64> for ParticleState {
    type Error = TheoryError;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        if (0..4).contains(&value) {
            Ok(ParticleState(value as u8))
        } else {
            Err(TheoryError::InvalidParticleValue(value))
        }
    }
}

impl From<ParticleState> for u8 {
    fn from(p: ParticleState) -> u8 {
        p.0
    }
}

impl fmt::Display for ParticleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The ontic state `(x_1, …, x_N)` of an `N`-particle system.
///
/// States order lexicographically, which coincides with the order of
/// [`SystemState::index`] (base 4, first particle most significant).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<ParticleState>", into = "Vec<ParticleState>")]
pub struct SystemState(Vec<ParticleState>);

impl SystemState {
    pub fn new(particles: Vec<ParticleState>) -> Result<Self, TheoryError> {
        if particles.is_empty() || particles.len() > N_MAX {
            return Err(TheoryError::InvalidParticleCount {
                count: particles.len(),
            });
        }
        Ok(SystemState(particles))
    }

    pub fn from_values(values: &[u8]) -> Result<Self, TheoryError> {
        let particles = values
            .iter()
            .map(|&v| ParticleState::new(v))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(particles)
    }

    pub fn num_particles(&self) -> usize {
        self.0.len()
    }

    pub fn particles(&self) -> &[ParticleState] {
        &self.0
    }

    pub fn values(&self) -> Vec<u8> {
        self.0.iter().map(|p| p.0).collect()
    }

    /// Value of the particle at 0-based position `i`.
    pub fn get(&self, i: usize) -> Option<ParticleState> {
        self.0.get(i).copied()
    }

    /// Base-4 index in `0..4^N`.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, p| acc * 4 + p.0 as usize)
    }

    /// Inverse of [`SystemState::index`]. Panics if `num_particles` is out of
    /// range or `index >= 4^num_particles`.
    pub fn from_index(index: usize, num_particles: usize) -> Self {
        assert!((1..=N_MAX).contains(&num_particles));
        assert!(index < state_count(num_particles));
        let mut values = vec![ParticleState(0); num_particles];
        let mut rest = index;
        for slot in values.iter_mut().rev() {
            *slot = ParticleState((rest % 4) as u8);
            rest /= 4;
        }
        SystemState(values)
    }

    /// All `4^N` states in index order.
    pub fn all(num_particles: usize) -> impl Iterator<Item = SystemState> {
        (0..state_count(num_particles)).map(move |i| SystemState::from_index(i, num_particles))
    }

    pub fn uniform<R: Rng + ?Sized>(num_particles: usize, rng: &mut R) -> Self {
        SystemState::from_index(
            rng.random_range(0..state_count(num_particles)),
            num_particles,
        )
    }

    /// Copy with the 0-based particle `i` replaced.
    pub fn with_particle(&self, i: usize, value: ParticleState) -> Self {
        let mut next = self.clone();
        next.0[i] = value;
        next
    }

    /// The sub-state made of the given 0-based positions, in that order.
    pub fn project(&self, positions: &[usize]) -> Self {
        SystemState(positions.iter().map(|&i| self.0[i]).collect())
    }
}

pub(crate) fn state_count(num_particles: usize) -> usize {
    4usize.pow(num_particles as u32)
}

impl TryFrom<Vec<ParticleState>> for SystemState {
    type Error = TheoryError;

    fn try_from(v: Vec<ParticleState>) -> Result<Self, Self::Error> {
        SystemState::new(v)
    }
}

impl From<SystemState> for Vec<ParticleState> {
    fn from(s: SystemState) -> Self {
        s.0
    }
}

impl fmt::Display for SystemState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// A system whose ontic state is hidden from agent-level code.
///
/// Agents interact through [`HiddenSystem::measure`] and
/// [`HiddenSystem::manipulate`]; the state itself is only reachable through
/// [`HiddenSystem::god_view`].
#[derive(Debug, Clone)]
pub struct HiddenSystem {
    state: SystemState,
}

impl HiddenSystem {
    pub fn new(state: SystemState) -> Self {
        HiddenSystem { state }
    }

    /// A system in a uniformly random unknown state.
    pub fn unknown<R: Rng + ?Sized>(num_particles: usize, rng: &mut R) -> Self {
        HiddenSystem::new(SystemState::uniform(num_particles, rng))
    }

    pub fn num_particles(&self) -> usize {
        self.state.num_particles()
    }

    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        m: &Measurement,
        rng: &mut R,
    ) -> Result<usize, TheoryError> {
        let (r, post) = super::measure(m, &self.state, rng)?;
        self.state = post;
        Ok(r)
    }

    /// Applies `u` to the 1-based particle `index`.
    pub fn manipulate(&mut self, index: usize, u: &Bijection) -> Result<(), TheoryError> {
        self.state = super::apply_local_map(&self.state, index, u)?;
        Ok(())
    }

    /// Simulator-only access to the ontic state.
    pub fn god_view(&self) -> &SystemState {
        &self.state
    }
}
