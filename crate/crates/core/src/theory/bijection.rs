use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ParticleState, SystemState, TheoryError};

/// A one-to-one map on `{0,1,2,3}` applied to a single particle.
///
/// `table[v]` is the image of `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u8; 4]", into = "[u8; 4]")]
pub struct Bijection([u8; 4]);

impl Bijection {
    pub fn new(table: [u8; 4]) -> Result<Self, TheoryError> {
        let mut seen = [false; 4];
        for &v in &table {
            if v > 3 || seen[v as usize] {
                return Err(TheoryError::NotABijection(table));
            }
            seen[v as usize] = true;
        }
        Ok(Bijection(table))
    }

    pub fn identity() -> Self {
        Bijection([0, 1, 2, 3])
    }

    pub fn table(&self) -> [u8; 4] {
        self.0
    }

    pub fn apply(&self, x: ParticleState) -> ParticleState {
        ParticleState::ALL[self.0[x.value() as usize] as usize]
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Bijection) -> Bijection {
        let mut table = [0; 4];
        for (v, slot) in table.iter_mut().enumerate() {
            *slot = self.0[other.0[v] as usize];
        }
        Bijection(table)
    }

    pub fn inverse(&self) -> Bijection {
        let mut table = [0; 4];
        for (v, &image) in self.0.iter().enumerate() {
            table[image as usize] = v as u8;
        }
        Bijection(table)
    }

    /// `Some(k)` if this is the rotation `x ↦ (x + k) mod 4`.
    pub fn rotation_amount(&self) -> Option<u8> {
        let k = self.0[0];
        (0..4u8)
            .all(|v| self.0[v as usize] == (v + k) % 4)
            .then_some(k)
    }

    /// All 24 bijections in lexicographic table order.
    pub fn all() -> Vec<Bijection> {
        let mut out = Vec::with_capacity(24);
        for a in 0..4u8 {
            for b in 0..4u8 {
                for c in 0..4u8 {
                    if a + b + c > 6 {
                        continue;
                    }
                    if let Ok(u) = Bijection::new([a, b, c, 6 - a - b - c]) {
                        out.push(u);
                    }
                }
            }
        }
        out
    }
}

impl TryFrom<[u8; 4]> for Bijection {
    type Error = TheoryError;

    fn try_from(table: [u8; 4]) -> Result<Self, Self::Error> {
        Bijection::new(table)
    }
}

impl From<Bijection> for [u8; 4] {
    fn from(u: Bijection) -> Self {
        u.0
    }
}

impl fmt::Display for Bijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rotation_amount() {
            Some(k) => write!(f, "U_{k}"),
            None => write!(f, "{:?}", self.0),
        }
    }
}

/// The rotation `x ↦ (x + k) mod 4`.
pub fn rotation(k: u8) -> Result<Bijection, TheoryError> {
    if k > 3 {
        return Err(TheoryError::InvalidRotation(k as i64));
    }
    Ok(Bijection([k, (1 + k) % 4, (2 + k) % 4, (3 + k) % 4]))
}

/// Applies `u` to the 1-based particle `particle_index` of `x`.
pub fn apply_local_map(
    x: &SystemState,
    particle_index: usize,
    u: &Bijection,
) -> Result<SystemState, TheoryError> {
    let len = x.num_particles();
    if particle_index == 0 || particle_index > len {
        return Err(TheoryError::ParticleIndexOutOfRange {
            index: particle_index,
            len,
        });
    }
    let i = particle_index - 1;
    let old = x.get(i).expect("index checked");
    Ok(x.with_particle(i, u.apply(old)))
}
