use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::theory::{Bijection, OutcomeSet, ParticleState, SystemState, TheoryError};

/// Widest outcome set the sampler produces. Coset templates have
/// `4^(width-1)` rows, so this stays small.
pub const MAX_SAMPLER_WIDTH: usize = 5;

const MAX_ATTEMPTS: usize = 64;

/// Draws valid outcome sets for property tests.
///
/// Candidates come from four templates (column products, pair graphs such as
/// the pair-measurement rows, linear cosets mod 4, and small random row
/// subsets), then get a random bijection per column, a column permutation and
/// a row shuffle. Every candidate is re-validated; rejected ones are redrawn.
///
/// Coverage: every valid set with at most 16 rows has positive probability
/// through the random-subset template, but larger irregular sets are only
/// reached if they arise from a template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutcomeSetSampler {
    min_width: usize,
    max_width: usize,
}

impl OutcomeSetSampler {
    pub fn new(min_width: usize, max_width: usize) -> Result<Self, TheoryError> {
        if min_width == 0 || min_width > max_width {
            return Err(TheoryError::InvalidParticleCount { count: min_width });
        }
        if max_width > MAX_SAMPLER_WIDTH {
            return Err(TheoryError::InvalidParticleCount { count: max_width });
        }
        Ok(OutcomeSetSampler {
            min_width,
            max_width,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> OutcomeSet {
        let width = rng.random_range(self.min_width..=self.max_width);
        for _ in 0..MAX_ATTEMPTS {
            let rows = match rng.random_range(0..4) {
                0 => product(width, rng),
                1 if width >= 2 => graph(width, rng),
                2 => coset(width, rng),
                _ => random_subset(width, rng),
            };
            if let Ok(set) = OutcomeSet::new(transform(rows, rng)) {
                return set;
            }
        }
        OutcomeSet::new(transform(product(width, rng), rng)).expect("products are valid")
    }
}

fn values_subset<R: Rng + ?Sized>(rng: &mut R) -> Vec<u8> {
    let k = rng.random_range(2..=4);
    let mut all = vec![0u8, 1, 2, 3];
    all.shuffle(rng);
    all.truncate(k);
    all
}

fn cartesian(columns: &[Vec<u8>]) -> Vec<Vec<u8>> {
    columns.iter().fold(vec![Vec::new()], |acc, col| {
        acc.iter()
            .flat_map(|prefix| {
                col.iter().map(move |&v| {
                    let mut row = prefix.clone();
                    row.push(v);
                    row
                })
            })
            .collect()
    })
}

fn product<R: Rng + ?Sized>(width: usize, rng: &mut R) -> Vec<Vec<u8>> {
    let columns: Vec<Vec<u8>> = (0..width).map(|_| values_subset(rng)).collect();
    cartesian(&columns)
}

/// Rows `(a, f(a), rest..)` for `a` in a subset and a random bijection `f`.
fn graph<R: Rng + ?Sized>(width: usize, rng: &mut R) -> Vec<Vec<u8>> {
    let f = Bijection::all().choose(rng).expect("24 bijections").table();
    let base: Vec<Vec<u8>> = values_subset(rng)
        .into_iter()
        .map(|a| vec![a, f[a as usize]])
        .collect();
    let rest: Vec<Vec<u8>> = (2..width).map(|_| values_subset(rng)).collect();
    let tails = cartesian(&rest);
    base.iter()
        .flat_map(|b| {
            tails.iter().map(move |t| {
                let mut row = b.clone();
                row.extend_from_slice(t);
                row
            })
        })
        .collect()
}

/// `{x : sum a_i x_i = c (mod 4)}`.
fn coset<R: Rng + ?Sized>(width: usize, rng: &mut R) -> Vec<Vec<u8>> {
    let a: Vec<u32> = (0..width).map(|_| rng.random_range(1..4)).collect();
    let c: u32 = rng.random_range(0..4);
    SystemState::all(width)
        .map(|s| s.values())
        .filter(|row| row.iter().zip(&a).map(|(&x, &k)| x as u32 * k).sum::<u32>() % 4 == c)
        .collect()
}

fn random_subset<R: Rng + ?Sized>(width: usize, rng: &mut R) -> Vec<Vec<u8>> {
    let total = 4usize.pow(width as u32);
    let k = rng.random_range(4..=total.min(16));
    rand::seq::index::sample(rng, total, k)
        .into_iter()
        .map(|i| SystemState::from_index(i, width).values())
        .collect()
}

fn transform<R: Rng + ?Sized>(rows: Vec<Vec<u8>>, rng: &mut R) -> Vec<SystemState> {
    let width = rows.first().map_or(0, Vec::len);
    let maps: Vec<[u8; 4]> = (0..width)
        .map(|_| Bijection::all().choose(rng).expect("24 bijections").table())
        .collect();
    let mut order: Vec<usize> = (0..width).collect();
    order.shuffle(rng);
    let mut out: Vec<SystemState> = rows
        .iter()
        .map(|row| {
            let vals: Vec<ParticleState> = order
                .iter()
                .map(|&c| ParticleState::new(maps[c][row[c] as usize]).expect("in range"))
                .collect();
            SystemState::new(vals).expect("non-empty row")
        })
        .collect();
    out.shuffle(rng);
    out
}
