use serde::{Deserialize, Serialize};

use super::{Measurement, SystemState, TheoryError};

/// Which measurements [`enumerate_valid_measurements`] generates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementFamily {
    /// Every valid measurement. Only tractable for one particle.
    Exhaustive,
    /// Two-particle subclass: products of one-particle measurements, plus
    /// partitions by the value of `a·x1 + b·x2 mod 4` for `a, b ∈ {1,2,3}`.
    ProductsAndCosets,
}

/// All set partitions of `{0, …, n-1}`, blocks in order of least element and
/// each block ascending. Generated from restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut rgs = vec![0usize; n];
    loop {
        let blocks = rgs.iter().max().copied().unwrap_or(0) + 1;
        let mut partition = vec![Vec::new(); blocks];
        for (element, &block) in rgs.iter().enumerate() {
            partition[block].push(element);
        }
        out.push(partition);

        // next restricted growth string: a[i] <= 1 + max(a[0..i])
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            let prefix_max = rgs[..i].iter().max().copied().unwrap_or(0);
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                for slot in &mut rgs[i + 1..] {
                    *slot = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Valid measurements on `n` particles in canonical form, ordered by number
/// of outcomes (descending), then by their outcome sets.
///
/// `n = 1` is exhaustive whatever the family; `n = 2` requires
/// [`MeasurementFamily::ProductsAndCosets`].
pub fn enumerate_valid_measurements(
    n: usize,
    family: MeasurementFamily,
) -> Result<Vec<Measurement>, TheoryError> {
    let mut found = match (n, family) {
        (1, _) => single_particle(),
        (2, MeasurementFamily::ProductsAndCosets) => two_particle_subclass(),
        _ => {
            return Err(TheoryError::UnsupportedEnumeration {
                num_particles: n,
                family,
            })
        }
    };
    found.sort_by(|a, b| {
        b.num_outcomes()
            .cmp(&a.num_outcomes())
            .then_with(|| a.to_def().outcomes.cmp(&b.to_def().outcomes))
    });
    found.dedup();
    Ok(found)
}

fn single_particle() -> Vec<Measurement> {
    set_partitions(4)
        .into_iter()
        .filter(|p| p.iter().all(|block| block.len() >= 2))
        .map(|p| {
            let blocks = p
                .into_iter()
                .map(|block| {
                    block
                        .into_iter()
                        .map(|v| SystemState::from_values(&[v as u8]).expect("value < 4"))
                        .collect()
                })
                .collect();
            Measurement::from_outcomes(1, blocks).expect("blocks of size >= 2 are valid")
        })
        .collect()
}

fn two_particle_subclass() -> Vec<Measurement> {
    let singles = single_particle();
    let mut out = Vec::new();
    for first in &singles {
        for second in &singles {
            let mut blocks = Vec::new();
            for a in first.outcome_sets() {
                for b in second.outcome_sets() {
                    let mut rows = Vec::with_capacity(a.len() * b.len());
                    for x in a.rows() {
                        for y in b.rows() {
                            let mut v = x.values();
                            v.extend(y.values());
                            rows.push(SystemState::from_values(&v).expect("two values"));
                        }
                    }
                    blocks.push(rows);
                }
            }
            if let Ok(m) = Measurement::from_outcomes(2, blocks) {
                out.push(m.canonical());
            }
        }
    }
    for a in 1..4u8 {
        for b in 1..4u8 {
            let mut blocks: Vec<Vec<SystemState>> = vec![Vec::new(); 4];
            for s in SystemState::all(2) {
                let v = s.values();
                blocks[((a * v[0] + b * v[1]) % 4) as usize].push(s);
            }
            blocks.retain(|rows| !rows.is_empty());
            if let Ok(m) = Measurement::from_outcomes(2, blocks) {
                out.push(m.canonical());
            }
        }
    }
    out
}
