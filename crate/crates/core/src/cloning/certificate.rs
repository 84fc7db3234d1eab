use super::CloningError;
use crate::prob::Prob;
use crate::theory::{OutcomeSet, ParticleState};

/// Fraction of rows of `c` whose designated columns (1-based) are not
/// `(target, target)`.
///
/// If Alice's measurement leaves her with outcome set `c` and she returns the
/// two designated particles, this is the chance that the pair is not an exact
/// copy of `target`. The column rule caps how often any value can appear in
/// a column, so the result is at least 1/4 whenever `c` is valid.
pub fn failure_certificate(
    c: &OutcomeSet,
    columns: (usize, usize),
    target: ParticleState,
) -> Result<Prob, CloningError> {
    let width = c.num_particles();
    let (first, second) = columns;
    if first == second || !(1..=width).contains(&first) || !(1..=width).contains(&second) {
        return Err(CloningError::InvalidColumns {
            first,
            second,
            width,
        });
    }
    let bad = c
        .rows()
        .iter()
        .filter(|row| {
            let p = row.particles();
            p[first - 1] != target || p[second - 1] != target
        })
        .count();
    Ok(Prob::new(bad as i64, c.len() as i64))
}
