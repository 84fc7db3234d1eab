use std::collections::BTreeMap;

use num_traits::Zero;

use super::challenge::{pair_passes, ChallengeMode};
use super::strategy::{AliceAction, StrategyNode};
use super::{CloningError, CloningStrategy};
use crate::prob::Prob;
use crate::theory::Measurement;
use crate::theory::{ParticleState, SystemState};

/// Sub-probability distribution over (preparation index, Peter's outcome,
/// index of Alice's joint state).
pub(crate) type Dist = BTreeMap<(usize, usize, usize), Prob>;

/// Joint distribution right after Alice receives the particle: preparation
/// uniform over `preparations`, Peter's particle uniformly random before his
/// measurement, ancillas uniformly random.
pub(crate) fn initial_distribution(preparations: &[Measurement], n: usize) -> Dist {
    let mut dist = Dist::new();
    let prep_weight = Prob::new(1, preparations.len() as i64);
    let ancilla_states = 4usize.pow(n as u32 - 1);
    for (k, p) in preparations.iter().enumerate() {
        for v in 0..4 {
            let r = p.outcome_of_index(v);
            let rows = p.outcome_sets()[r].rows();
            let w = prep_weight * Prob::new(1, 4)
                / Prob::from_integer(rows.len() as i64)
                / Prob::from_integer(ancilla_states as i64);
            for row in rows {
                let first = row.index();
                for ancillas in 0..ancilla_states {
                    let idx = first * ancilla_states + ancillas;
                    *dist.entry((k, r, idx)).or_insert_with(Prob::zero) += w;
                }
            }
        }
    }
    dist
}

/// Applies an action; returns one sub-distribution per branch.
pub(crate) fn apply_action(
    dist: &Dist,
    action: &AliceAction,
    targets: &[usize],
    n: usize,
) -> Vec<Dist> {
    let positions: Vec<usize> = targets.iter().map(|t| t - 1).collect();
    match action {
        AliceAction::Manipulate(u) => {
            let mut out = Dist::new();
            for (&(k, r, idx), w) in dist {
                let s = SystemState::from_index(idx, n);
                let p = positions[0];
                let moved = s.with_particle(p, u.apply(s.particles()[p]));
                *out.entry((k, r, moved.index())).or_insert_with(Prob::zero) += *w;
            }
            vec![out]
        }
        AliceAction::Measure(m) => {
            let mut out = vec![Dist::new(); m.num_outcomes()];
            for (&(k, r, idx), w) in dist {
                let s = SystemState::from_index(idx, n);
                let c = m.outcome_of_index(s.project(&positions).index());
                let rows = m.outcome_sets()[c].rows();
                let share = *w / Prob::from_integer(rows.len() as i64);
                for row in rows {
                    let mut post = s.clone();
                    for (&p, &v) in positions.iter().zip(row.particles()) {
                        post = post.with_particle(p, v);
                    }
                    *out[c]
                        .entry((k, r, post.index()))
                        .or_insert_with(Prob::zero) += share;
                }
            }
            out
        }
    }
}

/// Probability mass in `dist` that passes Peter's test with particles `pair`.
pub(crate) fn leaf_value(
    dist: &Dist,
    preparations: &[Measurement],
    pair: [usize; 2],
    n: usize,
    mode: ChallengeMode,
) -> Prob {
    let tested: &[usize] = match mode {
        ChallengeMode::Clone => &pair,
        ChallengeMode::Control => &pair[..1],
    };
    let mut total = Prob::zero();
    for (&(k, r, idx), w) in dist {
        let s = SystemState::from_index(idx, n);
        let values: Vec<ParticleState> = tested.iter().map(|&i| s.particles()[i - 1]).collect();
        if pair_passes(&preparations[k], r, &values) {
            total += *w;
        }
    }
    total
}

fn evaluate(
    node: &StrategyNode,
    dist: &Dist,
    preparations: &[Measurement],
    n: usize,
    mode: ChallengeMode,
) -> Prob {
    match node {
        StrategyNode::Leaf(pair) => leaf_value(dist, preparations, *pair, n, mode),
        StrategyNode::Node(a) => apply_action(dist, &a.action, &a.target_particles, n)
            .iter()
            .zip(&a.children_by_outcome)
            .map(|(d, child)| evaluate(child, d, preparations, n, mode))
            .sum(),
    }
}

/// Exact probability that `strategy` passes one round of the challenge.
pub fn exact_pass_probability(
    strategy: &CloningStrategy,
    preparations: &[Measurement],
    mode: ChallengeMode,
) -> Result<Prob, CloningError> {
    if preparations.is_empty() {
        return Err(CloningError::NoPreparations);
    }
    if preparations.iter().any(|p| p.num_particles() != 1) {
        return Err(CloningError::PreparationArity);
    }
    let n = strategy.num_particles();
    let dist = initial_distribution(preparations, n);
    Ok(evaluate(strategy.tree(), &dist, preparations, n, mode))
}
