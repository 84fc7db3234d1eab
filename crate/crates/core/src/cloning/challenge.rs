use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::strategy::{AliceAction, StrategyNode};
use super::{CloningError, CloningStrategy};
use crate::prob::{self, Prob};
use crate::rng::trial_rng;
use crate::spacetime::{audit_locality, ParticleId, Position, World};
use crate::theory::{
    find_outcome, measure, posterior_mixture, Measurement, Mixture, ParticleState, SystemState,
};

/// Result of Peter's preparation measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparationRecord {
    pub measurement: Measurement,
    pub outcome: usize,
    /// Peter's knowledge: uniform over the rows of the outcome set.
    pub epistemic: Mixture,
    ontic: ParticleState,
}

impl PreparationRecord {
    /// The particle's hidden value after preparation (god view).
    pub fn god_view_state(&self) -> ParticleState {
        self.ontic
    }
}

fn check_preparation(p: &Measurement) -> Result<(), CloningError> {
    if p.num_particles() != 1 {
        return Err(CloningError::PreparationArity);
    }
    Ok(())
}

/// Prepares one particle from a uniformly random unknown value by measuring
/// it with `p`.
pub fn peter_prepare<R: Rng + ?Sized>(
    p: &Measurement,
    rng: &mut R,
) -> Result<PreparationRecord, CloningError> {
    check_preparation(p)?;
    let initial = SystemState::uniform(1, rng);
    let (outcome, post) = measure(p, &initial, rng)?;
    Ok(PreparationRecord {
        measurement: p.clone(),
        outcome,
        epistemic: posterior_mixture(p, outcome)?,
        ontic: post.particles()[0],
    })
}

/// How many particles Peter takes back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChallengeMode {
    /// Two particles; both must reproduce Peter's outcome.
    #[default]
    Clone,
    /// Control game: only the first returned particle is tested.
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChallengeConfig {
    pub trials: u64,
    pub seed: u64,
    /// Distance between Peter's and Alice's labs.
    pub separation: Position,
    pub mode: ChallengeMode,
}

impl Default for ChallengeConfig {
    fn default() -> Self {
        ChallengeConfig {
            trials: 10_000,
            seed: 0,
            separation: 1,
            mode: ChallengeMode::Clone,
        }
    }
}

/// Exact-copy bookkeeping for one input value: how often the returned pair
/// was not `(v, v)` where `v` is the value Alice received (god view).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CopyTally {
    pub reached: u64,
    pub mismatches: u64,
}

/// Statistics for one root-to-leaf path of the strategy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BranchStats {
    /// Measurement outcomes along the path.
    pub path: Vec<usize>,
    pub returned: [usize; 2],
    pub reached: u64,
    pub passes: u64,
    /// Indexed by the input value Alice received.
    pub copy_by_input: [CopyTally; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChallengeResult {
    pub trials: u64,
    pub passes: u64,
    #[serde(with = "prob::as_string")]
    pub pass_rate: Prob,
    pub pass_rate_f64: f64,
    pub locality_violations: u64,
    pub branches: Vec<BranchStats>,
}

struct Trial {
    path: Vec<usize>,
    returned: [usize; 2],
    input: ParticleState,
    returned_hidden: [ParticleState; 2],
    passed: bool,
    audit_ok: bool,
}

const PETER: &str = "peter";
const ALICE: &str = "alice";

fn play<R: Rng + ?Sized>(
    strategy: &CloningStrategy,
    preparations: &[Measurement],
    config: &ChallengeConfig,
    rng: &mut R,
) -> Result<Trial, CloningError> {
    let peter_lab: Position = 0;
    let alice_lab = config.separation;
    let mut world = World::new();

    let p = &preparations[rng.random_range(0..preparations.len())];
    world.spawn_unknown(1, peter_lab, rng)?;
    let outcome = world.measure(PETER, &[1], p, rng)?;
    world.move_particle(PETER, 1, alice_lab)?;
    let input = world.god_view(1)?;
    for id in 2..=strategy.num_particles() as ParticleId {
        world.spawn_unknown(id, alice_lab, rng)?;
    }

    let mut node = strategy.tree();
    let mut path = Vec::new();
    let returned = loop {
        match node {
            StrategyNode::Leaf(pair) => break *pair,
            StrategyNode::Node(n) => {
                let ids: Vec<ParticleId> = n
                    .target_particles
                    .iter()
                    .map(|&i| i as ParticleId)
                    .collect();
                let branch = match &n.action {
                    AliceAction::Manipulate(u) => {
                        world.apply_local(ALICE, ids[0], u)?;
                        0
                    }
                    AliceAction::Measure(m) => {
                        let r = world.measure(ALICE, &ids, m, rng)?;
                        path.push(r);
                        r
                    }
                };
                node = &n.children_by_outcome[branch];
            }
        }
    };

    let tested: &[usize] = match config.mode {
        ChallengeMode::Clone => &returned,
        ChallengeMode::Control => &returned[..1],
    };
    let returned_hidden = [
        world.god_view(returned[0] as ParticleId)?,
        world.god_view(returned[1] as ParticleId)?,
    ];
    let mut passed = true;
    for &i in tested {
        world.move_particle(ALICE, i as ParticleId, peter_lab)?;
        passed &= world.measure(PETER, &[i as ParticleId], p, rng)? == outcome;
    }
    let audit_ok = audit_locality(world.log())
        .map(|r| r.passed())
        .unwrap_or(false);

    Ok(Trial {
        path,
        returned,
        input,
        returned_hidden,
        passed,
        audit_ok,
    })
}

/// Plays the challenge `config.trials` times. Trial `i` draws from stream `i`
/// of `config.seed`.
pub fn run_challenge(
    strategy: &CloningStrategy,
    preparations: &[Measurement],
    config: &ChallengeConfig,
) -> Result<ChallengeResult, CloningError> {
    if preparations.is_empty() {
        return Err(CloningError::NoPreparations);
    }
    preparations.iter().try_for_each(check_preparation)?;
    if config.trials == 0 {
        return Err(CloningError::NoTrials);
    }

    let trials: Vec<Trial> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            play(
                strategy,
                preparations,
                config,
                &mut trial_rng(config.seed, i),
            )
        })
        .collect::<Result<_, _>>()?;

    let mut branches: BTreeMap<Vec<usize>, BranchStats> = BTreeMap::new();
    let mut passes = 0;
    let mut violations = 0;
    for t in &trials {
        passes += t.passed as u64;
        violations += (!t.audit_ok) as u64;
        let b = branches
            .entry(t.path.clone())
            .or_insert_with(|| BranchStats {
                path: t.path.clone(),
                returned: t.returned,
                reached: 0,
                passes: 0,
                copy_by_input: [CopyTally::default(); 4],
            });
        b.reached += 1;
        b.passes += t.passed as u64;
        let copy_ok = match config.mode {
            ChallengeMode::Clone => t.returned_hidden == [t.input; 2],
            ChallengeMode::Control => t.returned_hidden[0] == t.input,
        };
        let tally = &mut b.copy_by_input[t.input.value() as usize];
        tally.reached += 1;
        tally.mismatches += (!copy_ok) as u64;
    }

    let pass_rate = Prob::new(passes as i64, config.trials as i64);
    Ok(ChallengeResult {
        trials: config.trials,
        passes,
        pass_rate,
        pass_rate_f64: prob::to_f64(&pass_rate),
        locality_violations: violations,
        branches: branches.into_values().collect(),
    })
}

/// Peter's verdict on a returned pair of hidden values, used by the exact
/// evaluator as well.
pub(crate) fn pair_passes(p: &Measurement, outcome: usize, values: &[ParticleState]) -> bool {
    values.iter().all(|&v| {
        find_outcome(p, &SystemState::new(vec![v]).expect("one particle")).expect("arity 1")
            == outcome
    })
}
