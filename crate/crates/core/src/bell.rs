//! The four-outcome pair measurement, correlated pair preparation, and the
//! teleportation protocol.
//!
//! Geometry of a teleportation run: Alice at cell 0, Bob at cell `distance`,
//! the pair source at `distance / 2`. Particle 1 is Alice's input, particles
//! 2 and 3 form the pair. The sequence is:
//!
//! 1. the source measures the pair with [`bell_measurement`] and rotates
//!    particle 3 so the pair reads `(y, y)`;
//! 2. particle 2 walks to Alice, particle 3 walks to Bob;
//! 3. Alice measures `(1, 2)` and gets `r`, with `y = x - r mod 4`;
//! 4. `r` travels to Bob as a classical message;
//! 5. Bob applies the rotation `U_r` to particle 3, which then holds `x`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::rng::trial_rng;
use crate::spacetime::{
    audit_locality, MessageTicket, ParticleId, Position, SpacetimeError, Tick, World, WorldLog,
};
use crate::stats::{chi_square_uniform, ChiSquareTest};
use crate::theory::{measure, rotation, Measurement, ParticleState, SystemState};

pub const INPUT_PARTICLE: ParticleId = 1;
pub const ALICE_PAIR_PARTICLE: ParticleId = 2;
pub const BOB_PAIR_PARTICLE: ParticleId = 3;

pub const DEFAULT_DISTANCE: Position = 10;

/// The two-particle measurement whose outcome set `r` holds the four states
/// `(a, a - r mod 4)`, rows in order `a = 0..3`.
pub fn bell_measurement() -> Measurement {
    let outcomes = (0..4u8)
        .map(|r| {
            (0..4u8)
                .map(|a| SystemState::from_values(&[a, (a + 4 - r) % 4]).expect("values < 4"))
                .collect()
        })
        .collect();
    Measurement::from_outcomes(2, outcomes).expect("pair measurement is valid")
}

/// A prepared correlated pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellPairRecord {
    pub pair_outcome: u8,
    pub particle_ids: (ParticleId, ParticleId),
    // (y, y - r mod 4)
    ontic: SystemState,
}

impl BellPairRecord {
    /// Builds a record from a known hidden `y` (god view), e.g. for
    /// exhaustive tests over all pairs.
    pub fn from_hidden(pair_outcome: u8, y: ParticleState) -> Self {
        let second = y.shifted(4 - pair_outcome % 4);
        BellPairRecord {
            pair_outcome: pair_outcome % 4,
            particle_ids: (ALICE_PAIR_PARTICLE, BOB_PAIR_PARTICLE),
            ontic: SystemState::new(vec![y, second]).expect("two particles"),
        }
    }

    /// Hidden value `y` of the first particle (god view).
    pub fn god_view_y(&self) -> ParticleState {
        self.ontic.particles()[0]
    }

    /// Hidden pair state (god view).
    pub fn god_view_state(&self) -> &SystemState {
        &self.ontic
    }
}

/// Prepares a pair from a uniformly random unknown state by one pair
/// measurement, outside any world.
pub fn prepare_pair<R: Rng + ?Sized>(rng: &mut R) -> BellPairRecord {
    let initial = SystemState::uniform(2, rng);
    let (r, post) = measure(&bell_measurement(), &initial, rng).expect("two-particle state");
    BellPairRecord {
        pair_outcome: r as u8,
        particle_ids: (ALICE_PAIR_PARTICLE, BOB_PAIR_PARTICLE),
        ontic: post,
    }
}

/// Prepares a pair inside `world`: the two particles must already exist and
/// be co-located. Their current values act as the unknown initial state.
pub fn prepare_pair_in<R: Rng + ?Sized>(
    world: &mut World,
    actor: &str,
    ids: (ParticleId, ParticleId),
    rng: &mut R,
) -> Result<BellPairRecord, SpacetimeError> {
    let r = world.measure(actor, &[ids.0, ids.1], &bell_measurement(), rng)?;
    let ontic = SystemState::new(vec![world.god_view(ids.0)?, world.god_view(ids.1)?])?;
    Ok(BellPairRecord {
        pair_outcome: r as u8,
        particle_ids: ids,
        ontic,
    })
}

/// Rotates the second particle by `U_r` so the pair becomes `(y, y)`.
pub fn normalize_pair(record: &BellPairRecord) -> BellPairRecord {
    let u = rotation(record.pair_outcome).expect("outcome < 4");
    let second = u.apply(record.ontic.particles()[1]);
    BellPairRecord {
        pair_outcome: 0,
        particle_ids: record.particle_ids,
        ontic: record.ontic.with_particle(1, second),
    }
}

/// [`normalize_pair`] acting on the particles in `world`.
pub fn normalize_pair_in(
    world: &mut World,
    actor: &str,
    record: &BellPairRecord,
) -> Result<BellPairRecord, SpacetimeError> {
    let u = rotation(record.pair_outcome)?;
    world.apply_local(actor, record.particle_ids.1, &u)?;
    Ok(normalize_pair(record))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TeleportConfig {
    /// Alice–Bob separation in cells.
    pub distance: Position,
}

impl Default for TeleportConfig {
    fn default() -> Self {
        TeleportConfig {
            distance: DEFAULT_DISTANCE,
        }
    }
}

impl TeleportConfig {
    pub fn alice(&self) -> Position {
        0
    }

    pub fn bob(&self) -> Position {
        self.distance
    }

    pub fn source(&self) -> Position {
        self.distance / 2
    }
}

/// The classical message carrying Alice's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassicalMessage {
    pub content: u8,
    pub origin: Position,
    pub destination: Position,
    pub send_tick: Tick,
    pub recv_tick: Tick,
}

/// Everything that happened in one teleportation run.
///
/// Fields named `*_hidden` or `input_x` / `final_state_particle3` are god
/// view and are only emitted by [`TeleportationTranscript::to_json`] when
/// asked for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeleportationTranscript {
    pub input_x: ParticleState,
    /// Outcome of the source's pair measurement, before normalization.
    pub pair_outcome: u8,
    pub pair_y_hidden: ParticleState,
    pub alice_outcome: u8,
    /// State of (particle 1, particle 2) right after Alice's measurement.
    pub alice_post_hidden: SystemState,
    pub message: ClassicalMessage,
    pub bob_correction: u8,
    /// Particle 3 at Bob, just before the message arrived.
    pub particle3_before_message_hidden: ParticleState,
    pub final_state_particle3: ParticleState,
    pub event_log: WorldLog,
}

#[derive(Serialize)]
struct TranscriptJson<'a> {
    pair_outcome: u8,
    alice_outcome: u8,
    bob_correction: u8,
    message: &'a ClassicalMessage,
    events: &'a WorldLog,
    #[serde(skip_serializing_if = "Option::is_none")]
    god_view: Option<GodViewJson>,
}

#[derive(Serialize)]
struct GodViewJson {
    input_x: u8,
    pair_y: u8,
    alice_post_state: Vec<u8>,
    particle3_before_message: u8,
    final_state_particle3: u8,
}

impl TeleportationTranscript {
    pub fn succeeded(&self) -> bool {
        self.final_state_particle3 == self.input_x
    }

    /// JSON view; hidden values appear only when `god_view` is set.
    pub fn to_json(&self, god_view: bool) -> serde_json::Value {
        let view = TranscriptJson {
            pair_outcome: self.pair_outcome,
            alice_outcome: self.alice_outcome,
            bob_correction: self.bob_correction,
            message: &self.message,
            events: &self.event_log,
            god_view: god_view.then(|| GodViewJson {
                input_x: self.input_x.value(),
                pair_y: self.pair_y_hidden.value(),
                alice_post_state: self.alice_post_hidden.values(),
                particle3_before_message: self.particle3_before_message_hidden.value(),
                final_state_particle3: self.final_state_particle3.value(),
            }),
        };
        serde_json::to_value(view).expect("transcript serializes")
    }
}

/// Teleports the hidden value `x` with a freshly prepared pair.
pub fn teleport_run<R: Rng + ?Sized>(
    x: ParticleState,
    config: &TeleportConfig,
    rng: &mut R,
) -> Result<TeleportationTranscript, SpacetimeError> {
    let mut world = World::new();
    let source = config.source();
    world.spawn_unknown(ALICE_PAIR_PARTICLE, source, rng)?;
    world.spawn_unknown(BOB_PAIR_PARTICLE, source, rng)?;
    let pair = prepare_pair_in(
        &mut world,
        "source",
        (ALICE_PAIR_PARTICLE, BOB_PAIR_PARTICLE),
        rng,
    )?;
    finish(world, x, pair, config, rng)
}

/// Teleports `x` using a pair already in the state described by `pair`
/// (god view), sitting at the source.
pub fn teleport_run_from_pair<R: Rng + ?Sized>(
    x: ParticleState,
    pair: &BellPairRecord,
    config: &TeleportConfig,
    rng: &mut R,
) -> Result<TeleportationTranscript, SpacetimeError> {
    let mut world = World::new();
    let source = config.source();
    let values = pair.god_view_state().particles();
    world.spawn(ALICE_PAIR_PARTICLE, source, values[0])?;
    world.spawn(BOB_PAIR_PARTICLE, source, values[1])?;
    let pair = BellPairRecord {
        particle_ids: (ALICE_PAIR_PARTICLE, BOB_PAIR_PARTICLE),
        ..pair.clone()
    };
    finish(world, x, pair, config, rng)
}

fn finish<R: Rng + ?Sized>(
    mut world: World,
    x: ParticleState,
    pair: BellPairRecord,
    config: &TeleportConfig,
    rng: &mut R,
) -> Result<TeleportationTranscript, SpacetimeError> {
    let pair_outcome = pair.pair_outcome;
    let pair = normalize_pair_in(&mut world, "source", &pair)?;
    let y = pair.god_view_y();

    world.spawn(INPUT_PARTICLE, config.alice(), x)?;
    world.move_particle("source", ALICE_PAIR_PARTICLE, config.alice())?;
    world.move_particle("source", BOB_PAIR_PARTICLE, config.bob())?;

    let r = world.measure(
        "alice",
        &[INPUT_PARTICLE, ALICE_PAIR_PARTICLE],
        &bell_measurement(),
        rng,
    )? as u8;
    let alice_post = SystemState::new(vec![
        world.god_view(INPUT_PARTICLE)?,
        world.god_view(ALICE_PAIR_PARTICLE)?,
    ])?;

    let ticket: MessageTicket =
        world.send_message("alice", r.to_string(), config.alice(), config.bob());
    let before = world.god_view(BOB_PAIR_PARTICLE)?;
    let received = world.await_message(&ticket);
    let correction: u8 = received.parse().expect("message holds an outcome");
    world.apply_local("bob", BOB_PAIR_PARTICLE, &rotation(correction)?)?;
    let final_state = world.god_view(BOB_PAIR_PARTICLE)?;

    Ok(TeleportationTranscript {
        input_x: x,
        pair_outcome,
        pair_y_hidden: y,
        alice_outcome: r,
        alice_post_hidden: alice_post,
        message: ClassicalMessage {
            content: r,
            origin: config.alice(),
            destination: config.bob(),
            send_tick: ticket.send_tick,
            recv_tick: ticket.delivery_tick,
        },
        bob_correction: correction,
        particle3_before_message_hidden: before,
        final_state_particle3: final_state,
        event_log: world.into_log(),
    })
}

/// Aggregate of many teleportation runs with uniformly random inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeleportStats {
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// Runs whose event log failed the locality audit.
    pub locality_violations: u64,
    pub alice_outcome_histogram: [u64; 4],
    /// God view: particle 1's value after Alice's measurement.
    pub particle1_histogram: [u64; 4],
    /// God view: `[r][a]` counts runs with outcome `r` leaving (1, 2) in row
    /// `(a, a - r)`.
    pub post_state_by_outcome: [[u64; 4]; 4],
    pub alice_outcome_uniformity: ChiSquareTest,
    pub particle1_uniformity: ChiSquareTest,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    trials: u64,
    successes: u64,
    violations: u64,
    outcomes: [u64; 4],
    particle1: [u64; 4],
    rows: [[u64; 4]; 4],
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.trials += o.trials;
        self.successes += o.successes;
        self.violations += o.violations;
        for i in 0..4 {
            self.outcomes[i] += o.outcomes[i];
            self.particle1[i] += o.particle1[i];
            for j in 0..4 {
                self.rows[i][j] += o.rows[i][j];
            }
        }
        self
    }
}

/// Runs `trials` teleportations; trial `i` uses stream `i` of `seed`, so the
/// result does not depend on thread scheduling.
pub fn teleport_stats(
    trials: u64,
    seed: u64,
    config: &TeleportConfig,
) -> Result<TeleportStats, SpacetimeError> {
    assert!(trials >= 1, "at least one trial");
    let tally = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let x = ParticleState::uniform(&mut rng);
            let t = teleport_run(x, config, &mut rng)?;
            let audit_ok = audit_locality(&t.event_log)
                .map(|r| r.passed())
                .unwrap_or(false);
            let mut tally = Tally {
                trials: 1,
                successes: t.succeeded() as u64,
                violations: (!audit_ok) as u64,
                ..Tally::default()
            };
            let r = t.alice_outcome as usize;
            let p1 = t.alice_post_hidden.particles()[0].value() as usize;
            tally.outcomes[r] = 1;
            tally.particle1[p1] = 1;
            tally.rows[r][p1] = 1;
            Ok::<_, SpacetimeError>(tally)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;

    Ok(TeleportStats {
        trials: tally.trials,
        successes: tally.successes,
        success_rate: tally.successes as f64 / tally.trials as f64,
        locality_violations: tally.violations,
        alice_outcome_histogram: tally.outcomes,
        particle1_histogram: tally.particle1,
        post_state_by_outcome: tally.rows,
        alice_outcome_uniformity: chi_square_uniform(&tally.outcomes),
        particle1_uniformity: chi_square_uniform(&tally.particle1),
    })
}
