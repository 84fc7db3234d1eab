//! Particles on a 1-D lattice with a global tick clock.
//!
//! Particles and classical messages travel at most one cell per tick. Joint
//! measurements need all participants on the same cell. Every action on a
//! [`World`] is appended to a [`WorldLog`], and [`audit_locality`] replays a
//! log to check those rules after the fact, independently of the world that
//! produced it.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::theory::{Bijection, Measurement, ParticleState, SystemState, TheoryError};

pub type ParticleId = u32;
pub type Position = i64;
pub type Tick = u64;
pub type MessageId = u64;

/// One logged event: `{"tick", "actor", "kind", "payload"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub tick: Tick,
    pub actor: String,
    #[serde(flatten)]
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Action {
    /// One unit step of a particle.
    Move {
        particle: ParticleId,
        from: Position,
        to: Position,
    },
    /// A measurement on one or more particles; `locations[i]` is where
    /// `particles[i]` sat.
    JointMeasure {
        particles: Vec<ParticleId>,
        locations: Vec<Position>,
        outcome: usize,
    },
    LocalOp {
        particle: ParticleId,
        location: Position,
        operation: String,
    },
    MsgSend {
        message: MessageId,
        origin: Position,
        destination: Position,
        content: String,
    },
    MsgRecv {
        message: MessageId,
        location: Position,
        content: String,
    },
}

/// Append-only event record. Serializes as a bare JSON array of events.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WorldLog {
    pub events: Vec<Event>,
}

impl WorldLog {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpacetimeError {
    #[error("unknown particle {0}")]
    UnknownParticle(ParticleId),
    #[error("particle {0} already exists")]
    DuplicateParticle(ParticleId),
    #[error("particles are not co-located: {}", describe_positions(.0))]
    NotColocated(Vec<(ParticleId, Position)>),
    #[error("a particle may appear only once in a joint measurement")]
    RepeatedParticle,
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

fn describe_positions(ps: &[(ParticleId, Position)]) -> String {
    ps.iter()
        .map(|(id, pos)| format!("particle {id} at {pos}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone)]
struct Particle {
    position: Position,
    value: ParticleState,
}

#[derive(Debug, Clone)]
struct InFlight {
    id: MessageId,
    destination: Position,
    deliver_at: Tick,
    content: String,
}

/// Receipt for a sent message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageTicket {
    pub id: MessageId,
    pub send_tick: Tick,
    pub delivery_tick: Tick,
}

/// Mutable world for one simulation run.
///
/// Holds particle positions, their hidden values, in-flight messages and the
/// event log. Ontic values are reachable only through [`World::spawn`] and
/// [`World::god_view`].
#[derive(Debug, Clone, Default)]
pub struct World {
    clock: Tick,
    particles: BTreeMap<ParticleId, Particle>,
    in_flight: Vec<InFlight>,
    inbox: BTreeMap<MessageId, String>,
    next_message: MessageId,
    log: WorldLog,
}

impl World {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clock(&self) -> Tick {
        self.clock
    }

    pub fn log(&self) -> &WorldLog {
        &self.log
    }

    pub fn into_log(self) -> WorldLog {
        self.log
    }

    /// Places a new particle with a chosen hidden value (god view).
    pub fn spawn(
        &mut self,
        id: ParticleId,
        position: Position,
        value: ParticleState,
    ) -> Result<(), SpacetimeError> {
        if self.particles.contains_key(&id) {
            return Err(SpacetimeError::DuplicateParticle(id));
        }
        self.particles.insert(id, Particle { position, value });
        Ok(())
    }

    /// Places a new particle in a uniformly random unknown state.
    pub fn spawn_unknown<R: Rng + ?Sized>(
        &mut self,
        id: ParticleId,
        position: Position,
        rng: &mut R,
    ) -> Result<(), SpacetimeError> {
        self.spawn(id, position, ParticleState::uniform(rng))
    }

    pub fn position(&self, id: ParticleId) -> Result<Position, SpacetimeError> {
        Ok(self.particle(id)?.position)
    }

    /// Simulator-only access to a particle's hidden value.
    pub fn god_view(&self, id: ParticleId) -> Result<ParticleState, SpacetimeError> {
        Ok(self.particle(id)?.value)
    }

    fn particle(&self, id: ParticleId) -> Result<&Particle, SpacetimeError> {
        self.particles
            .get(&id)
            .ok_or(SpacetimeError::UnknownParticle(id))
    }

    fn particle_mut(&mut self, id: ParticleId) -> Result<&mut Particle, SpacetimeError> {
        self.particles
            .get_mut(&id)
            .ok_or(SpacetimeError::UnknownParticle(id))
    }

    fn push(&mut self, actor: &str, action: Action) {
        self.log.events.push(Event {
            tick: self.clock,
            actor: actor.to_owned(),
            action,
        });
    }

    /// Advances the clock one tick, delivering messages that arrive at it.
    pub fn tick(&mut self) {
        self.clock += 1;
        self.deliver_due();
    }

    /// Advances the clock until `target` (no-op if already there).
    pub fn advance_to(&mut self, target: Tick) {
        while self.clock < target {
            self.tick();
        }
    }

    fn deliver_due(&mut self) {
        let now = self.clock;
        // in_flight is kept in send order, so equal arrival ticks stay FIFO
        let (due, pending): (Vec<_>, Vec<_>) = std::mem::take(&mut self.in_flight)
            .into_iter()
            .partition(|m| m.deliver_at <= now);
        self.in_flight = pending;
        for m in due {
            self.push(
                "channel",
                Action::MsgRecv {
                    message: m.id,
                    location: m.destination,
                    content: m.content.clone(),
                },
            );
            self.inbox.insert(m.id, m.content);
        }
    }

    /// Walks a particle to `destination`, one cell and one tick per step.
    /// Returns the number of ticks elapsed.
    pub fn move_particle(
        &mut self,
        actor: &str,
        id: ParticleId,
        destination: Position,
    ) -> Result<Tick, SpacetimeError> {
        let start = self.position(id)?;
        let steps = destination.abs_diff(start);
        let dir = (destination - start).signum();
        for _ in 0..steps {
            let from = self.position(id)?;
            let to = from + dir;
            self.tick();
            self.particle_mut(id)?.position = to;
            self.push(
                actor,
                Action::Move {
                    particle: id,
                    from,
                    to,
                },
            );
        }
        Ok(steps)
    }

    /// Ok with the shared position iff all `ids` sit on one cell.
    pub fn require_colocated(&self, ids: &[ParticleId]) -> Result<Position, SpacetimeError> {
        let positions = ids
            .iter()
            .map(|&id| Ok((id, self.position(id)?)))
            .collect::<Result<Vec<_>, SpacetimeError>>()?;
        match positions.first() {
            None => Ok(0),
            Some(&(_, first)) if positions.iter().all(|&(_, p)| p == first) => Ok(first),
            Some(_) => Err(SpacetimeError::NotColocated(positions)),
        }
    }

    /// Measures the particles `ids` (in that order) jointly with `m`.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        actor: &str,
        ids: &[ParticleId],
        m: &Measurement,
        rng: &mut R,
    ) -> Result<usize, SpacetimeError> {
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return Err(SpacetimeError::RepeatedParticle);
            }
        }
        let location = self.require_colocated(ids)?;
        let values = ids
            .iter()
            .map(|&id| self.god_view(id))
            .collect::<Result<Vec<_>, _>>()?;
        let pre = SystemState::new(values)?;
        let (outcome, post) = crate::theory::measure(m, &pre, rng)?;
        for (&id, &v) in ids.iter().zip(post.particles()) {
            self.particle_mut(id)?.value = v;
        }
        self.push(
            actor,
            Action::JointMeasure {
                particles: ids.to_vec(),
                locations: vec![location; ids.len()],
                outcome,
            },
        );
        Ok(outcome)
    }

    /// Applies a single-particle manipulation in place.
    pub fn apply_local(
        &mut self,
        actor: &str,
        id: ParticleId,
        u: &Bijection,
    ) -> Result<(), SpacetimeError> {
        let particle = self.particle_mut(id)?;
        particle.value = u.apply(particle.value);
        let location = particle.position;
        self.push(
            actor,
            Action::LocalOp {
                particle: id,
                location,
                operation: u.to_string(),
            },
        );
        Ok(())
    }

    /// Sends a classical message; it becomes readable at `destination` at
    /// `send_tick + |destination - origin|`.
    pub fn send_message(
        &mut self,
        actor: &str,
        content: impl Into<String>,
        origin: Position,
        destination: Position,
    ) -> MessageTicket {
        let id = self.next_message;
        self.next_message += 1;
        let content = content.into();
        let ticket = MessageTicket {
            id,
            send_tick: self.clock,
            delivery_tick: self.clock + destination.abs_diff(origin),
        };
        self.push(
            actor,
            Action::MsgSend {
                message: id,
                origin,
                destination,
                content: content.clone(),
            },
        );
        self.in_flight.push(InFlight {
            id,
            destination,
            deliver_at: ticket.delivery_tick,
            content,
        });
        self.deliver_due();
        ticket
    }

    /// The message content if it has arrived.
    pub fn read_message(&self, id: MessageId) -> Option<&str> {
        self.inbox.get(&id).map(String::as_str)
    }

    /// Waits (advancing the clock) until the message arrives, then reads it.
    pub fn await_message(&mut self, ticket: &MessageTicket) -> String {
        self.advance_to(ticket.delivery_tick);
        self.inbox
            .get(&ticket.id)
            .cloned()
            .expect("message delivered by its delivery tick")
    }
}

/// Which locality rule an event broke.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum LocalityViolation {
    /// A move longer than one cell, or two steps in one tick.
    SuperluminalParticle {
        particle: ParticleId,
        from: Position,
        to: Position,
        ticks: Tick,
    },
    /// A particle turned up somewhere its trajectory does not reach.
    Discontinuity {
        particle: ParticleId,
        expected: Position,
        found: Position,
    },
    NotColocated {
        particles: Vec<ParticleId>,
        locations: Vec<Position>,
    },
    SuperluminalMessage {
        message: MessageId,
        send_tick: Tick,
        recv_tick: Tick,
        distance: u64,
    },
    UnsentMessage {
        message: MessageId,
    },
    WrongDestination {
        message: MessageId,
        destination: Position,
        location: Position,
    },
    DuplicateMessageId {
        message: MessageId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub events_checked: usize,
    /// First violation with its event index.
    pub violation: Option<(usize, LocalityViolation)>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("malformed log: event {index} has tick {tick} after tick {previous}")]
    NonMonotoneTicks {
        index: usize,
        tick: Tick,
        previous: Tick,
    },
    #[error("malformed log: event {index} lists {particles} particles but {locations} locations")]
    LocationArity {
        index: usize,
        particles: usize,
        locations: usize,
    },
}

#[derive(Debug, Clone, Copy)]
struct Trajectory {
    position: Position,
    last_move: Option<Tick>,
}

/// Replays `log` and checks co-location of joint measurements, the unit
/// speed limit on particles, and message latency.
///
/// A particle's first appearance fixes its starting position; afterwards
/// it may only change position through `move` events.
pub fn audit_locality(log: &WorldLog) -> Result<AuditReport, AuditError> {
    let mut previous = 0;
    for (index, e) in log.events.iter().enumerate() {
        if e.tick < previous {
            return Err(AuditError::NonMonotoneTicks {
                index,
                tick: e.tick,
                previous,
            });
        }
        previous = e.tick;
        if let Action::JointMeasure {
            particles,
            locations,
            ..
        } = &e.action
        {
            if particles.len() != locations.len() {
                return Err(AuditError::LocationArity {
                    index,
                    particles: particles.len(),
                    locations: locations.len(),
                });
            }
        }
    }

    let mut trajectories: HashMap<ParticleId, Trajectory> = HashMap::new();
    let mut sent: HashMap<MessageId, (Tick, Position, Position)> = HashMap::new();
    let report = |index, v| {
        Ok(AuditReport {
            events_checked: index + 1,
            violation: Some((index, v)),
        })
    };

    // checks that `particle` is at `found`, fixing it there on first sight
    let locate = |trajectories: &mut HashMap<ParticleId, Trajectory>,
                  particle: ParticleId,
                  found: Position|
     -> Option<LocalityViolation> {
        let t = trajectories.entry(particle).or_insert(Trajectory {
            position: found,
            last_move: None,
        });
        (t.position != found).then_some(LocalityViolation::Discontinuity {
            particle,
            expected: t.position,
            found,
        })
    };

    for (index, e) in log.events.iter().enumerate() {
        match &e.action {
            Action::Move { particle, from, to } => {
                if let Some(v) = locate(&mut trajectories, *particle, *from) {
                    return report(index, v);
                }
                let t = trajectories.get_mut(particle).expect("located above");
                let distance = to.abs_diff(*from);
                let ticks = t.last_move.map_or(Tick::MAX, |last| e.tick - last);
                if distance > 1 || (distance == 1 && ticks < 1) {
                    return report(
                        index,
                        LocalityViolation::SuperluminalParticle {
                            particle: *particle,
                            from: *from,
                            to: *to,
                            ticks: ticks.min(e.tick),
                        },
                    );
                }
                t.position = *to;
                if distance > 0 {
                    t.last_move = Some(e.tick);
                }
            }
            Action::JointMeasure {
                particles,
                locations,
                ..
            } => {
                for (&p, &loc) in particles.iter().zip(locations) {
                    if let Some(v) = locate(&mut trajectories, p, loc) {
                        return report(index, v);
                    }
                }
                if locations.windows(2).any(|w| w[0] != w[1]) {
                    return report(
                        index,
                        LocalityViolation::NotColocated {
                            particles: particles.clone(),
                            locations: locations.clone(),
                        },
                    );
                }
            }
            Action::LocalOp {
                particle, location, ..
            } => {
                if let Some(v) = locate(&mut trajectories, *particle, *location) {
                    return report(index, v);
                }
            }
            Action::MsgSend {
                message,
                origin,
                destination,
                ..
            } => {
                if sent
                    .insert(*message, (e.tick, *origin, *destination))
                    .is_some()
                {
                    return report(
                        index,
                        LocalityViolation::DuplicateMessageId { message: *message },
                    );
                }
            }
            Action::MsgRecv {
                message, location, ..
            } => {
                let Some(&(send_tick, origin, destination)) = sent.get(message) else {
                    return report(
                        index,
                        LocalityViolation::UnsentMessage { message: *message },
                    );
                };
                if *location != destination {
                    return report(
                        index,
                        LocalityViolation::WrongDestination {
                            message: *message,
                            destination,
                            location: *location,
                        },
                    );
                }
                let distance = destination.abs_diff(origin);
                if e.tick < send_tick + distance {
                    return report(
                        index,
                        LocalityViolation::SuperluminalMessage {
                            message: *message,
                            send_tick,
                            recv_tick: e.tick,
                            distance,
                        },
                    );
                }
            }
        }
    }

    Ok(AuditReport {
        events_checked: log.events.len(),
        violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn ev(tick: Tick, action: Action) -> Event {
        Event {
            tick,
            actor: "test".into(),
            action,
        }
    }

    fn world_with(ids: &[(ParticleId, Position)]) -> World {
        let mut w = World::new();
        for &(id, pos) in ids {
            w.spawn(id, pos, ParticleState::ALL[0]).unwrap();
        }
        w
    }

    #[test]
    fn move_costs_one_tick_per_cell() {
        let mut w = world_with(&[(1, 0)]);
        assert_eq!(w.move_particle("a", 1, 5).unwrap(), 5);
        assert_eq!(w.clock(), 5);
        assert_eq!(w.move_particle("a", 1, 5).unwrap(), 0);
        assert_eq!(w.clock(), 5);

        let mut w = world_with(&[(1, 0)]);
        w.move_particle("a", 1, 3).unwrap();
        w.move_particle("a", 1, 1).unwrap();
        assert_eq!(w.clock(), 5);
        assert_eq!(w.position(1).unwrap(), 1);
        assert!(audit_locality(w.log()).unwrap().passed());

        assert_eq!(
            w.move_particle("a", 9, 1),
            Err(SpacetimeError::UnknownParticle(9))
        );
    }

    #[test]
    fn colocation() {
        let w = world_with(&[(1, 0), (2, 0), (3, 7)]);
        assert_eq!(w.require_colocated(&[1, 2]), Ok(0));
        assert!(matches!(
            w.require_colocated(&[1, 3]),
            Err(SpacetimeError::NotColocated(_))
        ));
        assert_eq!(w.require_colocated(&[3]), Ok(7));
        assert!(w.require_colocated(&[4]).is_err());
    }

    #[test]
    fn joint_measure_requires_colocation() {
        let bell = crate::bell::bell_measurement();
        let mut w = world_with(&[(1, 0), (2, 3)]);
        let mut rng = seeded(0);
        assert!(matches!(
            w.measure("a", &[1, 2], &bell, &mut rng),
            Err(SpacetimeError::NotColocated(_))
        ));
        assert!(w.log().is_empty());
        assert_eq!(
            w.measure("a", &[1, 1], &bell, &mut rng),
            Err(SpacetimeError::RepeatedParticle)
        );
    }

    #[test]
    fn message_latency() {
        let mut w = World::new();
        w.advance_to(4);
        let t = w.send_message("alice", "2", 0, 10);
        assert_eq!(t.delivery_tick, 14);
        assert_eq!(w.read_message(t.id), None);
        assert_eq!(w.await_message(&t), "2");
        assert_eq!(w.clock(), 14);

        let local = w.send_message("alice", "x", 3, 3);
        assert_eq!(local.delivery_tick, 14);
        assert_eq!(w.read_message(local.id), Some("x"));
        assert!(audit_locality(w.log()).unwrap().passed());
    }

    #[test]
    fn same_route_messages_keep_order() {
        let mut w = World::new();
        let a = w.send_message("alice", "first", 0, 3);
        let b = w.send_message("alice", "second", 0, 3);
        w.advance_to(3);
        let received: Vec<MessageId> = w
            .log()
            .events
            .iter()
            .filter_map(|e| match e.action {
                Action::MsgRecv { message, .. } => Some(message),
                _ => None,
            })
            .collect();
        assert_eq!(received, vec![a.id, b.id]);
    }

    #[test]
    fn audit_rejects_superluminal_message() {
        let log = WorldLog {
            events: vec![
                ev(
                    0,
                    Action::MsgSend {
                        message: 0,
                        origin: 0,
                        destination: 10,
                        content: "r".into(),
                    },
                ),
                ev(
                    9,
                    Action::MsgRecv {
                        message: 0,
                        location: 10,
                        content: "r".into(),
                    },
                ),
            ],
        };
        let report = audit_locality(&log).unwrap();
        assert!(matches!(
            report.violation,
            Some((
                1,
                LocalityViolation::SuperluminalMessage { distance: 10, .. }
            ))
        ));
    }

    #[test]
    fn audit_rejects_distant_joint_measurement() {
        let log = WorldLog {
            events: vec![ev(
                0,
                Action::JointMeasure {
                    particles: vec![1, 2],
                    locations: vec![0, 3],
                    outcome: 0,
                },
            )],
        };
        assert!(matches!(
            audit_locality(&log).unwrap().violation,
            Some((0, LocalityViolation::NotColocated { .. }))
        ));
    }

    #[test]
    fn audit_rejects_jumps() {
        let long_step = WorldLog {
            events: vec![ev(
                1,
                Action::Move {
                    particle: 1,
                    from: 0,
                    to: 3,
                },
            )],
        };
        assert!(!audit_locality(&long_step).unwrap().passed());

        let discontinuous = WorldLog {
            events: vec![
                ev(
                    0,
                    Action::LocalOp {
                        particle: 1,
                        location: 0,
                        operation: "U_1".into(),
                    },
                ),
                ev(
                    1,
                    Action::Move {
                        particle: 1,
                        from: 5,
                        to: 6,
                    },
                ),
            ],
        };
        assert!(matches!(
            audit_locality(&discontinuous).unwrap().violation,
            Some((1, LocalityViolation::Discontinuity { .. }))
        ));

        let two_steps_one_tick = WorldLog {
            events: vec![
                ev(
                    1,
                    Action::Move {
                        particle: 1,
                        from: 0,
                        to: 1,
                    },
                ),
                ev(
                    1,
                    Action::Move {
                        particle: 1,
                        from: 1,
                        to: 2,
                    },
                ),
            ],
        };
        assert!(matches!(
            audit_locality(&two_steps_one_tick).unwrap().violation,
            Some((1, LocalityViolation::SuperluminalParticle { .. }))
        ));
    }

    #[test]
    fn audit_rejects_orphan_receive_and_bad_ticks() {
        let orphan = WorldLog {
            events: vec![ev(
                3,
                Action::MsgRecv {
                    message: 7,
                    location: 0,
                    content: String::new(),
                },
            )],
        };
        assert!(!audit_locality(&orphan).unwrap().passed());

        let backwards = WorldLog {
            events: vec![
                ev(
                    3,
                    Action::LocalOp {
                        particle: 1,
                        location: 0,
                        operation: "U_0".into(),
                    },
                ),
                ev(
                    2,
                    Action::LocalOp {
                        particle: 1,
                        location: 0,
                        operation: "U_0".into(),
                    },
                ),
            ],
        };
        assert!(matches!(
            audit_locality(&backwards),
            Err(AuditError::NonMonotoneTicks { index: 1, .. })
        ));
    }

    #[test]
    fn log_json_shape() {
        let mut w = world_with(&[(1, 0)]);
        w.move_particle("bob", 1, 1).unwrap();
        let json = serde_json::to_string(w.log()).unwrap();
        assert_eq!(
            json,
            r#"[{"tick":1,"actor":"bob","kind":"move","payload":{"particle":1,"from":0,"to":1}}]"#
        );
        let back: WorldLog = serde_json::from_str(&json).unwrap();
        assert_eq!(&back, w.log());
    }
}
