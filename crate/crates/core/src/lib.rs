//! A simulator for a local toy theory of four-state particles.
//!
//! Every particle carries a hidden (ontic) value in `{0,1,2,3}`. Measurements
//! are labeled partitions of the joint state space whose outcome sets obey a
//! column rule that forbids certainty about any single particle. On top of the
//! state model the crate provides:
//!
//! - [`theory`]: states, measurements, manipulations and epistemic mixtures.
//! - [`spacetime`]: a 1-D lattice world with unit speed limit, an event log
//!   and a locality auditor.
//! - [`bell`]: the four-outcome pair measurement, pair preparation and the
//!   teleportation protocol.
//! - [`cloning`]: the cloning challenge, exact strategy search and the
//!   failure certificate.
//!
//! Ontic values are only exposed through explicitly named god-view accessors;
//! agent-level code sees outcomes and [`theory::Mixture`]s.

pub mod bell;
pub mod bundled;
pub mod cloning;
pub mod prob;
pub mod rng;
pub mod spacetime;
pub mod stats;
pub mod theory;

pub use prob::Prob;
