//! Core model and discrete-event semantics for schedulability analysis of
//! distributed ARINC-653 systems connected by an AFDX network.
//!
//! The crate is organized along the layers of the system:
//!
//! * [`config`] — declarative system description (modules, partition
//!   schedules, tasks, mutexes, messages, virtual links, network constants),
//!   its JSON ingestion and static validation.
//! * [`sched`] — TDM partition scheduler and preemptive fixed-priority task
//!   scheduler semantics.
//! * [`task`] — periodic/sporadic task automata: release generation, the
//!   abstract instruction interpreter with a stopwatch execution-time clock,
//!   and priority-ceiling mutexes.
//! * [`afdx`] — ARINC-653 ports, UDP/IP tx/rx with fragmentation and
//!   reassembly, and virtual-link tx/rx with BAG regulation.
//! * [`interfaces`] — message-interface environment automata and per-partition
//!   compositional slices.
//! * [`engine`] — the discrete-event kernel that executes a composed model
//!   (global or slice) with violation monitors, deterministic seeded replay
//!   and trace recording.
//!
//! All model time is in integer microseconds; see [`time`].

pub mod afdx;
pub mod config;
pub mod configs;
pub mod engine;
pub mod interfaces;
pub mod rng;
pub mod sched;
pub mod task;
pub mod time;
pub mod trace;

pub use config::{parse_config, validate, SystemConfig};
pub use engine::{Sim, Verdict, ViolationKind};
pub use time::{Dur, TimePoint};
