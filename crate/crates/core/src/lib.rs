//! Age-optimal UAV data-collection planning.
//!
//! A UAV flying at fixed altitude between two endpoints collects status
//! updates from energy-limited ground nodes. This crate provides the pure
//! algorithmic pieces of the planner:
//!
//! * [`scenario`]: problem instances, validation and seeded random generation.
//! * [`physics`]: channel gain, per-update transmit energy, AoI traces and the
//!   normalized weighted AoI objective.
//! * [`qp`]: a log-barrier interior-point kernel and the two convex programs
//!   built on it (optimal times/waypoints for a fixed schedule, minimum UAV
//!   speed for the uniform schedule).
//! * [`bounds`]: closed-form update counts, the NWAoI lower bound, the uniform
//!   schedule and the speed upper bound.
//! * [`enumerator`]: exhaustive search over update counts and interleavings.
//! * [`mdp`]: the episodic MDP over schedule prefixes.
//! * [`nn`]: dense layers, LSTM cells, backpropagation and optimizers.
//! * [`agents`]: DQN, the weight-based baseline and the LSTM autoencoder state
//!   representation.
//!
//! The crate is `no_std` and only needs `alloc`. The `parallel` feature turns
//! on rayon-backed enumeration (and pulls in `std`).

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod agents;
pub mod bounds;
pub mod enumerator;
mod linalg;
pub mod math;
pub mod mdp;
pub mod nn;
pub mod physics;
pub mod qp;
pub mod scenario;

pub use bounds::BoundReport;
pub use qp::{MinSpeedSolution, SchedulePolicy, SolveStatus, TrajectorySolution};
pub use scenario::{ChannelParams, Node, Scenario, UavParams};
