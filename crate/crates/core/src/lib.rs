//! Coupled motion planning for teams of serial-chain manipulators.
//!
//! The planner is a bounded-suboptimal conflict search: each robot is planned
//! independently by a sampling-based joint-space planner, pairwise conflicts
//! between the synchronized trajectories are resolved by constraint branching,
//! and candidate trajectories are additionally deformed along repulsive
//! force gradients so that replanned motions already steer clear of the other
//! robots. A fast-track step attempts to resolve all current conflicts at once
//! when a single robot is involved in every one of them.
//!
//! The crate is `no_std`-compatible (with `alloc`); wall-clock deadlines are
//! injected by the caller as an elapsed-seconds closure.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod apf;
pub mod collision;
pub mod highlevel;
pub mod kinematics;
pub mod lowlevel;
pub mod math;
pub mod trajectory;

mod error;

pub use error::ModelError;
