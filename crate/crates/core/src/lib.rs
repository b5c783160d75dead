//! Superintegrable potentials separable in polar coordinates, their
//! complex-factorised constants of motion, and the numerical machinery
//! (Poisson brackets, symplectic integration, closure detection) used to
//! verify them.
//!
//! The crate is `no_std` with `alloc`; IO, configuration, and the command
//! line live in the companion `superint` crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

extern crate alloc;

pub mod bracket;
pub mod dynamics;
pub mod error;
pub mod observables;
pub mod phase;
pub mod potentials;
pub mod rational;
pub mod scalar;

pub use error::{Error, Result};
pub use phase::{
    eom, hamiltonian, to_cartesian, to_polar, Canonical, CartesianState, Chart, PhaseState, PolarState, PotentialSpec,
};
pub use rational::Rational;
pub use scalar::{Dual, Real};
