//! Fixpoint games over complete lattices, with witness synthesis and
//! independent certificate checking.
//!
//! The crate is `no_std` and only needs `alloc`. Three instances are
//! provided: bisimilarity on transition systems ([`bisim`]), the
//! Kantorovich behavioural metric on labelled Markov chains ([`metric`]) and
//! termination probabilities of Markov chains ([`termination`]).

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bisim;
pub mod distribution;
pub mod fixpoint;
pub mod game;
pub mod instance;
pub mod lattice;
pub mod laws;
pub mod metric;
pub mod rational;
pub mod termination;
pub mod witness;

pub use fixpoint::{codegree, degree, kleene_lfp, Degree, FixpointError, KleeneChain};
pub use instance::{Instance, InstanceTag};
pub use lattice::{BasisElement, LatticeError, LatticeKind, LatticeValue, Point, Relation};
pub use rational::Rational;
pub use witness::{Payload, Witness, WitnessClaim, WitnessError};
