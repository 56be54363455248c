//! Safety verification for parameterized programs whose threads run on the
//! nodes of a symmetric topology (stars, rings, forests).
//!
//! The pipeline turns a program into a predicate automaton recognising its
//! error traces, turns a Boolean proof space into a predicate automaton
//! recognising the traces it refutes, and checks inclusion of the first in
//! the second with a covering-pruned emptiness search over the homogeneous
//! limit of the topology family.

pub mod automata;
pub mod emptiness;
pub mod error;
pub mod formula;
pub mod hoare;
pub mod program;
pub mod topology;
pub mod translate;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/topologies.md")]
    mod topologies {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
