//! Finite twisted groupoid C*-algebras and their Cartan semigroups.
//!
//! The crate builds the twisted convolution algebra of a finite groupoid
//! with a 2-cocycle, studies the monomial Cartan semigroup and its
//! relatives, and reconstructs the groupoid and the cocycle from algebraic
//! data alone: restriction and domination, ultrafilters, source and range
//! states, and angles.

pub mod algebra;
pub mod cli;
pub mod cocycle;
pub mod error;
pub mod expectation;
pub mod fixtures;
pub mod groupoid;
pub mod io;
pub mod iso;
pub mod masa;
pub mod phase;
pub mod reconstruction;
pub mod relations;
pub mod report;
pub mod repr;
pub mod sampling;
pub mod semigroup;
pub mod suites;
pub mod twist;

pub use algebra::{AlgebraElement, Context, ContextExt, TwistedGroupoid};
pub use error::{Error, Result};
pub use groupoid::{Elem, FiniteGroupoid, GroupoidTables};
pub use phase::Phase;
