//! Counting answers to conjunctive queries extended with disequalities and
//! negated predicates.
//!
//! Three counting routes are provided:
//!
//! * [`homsolver::count_answers_bruteforce`], exhaustive search used as ground truth;
//! * [`reduction::approx_count_answers`], an `(ε, δ)`-approximation that only
//!   talks to the database through a homomorphism decision oracle, using
//!   colour coding to handle disequalities;
//! * [`automata::count_answers_fhw_pipeline`], an exact count for plain
//!   conjunctive queries obtained from a nice tree decomposition and a tree
//!   automaton whose accepted trees are in bijection with the answers.

pub mod automata;
pub mod error;
pub mod homsolver;
pub mod qmodel;
pub mod reduction;
pub mod relation;
pub mod widths;

pub use error::{Error, Result};

/// Exact rational number used for fractional widths.
pub type Rational = num_rational::BigRational;
