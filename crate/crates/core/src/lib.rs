//! Toolkit for conditional justification logics.
//!
//! Covers the LPC⁺ family (with the Box hybrid `L`) over finite relational
//! models and the relevant logic JRC over finite Routley models, with a
//! labelled tableau prover, a Hilbert derivation checker and a bounded
//! countermodel enumerator.

pub mod doc;
pub mod falsifier;
pub mod fixtures;
pub mod hilbert;
pub mod kripke;
pub mod routley;
pub mod syntax;
pub mod tableau;

pub use syntax::{parse_formula, print_formula, Dialect, Formula, Term};
