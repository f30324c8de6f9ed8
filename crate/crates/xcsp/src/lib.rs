//! Library for working with XCSP 2.1 constraint-network instances.
//!
//! XCSP 2.1 is an XML format for CSP, weighted CSP and quantified CSP
//! instances, with two interchangeable notations: a fully-tagged form where
//! every value is an XML element, and an abridged form using square braces
//! for lists, curly braces and `/key` for dictionaries, `|` between tuples,
//! `cost:` prefixes and `min..max` intervals. This crate reads either
//! notation (or a mix), validates instances structurally and against the
//! competition restrictions, converts losslessly between the notations,
//! evaluates constraints and solutions, and solves small instances by
//! exhaustive search.
//!
//! The main entry points:
//!
//! - [`document::load_instance`] / [`document::write_instance`] /
//!   [`document::convert`] for reading, writing and converting documents;
//! - [`validate::validate_structure`] and
//!   [`validate::validate_competition`] for diagnostics;
//! - [`semantics`] for constraint checks, WCSP costs, solution checking,
//!   brute-force solving and QCSP evaluation;
//! - the `xcsp` binary for the command-line interface.

pub mod catalog;
pub mod cli;
pub mod document;
pub mod expr;
pub mod lexparse;
pub mod model;
pub mod semantics;
pub mod validate;

pub use model::Instance;
