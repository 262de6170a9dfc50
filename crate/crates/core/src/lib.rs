//! Divisor-graph chains, Schinzel–Szekeres sets and disjoint chain packings.

pub mod analytic;
pub mod chain;
pub mod cli;
pub mod construct;
pub mod error;
pub mod number;
pub mod oracle;
pub mod report;
pub mod sets;

pub use chain::{Chain, Relation};
pub use error::{Error, Result};
pub use number::{Factorization, Rational, Sieve};
