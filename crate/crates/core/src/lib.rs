//! Numerical toolkit for phase retrieval from rank-d positive semidefinite
//! measurements.
//!
//! The crate has two halves that cross-validate each other:
//!
//! * **Theory** -- evaluation of the plain and partially lifted random-dual
//!   lower bounds on the fundamental recovery objective, curve generation
//!   over the overlap variable, and bisection for the sample-complexity
//!   ratio at which descending algorithms stop getting trapped
//!   ([`plain`], [`lifted`], [`specfun`]).
//! * **Practice** -- random rank-d measurement ensembles, a log-barrier
//!   gradient-descent solver seeded by a diagonal spectral initializer, and
//!   reproducible Monte Carlo sweeps of the empirical success rate
//!   ([`instance`], [`solver`], [`experiments`]).

pub mod error;
pub mod experiments;
pub mod instance;
pub mod lifted;
pub mod plain;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
