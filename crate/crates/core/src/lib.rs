//! First arrival times of a discrete-time spread process on multigraphs.
//!
//! Starting from a labelled source, every edge with exactly one labelled
//! endpoint copies the label across with its infection probability in each
//! time step. This crate computes the distribution and expectation of the
//! first time a target vertex is labelled, exactly (rational arithmetic) or
//! in `f64`, together with related quantities:
//!
//! - [`engine`]: the subset Markov chain, expectations, pmfs, generating functions;
//! - [`resistance`]: spreading resistance and the exponential-edge model;
//! - [`series`]: truncated power series, Hadamard products, series/parallel reductions;
//! - [`special`]: closed forms for complete graphs, parallel paths and trees;
//! - [`bounds`]: reliability-polynomial, distance and electrical-resistance bounds;
//! - [`montecarlo`]: seeded simulation of the process and of stochastic shortest paths.

pub mod bounds;
pub mod engine;
pub mod error;
pub mod graph;
pub mod montecarlo;
pub mod resistance;
pub mod scalar;
pub mod series;
pub mod special;

pub use engine::{ArrivalPmf, ExpectationResult, StateSpace};
pub use error::{Error, Result};
pub use graph::{Edge, MultiGraph, VertexSet};
pub use num_bigint::BigInt;
pub use num_rational::BigRational;
pub use scalar::{Mode, Scalar, Value};
pub use series::PowerSeries;
