//! Exact and approximate total variation distance between the word
//! distributions of labelled Markov chains.

pub mod approx;
pub mod automata;
mod error;
pub mod exact;
pub mod fixtures;
pub mod floatk;
pub mod io;
pub mod linalg;
pub mod lmc;
pub mod rational;

pub use error::{Error, Result};
pub use lmc::{InitialDistribution, Lmc, LmcBuilder, SparseMatrix, Violation, Word};
pub use rational::Rational;
