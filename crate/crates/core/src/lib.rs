//! Exact rational Padé approximation via differential operators in the
//! Weyl algebra, with a linear-independence criterion evaluator.

pub mod cli;
pub mod criterion;
pub mod error;
pub mod holonomic;
pub mod laurent;
pub mod linalg;
pub mod logpow;
pub mod mpl;
pub mod poly;
pub mod rational;
pub mod transform;
pub mod weyl;

pub use error::{Error, Result};
pub use rational::Rational;
