//! Exact-arithmetic solvers for bilevel linear programs.

pub mod error;
pub mod generate;
pub mod geometry;
pub mod instance;
pub mod linprog;
pub mod numeric;
pub mod optimistic;
pub mod oracle;
pub mod pessimistic;
pub mod reduction;
pub mod solution;
pub mod specialcase;
pub mod valuefn;

pub use error::{Error, Result};
