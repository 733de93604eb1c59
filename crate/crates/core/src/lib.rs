//! Multiple ergodic averages for commuting circle rotations.

pub mod dynsys;
pub mod engine;
pub mod error;
pub mod observables;
pub mod oracle;
pub mod runner;
pub mod scenario;
pub mod suite;
pub mod unitmath;

pub use error::{Error, Result};
