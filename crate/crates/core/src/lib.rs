//! Small-cover machinery for suprema of positive canonical processes, at
//! desk scale and in exact arithmetic.
//!
//! The crate evaluates expected suprema of processes `sup_t sum_i t_i f(X_i)`
//! over finite index sets (exactly by enumeration, or by seeded Monte Carlo),
//! enumerates the threshold family of high-value configurations, builds
//! witness covers of that family from bad replica matrices, verifies covers
//! and their smallness weights, reduces continuous laws to discrete ones
//! through dyadic bucketing, and machine-checks the combinatorial lemmas the
//! construction rests on.

pub mod cli;
pub mod cover;
pub mod error;
pub mod model;
pub mod rational;
pub mod reduction;
pub mod verify;
pub mod witness;

pub use error::{Error, Result};
pub use rational::Rat;
