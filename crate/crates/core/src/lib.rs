//! Weighted K-stability invariants of compact toric manifolds and admissible
//! projective line bundles.

pub mod abreu;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod invariants;
pub mod pbundle;
pub mod poly;
pub mod quad;
pub mod rational;
pub mod testconfig;
pub mod weights;

pub use error::{Error, Result};
