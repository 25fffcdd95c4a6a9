//! Stability and Floer-theoretic invariants of symmetric periodic orbits,
//! with a circular restricted three-body integrator to produce them.

pub mod catalogue;
pub mod cr3bp;
pub mod error;
pub mod families;
pub mod floer;
pub mod linalg;
pub mod plot;
pub mod report;
pub mod signatures;
pub mod symplectic;

pub use error::{Error, Result};
