//! Exact verification of causal structure in finite models.
//!
//! The crate decides higher-order affects relations in (possibly cyclic)
//! causal models, relates them to non-signalling conditions, and checks
//! whether a set of relations can be embedded in a spacetime without
//! superluminal influence.

pub mod affects;
pub mod compat;
pub mod error;
pub mod format;
pub mod graph;
pub mod model;
pub mod prob;
pub mod scenarios;
pub mod signalling;
pub mod spacetime;

pub use error::{Error, Result};
