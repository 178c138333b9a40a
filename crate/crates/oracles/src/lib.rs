//! Reference implementations for tests.
//!
//! Everything here is written independently of the production code and
//! favours obviousness over speed: exhaustive enumeration, naive counting,
//! plain recursion. Inputs are expected to be small.

pub mod community;
pub mod fixtures;
pub mod graphs;
pub mod paths;
pub mod rouge;
