//! Exact finite-scale experiments with left-orderings of free products and free groups.

pub mod cli;
pub mod config;
pub mod dense;
pub mod error;
pub mod group;
pub mod order;
pub mod perturb;
pub mod pl;
pub mod rational;
pub mod realize;
pub mod xgroup;

pub use error::{Error, Result};
