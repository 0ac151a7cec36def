//! Sequential option learning for stay-alive control tasks.
//!
//! The crate trains soft actor-critic sub-policies one at a time, learns a
//! nested termination classifier per option prefix, and chains the frozen
//! options with an execution cascade. Desk-scale 2D navigation environments
//! and an experiment harness (config, metrics, checkpoints, CLI) round out
//! the library.

pub mod error;
pub mod nn;
pub mod policy;
pub mod replay;
pub mod sac;
pub mod termination;
pub mod options;
pub mod cascade;
pub mod envs;
pub mod trainer;
pub mod harness;
pub mod rng;

pub use error::SamoError;
