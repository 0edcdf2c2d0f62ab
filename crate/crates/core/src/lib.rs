//! Simulator-agnostic assessment engine for legged locomotion policies.
//!
//! Terrains, goals and domain randomizations define evaluation cells; a
//! [`sim::Backend`] runs episodes; [`metrics`] turns episode traces into six
//! normalized scores; [`scoring`] folds them into per-cell, per-terrain and
//! overall scores; [`pipelines`] schedules the whole sweep.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod bridge;
pub mod cli;
pub mod config;
pub mod error;
pub mod goals;
pub mod metrics;
pub mod pipelines;
pub mod policy;
pub mod report;
pub mod rewards;
pub mod robot;
pub mod scoring;
pub mod sim;
pub mod terrain;
pub mod trace;

pub use error::{Error, Result};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
