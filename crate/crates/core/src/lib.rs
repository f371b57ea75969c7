//! NK fitness landscapes and steady-state evolutionary algorithms, including
//! a haploid-diploid variant that pairs each haploid with a random partner,
//! selects on the pair's mean fitness and reproduces through two-step
//! meiosis, all at one fitness evaluation per generation.
//!
//! Modules:
//! - [`nk_model`]: landscape generation, evaluation, text format, brute force.
//! - [`genetics`]: crossover, mutation, tournament, replace-worst, meiosis.
//! - [`engines`]: the EA, HDEA and 2P-haploid control, and seeded runs.
//! - [`stats`]: summaries, Welch and paired t-tests.
//! - [`sweep`] and [`report`]: the experiment harness.

pub mod engines;
pub mod error;
pub mod genetics;
pub mod nk_model;
pub mod report;
pub mod seed;
pub mod stats;
pub mod sweep;

pub use engines::{run, Algorithm, RunConfig, RunRecord};
pub use error::{Error, Result};
pub use nk_model::{brute_force_optimum, separable_optimum, Genome, Landscape};
pub use sweep::{run_sweep, SweepConfig, SweepOptions, SweepResult};
