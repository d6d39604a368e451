//! Bias-aware multi-objective classification.
//!
//! A shared linear representation is trained jointly on a primary
//! classification task and a set of adversarial bias pseudo-tasks, so that
//! predictions stay accurate while shedding stereotyped associations between
//! output categories and social identity attributes (gender, race, ...).
//!
//! The crate is organized around the pipeline:
//!
//! - [`data`]: datasets, CSV ingestion, synthetic generators, biased
//!   subsampling, stratified splitting.
//! - [`bias`]: bias pseudo-task specifications and the association-gated
//!   bias response labels they induce.
//! - [`model`]: the shared-layer network, its joint squared-error objective
//!   with analytic gradients, the SGD trainer, and baseline variants.
//! - [`metrics`]: accuracy, the association fairness score `F = a(1-a)`, and
//!   the combined score `gamma = AF/(A+F)`.
//! - [`nn`]: the dense matrix / activation / seeded-RNG substrate.

pub mod bias;
pub mod data;
pub mod error;
pub mod metrics;
pub mod model;
pub mod nn;

pub use error::{Error, Result};
