//! Dense linear algebra, activations, and seeded randomness used everywhere
//! else in the crate.

mod activation;
mod matrix;
mod rng;

pub use activation::{sigmoid, softmax};
pub use matrix::Matrix;
pub use rng::{gaussian_sample, Rng};
