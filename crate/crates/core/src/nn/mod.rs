//! Multilayer perceptrons, the Adam optimiser and parameter checkpoints.

pub mod adam;
pub mod checkpoint;
pub mod field;
pub mod mlp;

pub use adam::{adam_update, AdamConfig, AdamState};
pub use checkpoint::Checkpoint;
pub use field::MlpField;
pub use mlp::{BatchCache, Layer, Mlp, ProjectionInit, HIDDEN_WIDTH};
