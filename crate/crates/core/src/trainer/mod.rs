//! A small dense-network trainer that records, after every epoch, the
//! probability each training sample receives for its true label.

pub mod gradcheck;
mod model;
mod optim;
mod train;

pub use model::{init_model, Activation, Dense, Gradients, InitScheme, Mlp, ModelSpec};
pub use optim::{OptimizerKind, OptimizerSpec, OptimizerState};
pub use train::{record_predictions, train_and_record, RunConfig, TrainReport};
