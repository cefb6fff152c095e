//! The reconstruction network, its gradients under both losses, Adam, and
//! the training loop.

mod adam;
mod mlp;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use mlp::{init_mlp, Gradients, Mlp};
pub use train::{
    evaluate_mse, grad_measure, grad_measure_with, grad_pointwise, train, LossKind, TrainConfig, TrainingData,
};
