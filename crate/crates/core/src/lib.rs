//! Learning full-state reconstruction maps for dynamical systems from
//! time-lagged partial observations.
//!
//! A scalar (or vector) observable is turned into delay coordinates, and a
//! feed-forward network is trained to map delay vectors back to the full
//! state. Two objectives are provided: the usual pointwise mean squared error,
//! and a measure-matching loss that partitions the delay state into balanced
//! cells and asks the network's pushforward of each cell's delay-space
//! empirical measure to match the corresponding full-state measure under MMD.
//!
//! Modules, bottom-up:
//!
//! - [`dynamics`]: benchmark ODEs, RK4, extrinsic noise
//! - [`embedding`]: delay states, AMI and Cao parameter selection
//! - [`partition`]: balanced k-means and paired empirical measures
//! - [`metrics`]: MMD² (energy and Gaussian kernels), its gradient, MSE
//! - [`model`]: tanh MLP, backprop, Adam, training loops
//! - [`pod`]: proper orthogonal decomposition by snapshots
//! - [`harness`]: configs, file formats, experiment runner, CLI commands

// `!(a > b)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod embedding;
pub mod error;
pub mod harness;
mod linalg;
pub mod metrics;
pub mod model;
pub mod partition;
pub mod pod;

pub use error::{Error, Result};
