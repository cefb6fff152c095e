//! Delay-coordinate states and data-driven selection of the delay `tau` and
//! embedding dimension `m`.

mod ami;
mod cao;
mod delay;

pub use ami::{average_mutual_information, select_tau, TauSelection, DEFAULT_AMI_BINS};
pub use cao::{cao_curves, cao_curves_with, select_dim, CaoCurves, DimSelection, DEFAULT_CAO_POINTS};
pub use delay::{delay_embed, tau_to_steps, vector_delay_embed, DelayConfig, DelayState, LagDirection};
