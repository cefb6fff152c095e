//! Configuration, file formats, the experiment runner and the command
//! implementations behind the `measure-recon` binary.

pub mod commands;
pub mod config;
pub mod csv_io;
pub mod dmat;
pub mod experiment;
pub mod normalize;
pub mod report;

pub use config::{ExperimentConfig, KeyValues, SystemKind};
pub use csv_io::{load_csv_series, ColumnSelection};
pub use dmat::{load_dmat, save_dmat, Section};
pub use experiment::{load_checkpoint, run_experiment, save_checkpoint};
pub use normalize::{normalize, NormalizeMode, NormalizeTransform};
pub use report::{emit_report, Report, ReportFormat};
