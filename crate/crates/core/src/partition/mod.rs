//! Balanced Voronoi partitioning of the delay state and the paired empirical
//! measures built from it.

mod kmeans;
mod measure;

pub use kmeans::{capacities, constrained_kmeans, within_cluster_sse, KMeansResult};
pub use measure::{build_measure_pairs, pushforward_empirical, EmpiricalMeasure, MeasurePair};
