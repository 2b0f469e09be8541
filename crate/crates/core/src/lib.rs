//! Randomized eigenanalysis of vortical interaction networks.
//!
//! A 2D vorticity field defines a dense, symmetric network whose edge weights
//! are Biot–Savart induced speeds between grid cells. This crate approximates
//! the dominant eigenpairs of that network's adjacency matrix from a small set
//! of sampled columns (sketched SVD and Nyström), compares them against power
//! iteration, and derives centrality and spectral clusters from them. The
//! adjacency matrix itself is never stored unless asked for.

pub mod error;
pub mod field;
pub mod graph;
pub mod par;
pub mod sampling;
pub mod eigen;
pub mod analysis;
pub mod bench;
pub mod render;

pub use error::{Error, Result};
pub use field::{FieldFormat, GridSpec, VorticityField};
pub use graph::AdjacencyOperator;
pub use sampling::{SampleIndexSet, SamplerKind};
pub use eigen::{EigenApproximation, Method};
