//! Linear sketches, dynamic-stream spanner algorithms and exact verification
//! oracles for unweighted graphs.

pub mod error;
pub mod graph;
pub mod instances;
pub mod multipass;
pub mod simcomm;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod sketch;
pub mod spanner;
pub mod sparsify;
pub mod stream;

pub use error::{Error, Result};
pub use graph::{canonical, Edge, UnweightedGraph, VertexId};
pub use scalar::Scalar;

/// Double-precision weighted graph.
pub type WeightedGraph = graph::WeightedGraph<f64>;
/// Single-precision weighted graph.
pub type WeightedGraph32 = graph::WeightedGraph<f32>;
/// Double-precision resistance oracle.
pub type ResistanceOracle = graph::ResistanceOracle<f64>;
