//! Structural graph watermarking by edge flipping.
//!
//! A key selects vertex pairs among the high- and medium-degree vertices of
//! a graph; marking rewrites those pairs to spell out a random identifier;
//! identification re-finds the vertices in a suspect graph through their
//! degree and adjacency labels and reads the identifier back.

pub mod adversary;
pub mod bits;
pub mod experiment;
pub mod fit;
pub mod graph;
pub mod kv;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod separation;
pub mod watermark;
use thiserror::Error;

/// Any error the library reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Model(#[from] models::ModelError),
    #[error(transparent)]
    Threshold(#[from] separation::ThresholdError),
    #[error(transparent)]
    Label(#[from] separation::LabelFailure),
    #[error(transparent)]
    Watermark(#[from] watermark::WatermarkError),
    #[error(transparent)]
    Attack(#[from] adversary::AttackError),
    #[error(transparent)]
    Fit(#[from] fit::FitError),
    #[error(transparent)]
    Config(#[from] kv::KvError),
    #[error(transparent)]
    Bits(#[from] bits::BitStringError),
    #[error(transparent)]
    Experiment(#[from] experiment::ExperimentError),
}

pub use graph::{Graph, VertexId, VertexPair};
pub use watermark::{MarkKey, WatermarkId};
