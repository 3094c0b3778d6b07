//! Anomalous citation detection on citation networks.
//!
//! Papers get node representations from a graph-infomax encoder over text
//! and centrality features; citations get edge representations from an
//! autoencoder over hand-crafted relation features. A logistic head over
//! both is trained jointly with the two representation losses.

pub mod codec;
pub mod datagen;
pub mod detector;
pub mod edge;
pub mod error;
pub mod eval;
pub mod graph;
pub mod math;
pub mod node;
pub mod pipeline;
pub mod purpose;
pub mod text;

pub use datagen::{generate, GeneratorConfig, SyntheticDataset};
pub use detector::{train_glad, JointModel, Prediction, TrainConfig, Variant};
pub use error::{GladError, Result};
pub use graph::{CitationEdge, CitationNetwork, EdgeLabel, Paper};
pub use pipeline::{ModelBundle, PipelineConfig};
pub use purpose::{PurposeCategory, PurposeModel};
