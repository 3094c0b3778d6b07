use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, GladError>;

#[derive(Debug, Error)]
pub enum GladError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("dangling paper ids: {}", .0.join(", "))]
    DanglingIds(Vec<String>),
    #[error("duplicate citation {src} -> {dst}")]
    DuplicateEdge { src: String, dst: String },
    #[error("duplicate paper id {0}")]
    DuplicatePaper(String),
    #[error("self-citation on paper {0}")]
    SelfLoop(String),
    #[error("empty vocabulary after applying min_count={min_count}")]
    EmptyVocabulary { min_count: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Divergence { epoch: usize, loss: f64 },
    #[error("need at least two classes, found {0}")]
    SingleClass(usize),
    #[error("solver did not converge after {iterations} iterations (gap {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("node ordering mismatch: {0}")]
    OrderingMismatch(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("unknown edge {src} -> {dst}")]
    UnknownEdge { src: String, dst: String },
    #[error("infeasible generator config: {message} (achievable anomaly rate {achievable:.4})")]
    Infeasible { message: String, achievable: f64 },
    #[error("undefined kappa: chance agreement equals 1")]
    UndefinedKappa,
    #[error("invalid config: {0}")]
    Config(String),
    #[error("bad model file: {0}")]
    Format(String),
    #[error("split {split}: {source}")]
    Split {
        split: usize,
        #[source]
        source: Box<GladError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
