//! End-to-end glue: text model, purpose model, feature matrices, detector.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::codec::{Blob, BlobKind, Reader, Writer};
use crate::detector::{train_glad, GladInputs, JointModel, LrLoss, Prediction, TrainConfig};
use crate::edge::compute_edge_features;
use crate::error::{GladError, Result};
use crate::eval::SplitSpec;
use crate::graph::CitationNetwork;
use crate::node::{assemble_node_features, node_features_from_docs};
use crate::purpose::{Annotation, PurposeConfig, PurposeModel};
use crate::text::{tokenize, train_pvdm, PvDmConfig, PvDmModel, Vocabulary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Document embedding of the abstracts.
    pub pvdm: PvDmConfig,
    pub purpose: PurposeConfig,
    pub train: TrainConfig,
    pub split: SplitSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            pvdm: PvDmConfig::default(),
            purpose: PurposeConfig::default(),
            train: TrainConfig::default(),
            split: SplitSpec::default(),
        }
    }
}

impl PipelineConfig {
    /// Settings used for the ablation and sweep experiments: a shorter
    /// schedule and a node loss refreshed every 256 training edges, so a
    /// full ablation runs in minutes on one core.
    pub fn experiment() -> Self {
        PipelineConfig {
            pvdm: PvDmConfig {
                dim: 32,
                epochs: 15,
                ..PvDmConfig::default()
            },
            purpose: PurposeConfig {
                embedding: PvDmConfig {
                    dim: 32,
                    epochs: 15,
                    ..PvDmConfig::default()
                },
                ..PurposeConfig::default()
            },
            train: TrainConfig {
                embedding_dim: 32,
                lr_loss: LrLoss::Bce,
                max_epochs: 100,
                patience: 5,
                keep_best: true,
                node_loss_interval: 256,
                node_pretrain_epochs: 100,
                edge_pretrain_epochs: 200,
                ..TrainConfig::default()
            },
            split: SplitSpec::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| GladError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialises")
    }

    /// Sets every seed in the config from one value.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.pvdm.seed = seed;
        self.purpose.embedding.seed = seed;
        self.train.seed = seed;
        self.split.seed = seed;
        self
    }
}

/// Trains the document model on the paper abstracts, rows in paper order.
pub fn train_text_model(net: &CitationNetwork, cfg: &PvDmConfig) -> Result<PvDmModel> {
    let docs: Vec<Vec<String>> = net
        .papers()
        .iter()
        .map(|p| tokenize(&p.abstract_text))
        .collect();
    let vocab = Vocabulary::build(&docs, cfg.min_count)?;
    let ids = net.papers().iter().map(|p| p.id.clone()).collect();
    train_pvdm(&docs, ids, vocab, cfg)
}

/// Node and edge feature matrices for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub x: Array2<f64>,
    pub z: Array2<f64>,
    /// Citing papers with an empty reference list.
    pub empty_reference_edges: Vec<usize>,
}

impl Features {
    pub fn inputs<'a>(&'a self, net: &'a CitationNetwork) -> GladInputs<'a> {
        GladInputs::new(net, &self.x, &self.z)
    }
}

/// Features of `net` under already trained text and purpose models.
/// Papers unknown to the text model get inferred document vectors.
pub fn features(
    net: &CitationNetwork,
    pvdm: &PvDmModel,
    purpose: &PurposeModel,
) -> Result<Features> {
    let x = match assemble_node_features(net, pvdm) {
        Ok(f) => f.x,
        Err(GladError::OrderingMismatch(_)) => {
            let mut docs = Array2::zeros((net.n_papers(), pvdm.dim()));
            for (row, p) in net.papers().iter().enumerate() {
                docs.row_mut(row)
                    .assign(&pvdm.doc_vector(&p.id, &tokenize(&p.abstract_text)));
            }
            node_features_from_docs(net, &docs)?.x
        }
        Err(e) => return Err(e),
    };
    let ef = compute_edge_features(net, purpose)?;
    Ok(Features {
        x,
        z: ef.z,
        empty_reference_edges: ef.empty_reference_edges,
    })
}

/// Unsupervised models and features of a dataset.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub pvdm: PvDmModel,
    pub purpose: PurposeModel,
    pub features: Features,
}

pub fn prepare(
    net: &CitationNetwork,
    annotations: &[Annotation],
    cfg: &PipelineConfig,
) -> Result<Prepared> {
    let pvdm = train_text_model(net, &cfg.pvdm)?;
    log::info!("document model trained on {} abstracts", net.n_papers());
    let purpose = PurposeModel::train(annotations, &cfg.purpose)?;
    log::info!("purpose model trained on {} annotations", annotations.len());
    let features = features(net, &pvdm, &purpose)?;
    Ok(Prepared {
        pvdm,
        purpose,
        features,
    })
}

/// Per-edge 0/1 labels; `None` for unknown.
pub fn edge_labels(net: &CitationNetwork) -> Vec<Option<u8>> {
    net.labels().into_iter().map(|l| l.as_binary()).collect()
}

/// Everything needed to score citations of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub pvdm: PvDmModel,
    pub purpose: PurposeModel,
    pub detector: JointModel,
}

impl ModelBundle {
    /// Trains the full pipeline on every labelled edge of `net`.
    pub fn train(
        net: &CitationNetwork,
        annotations: &[Annotation],
        cfg: &PipelineConfig,
    ) -> Result<Self> {
        let prep = prepare(net, annotations, cfg)?;
        let (edges, labels) = crate::eval::labelled_edges(&edge_labels(net));
        let detector = train_glad(&prep.features.inputs(net), &edges, &labels, &cfg.train)?;
        Ok(ModelBundle {
            pvdm: prep.pvdm,
            purpose: prep.purpose,
            detector,
        })
    }

    /// Scores every edge of `net`.
    pub fn detect(&self, net: &CitationNetwork) -> Result<Vec<Prediction>> {
        let f = features(net, &self.pvdm, &self.purpose)?;
        let all: Vec<usize> = (0..net.n_edges()).collect();
        self.detector.predict(&f.inputs(net), &all)
    }
}

/// `src\tdst\tscore\tlabel` lines with a header.
pub fn format_predictions(net: &CitationNetwork, preds: &[Prediction]) -> String {
    let mut out = String::from("src\tdst\tscore\tlabel\n");
    for p in preds {
        let e = &net.edges()[p.edge];
        out.push_str(&format!("{}\t{}\t{}\t{}\n", e.src, e.dst, p.score, p.label));
    }
    out
}

impl Blob for ModelBundle {
    const KIND: BlobKind = BlobKind::Bundle;

    fn write_body(&self, w: &mut Writer) {
        w.bytes(&self.pvdm.to_bytes());
        w.bytes(&self.purpose.to_bytes());
        w.bytes(&self.detector.to_bytes());
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        Ok(ModelBundle {
            pvdm: PvDmModel::from_bytes(&r.bytes()?)?,
            purpose: PurposeModel::from_bytes(&r.bytes()?)?,
            detector: JointModel::from_bytes(&r.bytes()?)?,
        })
    }
}
