#![allow(dead_code)]

pub mod gradcheck;
pub mod oracle;

use glad_core::datagen::{generate, CartelSpec, GeneratorConfig, SyntheticDataset};
use glad_core::detector::{LrLoss, TrainConfig};
use glad_core::pipeline::{prepare, PipelineConfig, Prepared};
use glad_core::purpose::PurposeConfig;
use glad_core::text::PvDmConfig;

/// A 200-paper dataset with one cartel, small enough for unit-speed tests.
pub fn small_generator() -> GeneratorConfig {
    let mut cfg = GeneratorConfig {
        n_papers: 200,
        n_journals: 4,
        n_topics: 2,
        n_authors: 300,
        n_institutions: 30,
        cartel_specs: vec![CartelSpec {
            donor_journal: "J00".into(),
            recipient_journal: "J01".into(),
            n_anomalous_papers: 10,
            refs_per_anomalous_paper: 6,
            fraction_to_recipient: 0.85,
        }],
        reviews_per_cartel: 8,
        promoted_per_cartel: 8,
        annotation_count: 300,
        seed: 3,
        ..GeneratorConfig::default()
    };
    cfg.anomaly_rate_target = cfg.achievable_rate();
    cfg
}

pub fn small_dataset() -> SyntheticDataset {
    generate(&small_generator()).unwrap()
}

pub fn quick_pipeline() -> PipelineConfig {
    let text = PvDmConfig {
        dim: 8,
        epochs: 5,
        ..PvDmConfig::default()
    };
    PipelineConfig {
        pvdm: text.clone(),
        purpose: PurposeConfig {
            embedding: text,
            ..PurposeConfig::default()
        },
        train: TrainConfig {
            embedding_dim: 8,
            max_epochs: 15,
            lr_loss: LrLoss::Bce,
            node_pretrain_epochs: 50,
            edge_pretrain_epochs: 100,
            ..TrainConfig::default()
        },
        ..PipelineConfig::default()
    }
}

pub fn small_prepared() -> (SyntheticDataset, Prepared, PipelineConfig) {
    let ds = small_dataset();
    let cfg = quick_pipeline();
    let prep = prepare(&ds.network, &ds.annotations, &cfg).unwrap();
    (ds, prep, cfg)
}
