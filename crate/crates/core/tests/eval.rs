mod common;

use common::oracle::{counted_metrics, kappa_oracle, pairwise_auc};
use glad_core::detector::{TrainConfig, Variant};
use glad_core::eval::{
    auc, evaluate_model, kappa, labelled_edges, metrics, Harness, SplitSpec, SweepAxis, SweepValue,
};
use glad_core::math::seeded;
use glad_core::pipeline::edge_labels;
use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn auc_matches_pairwise_counting() {
    let mut rng = seeded(21);
    for round in 0..20 {
        let labels: Vec<u8> = (0..200).map(|_| rng.random_range(0..2)).collect();
        // coarse scores force many ties
        let scores: Vec<f64> = (0..200)
            .map(|_| rng.random_range(0..20) as f64 / 20.0)
            .collect();
        let fast = auc(&labels, &scores).unwrap();
        let slow = pairwise_auc(&labels, &scores);
        assert!(
            (fast - slow).abs() < 1e-12,
            "round {round}: {fast} vs {slow}"
        );
    }
}

#[test]
fn auc_ignores_monotone_transforms() {
    let mut rng = seeded(22);
    let labels: Vec<u8> = (0..150).map(|_| rng.random_range(0..2)).collect();
    let scores: Vec<f64> = (0..150).map(|_| rng.random_range(-3.0..3.0)).collect();
    let squashed: Vec<f64> = scores
        .iter()
        .map(|s| 1.0 / (1.0 + (-2.0 * s).exp()))
        .collect();
    assert_eq!(auc(&labels, &scores), auc(&labels, &squashed));
}

#[test]
fn kappa_matches_marginal_products() {
    let mut rng = seeded(23);
    for _ in 0..50 {
        let t = Array2::from_shape_simple_fn((6, 6), || rng.random_range(0..30u64));
        let fast = kappa(&t).unwrap();
        assert!((fast - kappa_oracle(&t)).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn metrics_agree_with_counting(pairs in prop::collection::vec((0u8..2, 0u8..2, 0.0f64..1.0), 1..300)) {
        let labels: Vec<u8> = pairs.iter().map(|p| p.0).collect();
        let preds: Vec<u8> = pairs.iter().map(|p| p.1).collect();
        let scores: Vec<f64> = pairs.iter().map(|p| p.2).collect();
        let m = metrics(&labels, &preds, &scores).unwrap();
        let (accuracy, precision, recall, f1) = counted_metrics(&labels, &preds);
        prop_assert_eq!(m.accuracy, accuracy);
        prop_assert_eq!((m.precision, m.undefined.precision), (precision.unwrap_or(0.0), precision.is_none()));
        prop_assert_eq!((m.recall, m.undefined.recall), (recall.unwrap_or(0.0), recall.is_none()));
        prop_assert_eq!((m.f1, m.undefined.f1), (f1.unwrap_or(0.0), f1.is_none()));
        if m.precision + m.recall > 0.0 {
            let lo = m.precision.min(m.recall) - 1e-12;
            let hi = m.precision.max(m.recall) + 1e-12;
            prop_assert!(m.f1 >= lo && m.f1 <= hi);
        }
        if labels.contains(&0) && labels.contains(&1) {
            prop_assert!((m.auc - pairwise_auc(&labels, &scores)).abs() < 1e-12);
        } else {
            prop_assert!(m.undefined.auc);
        }
    }
}

fn quick_train() -> (
    glad_core::datagen::SyntheticDataset,
    glad_core::pipeline::Prepared,
    TrainConfig,
) {
    let (ds, prep, cfg) = common::small_prepared();
    let train = TrainConfig {
        max_epochs: 3,
        ..cfg.train
    };
    (ds, prep, train)
}

#[test]
fn repeated_runs_match_and_average_their_splits() {
    let (ds, prep, cfg) = quick_train();
    let spec = SplitSpec {
        n_splits: 3,
        ..SplitSpec::default()
    };
    let mut h = Harness::new(prep.features.inputs(&ds.network), edge_labels(&ds.network)).unwrap();
    let a = h.run_splits("a", &cfg, &spec).unwrap();
    let b = h.run_splits("b", &cfg, &spec).unwrap();
    assert_eq!(a.summary, b.summary);
    assert_eq!(a.splits.len(), 3);
    for k in 0..5 {
        let mean = a.splits.iter().map(|s| s.metrics.values()[k]).sum::<f64>() / 3.0;
        assert!((a.summary.mean[k] - mean).abs() < 1e-12);
    }
}

#[test]
fn full_training_fraction_scores_the_training_set() {
    let (ds, prep, cfg) = quick_train();
    let labels = edge_labels(&ds.network);
    let spec = SplitSpec {
        n_splits: 1,
        train_fraction: 1.0,
        ..SplitSpec::default()
    };
    let mut h = Harness::new(prep.features.inputs(&ds.network), labels.clone()).unwrap();
    let run = h.run_splits("all", &cfg, &spec).unwrap();
    let (edges, y) = labelled_edges(&labels);
    let model = glad_core::detector::train_glad(h.inputs(), &edges, &y, &cfg).unwrap();
    let direct = evaluate_model(&model, h.inputs(), &edges, &y).unwrap();
    assert_eq!(run.splits[0].metrics, direct);
    assert_eq!(run.splits[0].n_test, edges.len());
}

#[test]
fn ablation_lists_every_variant_and_reuses_the_plain_run() {
    let (ds, prep, cfg) = quick_train();
    let spec = SplitSpec {
        n_splits: 1,
        ..SplitSpec::default()
    };
    let mut h = Harness::new(prep.features.inputs(&ds.network), edge_labels(&ds.network)).unwrap();
    let rows = h.ablate(&cfg, &spec).unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r.label.as_str()).collect();
    let expected: Vec<&str> = Variant::ALL.iter().map(|v| v.name()).collect();
    assert_eq!(names, expected);
    let plain = h
        .run_splits(
            "GLAD",
            &TrainConfig {
                variant: Variant::Glad,
                ..cfg
            },
            &spec,
        )
        .unwrap();
    assert_eq!(rows[0].summary, plain.summary);
}

#[test]
fn sweeps_follow_value_order() {
    let (ds, prep, cfg) = quick_train();
    let spec = SplitSpec {
        n_splits: 1,
        ..SplitSpec::default()
    };
    let mut h = Harness::new(prep.features.inputs(&ds.network), edge_labels(&ds.network)).unwrap();
    let one = h
        .sweep(&cfg, SweepAxis::BatchSize, &[SweepValue::Int(8)], &spec)
        .unwrap();
    let direct = h
        .run_splits(
            "x",
            &TrainConfig {
                batch_size: 8,
                ..cfg.clone()
            },
            &spec,
        )
        .unwrap();
    assert_eq!(one[0].label, "batch_size=8");
    assert_eq!(one[0].summary, direct.summary);

    let values = [SweepValue::Float(0.01), SweepValue::Float(0.005)];
    let fwd = h
        .sweep(&cfg, SweepAxis::LearningRate, &values, &spec)
        .unwrap();
    let rev: Vec<SweepValue> = values.iter().rev().cloned().collect();
    let back = h.sweep(&cfg, SweepAxis::LearningRate, &rev, &spec).unwrap();
    assert_eq!(fwd[0].summary, back[1].summary);
    assert_eq!(fwd[1].summary, back[0].summary);
    assert_eq!(fwd[0].label, back[1].label);
}
