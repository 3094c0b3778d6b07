mod common;

use glad_core::codec::Blob;
use glad_core::graph::CitationNetwork;
use glad_core::pipeline::{format_predictions, ModelBundle, PipelineConfig};
use glad_core::GladError;

#[test]
fn config_survives_toml() {
    for cfg in [
        PipelineConfig::default(),
        PipelineConfig::experiment().with_seed(9),
        common::quick_pipeline(),
    ] {
        assert_eq!(PipelineConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
    let partial = PipelineConfig::from_toml("[train]\nbatch_size = 16\n").unwrap();
    assert_eq!(partial.train.batch_size, 16);
    assert_eq!(partial.pvdm, PipelineConfig::default().pvdm);
    assert!(matches!(
        PipelineConfig::from_toml("train = 3"),
        Err(GladError::Config(_))
    ));
}

#[test]
fn seeds_are_set_together() {
    let cfg = PipelineConfig::default().with_seed(42);
    assert_eq!(
        [
            cfg.pvdm.seed,
            cfg.purpose.embedding.seed,
            cfg.train.seed,
            cfg.split.seed
        ],
        [42; 4]
    );
}

#[test]
fn bundle_roundtrips_and_scores_identically() {
    let ds = common::small_dataset();
    let mut cfg = common::quick_pipeline();
    cfg.train.max_epochs = 3;
    let bundle = ModelBundle::train(&ds.network, &ds.annotations, &cfg).unwrap();
    let bytes = bundle.to_bytes();
    let back = ModelBundle::from_bytes(&bytes).unwrap();
    assert_eq!(back, bundle);
    assert_eq!(back.to_bytes(), bytes);

    let a = bundle.detect(&ds.network).unwrap();
    let b = back.detect(&ds.network).unwrap();
    assert_eq!(a.len(), ds.network.n_edges());
    assert_eq!(
        format_predictions(&ds.network, &a),
        format_predictions(&ds.network, &b)
    );

    let text = format_predictions(&ds.network, &a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("src\tdst\tscore\tlabel"));
    for (line, p) in lines.zip(&a) {
        let cells: Vec<&str> = line.split('\t').collect();
        assert_eq!(
            cells[2].parse::<f64>().unwrap().to_bits(),
            p.score.to_bits()
        );
    }

    let mut corrupt = bytes.clone();
    corrupt.truncate(bytes.len() / 2);
    assert!(ModelBundle::from_bytes(&corrupt).is_err());
}

#[test]
fn bundle_scores_a_network_with_unseen_papers() {
    let ds = common::small_dataset();
    let mut cfg = common::quick_pipeline();
    cfg.train.max_epochs = 2;
    let bundle = ModelBundle::train(&ds.network, &ds.annotations, &cfg).unwrap();
    let mut papers = ds.network.papers().to_vec();
    for p in &mut papers {
        p.id = format!("new-{}", p.id);
        p.reference_ids = p.reference_ids.iter().map(|r| format!("new-{r}")).collect();
    }
    let mut edges = ds.network.edges().to_vec();
    for e in &mut edges {
        e.src = format!("new-{}", e.src);
        e.dst = format!("new-{}", e.dst);
    }
    let renamed = CitationNetwork::new(papers, edges).unwrap();
    let preds = bundle.detect(&renamed).unwrap();
    assert_eq!(preds.len(), renamed.n_edges());
    assert!(preds
        .iter()
        .all(|p| p.score.is_finite() && (0.0..=1.0).contains(&p.score)));
}
