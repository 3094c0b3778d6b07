use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::metrics::{metrics, Metrics, MetricsSummary};
use crate::detector::{
    pretrain, train_joint, GladInputs, JointModel, Pretrained, TrainConfig, Variant,
};
use crate::error::{GladError, Result};
use crate::math::{derive_seed, seeded};

const MAX_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    /// Fraction of labelled edges used for training. At 1.0 the
    /// training edges are also the evaluation edges.
    pub train_fraction: f64,
    pub n_splits: usize,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.7,
            n_splits: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Shuffles rejected because training labels had a single class.
    pub resamples: usize,
}

/// Labelled edge positions and their 0/1 labels.
pub fn labelled_edges(labels: &[Option<u8>]) -> (Vec<usize>, Vec<u8>) {
    labels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| l.map(|l| (i, l)))
        .unzip()
}

/// Random train/test partitions of the labelled edges. A partition whose
/// training side lacks a class is reshuffled.
pub fn make_splits(labels: &[Option<u8>], spec: &SplitSpec) -> Result<Vec<Split>> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0) {
        return Err(GladError::Config(
            "train_fraction must lie in (0, 1]".into(),
        ));
    }
    if spec.n_splits == 0 {
        return Err(GladError::Config("n_splits must be positive".into()));
    }
    let (edges, y) = labelled_edges(labels);
    let positives = y.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == y.len() {
        return Err(GladError::SingleClass(if y.is_empty() { 0 } else { 1 }));
    }
    let n_train =
        ((spec.train_fraction * edges.len() as f64).round() as usize).clamp(2, edges.len());
    (0..spec.n_splits)
        .map(|k| {
            let mut rng = seeded(derive_seed(spec.seed, k as u64));
            let mut order = edges.clone();
            for attempt in 0..MAX_RESAMPLES {
                order.shuffle(&mut rng);
                let train = &order[..n_train];
                let pos = train.iter().filter(|&&e| labels[e] == Some(1)).count();
                if pos > 0 && pos < n_train {
                    if attempt > 0 {
                        log::warn!(
                            "split {k}: resampled {attempt} times for a two-class training set"
                        );
                    }
                    let mut train = train.to_vec();
                    train.sort_unstable();
                    let mut test = if n_train == order.len() {
                        train.clone()
                    } else {
                        order[n_train..].to_vec()
                    };
                    test.sort_unstable();
                    return Ok(Split {
                        train,
                        test,
                        resamples: attempt,
                    });
                }
            }
            Err(GladError::Split {
                split: k,
                source: Box::new(GladError::SingleClass(1)),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub split: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub resamples: usize,
    pub epochs: usize,
    pub converged: bool,
    pub metrics: Metrics,
}

/// Evaluation of one configuration over all splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub label: String,
    pub summary: MetricsSummary,
    pub splits: Vec<SplitResult>,
}

impl RunReport {
    pub fn f1(&self) -> f64 {
        self.summary.f1()
    }
}

/// Metrics of a trained model on the given labelled edges.
pub fn evaluate_model(
    model: &JointModel,
    inputs: &GladInputs<'_>,
    edges: &[usize],
    labels: &[u8],
) -> Result<Metrics> {
    let preds = model.predict(inputs, edges)?;
    let hat: Vec<u8> = preds.iter().map(|p| p.label).collect();
    let scores: Vec<f64> = preds.iter().map(|p| p.score).collect();
    metrics(labels, &hat, &scores)
}

/// Runs splits, ablations and sweeps over one dataset. Pretrained
/// learners only depend on the unsupervised part of the config, so they
/// are shared between splits and between sweep points that agree on it.
pub struct Harness<'a> {
    inputs: GladInputs<'a>,
    labels: Vec<Option<u8>>,
    cache: HashMap<String, Pretrained>,
}

fn pretrain_key(cfg: &TrainConfig) -> String {
    let key = TrainConfig {
        alpha: 0.0,
        beta: 0.0,
        lr: 0.0,
        batch_size: 0,
        epsilon: 0.0,
        patience: 0,
        max_epochs: 0,
        lr_loss: Default::default(),
        node_loss_interval: 0,
        ..cfg.clone()
    };
    serde_json::to_string(&key).expect("config serialises")
}

impl<'a> Harness<'a> {
    /// `labels` holds one entry per edge; `None` marks unlabelled edges.
    pub fn new(inputs: GladInputs<'a>, labels: Vec<Option<u8>>) -> Result<Self> {
        if labels.len() != inputs.endpoints.len() {
            return Err(GladError::Dimension(format!(
                "{} labels for {} edges",
                labels.len(),
                inputs.endpoints.len()
            )));
        }
        Ok(Harness {
            inputs,
            labels,
            cache: HashMap::new(),
        })
    }

    pub fn inputs(&self) -> &GladInputs<'a> {
        &self.inputs
    }

    pub fn labels(&self) -> &[Option<u8>] {
        &self.labels
    }

    fn pretrained(&mut self, cfg: &TrainConfig) -> Result<&Pretrained> {
        let key = pretrain_key(cfg);
        if !self.cache.contains_key(&key) {
            let pre = pretrain(&self.inputs, cfg)?;
            self.cache.insert(key.clone(), pre);
        }
        Ok(&self.cache[&key])
    }

    /// Trains on one split and evaluates on its test side.
    pub fn run_split(&mut self, cfg: &TrainConfig, split: &Split) -> Result<(JointModel, Metrics)> {
        let inputs = self.inputs;
        let train_y: Vec<u8> = split
            .train
            .iter()
            .map(|&e| self.labels[e].expect("labelled"))
            .collect();
        let test_y: Vec<u8> = split
            .test
            .iter()
            .map(|&e| self.labels[e].expect("labelled"))
            .collect();
        let pre = self.pretrained(cfg)?;
        let model = train_joint(pre, &inputs, &split.train, &train_y, cfg)?;
        let m = evaluate_model(&model, &inputs, &split.test, &test_y)?;
        Ok((model, m))
    }

    /// Splits are trained on scoped threads, one per available core; each
    /// split is independent so the report does not depend on the thread count.
    pub fn run_splits(
        &mut self,
        label: &str,
        cfg: &TrainConfig,
        spec: &SplitSpec,
    ) -> Result<RunReport> {
        let splits = make_splits(&self.labels, spec)?;
        let inputs = self.inputs;
        let threads = std::thread::available_parallelism()
            .map_or(1, |n| n.get())
            .min(splits.len())
            .max(1);
        if let Err(e) = self.pretrained(cfg) {
            return Err(GladError::Split {
                split: 0,
                source: Box::new(e),
            });
        }
        let pre = &self.cache[&pretrain_key(cfg)];
        let labels = &self.labels;
        let run = |k: usize| -> Result<SplitResult> {
            let split = &splits[k];
            let train_y: Vec<u8> = split
                .train
                .iter()
                .map(|&e| labels[e].expect("labelled"))
                .collect();
            let test_y: Vec<u8> = split
                .test
                .iter()
                .map(|&e| labels[e].expect("labelled"))
                .collect();
            let model = train_joint(pre, &inputs, &split.train, &train_y, cfg)?;
            let m = evaluate_model(&model, &inputs, &split.test, &test_y)?;
            log::info!(
                "{label} split {k}: f1 {:.4} auc {:.4} after {} epochs",
                m.f1,
                m.auc,
                model.epochs.len()
            );
            Ok(SplitResult {
                split: k,
                n_train: split.train.len(),
                n_test: split.test.len(),
                resamples: split.resamples,
                epochs: model.epochs.len(),
                converged: model.converged,
                metrics: m,
            })
        };
        let outcomes: Vec<Result<SplitResult>> = if threads == 1 {
            (0..splits.len()).map(run).collect()
        } else {
            let mut slots: Vec<Option<Result<SplitResult>>> =
                (0..splits.len()).map(|_| None).collect();
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..threads)
                    .map(|t| {
                        let run = &run;
                        let n = splits.len();
                        scope.spawn(move || {
                            (t..n)
                                .step_by(threads)
                                .map(|k| (k, run(k)))
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                for h in handles {
                    for (k, r) in h.join().expect("split worker panicked") {
                        slots[k] = Some(r);
                    }
                }
            });
            slots
                .into_iter()
                .map(|r| r.expect("every split ran"))
                .collect()
        };
        let mut results = Vec::with_capacity(outcomes.len());
        for (k, r) in outcomes.into_iter().enumerate() {
            results.push(r.map_err(|e| GladError::Split {
                split: k,
                source: Box::new(e),
            })?);
        }
        Ok(RunReport {
            label: label.to_string(),
            summary: MetricsSummary::from_splits(results.iter().map(|r| r.metrics).collect()),
            splits: results,
        })
    }

    /// All eight variants on identical splits and seeds.
    pub fn ablate(&mut self, base: &TrainConfig, spec: &SplitSpec) -> Result<Vec<RunReport>> {
        Variant::ALL
            .iter()
            .map(|&v| {
                let cfg = TrainConfig {
                    variant: v,
                    ..base.clone()
                };
                self.run_splits(v.name(), &cfg, spec)
            })
            .collect()
    }

    /// One evaluation per value of `axis`, everything else fixed.
    pub fn sweep(
        &mut self,
        base: &TrainConfig,
        axis: SweepAxis,
        values: &[SweepValue],
        spec: &SplitSpec,
    ) -> Result<Vec<RunReport>> {
        if values.is_empty() {
            return Err(GladError::Config("sweep needs at least one value".into()));
        }
        values
            .iter()
            .map(|v| {
                let cfg = axis.apply(base, v)?;
                self.run_splits(&format!("{axis}={v}"), &cfg, spec)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    BatchSize,
    EmbeddingDim,
    LearningRate,
    AeArch,
}

/// A point on a sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Int(usize),
    Float(f64),
    Arch(Vec<usize>),
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Int(v) => write!(f, "{v}"),
            SweepValue::Float(v) => write!(f, "{v}"),
            SweepValue::Arch(a) => {
                let parts: Vec<String> = a.iter().map(|w| w.to_string()).collect();
                write!(f, "{}", parts.join("-"))
            }
        }
    }
}

/// Autoencoder hidden widths of the eight architecture groups.
pub fn ae_arch_groups() -> Vec<Vec<usize>> {
    vec![
        vec![8],
        vec![8, 6],
        vec![8, 6, 4],
        vec![8, 6, 4, 2],
        vec![8, 10],
        vec![8, 10, 20],
        vec![8, 10, 20, 30],
        vec![8, 10, 20, 30, 40],
    ]
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 4] = [
        SweepAxis::BatchSize,
        SweepAxis::EmbeddingDim,
        SweepAxis::LearningRate,
        SweepAxis::AeArch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::BatchSize => "batch_size",
            SweepAxis::EmbeddingDim => "embedding_dim",
            SweepAxis::LearningRate => "learning_rate",
            SweepAxis::AeArch => "ae_arch",
        }
    }

    /// The values studied by default for this axis.
    pub fn default_values(self) -> Vec<SweepValue> {
        match self {
            SweepAxis::BatchSize => [1, 4, 8, 16, 32, 64].map(SweepValue::Int).to_vec(),
            SweepAxis::EmbeddingDim => [32, 64, 128, 256, 512].map(SweepValue::Int).to_vec(),
            SweepAxis::LearningRate => [0.001, 0.005, 0.01, 0.1].map(SweepValue::Float).to_vec(),
            SweepAxis::AeArch => ae_arch_groups().into_iter().map(SweepValue::Arch).collect(),
        }
    }

    /// Parses one value: integers, floats, or dash/comma separated widths.
    pub fn parse_value(self, s: &str) -> Result<SweepValue> {
        let bad = || GladError::Config(format!("bad {} value {s:?}", self.name()));
        let s = s.trim();
        match self {
            SweepAxis::BatchSize | SweepAxis::EmbeddingDim => {
                s.parse().map(SweepValue::Int).map_err(|_| bad())
            }
            SweepAxis::LearningRate => s.parse().map(SweepValue::Float).map_err(|_| bad()),
            SweepAxis::AeArch => s
                .split(['-', ','])
                .map(|w| w.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(SweepValue::Arch)
                .map_err(|_| bad()),
        }
    }

    pub fn apply(self, base: &TrainConfig, value: &SweepValue) -> Result<TrainConfig> {
        let mut cfg = base.clone();
        match (self, value) {
            (SweepAxis::BatchSize, SweepValue::Int(v)) => cfg.batch_size = *v,
            (SweepAxis::EmbeddingDim, SweepValue::Int(v)) => cfg.embedding_dim = *v,
            (SweepAxis::LearningRate, SweepValue::Float(v)) => cfg.lr = *v,
            (SweepAxis::LearningRate, SweepValue::Int(v)) => cfg.lr = *v as f64,
            (SweepAxis::AeArch, SweepValue::Arch(a)) => cfg.ae_hidden = a.clone(),
            _ => {
                return Err(GladError::Config(format!(
                    "value {value} does not fit axis {self}"
                )))
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = GladError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == norm || (norm == "lr" && *a == SweepAxis::LearningRate))
            .ok_or_else(|| GladError::Config(format!("unknown sweep axis {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize, pos_every: usize) -> Vec<Option<u8>> {
        (0..n)
            .map(|i| {
                if i % 7 == 6 {
                    None
                } else {
                    Some((i % pos_every == 0) as u8)
                }
            })
            .collect()
    }

    #[test]
    fn splits_partition_the_labelled_edges() {
        let l = labels(100, 10);
        let splits = make_splits(&l, &SplitSpec::default()).unwrap();
        assert_eq!(splits.len(), 10);
        let (all, _) = labelled_edges(&l);
        for s in &splits {
            let mut joined: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            joined.sort_unstable();
            assert_eq!(joined, all);
            assert_eq!(s.train.len(), (0.7 * all.len() as f64).round() as usize);
        }
        assert_ne!(splits[0], splits[1]);
        assert_eq!(make_splits(&l, &SplitSpec::default()).unwrap(), splits);
    }

    #[test]
    fn full_fraction_tests_on_training_edges() {
        let l = labels(30, 3);
        let s = &make_splits(
            &l,
            &SplitSpec {
                train_fraction: 1.0,
                n_splits: 1,
                seed: 3,
            },
        )
        .unwrap()[0];
        assert_eq!(s.train, s.test);
    }

    #[test]
    fn rare_positive_forces_resampling() {
        // one positive among 40: a 10% training side usually misses it
        let l: Vec<Option<u8>> = (0..40).map(|i| Some((i == 0) as u8)).collect();
        let splits = make_splits(
            &l,
            &SplitSpec {
                train_fraction: 0.1,
                n_splits: 10,
                seed: 1,
            },
        )
        .unwrap();
        assert!(splits.iter().any(|s| s.resamples > 0));
        assert!(splits.iter().all(|s| s.train.contains(&0)));
    }

    #[test]
    fn single_class_is_rejected() {
        assert!(make_splits(&[Some(0), Some(0)], &SplitSpec::default()).is_err());
    }

    #[test]
    fn axis_parsing_and_application() {
        assert_eq!(
            "batch-size".parse::<SweepAxis>().unwrap(),
            SweepAxis::BatchSize
        );
        let v = SweepAxis::AeArch.parse_value("8-10-20").unwrap();
        assert_eq!(v, SweepValue::Arch(vec![8, 10, 20]));
        assert_eq!(v.to_string(), "8-10-20");
        let cfg = SweepAxis::AeArch
            .apply(&TrainConfig::default(), &v)
            .unwrap();
        assert_eq!(cfg.ae_hidden, vec![8, 10, 20]);
        assert!(SweepAxis::BatchSize
            .apply(&TrainConfig::default(), &SweepValue::Int(0))
            .is_err());
        assert_eq!(SweepAxis::AeArch.default_values().len(), 8);
        assert!(
            pretrain_key(&cfg)
                == pretrain_key(&TrainConfig {
                    batch_size: 64,
                    lr: 0.1,
                    ..cfg.clone()
                })
        );
        assert!(
            pretrain_key(&cfg)
                != pretrain_key(&TrainConfig {
                    embedding_dim: 32,
                    ..cfg.clone()
                })
        );
    }
}
