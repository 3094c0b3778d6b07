use serde::{Deserialize, Serialize};

use crate::error::{GladError, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn from_predictions(labels: &[u8], predictions: &[u8]) -> Result<Self> {
        if labels.len() != predictions.len() {
            return Err(GladError::Dimension(format!(
                "{} labels but {} predictions",
                labels.len(),
                predictions.len()
            )));
        }
        let mut c = Confusion::default();
        for (&y, &p) in labels.iter().zip(predictions) {
            match (y, p) {
                (1, 1) => c.tp += 1,
                (0, 1) => c.fp += 1,
                (1, 0) => c.fn_ += 1,
                (0, 0) => c.tn += 1,
                _ => {
                    return Err(GladError::Dimension(format!(
                        "labels must be 0/1, got ({y}, {p})"
                    )))
                }
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Which metrics had a zero denominator and were reported as 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndefinedFlags {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
    pub auc: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub confusion: Confusion,
    pub undefined: UndefinedFlags,
}

pub const METRIC_NAMES: [&str; 5] = ["accuracy", "precision", "recall", "f1", "auc"];

impl Metrics {
    pub fn values(&self) -> [f64; 5] {
        [
            self.accuracy,
            self.precision,
            self.recall,
            self.f1,
            self.auc,
        ]
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Probability that a random positive outscores a random negative, ties
/// counted one half, via average ranks. `None` without both classes.
pub fn auc(labels: &[u8], scores: &[f64]) -> Option<f64> {
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // sum of (twice) the average ranks of positives, kept integral
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1, average (i + j + 2) / 2
        let pos_in_group = idx[i..=j].iter().filter(|&&k| labels[k] == 1).count() as u128;
        twice_rank_sum += pos_in_group * (i + j + 2) as u128;
        i = j + 1;
    }
    let p = n_pos as u128;
    let twice_u = twice_rank_sum - p * (p + 1);
    Some(twice_u as f64 / (2 * p * n_neg as u128) as f64)
}

/// Accuracy, precision, recall, F1 and AUC. Undefined values are 0 and flagged.
pub fn metrics(labels: &[u8], predictions: &[u8], scores: &[f64]) -> Result<Metrics> {
    if scores.len() != labels.len() {
        return Err(GladError::Dimension(format!(
            "{} labels but {} scores",
            labels.len(),
            scores.len()
        )));
    }
    let c = Confusion::from_predictions(labels, predictions)?;
    let mut undefined = UndefinedFlags::default();
    let accuracy = ratio(c.tp + c.tn, c.total()).unwrap_or(0.0);
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    undefined.precision = precision.is_none();
    undefined.recall = recall.is_none();
    // 2PR/(P+R) reduced to counts; undefined when P or R is, or both are 0
    let f1 = match (precision, recall) {
        (Some(_), Some(_)) if c.tp > 0 => ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_),
        _ => None,
    };
    undefined.f1 = f1.is_none();
    let a = auc(labels, scores);
    undefined.auc = a.is_none();
    Ok(Metrics {
        accuracy,
        precision: precision.unwrap_or(0.0),
        recall: recall.unwrap_or(0.0),
        f1: f1.unwrap_or(0.0),
        auc: a.unwrap_or(0.0),
        confusion: c,
        undefined,
    })
}

/// Mean and normal-approximation 95% half-width over splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub per_split: Vec<Metrics>,
    pub mean: [f64; 5],
    pub half_width: [f64; 5],
}

impl MetricsSummary {
    pub fn from_splits(per_split: Vec<Metrics>) -> Self {
        let n = per_split.len();
        let mut mean = [0.0; 5];
        let mut half_width = [0.0; 5];
        for k in 0..5 {
            let vals: Vec<f64> = per_split.iter().map(|m| m.values()[k]).collect();
            mean[k] = if n == 0 {
                0.0
            } else {
                vals.iter().sum::<f64>() / n as f64
            };
            if n > 1 {
                let var = vals.iter().map(|v| (v - mean[k]).powi(2)).sum::<f64>() / (n - 1) as f64;
                half_width[k] = 1.96 * var.sqrt() / (n as f64).sqrt();
            }
        }
        MetricsSummary {
            per_split,
            mean,
            half_width,
        }
    }

    pub fn f1(&self) -> f64 {
        self.mean[3]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> (Vec<u8>, Vec<u8>) {
        let mut y = vec![];
        let mut p = vec![];
        for (n, a, b) in [(tp, 1, 1), (fp, 0, 1), (fn_, 1, 0), (tn, 0, 0)] {
            y.extend(std::iter::repeat_n(a, n));
            p.extend(std::iter::repeat_n(b, n));
        }
        (y, p)
    }

    #[test]
    fn textbook_counts() {
        let (y, p) = from_counts(8, 2, 2, 88);
        let s: Vec<f64> = p.iter().map(|&v| v as f64).collect();
        let m = metrics(&y, &p, &s).unwrap();
        assert_eq!(m.accuracy, 0.96);
        assert_eq!(m.precision, 0.8);
        assert_eq!(m.recall, 0.8);
        assert!((m.f1 - 0.8).abs() < 1e-15);
        assert_eq!(m.undefined, UndefinedFlags::default());
    }

    #[test]
    fn separated_scores_give_unit_auc() {
        let y = [0, 0, 1, 1];
        assert_eq!(auc(&y, &[0.1, 0.2, 0.8, 0.9]), Some(1.0));
        assert_eq!(auc(&y, &[0.5; 4]), Some(0.5));
        assert_eq!(auc(&[1, 1], &[0.1, 0.2]), None);
    }

    #[test]
    fn undefined_precision_is_flagged() {
        let m = metrics(&[1, 0], &[0, 0], &[0.2, 0.1]).unwrap();
        assert_eq!(m.precision, 0.0);
        assert!(m.undefined.precision && m.undefined.f1 && !m.undefined.recall);
    }

    #[test]
    fn summary_half_width() {
        let mk = |f1: f64| Metrics {
            accuracy: 0.0,
            precision: 0.0,
            recall: 0.0,
            f1,
            auc: 0.0,
            confusion: Confusion::default(),
            undefined: UndefinedFlags::default(),
        };
        let s = MetricsSummary::from_splits(vec![mk(0.5), mk(0.7)]);
        assert!((s.mean[3] - 0.6).abs() < 1e-15);
        let sd = (0.02f64).sqrt();
        assert!((s.half_width[3] - 1.96 * sd / 2f64.sqrt()).abs() < 1e-12);
    }
}
