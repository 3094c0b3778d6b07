//! Slow, direct reference implementations used to check the library.

use ndarray::Array2;

/// Share of (positive, negative) pairs ordered correctly, ties count one half.
pub fn pairwise_auc(labels: &[u8], scores: &[f64]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li == 1 && lj == 0 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// Counts-based accuracy, precision, recall and F1; `None` where undefined.
pub fn counted_metrics(
    labels: &[u8],
    preds: &[u8],
) -> (f64, Option<f64>, Option<f64>, Option<f64>) {
    let (mut tp, mut fp, mut fn_, mut tn) = (0u64, 0u64, 0u64, 0u64);
    for (&l, &p) in labels.iter().zip(preds) {
        match (l, p) {
            (1, 1) => tp += 1,
            (0, 1) => fp += 1,
            (1, 0) => fn_ += 1,
            _ => tn += 1,
        }
    }
    let div = |a: u64, b: u64| (b > 0).then(|| a as f64 / b as f64);
    let precision = div(tp, tp + fp);
    let recall = div(tp, tp + fn_);
    let f1 = if precision.is_some() && recall.is_some() && tp > 0 {
        div(2 * tp, 2 * tp + fp + fn_)
    } else {
        None
    };
    (
        div(tp + tn, tp + fp + fn_ + tn).unwrap(),
        precision,
        recall,
        f1,
    )
}

/// Agreement beyond chance from explicit marginal products.
pub fn kappa_oracle(t: &Array2<u64>) -> f64 {
    let n = t.iter().sum::<u64>() as f64;
    let k = t.nrows();
    let po = (0..k).map(|i| t[[i, i]] as f64).sum::<f64>() / n;
    let mut pe = 0.0;
    for i in 0..k {
        let row: u64 = t.row(i).sum();
        let col: u64 = t.column(i).sum();
        pe += (row as f64 / n) * (col as f64 / n);
    }
    (po - pe) / (1.0 - pe)
}

/// Dense `act(D^-1/2 (A + I) D^-1/2 H W)` stacked over `weights`, with `D`
/// the row sums of `A + I`.
pub fn dense_gcn(
    n: usize,
    pairs: &[(usize, usize)],
    x: &Array2<f64>,
    weights: &[Array2<f64>],
    relu: bool,
) -> Array2<f64> {
    let mut a = Array2::<f64>::eye(n);
    for &(i, j) in pairs {
        a[[i, j]] = 1.0;
    }
    let deg: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    let mut norm = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            norm[[i, j]] = a[[i, j]] / (deg[i] * deg[j]).sqrt();
        }
    }
    let mut h = x.clone();
    for w in weights {
        let mut next = Array2::zeros((n, w.ncols()));
        for i in 0..n {
            for c in 0..w.ncols() {
                let mut v = 0.0;
                for j in 0..n {
                    for k in 0..w.nrows() {
                        v += norm[[i, j]] * h[[j, k]] * w[[k, c]];
                    }
                }
                next[[i, c]] = if relu { v.max(0.0) } else { v };
            }
        }
        h = next;
    }
    h
}
