use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{GladError, Result};
use crate::math::sigmoid;

/// Supervised loss on the head's scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LrLoss {
    /// Mean absolute difference between labels and scores.
    #[default]
    Mae,
    /// Mean binary cross-entropy.
    Bce,
}

/// Logistic regression `σ(h·w + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LrHead {
    pub w: Array1<f64>,
    pub b: f64,
}

#[derive(Debug, Clone)]
pub struct HeadGradients {
    pub w: Array1<f64>,
    pub b: f64,
    /// Gradient with respect to each input row.
    pub h: Array2<f64>,
}

impl LrHead {
    pub fn zeros(dim: usize) -> Self {
        LrHead {
            w: Array1::zeros(dim),
            b: 0.0,
        }
    }

    pub fn logits(&self, h: ArrayView2<f64>) -> Array1<f64> {
        h.dot(&self.w) + self.b
    }

    pub fn scores(&self, h: ArrayView2<f64>) -> Array1<f64> {
        self.logits(h).mapv(sigmoid)
    }

    /// Loss averaged over rows and its gradients.
    pub fn loss(
        &self,
        h: ArrayView2<f64>,
        labels: &[f64],
        mode: LrLoss,
    ) -> Result<(f64, HeadGradients)> {
        if h.nrows() != labels.len() || h.ncols() != self.w.len() {
            return Err(GladError::Dimension(format!(
                "head of width {} got {}x{} inputs with {} labels",
                self.w.len(),
                h.nrows(),
                h.ncols(),
                labels.len()
            )));
        }
        let n = labels.len().max(1) as f64;
        let logits = self.logits(h);
        let mut loss = 0.0;
        let mut d_logit = Array1::zeros(labels.len());
        for (k, (&z, &y)) in logits.iter().zip(labels).enumerate() {
            let s = sigmoid(z);
            match mode {
                LrLoss::Mae => {
                    let diff = y - s;
                    loss += diff.abs();
                    // subgradient 0 at an exact tie
                    let sign = if diff > 0.0 {
                        1.0
                    } else if diff < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    d_logit[k] = -sign * s * (1.0 - s) / n;
                }
                LrLoss::Bce => {
                    // softplus(z) - y z, computed stably
                    loss += z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z;
                    d_logit[k] = (s - y) / n;
                }
            }
        }
        let grads = HeadGradients {
            w: h.t().dot(&d_logit),
            b: d_logit.sum(),
            h: d_logit
                .view()
                .insert_axis(Axis(1))
                .dot(&self.w.view().insert_axis(Axis(0))),
        };
        Ok((loss / n, grads))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::seeded;
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn perfect_scores_and_arithmetic() {
        let head = LrHead::zeros(2);
        let h = array![[0.3, 0.1]];
        let (l, _) = head.loss(h.view(), &[0.5], LrLoss::Mae).unwrap();
        assert_eq!(l, 0.0);
        // logit ln(1/3) gives score 0.25
        let head = LrHead {
            w: array![0.0, 0.0],
            b: (1.0f64 / 3.0).ln(),
        };
        let (l, _) = head.loss(h.view(), &[1.0], LrLoss::Mae).unwrap();
        assert!((l - 0.75).abs() < 1e-12);
    }

    #[test]
    fn bce_gradient_matches_finite_differences() {
        let mut rng = seeded(12);
        let h = Array2::from_shape_fn((10, 5), |_| rng.random_range(-1.0..1.0));
        let labels: Vec<f64> = (0..10).map(|i| (i % 3 == 0) as u8 as f64).collect();
        let head = LrHead {
            w: Array1::from_shape_fn(5, |_| rng.random_range(-1.0..1.0)),
            b: 0.2,
        };
        let (_, g) = head.loss(h.view(), &labels, LrLoss::Bce).unwrap();
        let eps = 1e-6;
        for k in 0..5 {
            let mut p = head.clone();
            p.w[k] += eps;
            let mut m = head.clone();
            m.w[k] -= eps;
            let num = (p.loss(h.view(), &labels, LrLoss::Bce).unwrap().0
                - m.loss(h.view(), &labels, LrLoss::Bce).unwrap().0)
                / (2.0 * eps);
            assert!((num - g.w[k]).abs() <= 1e-4 * num.abs().max(1e-3));
        }
        let mut hp = h.clone();
        hp[[3, 2]] += eps;
        let mut hm = h.clone();
        hm[[3, 2]] -= eps;
        let num = (head.loss(hp.view(), &labels, LrLoss::Bce).unwrap().0
            - head.loss(hm.view(), &labels, LrLoss::Bce).unwrap().0)
            / (2.0 * eps);
        assert!((num - g.h[[3, 2]]).abs() < 1e-8);
    }

    #[test]
    fn mae_subgradient_is_zero_at_tie() {
        let head = LrHead::zeros(1);
        let (_, g) = head
            .loss(array![[1.0]].view(), &[0.5], LrLoss::Mae)
            .unwrap();
        assert_eq!(g.b, 0.0);
        assert_eq!(g.w[0], 0.0);
    }
}
