//! Graph infomax objective: discriminate (patch, summary) pairs of the real
//! graph from those of a feature-corrupted copy.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::gcn::{column_mean, Activation, GcnCache, GcnEncoder, NormAdj};
use super::{column_std, corrupt_features};
use crate::codec::{Blob, BlobKind, Reader, Writer};
use crate::error::{GladError, Result};
use crate::graph::Adjacency;
use crate::math::{derive_seed, glorot, seeded, sigmoid, Adam};

const P_MIN: f64 = 1e-7;
const P_MAX: f64 = 1.0 - 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DgiConfig {
    /// Output width `d1`.
    pub hidden_dim: usize,
    pub layers: usize,
    pub activation: Activation,
    /// Noise scale relative to each feature column's standard deviation.
    pub noise_sigma: f64,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for DgiConfig {
    fn default() -> Self {
        DgiConfig {
            hidden_dim: 64,
            layers: 1,
            activation: Activation::Relu,
            noise_sigma: 1.0,
            epochs: 200,
            lr: 0.001,
            seed: 0,
        }
    }
}

/// Bilinear scorer `σ(hᵀ W s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    pub w: Array2<f64>,
}

pub fn discriminate(h: ArrayView1<f64>, s: ArrayView1<f64>, disc: &Discriminator) -> f64 {
    sigmoid(h.dot(&disc.w.dot(&s)))
}

/// Mean of the patch representations.
pub fn readout(h: &Array2<f64>) -> Result<Array1<f64>> {
    if h.nrows() == 0 {
        return Err(GladError::Empty("readout over zero patches".into()));
    }
    Ok(column_mean(h))
}

/// Spreads `dL/ds` back over the `n` rows that were averaged.
pub fn readout_backward(n: usize, d_summary: &Array1<f64>) -> Array2<f64> {
    let row = d_summary / n as f64;
    let mut out = Array2::zeros((n, row.len()));
    for mut r in out.rows_mut() {
        r.assign(&row);
    }
    out
}

/// Binary cross-entropy over positive and negative patches and its partial
/// derivatives. Probabilities are clamped to `[1e-7, 1 - 1e-7]`; a clamped
/// term contributes no gradient.
#[derive(Debug, Clone)]
pub struct BceTerms {
    pub loss: f64,
    pub d_pos: Array2<f64>,
    pub d_neg: Array2<f64>,
    pub d_summary: Array1<f64>,
    pub d_disc: Array2<f64>,
}

pub fn bce_terms(
    pos: &Array2<f64>,
    neg: &Array2<f64>,
    summary: &Array1<f64>,
    disc: &Discriminator,
) -> BceTerms {
    let total = (pos.nrows() + neg.nrows()) as f64;
    let u = disc.w.dot(summary);
    let lp = pos.dot(&u);
    let ln = neg.dot(&u);
    let mut loss = 0.0;
    let gp = lp.mapv(|l| {
        let p = sigmoid(l);
        loss -= p.clamp(P_MIN, P_MAX).ln();
        if (P_MIN..=P_MAX).contains(&p) {
            (p - 1.0) / total
        } else {
            0.0
        }
    });
    let gn = ln.mapv(|l| {
        let p = sigmoid(l);
        loss -= (1.0 - p.clamp(P_MIN, P_MAX)).ln();
        if (P_MIN..=P_MAX).contains(&p) {
            p / total
        } else {
            0.0
        }
    });
    let outer = |g: &Array1<f64>, v: &Array1<f64>| {
        Array2::from_shape_fn((g.len(), v.len()), |(i, j)| g[i] * v[j])
    };
    let du = pos.t().dot(&gp) + neg.t().dot(&gn);
    BceTerms {
        loss: loss / total,
        d_pos: outer(&gp, &u),
        d_neg: outer(&gn, &u),
        d_summary: disc.w.t().dot(&du),
        d_disc: outer(&du, summary),
    }
}

#[derive(Debug, Clone)]
pub struct DgiGradients {
    pub encoder: Vec<Array2<f64>>,
    pub disc: Array2<f64>,
}

/// Loss and gradients for all encoder and discriminator parameters, given
/// propagated clean and corrupted inputs (`Â_norm X`, `Â_norm X̃`). Also
/// returns the clean forward cache.
pub fn dgi_objective_propagated(
    enc: &GcnEncoder,
    disc: &Discriminator,
    adj: &NormAdj,
    first_pos: Array2<f64>,
    first_neg: Array2<f64>,
) -> Result<(f64, DgiGradients, GcnCache)> {
    let pos = enc.forward_propagated(adj, first_pos);
    let neg = enc.forward_propagated(adj, first_neg);
    let summary = readout(&pos.out)?;
    let terms = bce_terms(&pos.out, &neg.out, &summary, disc);
    let d_pos = terms.d_pos + readout_backward(pos.out.nrows(), &terms.d_summary);
    let mut g = enc.backward(adj, &pos, &d_pos);
    for (a, b) in g.iter_mut().zip(enc.backward(adj, &neg, &terms.d_neg)) {
        *a += &b;
    }
    Ok((
        terms.loss,
        DgiGradients {
            encoder: g,
            disc: terms.d_disc,
        },
        pos,
    ))
}

pub fn dgi_objective(
    enc: &GcnEncoder,
    disc: &Discriminator,
    adj: &NormAdj,
    x: &Array2<f64>,
    x_corrupt: &Array2<f64>,
) -> Result<(f64, DgiGradients)> {
    enc.check(adj, x)?;
    let (l, g, _) = dgi_objective_propagated(enc, disc, adj, adj.apply(x), adj.apply(x_corrupt))?;
    Ok((l, g))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgiModel {
    pub encoder: GcnEncoder,
    pub disc: Discriminator,
    pub loss_trace: Vec<f64>,
}

impl DgiModel {
    pub fn new(input_dim: usize, config: &DgiConfig) -> Self {
        let mut rng = seeded(derive_seed(config.seed, 0xD61));
        let mut dims = vec![input_dim];
        dims.extend(std::iter::repeat_n(config.hidden_dim, config.layers.max(1)));
        let encoder = GcnEncoder::new(&dims, config.activation, &mut rng);
        let disc = Discriminator {
            w: glorot(&mut rng, config.hidden_dim, config.hidden_dim),
        };
        DgiModel {
            encoder,
            disc,
            loss_trace: Vec::new(),
        }
    }

    /// Full-batch Adam on the infomax loss, one corrupted copy per epoch.
    pub fn fit(
        &mut self,
        adj: &NormAdj,
        x: &Array2<f64>,
        epochs: usize,
        lr: f64,
        noise_sigma: f64,
        seed: u64,
    ) -> Result<()> {
        self.encoder.check(adj, x)?;
        let first = adj.apply(x);
        let col_std = column_std(x);
        let mut opt = Adam::new(lr);
        for epoch in 0..epochs {
            let xt = corrupt_features(x, &col_std, noise_sigma, derive_seed(seed, epoch as u64));
            let (loss, g, _) = dgi_objective_propagated(
                &self.encoder,
                &self.disc,
                adj,
                first.clone(),
                adj.apply(&xt),
            )?;
            if !loss.is_finite() {
                return Err(GladError::Divergence { epoch, loss });
            }
            self.loss_trace.push(loss);
            opt.tick();
            for (l, gw) in g.encoder.iter().enumerate() {
                opt.update_matrix(l, &mut self.encoder.weights[l], gw);
            }
            opt.update_matrix(self.encoder.n_layers(), &mut self.disc.w, &g.disc);
        }
        Ok(())
    }
}

/// Trains encoder and discriminator from scratch; returns the model and the
/// patch representations of the uncorrupted graph.
pub fn train_dgi(
    adj: &Adjacency,
    x: &Array2<f64>,
    config: &DgiConfig,
) -> Result<(DgiModel, Array2<f64>)> {
    let norm = NormAdj::new(adj);
    let mut model = DgiModel::new(x.ncols(), config);
    model.fit(
        &norm,
        x,
        config.epochs,
        config.lr,
        config.noise_sigma,
        derive_seed(config.seed, 0xC0),
    )?;
    let h = model.encoder.encode(&norm, x)?;
    Ok((model, h))
}

impl Blob for DgiModel {
    const KIND: BlobKind = BlobKind::NodeEncoder;

    fn write_body(&self, w: &mut Writer) {
        w.u8(self.encoder.activation.tag());
        w.usize(self.encoder.weights.len());
        for m in &self.encoder.weights {
            w.matrix(m);
        }
        w.matrix(&self.disc.w);
        w.f64s(&self.loss_trace);
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let activation = Activation::from_tag(r.u8()?)?;
        let n = r.usize()?;
        let weights = (0..n).map(|_| r.matrix()).collect::<Result<Vec<_>>>()?;
        if weights.is_empty() || weights.windows(2).any(|w| w[0].ncols() != w[1].nrows()) {
            return Err(GladError::Format("inconsistent encoder layers".into()));
        }
        let disc = Discriminator { w: r.matrix()? };
        Ok(DgiModel {
            encoder: GcnEncoder {
                weights,
                activation,
            },
            disc,
            loss_trace: r.f64s()?,
        })
    }
}
