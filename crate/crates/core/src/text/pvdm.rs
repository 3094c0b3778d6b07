//! Distributed-memory paragraph vectors trained with an exact softmax.
//!
//! For every window position `t` the context vector is the mean of the
//! `2 * window` surrounding word vectors and the document vector, and the
//! centre word is predicted through `softmax(U a + b)` over the whole
//! vocabulary.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ContextEmbedder, Vocabulary};
use crate::codec::{Blob, BlobKind, Reader, Writer};
use crate::error::{GladError, Result};
use crate::math::{seeded, Rng64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PvDmConfig {
    /// Shared dimension of word and document vectors.
    pub dim: usize,
    /// Words on each side of the predicted word.
    pub window: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly to `min_lr`.
    pub lr: f64,
    pub min_lr: f64,
    pub min_count: usize,
    pub infer_epochs: usize,
    pub seed: u64,
}

impl Default for PvDmConfig {
    fn default() -> Self {
        PvDmConfig {
            dim: 64,
            window: 2,
            epochs: 50,
            lr: 0.025,
            min_lr: 1e-4,
            min_count: 1,
            infer_epochs: 10,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Mean log-likelihood of the predicted word, one entry per epoch.
    pub epoch_log_likelihood: Vec<f64>,
    /// Rows of documents too short to form a single window.
    pub short_docs: Vec<usize>,
    pub windows_per_epoch: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PvDmModel {
    vocab: Vocabulary,
    doc_ids: Vec<String>,
    /// Document vectors, one row per document.
    pub docs: Array2<f64>,
    /// Word vectors, one row per vocabulary entry.
    pub words: Array2<f64>,
    /// Softmax projection, `N_w x dim`.
    pub out_w: Array2<f64>,
    pub out_b: Array1<f64>,
    window: usize,
    infer_epochs: usize,
    report: TrainReport,
}

/// Gradient of the mean log-likelihood (ascent direction).
#[derive(Debug, Clone)]
pub struct PvDmGradient {
    pub docs: Array2<f64>,
    pub words: Array2<f64>,
    pub out_w: Array2<f64>,
    pub out_b: Array1<f64>,
}

struct Scratch {
    a: Vec<f64>,
    probs: Vec<f64>,
    da: Vec<f64>,
}

impl Scratch {
    fn new(dim: usize, n_words: usize) -> Self {
        Scratch {
            a: vec![0.0; dim],
            probs: vec![0.0; n_words],
            da: vec![0.0; dim],
        }
    }
}

/// Positions `t` with a full window on both sides.
fn window_positions(len: usize, window: usize) -> std::ops::Range<usize> {
    if len < 2 * window + 1 {
        0..0
    } else {
        window..len - window
    }
}

fn context_of(doc: &[usize], t: usize, window: usize) -> impl Iterator<Item = usize> + '_ {
    doc[t - window..t]
        .iter()
        .chain(&doc[t + 1..=t + window])
        .copied()
}

/// Fills `s.a` with the averaged context and `s.probs` with the softmax;
/// returns `log p(target)`.
fn forward(
    words: &[f64],
    out_w: &[f64],
    out_b: &[f64],
    doc_vec: &[f64],
    ctx: impl Iterator<Item = usize>,
    n_ctx: usize,
    target: usize,
    s: &mut Scratch,
) -> f64 {
    let dim = doc_vec.len();
    s.a.copy_from_slice(doc_vec);
    for w in ctx {
        let row = &words[w * dim..(w + 1) * dim];
        for (a, v) in s.a.iter_mut().zip(row) {
            *a += v;
        }
    }
    let scale = 1.0 / (n_ctx + 1) as f64;
    s.a.iter_mut().for_each(|a| *a *= scale);

    let mut max = f64::NEG_INFINITY;
    for (k, p) in s.probs.iter_mut().enumerate() {
        let row = &out_w[k * dim..(k + 1) * dim];
        let z: f64 = row.iter().zip(&s.a).map(|(u, a)| u * a).sum::<f64>() + out_b[k];
        *p = z;
        max = max.max(z);
    }
    let mut sum = 0.0;
    for p in s.probs.iter_mut() {
        *p = (*p - max).exp();
        sum += *p;
    }
    let log_target = (s.probs[target]).ln() - sum.ln();
    s.probs.iter_mut().for_each(|p| *p /= sum);
    log_target
}

/// Back-propagates `-log p(target)` from a completed `forward` into `s.da`
/// and applies the output-layer update in place.
fn backward_output(
    out_w: &mut [f64],
    out_b: &mut [f64],
    target: usize,
    lr: f64,
    update_output: bool,
    s: &mut Scratch,
) {
    let dim = s.a.len();
    s.da.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..s.probs.len() {
        let dz = s.probs[k] - if k == target { 1.0 } else { 0.0 };
        let row = &mut out_w[k * dim..(k + 1) * dim];
        for d in 0..dim {
            s.da[d] += dz * row[d];
        }
        if update_output {
            for d in 0..dim {
                row[d] -= lr * dz * s.a[d];
            }
            out_b[k] -= lr * dz;
        }
    }
}

pub fn train_pvdm(
    docs: &[Vec<String>],
    doc_ids: Vec<String>,
    vocab: Vocabulary,
    config: &PvDmConfig,
) -> Result<PvDmModel> {
    if config.dim == 0 || config.window == 0 {
        return Err(GladError::Dimension(format!(
            "dim and window must be positive (dim={}, window={})",
            config.dim, config.window
        )));
    }
    if docs.len() != doc_ids.len() {
        return Err(GladError::Dimension(format!(
            "{} documents but {} ids",
            docs.len(),
            doc_ids.len()
        )));
    }
    let dim = config.dim;
    let n_words = vocab.len();
    let mut rng = seeded(config.seed);
    let encoded: Vec<Vec<usize>> = docs.iter().map(|d| vocab.encode(d)).collect();
    let init = 0.5 / dim as f64;
    let mut d_mat = Array2::from_shape_fn((docs.len(), dim), |_| rng.random_range(-init..init));
    let words = Array2::from_shape_fn((n_words, dim), |_| rng.random_range(-init..init));

    let mut report = TrainReport::default();
    for (row, doc) in encoded.iter().enumerate() {
        if window_positions(doc.len(), config.window).is_empty() {
            report.short_docs.push(row);
            d_mat.row_mut(row).fill(0.0);
        }
    }
    report.windows_per_epoch = encoded
        .iter()
        .map(|d| window_positions(d.len(), config.window).len())
        .sum();
    if !report.short_docs.is_empty() {
        log::info!(
            "{} documents shorter than {} tokens contribute no windows",
            report.short_docs.len(),
            2 * config.window + 1
        );
    }

    let mut model = PvDmModel {
        vocab,
        doc_ids,
        docs: d_mat,
        words,
        out_w: Array2::zeros((n_words, dim)),
        out_b: Array1::zeros(n_words),
        window: config.window,
        infer_epochs: config.infer_epochs,
        report: TrainReport::default(),
    };

    let total = (report.windows_per_epoch * config.epochs).max(1) as f64;
    let mut seen = 0usize;
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let mut s = Scratch::new(dim, n_words);
    let n_ctx = 2 * config.window;
    let scale = 1.0 / (n_ctx + 1) as f64;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut ll = 0.0;
        for &row in &order {
            let doc = &encoded[row];
            for t in window_positions(doc.len(), config.window) {
                let lr = config.lr - (config.lr - config.min_lr) * (seen as f64 / total);
                seen += 1;
                let words = model.words.as_slice_mut().unwrap();
                let out_w = model.out_w.as_slice_mut().unwrap();
                let out_b = model.out_b.as_slice_mut().unwrap();
                let mut doc_row = model.docs.row_mut(row);
                let doc_vec = doc_row.as_slice_mut().unwrap();
                ll += forward(
                    words,
                    out_w,
                    out_b,
                    doc_vec,
                    context_of(doc, t, config.window),
                    n_ctx,
                    doc[t],
                    &mut s,
                );
                backward_output(out_w, out_b, doc[t], lr, true, &mut s);
                let step = lr * scale;
                for (v, g) in doc_vec.iter_mut().zip(&s.da) {
                    *v -= step * g;
                }
                for w in context_of(doc, t, config.window) {
                    let r = &mut words[w * dim..(w + 1) * dim];
                    for (v, g) in r.iter_mut().zip(&s.da) {
                        *v -= step * g;
                    }
                }
            }
        }
        let mean = if report.windows_per_epoch == 0 {
            0.0
        } else {
            ll / report.windows_per_epoch as f64
        };
        if !mean.is_finite() {
            return Err(GladError::Divergence { epoch, loss: mean });
        }
        report.epoch_log_likelihood.push(mean);
    }
    model.report = report;
    Ok(model)
}

impl PvDmModel {
    pub fn dim(&self) -> usize {
        self.docs.ncols()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn report(&self) -> &TrainReport {
        &self.report
    }

    pub fn doc_row(&self, id: &str) -> Option<usize> {
        self.doc_ids.iter().position(|d| d == id)
    }

    /// Softmax distribution over the vocabulary for one window.
    pub fn predict(&self, doc_row: usize, context: &[usize]) -> Vec<f64> {
        let mut s = Scratch::new(self.dim(), self.vocab.len());
        forward(
            self.words.as_slice().unwrap(),
            self.out_w.as_slice().unwrap(),
            self.out_b.as_slice().unwrap(),
            self.docs.row(doc_row).as_slice().unwrap(),
            context.iter().copied(),
            context.len(),
            0,
            &mut s,
        );
        s.probs
    }

    /// Mean log-likelihood over every window of `docs` (rows aligned with
    /// the model's documents) and its exact gradient.
    pub fn objective_and_gradient(&self, docs: &[Vec<usize>]) -> (f64, PvDmGradient) {
        let dim = self.dim();
        let n_ctx = 2 * self.window;
        let scale = 1.0 / (n_ctx + 1) as f64;
        let mut g = PvDmGradient {
            docs: Array2::zeros(self.docs.raw_dim()),
            words: Array2::zeros(self.words.raw_dim()),
            out_w: Array2::zeros(self.out_w.raw_dim()),
            out_b: Array1::zeros(self.out_b.len()),
        };
        let mut s = Scratch::new(dim, self.vocab.len());
        let mut out_w = self.out_w.clone();
        let mut out_b = self.out_b.clone();
        let mut total = 0.0;
        let mut count = 0usize;
        for (row, doc) in docs.iter().enumerate() {
            for t in window_positions(doc.len(), self.window) {
                total += forward(
                    self.words.as_slice().unwrap(),
                    self.out_w.as_slice().unwrap(),
                    self.out_b.as_slice().unwrap(),
                    self.docs.row(row).as_slice().unwrap(),
                    context_of(doc, t, self.window),
                    n_ctx,
                    doc[t],
                    &mut s,
                );
                count += 1;
                // lr = 0: only fills s.da
                backward_output(
                    out_w.as_slice_mut().unwrap(),
                    out_b.as_slice_mut().unwrap(),
                    doc[t],
                    0.0,
                    false,
                    &mut s,
                );
                for k in 0..self.vocab.len() {
                    let dz = s.probs[k] - if k == doc[t] { 1.0 } else { 0.0 };
                    for d in 0..dim {
                        g.out_w[[k, d]] -= dz * s.a[d];
                    }
                    g.out_b[k] -= dz;
                }
                for d in 0..dim {
                    g.docs[[row, d]] -= scale * s.da[d];
                }
                for w in context_of(doc, t, self.window) {
                    for d in 0..dim {
                        g.words[[w, d]] -= scale * s.da[d];
                    }
                }
            }
        }
        let n = count.max(1) as f64;
        g.docs /= n;
        g.words /= n;
        g.out_w /= n;
        g.out_b /= n;
        (total / n, g)
    }

    /// Learns a vector for an unseen document with words and softmax frozen.
    pub fn infer(&self, tokens: &[String], seed: u64) -> Array1<f64> {
        let dim = self.dim();
        let doc = self.vocab.encode(tokens);
        let positions = window_positions(doc.len(), self.window);
        if positions.is_empty() {
            return Array1::zeros(dim);
        }
        let mut rng: Rng64 = seeded(seed);
        let init = 0.5 / dim as f64;
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-init..init)).collect();
        let mut s = Scratch::new(dim, self.vocab.len());
        let mut out_w = self.out_w.clone();
        let mut out_b = self.out_b.clone();
        let n_ctx = 2 * self.window;
        let total = (positions.len() * self.infer_epochs).max(1) as f64;
        let (lr0, lr1) = (0.025, 1e-4);
        let mut seen = 0usize;
        for _ in 0..self.infer_epochs {
            for t in positions.clone() {
                let lr = lr0 - (lr0 - lr1) * (seen as f64 / total);
                seen += 1;
                forward(
                    self.words.as_slice().unwrap(),
                    out_w.as_slice().unwrap(),
                    out_b.as_slice().unwrap(),
                    &v,
                    context_of(&doc, t, self.window),
                    n_ctx,
                    doc[t],
                    &mut s,
                );
                backward_output(
                    out_w.as_slice_mut().unwrap(),
                    out_b.as_slice_mut().unwrap(),
                    doc[t],
                    lr,
                    false,
                    &mut s,
                );
                let step = lr / (n_ctx + 1) as f64;
                for (x, g) in v.iter_mut().zip(&s.da) {
                    *x -= step * g;
                }
            }
        }
        Array1::from(v)
    }

    /// Document vector for a known id, otherwise an inferred one.
    pub fn doc_vector(&self, id: &str, tokens: &[String]) -> Array1<f64> {
        match self.doc_row(id) {
            Some(r) => self.docs.row(r).to_owned(),
            None => self.infer(tokens, crate::math::derive_seed(0x0D0C, id.len() as u64)),
        }
    }

    /// Mean of the word vectors of in-vocabulary tokens; zero when none.
    pub fn context_embedding(&self, text: &str) -> Array1<f64> {
        let idx = self.vocab.encode(&super::tokenize(text));
        let mut v = Array1::zeros(self.dim());
        if idx.is_empty() {
            return v;
        }
        for &w in &idx {
            v += &self.words.row(w);
        }
        v / idx.len() as f64
    }
}

impl ContextEmbedder for PvDmModel {
    fn dim(&self) -> usize {
        PvDmModel::dim(self)
    }

    fn embed(&self, text: &str) -> Array1<f64> {
        self.context_embedding(text)
    }
}

impl Blob for PvDmModel {
    const KIND: BlobKind = BlobKind::PvDm;

    fn write_body(&self, w: &mut Writer) {
        w.usize(self.vocab.len());
        w.usize(self.dim());
        w.usize(self.window);
        w.usize(self.infer_epochs);
        for (word, &c) in self.vocab.words().iter().zip(self.vocab.counts()) {
            w.str(word);
            w.u64(c);
        }
        w.usize(self.doc_ids.len());
        for id in &self.doc_ids {
            w.str(id);
        }
        w.matrix(&self.docs);
        w.matrix(&self.words);
        w.matrix(&self.out_w);
        w.vector(&self.out_b);
        w.f64s(&self.report.epoch_log_likelihood);
        w.usize(self.report.short_docs.len());
        for &r in &self.report.short_docs {
            w.usize(r);
        }
        w.usize(self.report.windows_per_epoch);
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let n_words = r.usize()?;
        let dim = r.usize()?;
        let window = r.usize()?;
        let infer_epochs = r.usize()?;
        let mut words = Vec::with_capacity(n_words);
        let mut counts = Vec::with_capacity(n_words);
        for _ in 0..n_words {
            words.push(r.str()?);
            counts.push(r.u64()?);
        }
        let n_docs = r.usize()?;
        let doc_ids = (0..n_docs).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
        let docs = r.matrix()?;
        let word_mat = r.matrix()?;
        let out_w = r.matrix()?;
        let out_b = r.vector()?;
        let epoch_log_likelihood = r.f64s()?;
        let n_short = r.usize()?;
        let short_docs = (0..n_short)
            .map(|_| r.usize())
            .collect::<Result<Vec<_>>>()?;
        let windows_per_epoch = r.usize()?;
        if docs.dim() != (n_docs, dim)
            || word_mat.dim() != (n_words, dim)
            || out_w.dim() != (n_words, dim)
            || out_b.len() != n_words
        {
            return Err(GladError::Format("inconsistent PV-DM shapes".into()));
        }
        Ok(PvDmModel {
            vocab: Vocabulary::from_parts(words, counts),
            doc_ids,
            docs,
            words: word_mat,
            out_w,
            out_b,
            window,
            infer_epochs,
            report: TrainReport {
                epoch_log_likelihood,
                short_docs,
                windows_per_epoch,
            },
        })
    }
}
