use ndarray::{s, Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::head::LrHead;
use super::{joint_loss, pair_representation, TrainConfig, Variant};
use crate::codec::{Blob, BlobKind, Reader, Writer};
use crate::edge::{AeGradients, Autoencoder};
use crate::error::{GladError, Result};
use crate::graph::{Adjacency, CitationNetwork};
use crate::math::{derive_seed, seeded, Adam};
use crate::node::{
    column_std, corrupt_features, dgi_objective_propagated, Activation, DgiConfig, DgiModel,
    NormAdj,
};

const TAG_RANDOM_X: u64 = 0x52_4E;
const TAG_RANDOM_Z: u64 = 0x52_45;
const TAG_NODE_INIT: u64 = 0x4E_49;
const TAG_EDGE_INIT: u64 = 0x45_49;
const TAG_HEAD_INIT: u64 = 0x48_49;
const TAG_SHUFFLE: u64 = 0x53_48;
const TAG_CORRUPT: u64 = 0x43_4F;
const TAG_EVAL: u64 = 0x45_56;

/// Everything the detector reads from a dataset.
#[derive(Debug, Clone, Copy)]
pub struct GladInputs<'a> {
    pub adjacency: &'a Adjacency,
    pub endpoints: &'a [(usize, usize)],
    /// Node features, one row per paper.
    pub x: &'a Array2<f64>,
    /// Edge relation features, one row per edge.
    pub z: &'a Array2<f64>,
}

impl<'a> GladInputs<'a> {
    pub fn new(net: &'a CitationNetwork, x: &'a Array2<f64>, z: &'a Array2<f64>) -> Self {
        GladInputs {
            adjacency: net.adjacency(),
            endpoints: net.endpoints(),
            x,
            z,
        }
    }

    fn check(&self) -> Result<()> {
        if self.x.nrows() != self.adjacency.n() {
            return Err(GladError::Dimension(format!(
                "{} node feature rows for {} papers",
                self.x.nrows(),
                self.adjacency.n()
            )));
        }
        if self.z.nrows() != self.endpoints.len() {
            return Err(GladError::Dimension(format!(
                "{} edge feature rows for {} edges",
                self.z.nrows(),
                self.endpoints.len()
            )));
        }
        Ok(())
    }

    /// Node features after the variant's substitution.
    pub fn node_features(&self, cfg: &TrainConfig) -> Array2<f64> {
        if cfg.variant.random_node_features() {
            let mut rng = seeded(derive_seed(cfg.seed, TAG_RANDOM_X));
            Array2::from_shape_simple_fn(self.x.raw_dim(), || rng.sample(StandardNormal))
        } else {
            self.x.clone()
        }
    }

    /// Edge features after the variant's substitution.
    pub fn edge_features(&self, cfg: &TrainConfig) -> Array2<f64> {
        if cfg.variant.random_edge_features() {
            let mut rng = seeded(derive_seed(cfg.seed, TAG_RANDOM_Z));
            Array2::from_shape_simple_fn(self.z.raw_dim(), || rng.random_range(0.0..1.0))
        } else {
            self.z.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeLearner {
    Dgi(DgiModel),
    Autoencoder(Autoencoder),
}

impl NodeLearner {
    fn dim(&self) -> usize {
        match self {
            NodeLearner::Dgi(m) => m.encoder.output_dim(),
            NodeLearner::Autoencoder(a) => a.code_dim(),
        }
    }

    fn reg_sq(&self) -> f64 {
        match self {
            NodeLearner::Dgi(m) => m.encoder.weight_norm_sq(),
            NodeLearner::Autoencoder(a) => a.encoder_norm_sq(),
        }
    }

    /// Representations of every paper.
    pub fn represent(&self, norm: &NormAdj, x: &Array2<f64>) -> Result<Array2<f64>> {
        match self {
            NodeLearner::Dgi(m) => m.encoder.encode(norm, x),
            NodeLearner::Autoencoder(a) => a.encode(x.view()),
        }
    }
}

/// Independently pretrained node and edge learners.
#[derive(Debug, Clone)]
pub struct Pretrained {
    pub variant: Variant,
    pub node: Option<NodeLearner>,
    pub edge: Option<Autoencoder>,
    pub node_trace: Vec<f64>,
    pub edge_trace: Vec<f64>,
}

/// Initialises all learners and pretrains the unsupervised ones the
/// variant keeps. Depends only on the inputs and config, not on labels.
pub fn pretrain(inputs: &GladInputs<'_>, cfg: &TrainConfig) -> Result<Pretrained> {
    cfg.validate()?;
    inputs.check()?;
    let v = cfg.variant;
    let mut node_trace = Vec::new();
    let mut edge_trace = Vec::new();
    let node = if v.uses_node() {
        let x = inputs.node_features(cfg);
        if v.node_autoencoder() {
            let mut ae = Autoencoder::new(
                &[x.ncols(), cfg.embedding_dim],
                true,
                derive_seed(cfg.seed, TAG_NODE_INIT),
            )?;
            if v.node_loss() {
                node_trace = ae.fit(x.view(), cfg.r, cfg.node_pretrain_epochs)?;
            }
            Some(NodeLearner::Autoencoder(ae))
        } else {
            let dgi_cfg = DgiConfig {
                hidden_dim: cfg.embedding_dim,
                layers: cfg.gcn_layers,
                activation: Activation::Relu,
                noise_sigma: cfg.noise_sigma,
                epochs: cfg.node_pretrain_epochs,
                lr: cfg.r,
                seed: derive_seed(cfg.seed, TAG_NODE_INIT),
            };
            let mut m = DgiModel::new(x.ncols(), &dgi_cfg);
            if v.node_loss() {
                let norm = NormAdj::new(inputs.adjacency);
                m.fit(
                    &norm,
                    &x,
                    cfg.node_pretrain_epochs,
                    cfg.r,
                    cfg.noise_sigma,
                    derive_seed(cfg.seed, TAG_CORRUPT),
                )?;
                node_trace = m.loss_trace.clone();
            }
            Some(NodeLearner::Dgi(m))
        }
    } else {
        None
    };
    let edge = if v.uses_edge() {
        let z = inputs.edge_features(cfg);
        let mut arch = vec![z.ncols()];
        arch.extend(&cfg.ae_hidden);
        let mut ae = Autoencoder::new(&arch, false, derive_seed(cfg.seed, TAG_EDGE_INIT))?;
        if v.edge_loss() {
            edge_trace = ae.fit(z.view(), cfg.r, cfg.edge_pretrain_epochs)?;
        }
        Some(ae)
    } else {
        None
    };
    Ok(Pretrained {
        variant: v,
        node,
        edge,
        node_trace,
        edge_trace,
    })
}

/// Components of the joint objective.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossParts {
    pub node: f64,
    pub edge: f64,
    pub lr: f64,
    /// Squared parameter norm before weighting by `α`.
    pub reg: f64,
    pub total: f64,
}

impl LossParts {
    fn finish(mut self, cfg: &TrainConfig) -> Self {
        self.total = joint_loss(self.node, self.edge, self.lr, self.reg, cfg.alpha, cfg.beta);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean of the per-batch objectives seen during the epoch.
    pub mean_batch_loss: f64,
    /// Objective over the whole training set after the epoch.
    pub objective: LossParts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Position in the network's edge list.
    pub edge: usize,
    pub score: f64,
    pub label: u8,
}

/// Trained detector.
#[derive(Debug, Clone, PartialEq)]
pub struct JointModel {
    pub config: TrainConfig,
    pub node: Option<NodeLearner>,
    pub edge: Option<Autoencoder>,
    pub head: LrHead,
    /// Objective after pretraining, before the first joint step.
    pub initial: LossParts,
    pub epochs: Vec<EpochLog>,
    pub converged: bool,
    /// Epoch whose parameters were kept when `keep_best` is set.
    pub best_epoch: Option<usize>,
}

/// Parameter gradients for one batch.
struct Gradients {
    node_dgi: Option<(Vec<Array2<f64>>, Array2<f64>)>,
    node_ae: Option<AeGradients>,
    edge: Option<AeGradients>,
    head_w: Array1<f64>,
    head_b: f64,
}

/// Working state shared by the training loop and the objective evaluation.
struct Workspace {
    norm: NormAdj,
    x: Array2<f64>,
    z: Array2<f64>,
    /// `Â_norm X` for the graph encoder.
    first: Array2<f64>,
    col_std: Vec<f64>,
}

impl Workspace {
    fn new(inputs: &GladInputs<'_>, cfg: &TrainConfig) -> Self {
        let norm = NormAdj::new(inputs.adjacency);
        let x = inputs.node_features(cfg);
        let first = norm.apply(&x);
        let col_std = column_std(&x);
        Workspace {
            norm,
            z: inputs.edge_features(cfg),
            x,
            first,
            col_std,
        }
    }
}

fn node_loss_full(
    ws: &Workspace,
    m: &DgiModel,
    sigma: f64,
    seed: u64,
) -> Result<(f64, Vec<Array2<f64>>, Array2<f64>)> {
    let xt = corrupt_features(&ws.x, &ws.col_std, sigma, seed);
    let (loss, g, _) = dgi_objective_propagated(
        &m.encoder,
        &m.disc,
        &ws.norm,
        ws.first.clone(),
        ws.norm.apply(&xt),
    )?;
    Ok((loss, g.encoder, g.disc))
}

impl JointModel {
    fn reg_sq(&self) -> f64 {
        self.node.as_ref().map_or(0.0, |n| n.reg_sq())
            + self.edge.as_ref().map_or(0.0, |e| e.encoder_norm_sq())
    }

    /// Supervised, edge and node-autoencoder terms on one batch plus the
    /// gradients of everything except the full-graph infomax loss.
    fn batch_terms(
        &self,
        ws: &Workspace,
        endpoints: &[(usize, usize)],
        batch: &[usize],
        labels: &[f64],
    ) -> Result<(LossParts, Gradients)> {
        let cfg = &self.config;
        let v = cfg.variant;
        let bs = batch.len();
        let mut parts = LossParts::default();
        let rows: Vec<usize> = batch
            .iter()
            .map(|&e| endpoints[e].0)
            .chain(batch.iter().map(|&e| endpoints[e].1))
            .collect();

        enum NodeFwd {
            None,
            GcnRows(Array2<f64>),
            GcnFull(crate::node::GcnCache),
            Ae(crate::edge::AeCache, Array2<f64>),
        }
        let (node_fwd, hn) = match &self.node {
            None => (NodeFwd::None, None),
            Some(NodeLearner::Dgi(m)) => {
                if m.encoder.n_layers() == 1 {
                    let (pre, h) = m.encoder.encode_rows(&ws.first, &rows);
                    (NodeFwd::GcnRows(pre), Some(h))
                } else {
                    let cache = m.encoder.forward_propagated(&ws.norm, ws.first.clone());
                    let h = cache.out.select(Axis(0), &rows);
                    (NodeFwd::GcnFull(cache), Some(h))
                }
            }
            Some(NodeLearner::Autoencoder(a)) => {
                let xr = ws.x.select(Axis(0), &rows);
                let cache = a.forward(xr.view())?;
                let h = cache.code(a.n_encoder_layers()).clone();
                (NodeFwd::Ae(cache, xr), Some(h))
            }
        };
        let edge_fwd = match &self.edge {
            None => None,
            Some(a) => {
                let zb = ws.z.select(Axis(0), batch);
                let cache = a.forward(zb.view())?;
                Some((cache, zb))
            }
        };

        let d1 = hn.as_ref().map_or(0, |h| h.ncols());
        let d2 = self.edge.as_ref().map_or(0, |a| a.code_dim());
        let mut h = Array2::zeros((bs, 2 * d1 + d2));
        if let Some(hn) = &hn {
            h.slice_mut(s![.., ..d1]).assign(&hn.slice(s![..bs, ..]));
            h.slice_mut(s![.., d1..2 * d1])
                .assign(&hn.slice(s![bs.., ..]));
        }
        if let (Some((cache, _)), Some(a)) = (&edge_fwd, &self.edge) {
            h.slice_mut(s![.., 2 * d1..])
                .assign(cache.code(a.n_encoder_layers()));
        }
        let (llr, hg) = self.head.loss(h.view(), labels, cfg.lr_loss)?;
        parts.lr = llr;
        let d_h = hg.h * cfg.beta;
        let alpha2 = 2.0 * cfg.alpha;

        let mut grads = Gradients {
            node_dgi: None,
            node_ae: None,
            edge: None,
            head_w: hg.w * cfg.beta,
            head_b: hg.b * cfg.beta,
        };

        if let Some(node) = &self.node {
            let mut d_hn = Array2::zeros((2 * bs, d1));
            d_hn.slice_mut(s![..bs, ..])
                .assign(&d_h.slice(s![.., ..d1]));
            d_hn.slice_mut(s![bs.., ..])
                .assign(&d_h.slice(s![.., d1..2 * d1]));
            match (node, node_fwd) {
                (NodeLearner::Dgi(m), NodeFwd::GcnRows(pre)) => {
                    let mut g = m.encoder.backward_rows(&ws.first, &rows, &pre, &d_hn);
                    g.scaled_add(alpha2, &m.encoder.weights[0]);
                    grads.node_dgi = Some((vec![g], Array2::zeros(m.disc.w.raw_dim())));
                }
                (NodeLearner::Dgi(m), NodeFwd::GcnFull(cache)) => {
                    let mut d_full = Array2::zeros(cache.out.raw_dim());
                    for (k, &r) in rows.iter().enumerate() {
                        let mut row = d_full.row_mut(r);
                        row += &d_hn.row(k);
                    }
                    let mut g = m.encoder.backward(&ws.norm, &cache, &d_full);
                    for (gl, w) in g.iter_mut().zip(&m.encoder.weights) {
                        gl.scaled_add(alpha2, w);
                    }
                    grads.node_dgi = Some((g, Array2::zeros(m.disc.w.raw_dim())));
                }
                (NodeLearner::Autoencoder(a), NodeFwd::Ae(cache, xr)) => {
                    let d_out = if v.node_loss() {
                        let diff = cache.output() - &xr;
                        parts.node = crate::math::frobenius_sq(&diff);
                        diff * 2.0
                    } else {
                        Array2::zeros(xr.raw_dim())
                    };
                    let mut g = a.backward(&cache, &d_out, Some(&d_hn));
                    for (gl, l) in g.encoder.iter_mut().zip(&a.encoder) {
                        gl.w.scaled_add(alpha2, &l.w);
                        gl.b.scaled_add(alpha2, &l.b);
                    }
                    grads.node_ae = Some(g);
                }
                _ => unreachable!("node forward does not match learner"),
            }
        }

        if let (Some(a), Some((cache, zb))) = (&self.edge, edge_fwd) {
            let d_code = d_h.slice(s![.., 2 * d1..]).to_owned();
            let d_out = if v.edge_loss() {
                let diff = cache.output() - &zb;
                parts.edge = crate::math::frobenius_sq(&diff);
                diff * 2.0
            } else {
                Array2::zeros(zb.raw_dim())
            };
            let mut g = a.backward(&cache, &d_out, Some(&d_code));
            for (gl, l) in g.encoder.iter_mut().zip(&a.encoder) {
                gl.w.scaled_add(alpha2, &l.w);
                gl.b.scaled_add(alpha2, &l.b);
            }
            grads.edge = Some(g);
        }
        parts.reg = self.reg_sq();
        Ok((parts, grads))
    }

    fn apply(&mut self, adam: &mut Adam, grads: &Gradients) {
        adam.tick();
        let mut slot = 0;
        match &mut self.node {
            Some(NodeLearner::Dgi(m)) => {
                if let Some((g, gd)) = &grads.node_dgi {
                    for (l, gw) in g.iter().enumerate() {
                        adam.update_matrix(slot + l, &mut m.encoder.weights[l], gw);
                    }
                    adam.update_matrix(slot + m.encoder.n_layers(), &mut m.disc.w, gd);
                }
                slot += m.encoder.n_layers() + 1;
            }
            Some(NodeLearner::Autoencoder(a)) => {
                if let Some(g) = &grads.node_ae {
                    a.adam_step(adam, slot, g);
                }
                slot += a.n_slots();
            }
            None => {}
        }
        if let Some(a) = &mut self.edge {
            if let Some(g) = &grads.edge {
                a.adam_step(adam, slot, g);
            }
            slot += a.n_slots();
        }
        adam.update_vector(slot, &mut self.head.w, &grads.head_w);
        let mut b = [self.head.b];
        adam.update(slot + 1, &mut b, &[grads.head_b]);
        self.head.b = b[0];
    }

    /// Objective over a labelled edge set, with batch-sized scaling of the
    /// summed reconstruction terms and a fixed corruption for the infomax term.
    fn objective(
        &self,
        ws: &Workspace,
        endpoints: &[(usize, usize)],
        edges: &[usize],
        labels: &[f64],
    ) -> Result<LossParts> {
        let (mut parts, _) = self.batch_terms(ws, endpoints, edges, labels)?;
        let scale = self.config.batch_size as f64 / edges.len().max(1) as f64;
        parts.edge *= scale;
        parts.node *= scale;
        if let (Some(NodeLearner::Dgi(m)), true) = (&self.node, self.config.variant.node_loss()) {
            let (ln, _, _) = node_loss_full(
                ws,
                m,
                self.config.noise_sigma,
                derive_seed(self.config.seed, TAG_EVAL),
            )?;
            parts.node = ln;
        }
        Ok(parts.finish(&self.config))
    }

    pub fn node_representations(&self, inputs: &GladInputs<'_>) -> Result<Option<Array2<f64>>> {
        inputs.check()?;
        match &self.node {
            None => Ok(None),
            Some(n) => {
                let norm = NormAdj::new(inputs.adjacency);
                n.represent(&norm, &inputs.node_features(&self.config))
                    .map(Some)
            }
        }
    }

    pub fn edge_representations(&self, inputs: &GladInputs<'_>) -> Result<Option<Array2<f64>>> {
        inputs.check()?;
        match &self.edge {
            None => Ok(None),
            Some(a) => a
                .encode(inputs.edge_features(&self.config).view())
                .map(Some),
        }
    }

    /// Scores and thresholded labels for the given edge positions.
    pub fn predict(&self, inputs: &GladInputs<'_>, edges: &[usize]) -> Result<Vec<Prediction>> {
        if let Some(&bad) = edges.iter().find(|&&e| e >= inputs.endpoints.len()) {
            return Err(GladError::Dimension(format!(
                "edge index {bad} out of range"
            )));
        }
        let hn = self.node_representations(inputs)?;
        let he = self.edge_representations(inputs)?;
        let pairs = pair_representation(hn.as_ref(), he.as_ref(), inputs.endpoints, edges)?;
        let scores = self.head.scores(pairs.view());
        Ok(edges
            .iter()
            .zip(scores)
            .map(|(&edge, score)| Prediction {
                edge,
                score,
                label: (score > 0.5) as u8,
            })
            .collect())
    }

    /// Training-set objective as used for the convergence test.
    pub fn evaluate(
        &self,
        inputs: &GladInputs<'_>,
        edges: &[usize],
        labels: &[u8],
    ) -> Result<LossParts> {
        inputs.check()?;
        let ws = Workspace::new(inputs, &self.config);
        let y: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
        self.objective(&ws, inputs.endpoints, edges, &y)
    }
}

pub fn evaluate_objective(
    model: &JointModel,
    inputs: &GladInputs<'_>,
    edges: &[usize],
    labels: &[u8],
) -> Result<LossParts> {
    model.evaluate(inputs, edges, labels)
}

/// Joint training from pretrained learners on the labelled edges `train`.
pub fn train_joint(
    pre: &Pretrained,
    inputs: &GladInputs<'_>,
    train: &[usize],
    labels: &[u8],
    cfg: &TrainConfig,
) -> Result<JointModel> {
    cfg.validate()?;
    inputs.check()?;
    if pre.variant != cfg.variant {
        return Err(GladError::Config(format!(
            "pretrained for {} but training {}",
            pre.variant, cfg.variant
        )));
    }
    if train.len() != labels.len() {
        return Err(GladError::Dimension(format!(
            "{} edges but {} labels",
            train.len(),
            labels.len()
        )));
    }
    if let Some(&bad) = train.iter().find(|&&e| e >= inputs.endpoints.len()) {
        return Err(GladError::Dimension(format!(
            "edge index {bad} out of range"
        )));
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    if positives == 0 || positives == labels.len() {
        return Err(GladError::SingleClass(1));
    }

    let ws = Workspace::new(inputs, cfg);
    let d1 = pre.node.as_ref().map_or(0, |n| n.dim());
    let d2 = pre.edge.as_ref().map_or(0, |a| a.code_dim());
    let width = 2 * d1 + d2;
    let bound = 1.0 / (width.max(1) as f64).sqrt();
    let mut hrng = seeded(derive_seed(cfg.seed, TAG_HEAD_INIT));
    let head = LrHead {
        w: Array1::from_shape_simple_fn(width, || hrng.random_range(-bound..bound)),
        b: 0.0,
    };
    let mut model = JointModel {
        config: cfg.clone(),
        node: pre.node.clone(),
        edge: pre.edge.clone(),
        head,
        initial: LossParts::default(),
        epochs: Vec::new(),
        converged: false,
        best_epoch: None,
    };
    let label_of: std::collections::HashMap<usize, f64> = train
        .iter()
        .zip(labels)
        .map(|(&e, &l)| (e, l as f64))
        .collect();
    let y_train: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    model.initial = model.objective(&ws, inputs.endpoints, train, &y_train)?;

    let mut adam = Adam::new(cfg.lr);
    let mut rng = seeded(derive_seed(cfg.seed, TAG_SHUFFLE));
    let mut order = train.to_vec();
    let mut node_cache: Option<(f64, Vec<Array2<f64>>, Array2<f64>)> = None;
    let mut since_refresh = 0usize;
    let mut refreshes = 0u64;
    let mut streak = 0usize;
    let mut prev = model.initial.total;
    let use_dgi_loss = cfg.variant.node_loss() && matches!(model.node, Some(NodeLearner::Dgi(_)));
    let mut best: Option<(f64, usize, Option<NodeLearner>, Option<Autoencoder>, LrHead)> = None;

    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut batches = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let y: Vec<f64> = batch.iter().map(|e| label_of[e]).collect();
            if use_dgi_loss && (node_cache.is_none() || since_refresh >= cfg.node_loss_interval) {
                if let Some(NodeLearner::Dgi(m)) = &model.node {
                    node_cache = Some(node_loss_full(
                        &ws,
                        m,
                        cfg.noise_sigma,
                        derive_seed(derive_seed(cfg.seed, TAG_CORRUPT), 1 << 32 | refreshes),
                    )?);
                    refreshes += 1;
                    since_refresh = 0;
                }
            }
            let (mut parts, mut grads) = model.batch_terms(&ws, inputs.endpoints, batch, &y)?;
            if let Some((ln, ge, gd)) = &node_cache {
                parts.node = *ln;
                // a refreshed gradient is applied once, not on every batch it covers
                if since_refresh == 0 {
                    if let Some((g, gdisc)) = grads.node_dgi.as_mut() {
                        for (a, b) in g.iter_mut().zip(ge) {
                            *a += b;
                        }
                        *gdisc += gd;
                    }
                }
            }
            let parts = parts.finish(cfg);
            if !parts.total.is_finite() {
                return Err(GladError::Divergence {
                    epoch,
                    loss: parts.total,
                });
            }
            model.apply(&mut adam, &grads);
            since_refresh += batch.len();
            sum += parts.total;
            batches += 1;
        }
        let objective = model.objective(&ws, inputs.endpoints, train, &y_train)?;
        if !objective.total.is_finite() {
            return Err(GladError::Divergence {
                epoch,
                loss: objective.total,
            });
        }
        model.epochs.push(EpochLog {
            epoch,
            mean_batch_loss: sum / batches.max(1) as f64,
            objective,
        });
        if cfg.keep_best && best.as_ref().is_none_or(|b| objective.total < b.0) {
            best = Some((
                objective.total,
                epoch,
                model.node.clone(),
                model.edge.clone(),
                model.head.clone(),
            ));
        }
        let rel = (prev - objective.total).abs() / prev.abs().max(1e-12);
        prev = objective.total;
        streak = if rel < cfg.epsilon { streak + 1 } else { 0 };
        log::debug!(
            "epoch {epoch}: objective {:.6} (rel change {rel:.2e})",
            objective.total
        );
        if streak >= cfg.patience {
            model.converged = true;
            break;
        }
    }
    if let Some((_, epoch, node, edge, head)) = best {
        model.node = node;
        model.edge = edge;
        model.head = head;
        model.best_epoch = Some(epoch);
    }
    Ok(model)
}

/// Pretraining followed by joint training.
pub fn train_glad(
    inputs: &GladInputs<'_>,
    train: &[usize],
    labels: &[u8],
    cfg: &TrainConfig,
) -> Result<JointModel> {
    let pre = pretrain(inputs, cfg)?;
    train_joint(&pre, inputs, train, labels, cfg)
}

fn write_parts(w: &mut Writer, p: &LossParts) {
    w.f64s(&[p.node, p.edge, p.lr, p.reg, p.total]);
}

fn read_parts(r: &mut Reader<'_>) -> Result<LossParts> {
    let v = r.f64s()?;
    if v.len() != 5 {
        return Err(GladError::Format("loss record length".into()));
    }
    Ok(LossParts {
        node: v[0],
        edge: v[1],
        lr: v[2],
        reg: v[3],
        total: v[4],
    })
}

impl Blob for JointModel {
    const KIND: BlobKind = BlobKind::Detector;

    fn write_body(&self, w: &mut Writer) {
        w.str(&serde_json::to_string(&self.config).expect("config serialises"));
        match &self.node {
            None => w.u8(0),
            Some(NodeLearner::Dgi(m)) => {
                w.u8(1);
                m.write_body(w);
            }
            Some(NodeLearner::Autoencoder(a)) => {
                w.u8(2);
                a.write_body(w);
            }
        }
        match &self.edge {
            None => w.u8(0),
            Some(a) => {
                w.u8(1);
                a.write_body(w);
            }
        }
        w.vector(&self.head.w);
        w.f64(self.head.b);
        write_parts(w, &self.initial);
        w.usize(self.epochs.len());
        for e in &self.epochs {
            w.usize(e.epoch);
            w.f64(e.mean_batch_loss);
            write_parts(w, &e.objective);
        }
        w.u8(self.converged as u8);
        w.u64(self.best_epoch.map_or(u64::MAX, |e| e as u64));
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let config: TrainConfig = serde_json::from_str(&r.str()?)
            .map_err(|e| GladError::Format(format!("config: {e}")))?;
        let node = match r.u8()? {
            0 => None,
            1 => Some(NodeLearner::Dgi(DgiModel::read_body(r)?)),
            2 => Some(NodeLearner::Autoencoder(Autoencoder::read_body(r)?)),
            t => return Err(GladError::Format(format!("unknown node learner tag {t}"))),
        };
        let edge = match r.u8()? {
            0 => None,
            1 => Some(Autoencoder::read_body(r)?),
            t => return Err(GladError::Format(format!("unknown edge learner tag {t}"))),
        };
        let head = LrHead {
            w: r.vector()?,
            b: r.f64()?,
        };
        let initial = read_parts(r)?;
        let n = r.usize()?;
        let mut epochs = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            epochs.push(EpochLog {
                epoch: r.usize()?,
                mean_batch_loss: r.f64()?,
                objective: read_parts(r)?,
            });
        }
        let converged = r.u8()? != 0;
        let best_epoch = match r.u64()? {
            u64::MAX => None,
            e => Some(e as usize),
        };
        let d1 = node.as_ref().map_or(0, |n| n.dim());
        let d2 = edge.as_ref().map_or(0, |a| a.code_dim());
        if head.w.len() != 2 * d1 + d2 {
            return Err(GladError::Format(
                "head width does not match learners".into(),
            ));
        }
        Ok(JointModel {
            config,
            node,
            edge,
            head,
            initial,
            epochs,
            converged,
            best_epoch,
        })
    }
}
