//! Joint training of node encoder, edge autoencoder and logistic head.

mod head;
mod train;

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{GladError, Result};

pub use head::{HeadGradients, LrHead, LrLoss};
pub use train::{
    evaluate_objective, pretrain, train_glad, train_joint, EpochLog, GladInputs, JointModel,
    LossParts, NodeLearner, Prediction, Pretrained,
};

/// Ablation variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Variant {
    #[default]
    Glad,
    /// Node representations only.
    GladN,
    /// Edge representations only.
    GladE,
    /// Random node features.
    GladRn,
    /// Random edge features.
    GladRe,
    /// No node infomax loss.
    GladEl,
    /// No edge reconstruction loss.
    GladNl,
    /// Node autoencoder instead of the graph encoder.
    GladEe,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Glad,
        Variant::GladN,
        Variant::GladE,
        Variant::GladRn,
        Variant::GladRe,
        Variant::GladEl,
        Variant::GladNl,
        Variant::GladEe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Glad => "GLAD",
            Variant::GladN => "GLAD-N",
            Variant::GladE => "GLAD-E",
            Variant::GladRn => "GLAD-RN",
            Variant::GladRe => "GLAD-RE",
            Variant::GladEl => "GLAD-EL",
            Variant::GladNl => "GLAD-NL",
            Variant::GladEe => "GLAD-EE",
        }
    }

    pub fn uses_node(self) -> bool {
        self != Variant::GladE
    }

    pub fn uses_edge(self) -> bool {
        self != Variant::GladN
    }

    /// Node-side unsupervised loss enters pretraining and the joint sum.
    pub fn node_loss(self) -> bool {
        self.uses_node() && self != Variant::GladEl
    }

    pub fn edge_loss(self) -> bool {
        self.uses_edge() && self != Variant::GladNl
    }

    pub fn random_node_features(self) -> bool {
        self == Variant::GladRn
    }

    pub fn random_edge_features(self) -> bool {
        self == Variant::GladRe
    }

    pub fn node_autoencoder(self) -> bool {
        self == Variant::GladEe
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = GladError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().replace('_', "-");
        Variant::ALL
            .iter()
            .copied()
            .find(|v| v.name().eq_ignore_ascii_case(&t))
            .ok_or_else(|| GladError::Config(format!("unknown variant {s:?}")))
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub variant: Variant,
    /// Weight of the parameter norm penalty.
    pub alpha: f64,
    /// Weight of the supervised loss.
    pub beta: f64,
    /// Pretraining learning rate.
    pub r: f64,
    /// Joint learning rate.
    pub lr: f64,
    pub batch_size: usize,
    /// Relative change of the epoch objective treated as converged.
    pub epsilon: f64,
    /// Consecutive converged epochs required to stop.
    pub patience: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub lr_loss: LrLoss,
    /// Training edges processed between recomputations of the full-graph
    /// node loss; 1 recomputes it on every batch. Its gradient is applied
    /// on the batch that recomputes it.
    pub node_loss_interval: usize,
    /// Node representation width.
    pub embedding_dim: usize,
    pub gcn_layers: usize,
    pub noise_sigma: f64,
    pub node_pretrain_epochs: usize,
    /// Edge autoencoder widths after the 8 inputs.
    pub ae_hidden: Vec<usize>,
    pub edge_pretrain_epochs: usize,
    /// Return the parameters of the epoch with the lowest objective
    /// instead of the last epoch's.
    pub keep_best: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            variant: Variant::Glad,
            alpha: 1e-4,
            beta: 1.0,
            r: 0.01,
            lr: 0.01,
            batch_size: 4,
            epsilon: 1e-4,
            patience: 5,
            max_epochs: 300,
            seed: 0,
            lr_loss: LrLoss::Mae,
            node_loss_interval: 1,
            embedding_dim: 64,
            gcn_layers: 1,
            noise_sigma: 1.0,
            node_pretrain_epochs: 200,
            ae_hidden: vec![8, 10],
            edge_pretrain_epochs: 200,
            keep_best: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(GladError::Config(m.to_string()));
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return bad("alpha and beta must be non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.lr > 0.0 && self.r > 0.0) {
            return bad("learning rates must be positive");
        }
        if self.embedding_dim == 0 || self.gcn_layers == 0 || self.node_loss_interval == 0 {
            return bad("embedding_dim, gcn_layers and node_loss_interval must be positive");
        }
        if self.ae_hidden.is_empty() || self.ae_hidden.contains(&0) {
            return bad("ae_hidden needs at least one positive width");
        }
        Ok(())
    }
}

/// `L_n + L_e + β L_lr + α R` where `R` is the squared parameter norm.
pub fn joint_loss(node: f64, edge: f64, lr: f64, reg_sq: f64, alpha: f64, beta: f64) -> f64 {
    node + edge + beta * lr + alpha * reg_sq
}

/// Rows `[h_src | h_dst | h_edge]` for the requested edges. Either block
/// may be absent (zero columns).
pub fn pair_representation(
    node: Option<&Array2<f64>>,
    edge: Option<&Array2<f64>>,
    endpoints: &[(usize, usize)],
    edges: &[usize],
) -> Result<Array2<f64>> {
    let d1 = node.map_or(0, |h| h.ncols());
    let d2 = edge.map_or(0, |h| h.ncols());
    if let Some(h) = edge {
        if h.nrows() != endpoints.len() {
            return Err(GladError::Dimension(format!(
                "{} edge rows for {} edges",
                h.nrows(),
                endpoints.len()
            )));
        }
    }
    let mut out = Array2::zeros((edges.len(), 2 * d1 + d2));
    for (k, &e) in edges.iter().enumerate() {
        let &(s, d) = endpoints
            .get(e)
            .ok_or_else(|| GladError::Dimension(format!("edge index {e} out of range")))?;
        if let Some(h) = node {
            if s >= h.nrows() || d >= h.nrows() {
                return Err(GladError::Dimension("node row out of range".into()));
            }
            out.slice_mut(s![k, ..d1]).assign(&h.row(s));
            out.slice_mut(s![k, d1..2 * d1]).assign(&h.row(d));
        }
        if let Some(h) = edge {
            out.slice_mut(s![k, 2 * d1..]).assign(&h.row(e));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn variant_names_roundtrip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("glad_rn".parse::<Variant>().unwrap(), Variant::GladRn);
        assert!("GLAD-X".parse::<Variant>().is_err());
    }

    #[test]
    fn variant_switches() {
        assert!(!Variant::GladE.uses_node() && Variant::GladE.uses_edge());
        assert!(Variant::GladN.uses_node() && !Variant::GladN.uses_edge());
        assert!(!Variant::GladEl.node_loss() && Variant::GladEl.edge_loss());
        assert!(Variant::GladNl.node_loss() && !Variant::GladNl.edge_loss());
        for v in [Variant::GladRn, Variant::GladRe] {
            assert!(v.uses_node() && v.uses_edge() && v.node_loss() && v.edge_loss());
        }
    }

    #[test]
    fn joint_loss_arithmetic() {
        assert_eq!(joint_loss(1.5, 2.5, 7.0, 3.0, 0.0, 0.0), 4.0);
        assert_eq!(joint_loss(1.0, 2.0, 3.0, 0.0, 0.5, 2.0), 9.0);
    }

    #[test]
    fn pair_rows_are_slices() {
        let hn = array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]];
        let he = array![[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]];
        let ends = [(0, 2), (2, 1)];
        let p = pair_representation(Some(&hn), Some(&he), &ends, &[1, 0]).unwrap();
        assert_eq!(p.ncols(), 7);
        assert_eq!(p.row(0).to_vec(), vec![5.0, 6.0, 3.0, 4.0, 0.4, 0.5, 0.6]);
        assert_eq!(p.row(1).to_vec(), vec![1.0, 2.0, 5.0, 6.0, 0.1, 0.2, 0.3]);
        let only_edge = pair_representation(None, Some(&he), &ends, &[0]).unwrap();
        assert_eq!(only_edge.row(0).to_vec(), vec![0.1, 0.2, 0.3]);
        assert!(pair_representation(Some(&hn), None, &ends, &[5]).is_err());
    }
}
