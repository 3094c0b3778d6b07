//! Node representations: feature assembly, corruption, GCN encoder and the
//! infomax objective.

mod dgi;
mod gcn;

use ndarray::{s, Array2, Axis};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{GladError, Result};
use crate::graph::{centrality_rows, Adjacency, CitationNetwork};
use crate::math::seeded;
use crate::text::PvDmModel;

pub use dgi::{
    bce_terms, dgi_objective, dgi_objective_propagated, discriminate, readout, readout_backward,
    train_dgi, BceTerms, DgiConfig, DgiGradients, DgiModel, Discriminator,
};
pub use gcn::{Activation, GcnCache, GcnEncoder, NormAdj};

/// `X`: document vector followed by the three standardized centralities.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFeatureMatrix {
    pub x: Array2<f64>,
    pub text_dim: usize,
}

impl NodeFeatureMatrix {
    pub fn n_nodes(&self) -> usize {
        self.x.nrows()
    }

    pub fn width(&self) -> usize {
        self.x.ncols()
    }
}

pub fn assemble_node_features(
    net: &CitationNetwork,
    pvdm: &PvDmModel,
) -> Result<NodeFeatureMatrix> {
    let ids = pvdm.doc_ids();
    if ids.len() != net.n_papers() || ids.iter().zip(net.papers()).any(|(a, p)| *a != p.id) {
        let at = ids
            .iter()
            .zip(net.papers())
            .position(|(a, p)| *a != p.id)
            .unwrap_or(ids.len().min(net.n_papers()));
        return Err(GladError::OrderingMismatch(format!(
            "document rows ({}) do not follow paper rows ({}); first difference at row {at}",
            ids.len(),
            net.n_papers()
        )));
    }
    node_features_from_docs(net, &pvdm.docs)
}

/// Builds `X` from an explicit document-vector matrix in paper-row order.
pub fn node_features_from_docs(
    net: &CitationNetwork,
    docs: &Array2<f64>,
) -> Result<NodeFeatureMatrix> {
    if docs.nrows() != net.n_papers() {
        return Err(GladError::OrderingMismatch(format!(
            "{} document rows for {} papers",
            docs.nrows(),
            net.n_papers()
        )));
    }
    let n = net.n_papers();
    let p = docs.ncols();
    let mut x = Array2::zeros((n, p + 3));
    x.slice_mut(s![.., ..p]).assign(docs);
    for (row, c) in centrality_rows(net).into_iter().enumerate() {
        x[[row, p]] = c.author_in;
        x[[row, p + 1]] = c.author_out;
        x[[row, p + 2]] = c.paper_out;
    }
    for col in p..p + 3 {
        standardize_column(&mut x, col);
    }
    Ok(NodeFeatureMatrix { x, text_dim: p })
}

/// Z-scores a column in place; a constant column becomes all zeros.
fn standardize_column(x: &mut Array2<f64>, col: usize) {
    let n = x.nrows() as f64;
    if n == 0.0 {
        return;
    }
    let mut c = x.column_mut(col);
    let mean = c.sum() / n;
    let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    c.mapv_inplace(|v| if sd > 0.0 { (v - mean) / sd } else { 0.0 });
}

/// Population standard deviation of every column.
pub fn column_std(x: &Array2<f64>) -> Vec<f64> {
    let n = x.nrows().max(1) as f64;
    x.axis_iter(Axis(1))
        .map(|c| {
            let m = c.sum() / n;
            (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt()
        })
        .collect()
}

/// Negative sample: row-wise Gaussian noise with per-column standard
/// deviation `sigma * std(column)`. The structure is returned untouched.
pub fn corrupt<'a>(
    x: &Array2<f64>,
    adj: &'a Adjacency,
    sigma: f64,
    seed: u64,
) -> (Array2<f64>, &'a Adjacency) {
    (corrupt_features(x, &column_std(x), sigma, seed), adj)
}

pub(crate) fn corrupt_features(
    x: &Array2<f64>,
    col_std: &[f64],
    sigma: f64,
    seed: u64,
) -> Array2<f64> {
    if sigma == 0.0 {
        return x.clone();
    }
    let mut rng = seeded(seed);
    let mut out = x.clone();
    for mut row in out.rows_mut() {
        for (v, sd) in row.iter_mut().zip(col_std) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += sigma * sd * z;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CitationEdge, EdgeLabel, Paper};
    use crate::text::{tokenize, train_pvdm, PvDmConfig, Vocabulary};
    use rand::Rng;

    fn net(n: usize, edges: &[(usize, usize)]) -> CitationNetwork {
        let papers = (0..n)
            .map(|i| Paper {
                id: format!("p{i}"),
                title: String::new(),
                abstract_text: "a b c d e f".into(),
                journal_id: String::new(),
                year: 0,
                author_ids: vec![format!("a{i}")],
                institution_ids: vec![],
                reference_ids: vec![],
            })
            .collect();
        let edges = edges
            .iter()
            .map(|&(s, d)| CitationEdge {
                src: format!("p{s}"),
                dst: format!("p{d}"),
                context: String::new(),
                label: EdgeLabel::Unknown,
            })
            .collect();
        CitationNetwork::new(papers, edges).unwrap()
    }

    fn pvdm_for(net: &CitationNetwork, dim: usize) -> PvDmModel {
        let docs: Vec<Vec<String>> = net
            .papers()
            .iter()
            .map(|p| tokenize(&p.abstract_text))
            .collect();
        let vocab = Vocabulary::build(&docs, 1).unwrap();
        let ids = net.papers().iter().map(|p| p.id.clone()).collect();
        train_pvdm(
            &docs,
            ids,
            vocab,
            &PvDmConfig {
                dim,
                epochs: 1,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn shape_is_text_dim_plus_three() {
        let g = net(3, &[(0, 1)]);
        let f = assemble_node_features(&g, &pvdm_for(&g, 4)).unwrap();
        assert_eq!(f.x.dim(), (3, 7));
    }

    #[test]
    fn edgeless_centralities_are_zero() {
        let g = net(4, &[]);
        let f = assemble_node_features(&g, &pvdm_for(&g, 2)).unwrap();
        assert!(f.x.slice(s![.., 2..]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn standardized_columns_have_zero_mean_unit_variance() {
        let g = net(6, &[(0, 1), (0, 2), (0, 3), (1, 2), (4, 0), (5, 4)]);
        let f = assemble_node_features(&g, &pvdm_for(&g, 3)).unwrap();
        for col in 3..6 {
            let c = f.x.column(col);
            let mean = c.sum() / 6.0;
            let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 6.0;
            assert!(mean.abs() < 1e-9, "col {col} mean {mean}");
            assert!((var - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ordering_mismatch_is_detected() {
        let g = net(3, &[]);
        let other = net(4, &[]);
        assert!(matches!(
            assemble_node_features(&g, &pvdm_for(&other, 2)),
            Err(GladError::OrderingMismatch(_))
        ));
    }

    #[test]
    fn zero_noise_is_identity_and_structure_is_shared() {
        let g = net(3, &[(0, 1), (2, 1)]);
        let x = Array2::from_shape_fn((3, 2), |(i, j)| (i * 2 + j) as f64);
        let (xt, at) = corrupt(&x, g.adjacency(), 0.0, 1);
        assert_eq!(xt, x);
        assert!(std::ptr::eq(at, g.adjacency()));
        let (xt, at) = corrupt(&x, g.adjacency(), 1.0, 1);
        assert_ne!(xt, x);
        assert_eq!(at.raw_parts(), g.adjacency().raw_parts());
        assert_eq!(corrupt(&x, g.adjacency(), 1.0, 1).0, xt);
    }

    #[test]
    fn noise_variance_tracks_column_variance() {
        let mut rng = seeded(2);
        let scales = [0.5, 1.0, 3.0, 10.0];
        let x = Array2::from_shape_fn((1000, 4), |(_, j)| scales[j] * rng.random_range(-1.0..1.0));
        let adj = Adjacency::from_pairs(1000, &[]);
        let (xt, _) = corrupt(&x, &adj, 1.0, 7);
        let diff = &xt - &x;
        let noise_var: Vec<f64> = column_std(&diff).iter().map(|s| s * s).collect();
        let feat_var: Vec<f64> = column_std(&x).iter().map(|s| s * s).collect();
        let mean_noise = noise_var.iter().sum::<f64>() / 4.0;
        let mean_feat = feat_var.iter().sum::<f64>() / 4.0;
        assert!((mean_noise / mean_feat - 1.0).abs() < 0.1);
        for (n, f) in noise_var.iter().zip(&feat_var) {
            assert!((n / f - 1.0).abs() < 0.1, "{n} vs {f}");
        }
    }
}
