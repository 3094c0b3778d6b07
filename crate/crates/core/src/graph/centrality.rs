use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::CitationNetwork;

/// Degree-based node features, each normalized by `n1 - 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CentralityFeatures {
    /// In-degree centrality aggregated over the first author's papers.
    pub author_in: f64,
    /// Out-degree centrality aggregated over the first author's papers.
    pub author_out: f64,
    /// Out-degree centrality of the paper itself.
    pub paper_out: f64,
}

/// Centralities in row order.
///
/// Author aggregates sum the degrees of every paper in the network sharing
/// the first author, then clamp to `[0, 1]`. A paper with no authors forms
/// its own group.
pub fn centrality_rows(net: &CitationNetwork) -> Vec<CentralityFeatures> {
    let n = net.n_papers();
    if n < 2 {
        return vec![CentralityFeatures::default(); n];
    }
    let norm = (n - 1) as f64;
    let adj = net.adjacency();
    let ins = adj.in_degrees();
    let outs = adj.out_degrees();

    let mut by_author: HashMap<&str, (usize, usize)> = HashMap::new();
    for (row, p) in net.papers().iter().enumerate() {
        if let Some(a) = p.first_author() {
            let e = by_author.entry(a).or_default();
            e.0 += ins[row];
            e.1 += outs[row];
        }
    }

    net.papers()
        .iter()
        .enumerate()
        .map(|(row, p)| {
            let (ai, ao) = p
                .first_author()
                .map(|a| by_author[a])
                .unwrap_or((ins[row], outs[row]));
            CentralityFeatures {
                author_in: (ai as f64 / norm).min(1.0),
                author_out: (ao as f64 / norm).min(1.0),
                paper_out: outs[row] as f64 / norm,
            }
        })
        .collect()
}

pub fn centralities(net: &CitationNetwork) -> BTreeMap<String, CentralityFeatures> {
    net.papers()
        .iter()
        .map(|p| p.id.clone())
        .zip(centrality_rows(net))
        .collect()
}
