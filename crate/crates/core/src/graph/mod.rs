//! Citation network data model.
//!
//! Papers are stored sorted by id, so row `i` of every downstream matrix
//! refers to the `i`-th smallest paper id. Edges keep the order in which
//! they were supplied.

mod centrality;
pub(crate) mod io;

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{GladError, Result};

pub use centrality::{centralities, centrality_rows, CentralityFeatures};
pub use io::{
    build_network, read_citations, read_papers, write_citations, write_network, write_papers,
    CITATIONS_FILE, PAPERS_FILE,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paper {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub journal_id: String,
    #[serde(default)]
    pub year: i32,
    /// First author first.
    #[serde(default)]
    pub author_ids: Vec<String>,
    /// Positionally aligned with `author_ids` where both are present.
    #[serde(default)]
    pub institution_ids: Vec<String>,
    /// Outgoing reference list. May name papers outside the network.
    #[serde(default)]
    pub reference_ids: Vec<String>,
}

impl Paper {
    pub fn first_author(&self) -> Option<&str> {
        self.author_ids.first().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum EdgeLabel {
    Normal,
    Anomalous,
    Unknown,
}

impl EdgeLabel {
    /// `Some(0|1)` for labelled edges.
    pub fn as_binary(self) -> Option<u8> {
        match self {
            EdgeLabel::Normal => Some(0),
            EdgeLabel::Anomalous => Some(1),
            EdgeLabel::Unknown => None,
        }
    }
}

impl From<EdgeLabel> for i8 {
    fn from(l: EdgeLabel) -> i8 {
        match l {
            EdgeLabel::Normal => 0,
            EdgeLabel::Anomalous => 1,
            EdgeLabel::Unknown => -1,
        }
    }
}

impl TryFrom<i8> for EdgeLabel {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(EdgeLabel::Normal),
            1 => Ok(EdgeLabel::Anomalous),
            -1 => Ok(EdgeLabel::Unknown),
            other => Err(format!("label must be 0, 1 or -1, got {other}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationEdge {
    /// Citing paper.
    pub src: String,
    /// Cited paper.
    pub dst: String,
    #[serde(default)]
    pub context: String,
    pub label: EdgeLabel,
}

/// Sparse binary adjacency in compressed-row form. Columns within a row are
/// sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
}

impl Adjacency {
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(i, j) in pairs {
            rows[i].push(j);
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(pairs.len());
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        Adjacency { n, row_ptr, cols }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&j).is_ok()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &j in &self.cols {
            deg[j] += 1;
        }
        deg
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.out_degree(i)).collect()
    }

    pub fn to_dense(&self) -> ndarray::Array2<f64> {
        let mut a = ndarray::Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for &j in self.row(i) {
                a[[i, j]] = 1.0;
            }
        }
        a
    }

    /// Raw compressed-row arrays, used for hashing and serialization.
    pub fn raw_parts(&self) -> (&[usize], &[usize]) {
        (&self.row_ptr, &self.cols)
    }
}

/// Anomalies found while building a network that do not prevent its use.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub missing_abstracts: Vec<String>,
    pub missing_authors: Vec<String>,
    pub external_references: usize,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.missing_abstracts.is_empty() && self.missing_authors.is_empty()
    }
}

/// Immutable directed citation graph.
#[derive(Debug, Clone)]
pub struct CitationNetwork {
    papers: Vec<Paper>,
    index: HashMap<String, usize>,
    edges: Vec<CitationEdge>,
    endpoints: Vec<(usize, usize)>,
    adjacency: Adjacency,
}

impl CitationNetwork {
    pub fn new(mut papers: Vec<Paper>, edges: Vec<CitationEdge>) -> Result<Self> {
        papers.sort_by(|a, b| a.id.cmp(&b.id));
        for w in papers.windows(2) {
            if w[0].id == w[1].id {
                return Err(GladError::DuplicatePaper(w[0].id.clone()));
            }
        }
        let index: HashMap<String, usize> = papers
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.clone(), i))
            .collect();

        let mut dangling = BTreeSet::new();
        for e in &edges {
            for id in [&e.src, &e.dst] {
                if !index.contains_key(id) {
                    dangling.insert(id.clone());
                }
            }
        }
        if !dangling.is_empty() {
            return Err(GladError::DanglingIds(dangling.into_iter().collect()));
        }

        let mut seen = HashSet::with_capacity(edges.len());
        let mut endpoints = Vec::with_capacity(edges.len());
        for e in &edges {
            if e.src == e.dst {
                return Err(GladError::SelfLoop(e.src.clone()));
            }
            let pair = (index[&e.src], index[&e.dst]);
            if !seen.insert(pair) {
                return Err(GladError::DuplicateEdge {
                    src: e.src.clone(),
                    dst: e.dst.clone(),
                });
            }
            endpoints.push(pair);
        }
        let adjacency = Adjacency::from_pairs(papers.len(), &endpoints);
        Ok(CitationNetwork {
            papers,
            index,
            edges,
            endpoints,
            adjacency,
        })
    }

    /// Number of papers (n1).
    pub fn n_papers(&self) -> usize {
        self.papers.len()
    }

    /// Number of citations (n2).
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn papers(&self) -> &[Paper] {
        &self.papers
    }

    pub fn paper(&self, row: usize) -> &Paper {
        &self.papers[row]
    }

    pub fn row_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn edges(&self) -> &[CitationEdge] {
        &self.edges
    }

    /// `(src_row, dst_row)` for every edge, in edge order.
    pub fn endpoints(&self) -> &[(usize, usize)] {
        &self.endpoints
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    /// Position of the edge `src -> dst` in the edge list.
    pub fn edge_position(&self, src: &str, dst: &str) -> Option<usize> {
        let (i, j) = (self.row_of(src)?, self.row_of(dst)?);
        self.endpoints.iter().position(|&p| p == (i, j))
    }

    pub fn labels(&self) -> Vec<EdgeLabel> {
        self.edges.iter().map(|e| e.label).collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for p in &self.papers {
            if p.abstract_text.trim().is_empty() {
                report.missing_abstracts.push(p.id.clone());
            }
            if p.author_ids.is_empty() {
                report.missing_authors.push(p.id.clone());
            }
            report.external_references += p
                .reference_ids
                .iter()
                .filter(|r| !self.index.contains_key(*r))
                .count();
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn paper(id: &str) -> Paper {
        Paper {
            id: id.into(),
            title: String::new(),
            abstract_text: "text".into(),
            journal_id: "j".into(),
            year: 2000,
            author_ids: vec![format!("a-{id}")],
            institution_ids: vec![],
            reference_ids: vec![],
        }
    }

    fn edge(src: &str, dst: &str) -> CitationEdge {
        CitationEdge {
            src: src.into(),
            dst: dst.into(),
            context: String::new(),
            label: EdgeLabel::Unknown,
        }
    }

    #[test]
    fn minimal_graph() {
        let net =
            CitationNetwork::new(vec![paper("p2"), paper("p1")], vec![edge("p1", "p2")]).unwrap();
        assert_eq!(net.n_papers(), 2);
        assert_eq!(net.n_edges(), 1);
        let a = net.adjacency().to_dense();
        assert_eq!(a[[0, 1]], 1.0);
        assert_eq!(a[[1, 0]], 0.0);
        assert_eq!(net.row_of("p1"), Some(0));
    }

    #[test]
    fn dangling_id_is_named() {
        let err = CitationNetwork::new(vec![paper("p1")], vec![edge("p1", "pX")]).unwrap_err();
        match err {
            GladError::DanglingIds(ids) => assert_eq!(ids, vec!["pX".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicates_and_self_loops() {
        let ps = || vec![paper("a"), paper("b")];
        assert!(matches!(
            CitationNetwork::new(ps(), vec![edge("a", "b"), edge("a", "b")]),
            Err(GladError::DuplicateEdge { .. })
        ));
        assert!(matches!(
            CitationNetwork::new(ps(), vec![edge("a", "a")]),
            Err(GladError::SelfLoop(_))
        ));
        assert!(matches!(
            CitationNetwork::new(vec![paper("a"), paper("a")], vec![]),
            Err(GladError::DuplicatePaper(_))
        ));
    }

    #[test]
    fn directed_adjacency() {
        let net = CitationNetwork::new(
            vec![paper("a"), paper("b"), paper("c")],
            vec![edge("a", "b"), edge("b", "a"), edge("c", "a")],
        )
        .unwrap();
        let adj = net.adjacency();
        assert_eq!(adj.nnz(), 3);
        assert!(adj.contains(0, 1) && adj.contains(1, 0) && adj.contains(2, 0));
        assert!(!adj.contains(0, 2));
        let ins: usize = adj.in_degrees().iter().sum();
        let outs: usize = adj.out_degrees().iter().sum();
        assert_eq!((ins, outs), (3, 3));
    }

    #[test]
    fn label_codec() {
        for (l, v) in [
            (EdgeLabel::Normal, 0i8),
            (EdgeLabel::Anomalous, 1),
            (EdgeLabel::Unknown, -1),
        ] {
            assert_eq!(i8::from(l), v);
            assert_eq!(EdgeLabel::try_from(v).unwrap(), l);
        }
        assert!(EdgeLabel::try_from(2).is_err());
    }
}
