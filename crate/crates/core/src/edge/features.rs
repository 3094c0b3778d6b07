use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{GladError, Result};
use crate::graph::CitationNetwork;
use crate::purpose::PurposeModel;

pub const EDGE_FEATURE_NAMES: [&str; 8] = ["CP", "SF", "SJ", "JF", "SI", "SR", "AC", "CB"];
pub const N_EDGE_FEATURES: usize = 8;

pub const CP: usize = 0;
pub const SF: usize = 1;
pub const SJ: usize = 2;
pub const JF: usize = 3;
pub const SI: usize = 4;
pub const SR: usize = 5;
pub const AC: usize = 6;
pub const CB: usize = 7;

/// Relation features for every edge, rows in edge-list order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFeatures {
    pub z: Array2<f64>,
    /// Edges whose citing paper has an empty reference list (JF forced to 0).
    pub empty_reference_edges: Vec<usize>,
}

impl EdgeFeatures {
    /// Tab-separated text with a header row.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "{}", EDGE_FEATURE_NAMES.join("\t"))?;
        for row in self.z.rows() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{}", cells.join("\t"))?;
        }
        f.flush()?;
        Ok(())
    }
}

/// Institutions each author has been affiliated with anywhere in the network.
/// `institution_ids[k]` is read as the affiliation of `author_ids[k]`.
fn affiliation_history(net: &CitationNetwork) -> HashMap<&str, BTreeSet<&str>> {
    let mut out: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for p in net.papers() {
        for (a, inst) in p.author_ids.iter().zip(&p.institution_ids) {
            out.entry(a.as_str()).or_default().insert(inst.as_str());
        }
    }
    out
}

/// For each unordered author pair, the papers they co-wrote.
fn coauthorships(net: &CitationNetwork) -> HashMap<(&str, &str), Vec<usize>> {
    let mut out: HashMap<(&str, &str), Vec<usize>> = HashMap::new();
    for (row, p) in net.papers().iter().enumerate() {
        let authors: BTreeSet<&str> = p.author_ids.iter().map(String::as_str).collect();
        let authors: Vec<&str> = authors.into_iter().collect();
        for x in 0..authors.len() {
            for y in x + 1..authors.len() {
                out.entry((authors[x], authors[y])).or_default().push(row);
            }
        }
    }
    out
}

fn pair_key<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Computes the eight relation features given one clear-purpose flag per edge.
pub fn edge_features_from_cp(net: &CitationNetwork, cp: &[u8]) -> Result<EdgeFeatures> {
    if cp.len() != net.n_edges() {
        return Err(GladError::Dimension(format!(
            "{} purpose flags for {} edges",
            cp.len(),
            net.n_edges()
        )));
    }
    let papers = net.papers();
    let history = affiliation_history(net);
    let coauthors = coauthorships(net);
    let journal_of: HashMap<&str, &str> = papers
        .iter()
        .map(|p| (p.id.as_str(), p.journal_id.as_str()))
        .collect();

    // (first author of citing, first author of cited) -> citing years with edge index
    let mut author_cites: HashMap<(&str, &str), Vec<(i32, usize)>> = HashMap::new();
    for (e, &(s, d)) in net.endpoints().iter().enumerate() {
        if let (Some(fs), Some(fd)) = (papers[s].first_author(), papers[d].first_author()) {
            author_cites
                .entry((fs, fd))
                .or_default()
                .push((papers[s].year, e));
        }
    }

    let mut z = Array2::zeros((net.n_edges(), N_EDGE_FEATURES));
    let mut empty = Vec::new();
    for (e, &(s, d)) in net.endpoints().iter().enumerate() {
        let (pi, pj) = (&papers[s], &papers[d]);
        z[[e, CP]] = cp[e] as f64;

        let ai: HashSet<&str> = pi.author_ids.iter().map(String::as_str).collect();
        let aj: HashSet<&str> = pj.author_ids.iter().map(String::as_str).collect();
        z[[e, SF]] = !ai.is_disjoint(&aj) as u8 as f64;

        z[[e, SJ]] = (pi.journal_id == pj.journal_id) as u8 as f64;

        if pi.reference_ids.is_empty() {
            empty.push(e);
        } else {
            let hits = pi
                .reference_ids
                .iter()
                .filter(|r| journal_of.get(r.as_str()) == Some(&pj.journal_id.as_str()))
                .count();
            z[[e, JF]] = hits as f64 / pi.reference_ids.len() as f64;
        }

        if let (Some(fi), Some(fj)) = (pi.first_author(), pj.first_author()) {
            if let (Some(hi), Some(hj)) = (history.get(fi), history.get(fj)) {
                z[[e, SI]] = !hi.is_disjoint(hj) as u8 as f64;
            }
            if let Some(list) = author_cites.get(&(fj, fi)) {
                let prior = list
                    .iter()
                    .any(|&(year, other)| other != e && year <= pi.year);
                z[[e, CB]] = prior as u8 as f64;
            }
        }

        let ri: HashSet<&str> = pi.reference_ids.iter().map(String::as_str).collect();
        z[[e, SR]] = pj.reference_ids.iter().any(|r| ri.contains(r.as_str())) as u8 as f64;

        let mut ac = false;
        'outer: for a in &ai {
            for b in &aj {
                if a == b {
                    continue;
                }
                if let Some(rows) = coauthors.get(&pair_key(a, b)) {
                    if rows.iter().any(|&r| r != s && r != d) {
                        ac = true;
                        break 'outer;
                    }
                }
            }
        }
        z[[e, AC]] = ac as u8 as f64;
    }
    if !empty.is_empty() {
        log::warn!(
            "{} citing papers have empty reference lists; JF set to 0",
            empty.len()
        );
    }
    Ok(EdgeFeatures {
        z,
        empty_reference_edges: empty,
    })
}

/// Classifies every citation context, then computes the features.
pub fn compute_edge_features(
    net: &CitationNetwork,
    purpose: &PurposeModel,
) -> Result<EdgeFeatures> {
    let cp: Vec<u8> = net
        .edges()
        .iter()
        .map(|e| purpose.cp_flag(&e.context))
        .collect();
    edge_features_from_cp(net, &cp)
}
