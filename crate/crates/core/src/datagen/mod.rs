//! Synthetic citation networks with injected citation cartels.
//!
//! Papers belong to topics with disjoint vocabularies. Cartel papers in a
//! donor journal direct most of their references at a small set of papers
//! in a recipient journal of another topic; those citations are labelled
//! anomalous. Two kinds of normal decoys make either signal alone
//! insufficient: review papers citing across the same topic pair with clear
//! purposes, and focused papers that cite one sibling journal heavily.

mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GladError, Result};
use crate::graph::{
    build_network, write_network, CitationEdge, CitationNetwork, EdgeLabel, Paper, CITATIONS_FILE,
    PAPERS_FILE,
};
use crate::math::{seeded, Rng64};
use crate::purpose::{read_annotations, write_annotations, Annotation, PurposeCategory};

pub use text::{context_sentence, sample_text, topic_vocabularies};

pub const ANNOTATIONS_FILE: &str = "annotations.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Proportions of the six purposes among annotated normal citations.
pub const DEFAULT_PURPOSE_MIX: [f64; 6] = [0.14, 0.09, 0.17, 0.04, 0.30, 0.26];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartelSpec {
    pub donor_journal: String,
    pub recipient_journal: String,
    pub n_anomalous_papers: usize,
    pub refs_per_anomalous_paper: usize,
    pub fraction_to_recipient: f64,
}

impl CartelSpec {
    /// Anomalous references per citing paper.
    pub fn anomalous_refs(&self) -> usize {
        (self.fraction_to_recipient * self.refs_per_anomalous_paper as f64).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_papers: usize,
    pub n_journals: usize,
    pub n_authors: usize,
    pub cartel_specs: Vec<CartelSpec>,
    /// Mean in-network references per paper outside the cartels.
    pub base_citation_density: f64,
    pub anomaly_rate_target: f64,
    pub purpose_mix: [f64; 6],
    pub seed: u64,

    pub n_topics: usize,
    pub n_institutions: usize,
    pub words_per_topic: usize,
    pub abstract_len: usize,
    pub first_year: i32,
    pub last_year: i32,
    /// Chance that an ordinary reference leaves the citing paper's topic.
    pub cross_topic_rate: f64,
    /// Mean number of out-of-network references per ordinary paper.
    pub external_refs_mean: f64,
    /// Share of cartel papers and promoted recipients written by cartel members.
    pub relation_fraction: f64,
    /// Chance that an anomalous citation's context is Other.
    pub anomalous_other_rate: f64,
    /// Chance that a context borrows a cue word from another purpose.
    pub context_confusion: f64,
    /// Share of ordinary papers concentrating their references on one
    /// sibling journal of the same topic.
    pub focused_fraction: f64,
    /// Share of a focused paper's references that go to the sibling journal.
    pub focused_concentration: f64,
    /// Chance that a focused paper's citation context is Other.
    pub focused_other_rate: f64,
    pub reviews_per_cartel: usize,
    pub review_refs: usize,
    pub review_external_refs: usize,
    /// Share of review references that go to the cartel's promoted papers.
    pub review_promoted_fraction: f64,
    /// Recipient papers each cartel cites.
    pub promoted_per_cartel: usize,
    pub annotation_count: usize,
    /// Relative deviation from the target anomaly rate that is tolerated.
    pub rate_tolerance: f64,
}

fn default_cartels() -> Vec<CartelSpec> {
    [
        ("J00", "J05"),
        ("J01", "J06"),
        ("J02", "J07"),
        ("J03", "J04"),
    ]
    .iter()
    .map(|&(d, r)| CartelSpec {
        donor_journal: d.into(),
        recipient_journal: r.into(),
        n_anomalous_papers: 15,
        refs_per_anomalous_paper: 6,
        fraction_to_recipient: 0.85,
    })
    .collect()
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_papers: 1000,
            n_journals: 16,
            n_authors: 1500,
            cartel_specs: default_cartels(),
            base_citation_density: 4.636,
            anomaly_rate_target: 0.0636,
            purpose_mix: DEFAULT_PURPOSE_MIX,
            seed: 7,
            n_topics: 8,
            n_institutions: 100,
            words_per_topic: 40,
            abstract_len: 40,
            first_year: 2000,
            last_year: 2019,
            cross_topic_rate: 0.1,
            external_refs_mean: 2.0,
            relation_fraction: 0.3,
            anomalous_other_rate: 0.8,
            context_confusion: 0.15,
            focused_fraction: 0.12,
            focused_concentration: 0.85,
            focused_other_rate: 0.8,
            reviews_per_cartel: 15,
            review_refs: 6,
            review_external_refs: 6,
            review_promoted_fraction: 0.7,
            promoted_per_cartel: 12,
            annotation_count: 1500,
            rate_tolerance: 0.1,
        }
    }
}

pub fn journal_id(j: usize) -> String {
    format!("J{j:02}")
}

impl GeneratorConfig {
    pub fn journal_topic(&self, j: usize) -> usize {
        j % self.n_topics
    }

    fn journal_index(&self, id: &str) -> Result<usize> {
        (0..self.n_journals)
            .find(|&j| journal_id(j) == id)
            .ok_or_else(|| GladError::Config(format!("unknown journal {id}")))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GladError::Config(m));
        let sum: f64 = self.purpose_mix.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.purpose_mix.iter().any(|&p| p < 0.0) {
            return bad(format!("purpose_mix must be a distribution, sums to {sum}"));
        }
        if !(0.0..1.0).contains(&self.anomaly_rate_target) {
            return bad("anomaly_rate_target must lie in [0, 1)".into());
        }
        if self.n_topics == 0 || self.n_journals < self.n_topics || self.n_papers < 2 {
            return bad("need at least one topic, one journal per topic and two papers".into());
        }
        if self.n_authors < self.n_topics || self.n_institutions == 0 || self.words_per_topic == 0 {
            return bad("need authors for every topic, institutions and a vocabulary".into());
        }
        for (name, v) in [
            ("cross_topic_rate", self.cross_topic_rate),
            ("relation_fraction", self.relation_fraction),
            ("anomalous_other_rate", self.anomalous_other_rate),
            ("context_confusion", self.context_confusion),
            ("focused_fraction", self.focused_fraction),
            ("focused_concentration", self.focused_concentration),
            ("focused_other_rate", self.focused_other_rate),
            ("review_promoted_fraction", self.review_promoted_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if self.first_year > self.last_year - 6 {
            return bad("year range must span at least seven years".into());
        }
        for c in &self.cartel_specs {
            if !(c.fraction_to_recipient > 0.0 && c.fraction_to_recipient <= 1.0) {
                return bad(format!(
                    "fraction_to_recipient {} outside (0, 1]",
                    c.fraction_to_recipient
                ));
            }
            let (d, r) = (
                self.journal_index(&c.donor_journal)?,
                self.journal_index(&c.recipient_journal)?,
            );
            if self.journal_topic(d) == self.journal_topic(r) {
                return bad(format!(
                    "cartel {} -> {} stays within one topic",
                    c.donor_journal, c.recipient_journal
                ));
            }
            if c.anomalous_refs() == 0 {
                return bad("cartel produces no anomalous references".into());
            }
        }
        Ok(())
    }

    /// Anomalous, cartel-normal and ordinary reference counts implied by the config.
    fn planned_counts(&self) -> (usize, usize, usize) {
        let anomalous: usize = self
            .cartel_specs
            .iter()
            .map(|c| c.n_anomalous_papers * c.anomalous_refs())
            .sum();
        let cartel_normal: usize = self
            .cartel_specs
            .iter()
            .map(|c| c.n_anomalous_papers * (c.refs_per_anomalous_paper - c.anomalous_refs()))
            .sum();
        let cartel_papers: usize = self.cartel_specs.iter().map(|c| c.n_anomalous_papers).sum();
        let ordinary = (self.base_citation_density
            * self.n_papers.saturating_sub(cartel_papers) as f64)
            .round() as usize;
        (anomalous, cartel_normal, ordinary)
    }

    /// Fraction of anomalous edges the config produces.
    pub fn achievable_rate(&self) -> f64 {
        let (a, c, b) = self.planned_counts();
        if a + c + b == 0 {
            0.0
        } else {
            a as f64 / (a + c + b) as f64
        }
    }

    fn check_feasible(&self) -> Result<()> {
        let achievable = self.achievable_rate();
        let target = self.anomaly_rate_target;
        let ok = if target == 0.0 {
            achievable == 0.0
        } else {
            (achievable - target).abs() <= self.rate_tolerance * target
        };
        if !ok {
            return Err(GladError::Infeasible {
                message: format!(
                    "anomaly_rate_target {target} not reachable with the given cartels and density"
                ),
                achievable,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartelRecord {
    pub donor_journal: String,
    pub recipient_journal: String,
    pub members: Vec<String>,
    pub citing_papers: Vec<String>,
    pub promoted_papers: Vec<String>,
    pub review_papers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub n_papers: usize,
    pub n_edges: usize,
    pub n_anomalous: usize,
    pub achievable_rate: f64,
    pub anomalous_edges: Vec<(String, String)>,
    pub cartels: Vec<CartelRecord>,
    /// Ground-truth purpose of every edge, in citation-file order.
    pub edge_purposes: Vec<PurposeCategory>,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub network: CitationNetwork,
    pub purposes: Vec<PurposeCategory>,
    pub annotations: Vec<Annotation>,
    pub manifest: Manifest,
}

fn sample_category(rng: &mut Rng64, mix: &[f64; 6]) -> PurposeCategory {
    let mut u: f64 = rng.random_range(0.0..1.0);
    for (k, &p) in mix.iter().enumerate() {
        if u < p {
            return PurposeCategory::ALL[k];
        }
        u -= p;
    }
    PurposeCategory::ALL[mix.iter().rposition(|&p| p > 0.0).unwrap_or(5)]
}

/// `mix` with the Other share replaced by `other` and the clear categories
/// rescaled to fill the rest.
fn mix_with_other(mix: &[f64; 6], other: f64) -> [f64; 6] {
    let o = PurposeCategory::Other.index() - 1;
    let clear: f64 = mix
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != o)
        .map(|(_, p)| p)
        .sum();
    let mut out = [0.0; 6];
    if clear <= 0.0 {
        out[o] = 1.0;
        return out;
    }
    for k in 0..6 {
        out[k] = if k == o {
            other
        } else {
            mix[k] * (1.0 - other) / clear
        };
    }
    out
}

/// Picks a distinct reference from `pool`, preferring papers not newer than `year`.
fn pick_ref(
    rng: &mut Rng64,
    pool: &[usize],
    papers: &[Paper],
    year: i32,
    exclude: &BTreeSet<usize>,
) -> Option<usize> {
    let older: Vec<usize> = pool
        .iter()
        .copied()
        .filter(|p| papers[*p].year <= year && !exclude.contains(p))
        .collect();
    if let Some(&p) = older.choose(rng) {
        return Some(p);
    }
    let any: Vec<usize> = pool
        .iter()
        .copied()
        .filter(|p| !exclude.contains(p))
        .collect();
    any.choose(rng).copied()
}

fn poisson_small(rng: &mut Rng64, mean: f64) -> usize {
    // Knuth's method; means here are single digits
    let l = (-mean).exp();
    let mut k = 0;
    let mut p = 1.0;
    loop {
        p *= rng.random_range(0.0..1.0);
        if p <= l {
            return k;
        }
        k += 1;
    }
}

pub fn generate(cfg: &GeneratorConfig) -> Result<SyntheticDataset> {
    cfg.validate()?;
    cfg.check_feasible()?;
    let mut rng = seeded(cfg.seed);
    let vocab = topic_vocabularies(&mut rng, cfg.n_topics, cfg.words_per_topic);

    let author_id = |a: usize| format!("A{a:05}");
    let inst_id = |i: usize| format!("I{i:03}");
    let mut author_inst: Vec<usize> = (0..cfg.n_authors)
        .map(|_| rng.random_range(0..cfg.n_institutions))
        .collect();
    let authors_by_topic: Vec<Vec<usize>> = (0..cfg.n_topics)
        .map(|t| {
            (0..cfg.n_authors)
                .filter(|a| a % cfg.n_topics == t)
                .collect()
        })
        .collect();

    // papers
    let mut papers = Vec::with_capacity(cfg.n_papers);
    let mut paper_authors: Vec<Vec<usize>> = Vec::with_capacity(cfg.n_papers);
    let mut journal_of = Vec::with_capacity(cfg.n_papers);
    for i in 0..cfg.n_papers {
        let j = rng.random_range(0..cfg.n_journals);
        let t = cfg.journal_topic(j);
        let n_auth = rng.random_range(1..=4);
        let mut auth: Vec<usize> = Vec::new();
        while auth.len() < n_auth.min(authors_by_topic[t].len()) {
            let a = *authors_by_topic[t].choose(&mut rng).unwrap();
            if !auth.contains(&a) {
                auth.push(a);
            }
        }
        papers.push(Paper {
            id: format!("P{i:05}"),
            title: sample_text(&mut rng, &vocab[t], 6),
            abstract_text: sample_text(&mut rng, &vocab[t], cfg.abstract_len),
            journal_id: journal_id(j),
            year: rng.random_range(cfg.first_year..=cfg.last_year),
            author_ids: Vec::new(),
            institution_ids: Vec::new(),
            reference_ids: Vec::new(),
        });
        paper_authors.push(auth);
        journal_of.push(j);
    }
    let topic_of: Vec<usize> = journal_of.iter().map(|&j| cfg.journal_topic(j)).collect();
    let by_journal: Vec<Vec<usize>> = (0..cfg.n_journals)
        .map(|j| (0..cfg.n_papers).filter(|&p| journal_of[p] == j).collect())
        .collect();
    let by_topic: Vec<Vec<usize>> = (0..cfg.n_topics)
        .map(|t| (0..cfg.n_papers).filter(|&p| topic_of[p] == t).collect())
        .collect();

    // refs[p] = (target row, anomalous)
    let mut refs: Vec<Vec<(usize, bool)>> = vec![Vec::new(); cfg.n_papers];
    let mut externals = vec![0usize; cfg.n_papers];
    let mut reserved: BTreeSet<usize> = BTreeSet::new();
    let mut records = Vec::new();
    let mut joint_papers: BTreeSet<usize> = BTreeSet::new();
    let mut review_total = 0usize;

    for spec in &cfg.cartel_specs {
        let dj = cfg.journal_index(&spec.donor_journal)?;
        let rj = cfg.journal_index(&spec.recipient_journal)?;
        let infeasible = |m: String| GladError::Infeasible {
            message: m,
            achievable: cfg.achievable_rate(),
        };
        let mut donors: Vec<usize> = by_journal[dj]
            .iter()
            .copied()
            .filter(|p| !reserved.contains(p))
            .collect();
        let need = spec.n_anomalous_papers + cfg.reviews_per_cartel;
        if donors.len() < need {
            return Err(infeasible(format!(
                "journal {} has {} free papers, cartel needs {need}",
                spec.donor_journal,
                donors.len()
            )));
        }
        donors.shuffle(&mut rng);
        let citing: Vec<usize> = donors[..spec.n_anomalous_papers].to_vec();
        let reviews: Vec<usize> = donors[spec.n_anomalous_papers..need].to_vec();

        let mut recipients: Vec<usize> = by_journal[rj]
            .iter()
            .copied()
            .filter(|p| !reserved.contains(p) && !joint_papers.contains(p))
            .collect();
        recipients.shuffle(&mut rng);
        let k_anom = spec.anomalous_refs();
        let n_promoted = cfg.promoted_per_cartel.max(k_anom);
        if recipients.len() < n_promoted + 1 {
            return Err(infeasible(format!(
                "journal {} has {} free papers, cartel needs {}",
                spec.recipient_journal,
                recipients.len(),
                n_promoted + 1
            )));
        }
        let promoted: Vec<usize> = recipients[..n_promoted].to_vec();
        let joint = recipients[n_promoted];

        // three members sharing one institution
        let mut members: Vec<usize> = Vec::new();
        while members.len() < 3.min(cfg.n_authors) {
            let a = rng.random_range(0..cfg.n_authors);
            if !members.contains(&a) {
                members.push(a);
            }
        }
        let home = author_inst[members[0]];
        for &m in &members {
            author_inst[m] = home;
        }
        for &p in &citing {
            papers[p].year = rng.random_range(cfg.last_year - 4..=cfg.last_year);
            if rng.random_bool(cfg.relation_fraction) {
                let m = *members.choose(&mut rng).unwrap();
                paper_authors[p].retain(|&a| a != m);
                paper_authors[p].insert(0, m);
            }
        }
        for &p in &promoted {
            papers[p].year = rng.random_range(cfg.first_year..=cfg.last_year - 6);
            if rng.random_bool(cfg.relation_fraction) {
                let m = *members.choose(&mut rng).unwrap();
                paper_authors[p].retain(|&a| a != m);
                paper_authors[p].insert(0, m);
            }
        }
        papers[joint].year = cfg.first_year;
        for &m in &members {
            if !paper_authors[joint].contains(&m) {
                paper_authors[joint].push(m);
            }
        }
        joint_papers.insert(joint);

        let donor_topic = cfg.journal_topic(dj);
        for &p in &citing {
            let mut chosen: BTreeSet<usize> = BTreeSet::from([p]);
            let mut targets = promoted.clone();
            targets.shuffle(&mut rng);
            for &t in &targets[..k_anom] {
                chosen.insert(t);
                refs[p].push((t, true));
            }
            let topic_pool: Vec<usize> = by_topic[donor_topic]
                .iter()
                .copied()
                .filter(|q| journal_of[*q] != rj)
                .collect();
            for _ in k_anom..spec.refs_per_anomalous_paper {
                if let Some(t) = pick_ref(&mut rng, &topic_pool, &papers, papers[p].year, &chosen) {
                    chosen.insert(t);
                    refs[p].push((t, false));
                }
            }
        }
        let recipient_topic = cfg.journal_topic(rj);
        for &p in &reviews {
            let mut chosen: BTreeSet<usize> = BTreeSet::from([p]);
            for _ in 0..cfg.review_refs {
                let pool = if rng.random_bool(cfg.review_promoted_fraction) {
                    &promoted
                } else {
                    &by_topic[recipient_topic]
                };
                if let Some(t) = pick_ref(&mut rng, pool, &papers, papers[p].year, &chosen) {
                    chosen.insert(t);
                    refs[p].push((t, false));
                    review_total += 1;
                }
            }
            externals[p] = cfg.review_external_refs;
        }
        reserved.extend(citing.iter().copied());
        reserved.extend(reviews.iter().copied());
        reserved.extend(promoted.iter().copied());
        records.push(CartelRecord {
            donor_journal: spec.donor_journal.clone(),
            recipient_journal: spec.recipient_journal.clone(),
            members: members.iter().map(|&m| author_id(m)).collect(),
            citing_papers: citing.iter().map(|&p| papers[p].id.clone()).collect(),
            promoted_papers: promoted.iter().map(|&p| papers[p].id.clone()).collect(),
            review_papers: reviews.iter().map(|&p| papers[p].id.clone()).collect(),
        });
    }

    // ordinary references
    let cartel_rows: BTreeSet<usize> = records
        .iter()
        .flat_map(|r| r.citing_papers.iter().chain(&r.review_papers))
        .map(|id| id[1..].parse::<usize>().unwrap())
        .collect();
    let ordinary: Vec<usize> = (0..cfg.n_papers)
        .filter(|p| !cartel_rows.contains(p))
        .collect();
    let (_, _, planned_ordinary) = cfg.planned_counts();
    let budget = planned_ordinary.saturating_sub(review_total);
    let mut quota = vec![0usize; cfg.n_papers];
    if !ordinary.is_empty() {
        for _ in 0..budget {
            quota[*ordinary.choose(&mut rng).unwrap()] += 1;
        }
    }
    let mut focused_rows: BTreeSet<usize> = BTreeSet::new();
    for &p in &ordinary {
        let t = topic_of[p];
        let siblings: Vec<usize> = (0..cfg.n_journals)
            .filter(|&j| j != journal_of[p] && cfg.journal_topic(j) == t)
            .collect();
        let focused = !siblings.is_empty() && rng.random_bool(cfg.focused_fraction);
        let mut chosen: BTreeSet<usize> = BTreeSet::from([p]);
        if focused {
            let j = *siblings.choose(&mut rng).unwrap();
            for _ in 0..quota[p] {
                let pool = if rng.random_bool(cfg.focused_concentration) {
                    &by_journal[j]
                } else {
                    &by_topic[t]
                };
                if let Some(q) = pick_ref(&mut rng, pool, &papers, papers[p].year, &chosen) {
                    chosen.insert(q);
                    refs[p].push((q, false));
                }
            }
            focused_rows.insert(p);
        } else {
            for _ in 0..quota[p] {
                let pool = if cfg.n_topics > 1 && rng.random_bool(cfg.cross_topic_rate) {
                    let mut other = rng.random_range(0..cfg.n_topics - 1);
                    if other >= t {
                        other += 1;
                    }
                    &by_topic[other]
                } else {
                    &by_topic[t]
                };
                if let Some(q) = pick_ref(&mut rng, pool, &papers, papers[p].year, &chosen) {
                    chosen.insert(q);
                    refs[p].push((q, false));
                }
            }
            externals[p] = poisson_small(&mut rng, cfg.external_refs_mean);
        }
    }

    // authors, institutions, reference lists, edges
    for (p, paper) in papers.iter_mut().enumerate() {
        paper.author_ids = paper_authors[p].iter().map(|&a| author_id(a)).collect();
        paper.institution_ids = paper_authors[p]
            .iter()
            .map(|&a| {
                if rng.random_bool(0.1) {
                    inst_id(rng.random_range(0..cfg.n_institutions))
                } else {
                    inst_id(author_inst[a])
                }
            })
            .collect();
    }
    // Focused papers lean towards Other; the remaining normal edges get a
    // smaller Other share so normal contexts as a whole follow purpose_mix.
    let other = PurposeCategory::Other.index() - 1;
    let n_normal: usize = refs.iter().flatten().filter(|r| !r.1).count();
    let n_focused: usize = focused_rows.iter().map(|&p| refs[p].len()).sum();
    let focused_share = n_focused as f64 / n_normal.max(1) as f64;
    let wanted = cfg.purpose_mix[other];
    let mut ordinary_other = if focused_share < 1.0 {
        (wanted - focused_share * cfg.focused_other_rate) / (1.0 - focused_share)
    } else {
        wanted
    };
    if ordinary_other < 0.0 {
        log::warn!("focused papers alone exceed the Other share of purpose_mix");
        ordinary_other = 0.0;
    }
    let ordinary_mix = mix_with_other(&cfg.purpose_mix, ordinary_other);
    let clear_mix = mix_with_other(&cfg.purpose_mix, 0.0);

    let mut edges = Vec::new();
    let mut purposes = Vec::new();
    for p in 0..cfg.n_papers {
        let mut list: Vec<String> = refs[p].iter().map(|&(q, _)| papers[q].id.clone()).collect();
        list.extend((0..externals[p]).map(|k| format!("X{p:05}-{k}")));
        list.shuffle(&mut rng);
        papers[p].reference_ids = list;
        let focused = focused_rows.contains(&p);
        for &(q, anomalous) in &refs[p] {
            let cat = if anomalous {
                if rng.random_bool(cfg.anomalous_other_rate) {
                    PurposeCategory::Other
                } else {
                    sample_category(&mut rng, &cfg.purpose_mix)
                }
            } else if focused {
                if rng.random_bool(cfg.focused_other_rate) {
                    PurposeCategory::Other
                } else {
                    sample_category(&mut rng, &clear_mix)
                }
            } else {
                sample_category(&mut rng, &ordinary_mix)
            };
            edges.push(CitationEdge {
                src: papers[p].id.clone(),
                dst: papers[q].id.clone(),
                context: context_sentence(&mut rng, cat, cfg.context_confusion),
                label: if anomalous {
                    EdgeLabel::Anomalous
                } else {
                    EdgeLabel::Normal
                },
            });
            purposes.push(cat);
        }
    }

    let mut picks: Vec<usize> = (0..edges.len()).collect();
    picks.shuffle(&mut rng);
    picks.truncate(cfg.annotation_count.min(edges.len()));
    picks.sort_unstable();
    let annotations = picks
        .iter()
        .map(|&e| Annotation {
            context: edges[e].context.clone(),
            category: purposes[e],
        })
        .collect();

    let anomalous_edges: Vec<(String, String)> = edges
        .iter()
        .filter(|e| e.label == EdgeLabel::Anomalous)
        .map(|e| (e.src.clone(), e.dst.clone()))
        .collect();
    let manifest = Manifest {
        seed: cfg.seed,
        n_papers: papers.len(),
        n_edges: edges.len(),
        n_anomalous: anomalous_edges.len(),
        achievable_rate: cfg.achievable_rate(),
        anomalous_edges,
        cartels: records,
        edge_purposes: purposes.clone(),
    };
    let network = CitationNetwork::new(papers, edges)?;
    Ok(SyntheticDataset {
        network,
        purposes,
        annotations,
        manifest,
    })
}

/// Writes papers, citations, annotations and the manifest into `dir`.
pub fn export(ds: &SyntheticDataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_network(&ds.network, dir)?;
    write_annotations(&dir.join(ANNOTATIONS_FILE), &ds.annotations)?;
    let json = serde_json::to_string_pretty(&ds.manifest).map_err(std::io::Error::other)?;
    std::fs::write(dir.join(MANIFEST_FILE), json + "\n")?;
    Ok(())
}

/// Reads a dataset written by [`export`].
pub fn load_dataset(dir: &Path) -> Result<SyntheticDataset> {
    let network = build_network(&dir.join(PAPERS_FILE), &dir.join(CITATIONS_FILE))?;
    let annotations = read_annotations(&dir.join(ANNOTATIONS_FILE))?;
    let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| GladError::Parse {
        path: dir.join(MANIFEST_FILE),
        line: e.line(),
        message: e.to_string(),
    })?;
    if manifest.edge_purposes.len() != network.n_edges() {
        return Err(GladError::Format(
            "manifest purposes do not match citations".into(),
        ));
    }
    Ok(SyntheticDataset {
        purposes: manifest.edge_purposes.clone(),
        network,
        annotations,
        manifest,
    })
}

/// Per-journal paper counts, handy for sizing cartel specs.
pub fn journal_sizes(net: &CitationNetwork) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for p in net.papers() {
        *out.entry(p.journal_id.clone()).or_insert(0) += 1;
    }
    out
}
