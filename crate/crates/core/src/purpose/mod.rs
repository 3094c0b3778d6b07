//! Citation purpose classification.
//!
//! Contexts are embedded (averaged word vectors or an external table) and
//! classified by a one-vs-rest kernel SVM into six categories. The first
//! five count as a clear purpose.

mod kernel;
pub mod smo;
mod svm;

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::codec::{Blob, BlobKind, Reader, Writer};
use crate::error::{GladError, Result};
use crate::graph::io::{read_jsonl, write_jsonl};
use crate::text::{tokenize, train_pvdm, ContextEmbedder, PvDmConfig, PvDmModel, Vocabulary};

pub use kernel::Kernel;
pub use svm::{argmax_category, BinarySvm, ClearPurposeSvm, OvrSvm, SvmConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PurposeCategory {
    Criticizing,
    Comparison,
    Use,
    Substantiating,
    Basis,
    Other,
}

impl PurposeCategory {
    pub const ALL: [PurposeCategory; 6] = [
        PurposeCategory::Criticizing,
        PurposeCategory::Comparison,
        PurposeCategory::Use,
        PurposeCategory::Substantiating,
        PurposeCategory::Basis,
        PurposeCategory::Other,
    ];

    /// Fixed 1-based index.
    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i.wrapping_sub(1))
            .copied()
            .ok_or_else(|| GladError::Format(format!("purpose index {i} out of range")))
    }

    pub fn name(self) -> &'static str {
        match self {
            PurposeCategory::Criticizing => "Criticizing",
            PurposeCategory::Comparison => "Comparison",
            PurposeCategory::Use => "Use",
            PurposeCategory::Substantiating => "Substantiating",
            PurposeCategory::Basis => "Basis",
            PurposeCategory::Other => "Other",
        }
    }

    pub fn is_clear(self) -> bool {
        self != PurposeCategory::Other
    }
}

/// 1 for the five clear-purpose categories, 0 for Other.
pub fn cp_flag(category: PurposeCategory) -> u8 {
    category.is_clear() as u8
}

impl fmt::Display for PurposeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PurposeCategory {
    type Err = GladError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| GladError::Format(format!("unknown purpose category {t:?}")))
    }
}

impl Serialize for PurposeCategory {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for PurposeCategory {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One labelled citation context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub context: String,
    pub category: PurposeCategory,
}

pub fn read_annotations(path: &Path) -> Result<Vec<Annotation>> {
    read_jsonl(path)
}

pub fn write_annotations(path: &Path, items: &[Annotation]) -> Result<()> {
    write_jsonl(path, items)
}

/// Precomputed context vectors keyed by exact context text.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalEmbeddings {
    dim: usize,
    table: HashMap<String, Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingRecord {
    context: String,
    vector: Vec<f64>,
}

impl ExternalEmbeddings {
    pub fn new(table: HashMap<String, Vec<f64>>) -> Result<Self> {
        let dim = table
            .values()
            .next()
            .map(Vec::len)
            .ok_or_else(|| GladError::Empty("embedding table".into()))?;
        if let Some((k, _)) = table.iter().find(|(_, v)| v.len() != dim) {
            return Err(GladError::Dimension(format!(
                "embedding for {k:?} is not {dim}-dimensional"
            )));
        }
        Ok(ExternalEmbeddings { dim, table })
    }

    /// Reads `{"context": ..., "vector": [...]}` lines.
    pub fn load(path: &Path) -> Result<Self> {
        let recs: Vec<EmbeddingRecord> = read_jsonl(path)?;
        Self::new(recs.into_iter().map(|r| (r.context, r.vector)).collect())
    }

    fn write(&self, w: &mut Writer) {
        let mut keys: Vec<_> = self.table.keys().collect();
        keys.sort();
        w.usize(keys.len());
        for k in keys {
            w.str(k);
            w.f64s(&self.table[k]);
        }
    }

    fn read(r: &mut Reader<'_>) -> Result<Self> {
        let n = r.usize()?;
        let mut table = HashMap::with_capacity(n);
        for _ in 0..n {
            let k = r.str()?;
            table.insert(k, r.f64s()?);
        }
        Self::new(table)
    }
}

impl ContextEmbedder for ExternalEmbeddings {
    fn dim(&self) -> usize {
        self.dim
    }

    /// Unknown contexts map to the zero vector.
    fn embed(&self, text: &str) -> Array1<f64> {
        match self.table.get(text) {
            Some(v) => Array1::from(v.clone()),
            None => {
                log::debug!("no external embedding for context {text:?}");
                Array1::zeros(self.dim)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Embedder {
    PvDm(Box<PvDmModel>),
    External(ExternalEmbeddings),
}

impl ContextEmbedder for Embedder {
    fn dim(&self) -> usize {
        match self {
            Embedder::PvDm(m) => m.dim(),
            Embedder::External(e) => e.dim(),
        }
    }

    fn embed(&self, text: &str) -> Array1<f64> {
        match self {
            Embedder::PvDm(m) => m.context_embedding(text),
            Embedder::External(e) => e.embed(text),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    OneVsRest(OvrSvm),
    Binary(ClearPurposeSvm),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PurposeConfig {
    pub embedding: PvDmConfig,
    pub svm: SvmConfig,
    /// Train one clear-versus-Other machine instead of six.
    pub binary: bool,
}

impl Default for PurposeConfig {
    fn default() -> Self {
        PurposeConfig {
            embedding: PvDmConfig {
                epochs: 30,
                ..PvDmConfig::default()
            },
            svm: SvmConfig::default(),
            binary: false,
        }
    }
}

/// Outcome for one context.
#[derive(Debug, Clone, PartialEq)]
pub struct PurposePrediction {
    /// `None` in binary mode, where only clear versus Other is known.
    pub category: Option<PurposeCategory>,
    pub clear: bool,
    pub decision_values: Vec<f64>,
}

/// Context embedder plus trained classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct PurposeModel {
    pub embedder: Embedder,
    pub classifier: Classifier,
}

impl PurposeModel {
    /// Trains a context word-vector model on the annotation texts, then the SVM.
    pub fn train(annotations: &[Annotation], config: &PurposeConfig) -> Result<Self> {
        let docs: Vec<Vec<String>> = annotations.iter().map(|a| tokenize(&a.context)).collect();
        let vocab = Vocabulary::build(&docs, config.embedding.min_count)?;
        let ids = (0..docs.len()).map(|i| format!("ctx{i}")).collect();
        let pvdm = train_pvdm(&docs, ids, vocab, &config.embedding)?;
        Self::train_with(Embedder::PvDm(Box::new(pvdm)), annotations, config)
    }

    pub fn train_with(
        embedder: Embedder,
        annotations: &[Annotation],
        config: &PurposeConfig,
    ) -> Result<Self> {
        let x = embed_all(&embedder, annotations.iter().map(|a| a.context.as_str()));
        let labels: Vec<_> = annotations.iter().map(|a| a.category).collect();
        let classifier = if config.binary {
            Classifier::Binary(ClearPurposeSvm::train(&x, &labels, &config.svm)?)
        } else {
            Classifier::OneVsRest(OvrSvm::train(&x, &labels, &config.svm)?)
        };
        Ok(PurposeModel {
            embedder,
            classifier,
        })
    }

    pub fn predict(&self, context: &str) -> PurposePrediction {
        let c = self.embedder.embed(context);
        match &self.classifier {
            Classifier::OneVsRest(m) => {
                let values = m.decision_values(c.view());
                let cat = argmax_category(&values);
                PurposePrediction {
                    category: Some(cat),
                    clear: cat.is_clear(),
                    decision_values: values.to_vec(),
                }
            }
            Classifier::Binary(m) => {
                let v = m.decision_value(c.view());
                PurposePrediction {
                    category: None,
                    clear: v > 0.0,
                    decision_values: vec![v],
                }
            }
        }
    }

    pub fn cp_flag(&self, context: &str) -> u8 {
        self.predict(context).clear as u8
    }
}

pub fn embed_all<'a, E: ContextEmbedder>(
    embedder: &E,
    texts: impl Iterator<Item = &'a str>,
) -> Array2<f64> {
    let rows: Vec<Array1<f64>> = texts.map(|t| embedder.embed(t)).collect();
    let mut x = Array2::zeros((rows.len(), embedder.dim()));
    for (i, r) in rows.iter().enumerate() {
        x.row_mut(i).assign(r);
    }
    x
}

impl Blob for PurposeModel {
    const KIND: BlobKind = BlobKind::PurposeModel;

    fn write_body(&self, w: &mut Writer) {
        match &self.embedder {
            Embedder::PvDm(m) => {
                w.u8(0);
                m.write_body(w);
            }
            Embedder::External(e) => {
                w.u8(1);
                e.write(w);
            }
        }
        match &self.classifier {
            Classifier::OneVsRest(m) => {
                w.u8(0);
                m.write(w);
            }
            Classifier::Binary(m) => {
                w.u8(1);
                m.write(w);
            }
        }
    }

    fn read_body(r: &mut Reader<'_>) -> Result<Self> {
        let embedder = match r.u8()? {
            0 => Embedder::PvDm(Box::new(PvDmModel::read_body(r)?)),
            1 => Embedder::External(ExternalEmbeddings::read(r)?),
            t => return Err(GladError::Format(format!("unknown embedder tag {t}"))),
        };
        let classifier = match r.u8()? {
            0 => Classifier::OneVsRest(OvrSvm::read(r)?),
            1 => Classifier::Binary(ClearPurposeSvm::read(r)?),
            t => return Err(GladError::Format(format!("unknown classifier tag {t}"))),
        };
        if classifier_dim(&classifier) != embedder.dim() {
            return Err(GladError::Format(
                "embedder and classifier widths differ".into(),
            ));
        }
        Ok(PurposeModel {
            embedder,
            classifier,
        })
    }
}

fn classifier_dim(c: &Classifier) -> usize {
    match c {
        Classifier::OneVsRest(m) => m.x.ncols(),
        Classifier::Binary(m) => m.x.ncols(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use PurposeCategory::*;

    #[test]
    fn indices_and_flags() {
        assert_eq!(Criticizing.index(), 1);
        assert_eq!(Other.index(), 6);
        assert_eq!(PurposeCategory::from_index(2).unwrap(), Comparison);
        assert!(PurposeCategory::from_index(0).is_err());
        assert!(PurposeCategory::from_index(7).is_err());
        assert_eq!(cp_flag(Use), 1);
        assert_eq!(cp_flag(Basis), 1);
        assert_eq!(cp_flag(Other), 0);
        assert_eq!(
            "substantiating".parse::<PurposeCategory>().unwrap(),
            Substantiating
        );
    }

    fn annotations() -> Vec<Annotation> {
        let templates = [
            (
                Criticizing,
                "however the approach of this work fails and is flawed",
            ),
            (
                Comparison,
                "our results outperform compared against this baseline",
            ),
            (Use, "we use the tool and method released by this work"),
            (
                Basis,
                "we build upon and extend the framework introduced here",
            ),
            (Other, "see also related studies in the broader literature"),
        ];
        let mut out = Vec::new();
        for i in 0..8 {
            for (cat, t) in templates {
                out.push(Annotation {
                    context: format!("{t} item{i}"),
                    category: cat,
                });
            }
        }
        out
    }

    #[test]
    fn trained_model_fits_templates_and_roundtrips() {
        let ann = annotations();
        let cfg = PurposeConfig {
            embedding: PvDmConfig {
                dim: 16,
                epochs: 20,
                ..PvDmConfig::default()
            },
            ..PurposeConfig::default()
        };
        let model = PurposeModel::train(&ann, &cfg).unwrap();
        let correct = ann
            .iter()
            .filter(|a| model.predict(&a.context).category == Some(a.category))
            .count();
        assert!(
            correct as f64 / ann.len() as f64 >= 0.9,
            "{correct}/{}",
            ann.len()
        );
        let back = PurposeModel::from_bytes(&model.to_bytes()).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn external_embeddings_drive_binary_mode() {
        let mut table = HashMap::new();
        table.insert("a".to_string(), vec![1.0, 0.0]);
        table.insert("b".to_string(), vec![1.2, 0.1]);
        table.insert("c".to_string(), vec![-1.0, 0.0]);
        table.insert("d".to_string(), vec![-1.1, 0.2]);
        let emb = ExternalEmbeddings::new(table).unwrap();
        let ann: Vec<_> = [("a", Use), ("b", Basis), ("c", Other), ("d", Other)]
            .iter()
            .map(|&(c, category)| Annotation {
                context: c.into(),
                category,
            })
            .collect();
        let cfg = PurposeConfig {
            binary: true,
            ..PurposeConfig::default()
        };
        let model = PurposeModel::train_with(Embedder::External(emb), &ann, &cfg).unwrap();
        assert_eq!(model.cp_flag("a"), 1);
        assert_eq!(model.cp_flag("d"), 0);
        assert_eq!(model.predict("a").category, None);
        let back = PurposeModel::from_bytes(&model.to_bytes()).unwrap();
        assert_eq!(back, model);
    }
}
