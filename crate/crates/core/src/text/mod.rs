//! Tokenisation, vocabulary and paragraph-vector (PV-DM) embeddings.

mod pvdm;

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use ndarray::Array1;

use crate::error::{GladError, Result};

pub use pvdm::{train_pvdm, PvDmConfig, PvDmGradient, PvDmModel, TrainReport};

/// Lowercases and splits on anything that is not alphanumeric.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Words ordered by descending count, ties broken lexicographically.
    pub fn build(corpus: &[Vec<String>], min_count: usize) -> Result<Self> {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for doc in corpus {
            for tok in doc {
                *counts.entry(tok.as_str()).or_default() += 1;
            }
        }
        let mut kept: Vec<(&str, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count as u64)
            .collect();
        if kept.is_empty() {
            return Err(GladError::EmptyVocabulary { min_count });
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(Self::from_parts(
            kept.iter().map(|(w, _)| w.to_string()).collect(),
            kept.iter().map(|&(_, c)| c).collect(),
        ))
    }

    pub(crate) fn from_parts(words: Vec<String>, counts: Vec<u64>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Vocabulary {
            words,
            counts,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Maps tokens to indices, dropping out-of-vocabulary tokens.
    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().filter_map(|t| self.index(t)).collect()
    }

    /// Plain-text dump, one `word<TAB>count` line per index.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (w, c) in self.words.iter().zip(&self.counts) {
            writeln!(f, "{w}\t{c}")?;
        }
        f.flush()?;
        Ok(())
    }
}

/// Maps a citation context to a fixed-width vector.
pub trait ContextEmbedder {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> Array1<f64>;
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn docs(lines: &[&str]) -> Vec<Vec<String>> {
        lines.iter().map(|l| tokenize(l)).collect()
    }

    #[test]
    fn tokenizer_lowercases_and_splits() {
        assert_eq!(
            tokenize("We use [REF]'s GCN-2 model."),
            vec!["we", "use", "ref", "s", "gcn", "2", "model"]
        );
        assert!(tokenize("  ,, ").is_empty());
    }

    #[test]
    fn min_count_filters() {
        let v = Vocabulary::build(&docs(&["a a b"]), 2).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.word(0), "a");
    }

    #[test]
    fn ordering_by_count_then_lexicographic() {
        let v = Vocabulary::build(&docs(&["x y", "y z"]), 1).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.index("y"), Some(0));
        assert_eq!(v.index("x"), Some(1));
        assert_eq!(v.index("z"), Some(2));
    }

    #[test]
    fn empty_vocabulary_is_an_error() {
        assert!(matches!(
            Vocabulary::build(&docs(&["a b"]), 5),
            Err(GladError::EmptyVocabulary { min_count: 5 })
        ));
    }

    #[test]
    fn size_matches_hash_set_count() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let corpus: Vec<Vec<String>> = (0..100)
            .map(|_| {
                (0..rng.random_range(5..30))
                    .map(|_| format!("w{}", rng.random_range(0..200)))
                    .collect()
            })
            .collect();
        for min_count in [1, 2, 3, 5] {
            let mut counts = std::collections::HashMap::new();
            for d in &corpus {
                for t in d {
                    *counts.entry(t.clone()).or_insert(0usize) += 1;
                }
            }
            let expect: HashSet<_> = counts
                .iter()
                .filter(|(_, &c)| c >= min_count)
                .map(|(w, _)| w.clone())
                .collect();
            let v = Vocabulary::build(&corpus, min_count).unwrap();
            assert_eq!(v.len(), expect.len());
            let got: HashSet<_> = v.words().iter().cloned().collect();
            assert_eq!(got, expect);
            for i in 0..v.len() {
                assert_eq!(v.index(v.word(i)), Some(i));
            }
        }
    }
}
