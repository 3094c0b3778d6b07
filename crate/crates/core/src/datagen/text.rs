//! Synthetic vocabularies and context sentences.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::math::Rng64;
use crate::purpose::PurposeCategory;

const ONSETS: [&str; 16] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "tr",
];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
const CODAS: [&str; 5] = ["", "n", "r", "x", "l"];

/// Disjoint pseudo-word vocabularies, one per topic.
pub fn topic_vocabularies(
    rng: &mut Rng64,
    n_topics: usize,
    words_per_topic: usize,
) -> Vec<Vec<String>> {
    let mut seen: BTreeSet<String> = context_lexicon_words().map(str::to_string).collect();
    let mut out = Vec::with_capacity(n_topics);
    for _ in 0..n_topics {
        let mut words = Vec::with_capacity(words_per_topic);
        while words.len() < words_per_topic {
            let syllables = rng.random_range(2..=3);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push_str(ONSETS.choose(rng).unwrap());
                w.push_str(VOWELS.choose(rng).unwrap());
            }
            w.push_str(CODAS.choose(rng).unwrap());
            if seen.insert(w.clone()) {
                words.push(w);
            }
        }
        out.push(words);
    }
    out
}

/// Draws `len` words with a Zipf-like preference for early vocabulary entries.
pub fn sample_text(rng: &mut Rng64, vocab: &[String], len: usize) -> String {
    let weights: Vec<f64> = (0..vocab.len()).map(|k| 1.0 / (k as f64 + 2.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut words = Vec::with_capacity(len);
    for _ in 0..len {
        let mut u = rng.random_range(0.0..total);
        let mut pick = vocab.len() - 1;
        for (k, w) in weights.iter().enumerate() {
            if u < *w {
                pick = k;
                break;
            }
            u -= w;
        }
        words.push(vocab[pick].as_str());
    }
    words.join(" ")
}

fn lexicon(cat: PurposeCategory) -> &'static [&'static str] {
    match cat {
        PurposeCategory::Criticizing => &[
            "however",
            "fails",
            "flawed",
            "limitation",
            "unfortunately",
            "suffers",
            "overlooks",
            "inconsistent",
            "problematic",
            "questionable",
        ],
        PurposeCategory::Comparison => &[
            "compared",
            "outperforms",
            "than",
            "versus",
            "contrast",
            "baseline",
            "better",
            "similar",
            "higher",
            "lower",
        ],
        PurposeCategory::Use => &[
            "use",
            "adopt",
            "employ",
            "apply",
            "dataset",
            "tool",
            "software",
            "implementation",
            "protocol",
            "procedure",
        ],
        PurposeCategory::Substantiating => &[
            "consistent",
            "confirm",
            "support",
            "agree",
            "corroborate",
            "evidence",
            "validates",
            "reinforces",
            "accordance",
            "agreement",
        ],
        PurposeCategory::Basis => &[
            "build",
            "extend",
            "based",
            "following",
            "inspired",
            "foundation",
            "originally",
            "motivated",
            "builds",
            "extends",
        ],
        PurposeCategory::Other => &[
            "see",
            "also",
            "reviewed",
            "discussed",
            "studied",
            "related",
            "previously",
            "reported",
            "mentioned",
            "noted",
        ],
    }
}

const FILLER: [&str; 14] = [
    "the", "of", "in", "this", "work", "our", "we", "results", "method", "approach", "study",
    "model", "analysis", "paper",
];

fn context_lexicon_words() -> impl Iterator<Item = &'static str> {
    PurposeCategory::ALL
        .iter()
        .flat_map(|&c| lexicon(c).iter().copied())
        .chain(FILLER.iter().copied())
        .chain(["ref"])
}

/// A citation sentence for the category. With probability `confusion`
/// one cue word is borrowed from another category.
pub fn context_sentence(rng: &mut Rng64, cat: PurposeCategory, confusion: f64) -> String {
    let own = lexicon(cat);
    let mut words: Vec<&str> = Vec::with_capacity(10);
    let n_cue = rng.random_range(2..=3);
    for _ in 0..n_cue {
        words.push(own.choose(rng).unwrap());
    }
    if rng.random_bool(confusion.clamp(0.0, 1.0)) {
        let other = PurposeCategory::ALL[rng.random_range(0..6)];
        words.push(lexicon(other).choose(rng).unwrap());
    }
    let n_fill = rng.random_range(3..=5);
    for _ in 0..n_fill {
        words.push(FILLER.choose(rng).unwrap());
    }
    use rand::seq::SliceRandom;
    words.shuffle(rng);
    let at = rng.random_range(0..=words.len());
    words.insert(at, "[REF]");
    words.join(" ")
}
