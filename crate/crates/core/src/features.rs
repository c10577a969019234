//! Character n-gram extraction and binary vectorization.

use std::collections::{BTreeSet, HashMap};

use crate::corpus::LabeledText;
use crate::error::{Error, Result};

/// The set of distinct length-`n` character windows of `text` (stride 1, no padding).
pub fn extract_ngrams(text: &str, n: usize) -> BTreeSet<String> {
    let chars: Vec<char> = text.chars().collect();
    if n == 0 || chars.len() < n {
        return BTreeSet::new();
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

/// Dense, lexicographically ordered index over the n-grams of a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramVocabulary {
    n: usize,
    grams: Vec<String>,
    index_of: HashMap<String, u32>,
}

impl NGramVocabulary {
    /// Union of the n-grams of every text, indexed in lexicographic order.
    pub fn build(corpus: &[LabeledText], n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n-gram length must be at least 1".into()));
        }
        let mut all = BTreeSet::new();
        for r in corpus {
            all.extend(extract_ngrams(r.text(), n));
        }
        if all.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        Self::from_sorted_grams(n, all.into_iter().collect())
    }

    /// Rebuilds a vocabulary from grams already in index order.
    ///
    /// Fails unless every gram has `n` characters and the list is strictly
    /// increasing.
    pub fn from_sorted_grams(n: usize, grams: Vec<String>) -> Result<Self> {
        if grams.len() > u32::MAX as usize {
            return Err(Error::InvalidArgument("vocabulary too large".into()));
        }
        for (i, g) in grams.iter().enumerate() {
            if g.chars().count() != n {
                return Err(Error::Corrupt(format!("vocabulary entry {i} is not a {n}-gram")));
            }
            if i > 0 && grams[i - 1] >= *g {
                return Err(Error::Corrupt(format!("vocabulary entry {i} out of order")));
            }
        }
        let index_of = grams
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i as u32))
            .collect();
        Ok(NGramVocabulary { n, grams, index_of })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    pub fn index_of(&self, gram: &str) -> Option<u32> {
        self.index_of.get(gram).copied()
    }

    /// N-grams in index order.
    pub fn grams(&self) -> &[String] {
        &self.grams
    }

    /// Binary feature vector of `text`; out-of-vocabulary grams are dropped.
    pub fn vectorize(&self, text: &str) -> BinaryFeatureVector {
        let chars: Vec<char> = text.chars().collect();
        if chars.len() < self.n {
            return BinaryFeatureVector::default();
        }
        let mut buf = String::with_capacity(self.n * 4);
        let mut indices: Vec<u32> = chars
            .windows(self.n)
            .filter_map(|w| {
                buf.clear();
                buf.extend(w);
                self.index_of(&buf)
            })
            .collect();
        indices.sort_unstable();
        indices.dedup();
        BinaryFeatureVector { indices }
    }
}

pub fn build_vocabulary(corpus: &[LabeledText], n: usize) -> Result<NGramVocabulary> {
    NGramVocabulary::build(corpus, n)
}

pub fn vectorize(text: &str, vocab: &NGramVocabulary) -> BinaryFeatureVector {
    vocab.vectorize(text)
}

/// Strictly increasing feature indices present in a text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BinaryFeatureVector {
    indices: Vec<u32>,
}

impl BinaryFeatureVector {
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: u32) -> bool {
        self.indices.binary_search(&index).is_ok()
    }
}
