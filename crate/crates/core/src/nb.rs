//! Multinomial naive Bayes over binary character n-gram features.
//!
//! # Model file layout
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! magic          8 bytes   "ZALIDNB\0"
//! version        u32       MODEL_FORMAT_VERSION
//! n              u32       n-gram length
//! alpha          f64       smoothing pseudo-count
//! class_count    u32
//! classes        class_count × 3 bytes (ASCII language codes)
//! vocab_size     u64
//! body_len       u64       byte length of everything after the checksum
//! checksum       32 bytes  SHA-256 over all preceding header bytes, then the body
//! body:
//!   vocab_size × (u32 byte length, UTF-8 n-gram)   in index order
//!   class_count × f64                              log priors
//!   class_count × vocab_size × f64                 log likelihoods, one array per class
//! ```

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::corpus::{clean_text, LabeledText};
use crate::error::{Error, Result};
use crate::features::{BinaryFeatureVector, NGramVocabulary};
use crate::io::{write_atomic, Reader};
use crate::language::LanguageCode;

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"ZALIDNB\0";

#[derive(Debug, Clone, PartialEq)]
pub struct NBModel {
    vocab: NGramVocabulary,
    classes: Vec<LanguageCode>,
    log_prior: Vec<f64>,
    /// Feature-major: `[feature * classes.len() + class]`.
    log_likelihood: Vec<f64>,
    alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: LanguageCode,
    /// One entry per model class, in class order.
    pub log_scores: Vec<(LanguageCode, f64)>,
}

impl Prediction {
    pub fn score(&self, lang: LanguageCode) -> Option<f64> {
        self.log_scores.iter().find(|(l, _)| *l == lang).map(|(_, s)| *s)
    }
}

/// Trains on `train_set` with the given declared classes.
///
/// `log_prior(c) = ln(N_c / N)`; with `F[c][f]` the number of class-`c`
/// documents containing feature `f`,
/// `log_likelihood(c, f) = ln((F[c][f] + alpha) / (sum_g F[c][g] + alpha * |V|))`.
pub fn train(
    train_set: &[LabeledText],
    vocab: &NGramVocabulary,
    alpha: f64,
    classes: &[LanguageCode],
) -> Result<NBModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let mut classes = classes.to_vec();
    classes.sort();
    classes.dedup();
    if classes.is_empty() {
        return Err(Error::InvalidArgument("no classes declared".into()));
    }
    let slot = |l: LanguageCode| classes.binary_search(&l).map_err(|_| Error::UndeclaredClass(l));

    let vectors: Vec<(usize, BinaryFeatureVector)> = train_set
        .par_iter()
        .map(|r| Ok((slot(r.label())?, vocab.vectorize(r.text()))))
        .collect::<Result<_>>()?;

    let n_classes = classes.len();
    let n_features = vocab.len();
    let mut doc_counts = vec![0u64; n_classes];
    let mut feature_counts = vec![0u32; n_classes * n_features];
    for (c, x) in &vectors {
        doc_counts[*c] += 1;
        let row = &mut feature_counts[c * n_features..(c + 1) * n_features];
        for &f in x.indices() {
            row[f as usize] += 1;
        }
    }
    if let Some(c) = doc_counts.iter().position(|&n| n == 0) {
        return Err(Error::EmptyClass(classes[c]));
    }

    let total_docs: u64 = doc_counts.iter().sum();
    let log_prior: Vec<f64> = doc_counts
        .iter()
        .map(|&n| (n as f64 / total_docs as f64).ln())
        .collect();

    let class_major: Vec<Vec<f64>> = (0..n_classes)
        .into_par_iter()
        .map(|c| {
            let row = &feature_counts[c * n_features..(c + 1) * n_features];
            let total: u64 = row.iter().map(|&x| x as u64).sum();
            let log_denom = (total as f64 + alpha * n_features as f64).ln();
            row.iter().map(|&x| (x as f64 + alpha).ln() - log_denom).collect()
        })
        .collect();

    NBModel::from_parts(vocab.clone(), classes, log_prior, class_major, alpha)
}

impl NBModel {
    /// Assembles a model from per-class parameter arrays, validating shapes
    /// and finiteness.
    pub fn from_parts(
        vocab: NGramVocabulary,
        classes: Vec<LanguageCode>,
        log_prior: Vec<f64>,
        class_major_log_likelihood: Vec<Vec<f64>>,
        alpha: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
        }
        if classes.is_empty() || classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("classes must be non-empty and strictly increasing".into()));
        }
        let n_classes = classes.len();
        let n_features = vocab.len();
        if log_prior.len() != n_classes
            || class_major_log_likelihood.len() != n_classes
            || class_major_log_likelihood.iter().any(|r| r.len() != n_features)
        {
            return Err(Error::InvalidArgument("parameter shape does not match classes × vocabulary".into()));
        }
        let all_finite = log_prior.iter().all(|x| x.is_finite())
            && class_major_log_likelihood.iter().flatten().all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::InvalidArgument("non-finite model parameter".into()));
        }
        let mut log_likelihood = vec![0.0; n_classes * n_features];
        for (c, row) in class_major_log_likelihood.iter().enumerate() {
            for (f, &v) in row.iter().enumerate() {
                log_likelihood[f * n_classes + c] = v;
            }
        }
        Ok(NBModel {
            vocab,
            classes,
            log_prior,
            log_likelihood,
            alpha,
        })
    }

    pub fn vocab(&self) -> &NGramVocabulary {
        &self.vocab
    }

    pub fn classes(&self) -> &[LanguageCode] {
        &self.classes
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn log_prior(&self) -> &[f64] {
        &self.log_prior
    }

    pub fn log_likelihood(&self, class: usize, feature: u32) -> f64 {
        self.log_likelihood[feature as usize * self.classes.len() + class]
    }

    /// Log scores for a feature vector: the class log prior, then each
    /// present feature's log likelihood added in increasing index order.
    pub fn scores(&self, x: &BinaryFeatureVector) -> Vec<f64> {
        let n_classes = self.classes.len();
        let mut acc = self.log_prior.clone();
        for &f in x.indices() {
            let row = &self.log_likelihood[f as usize * n_classes..(f as usize + 1) * n_classes];
            for (a, v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
        acc
    }

    /// Classifies already-cleaned text.
    pub fn predict_cleaned(&self, cleaned: &str) -> Prediction {
        let scores = self.scores(&self.vocab.vectorize(cleaned));
        // first maximum in class order = lexicographically smallest code on ties
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = i;
            }
        }
        Prediction {
            label: self.classes[best],
            log_scores: self.classes.iter().copied().zip(scores).collect(),
        }
    }

    /// Cleans `text`, then classifies it.
    pub fn predict(&self, text: &str) -> Prediction {
        self.predict_cleaned(&clean_text(text))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let n_classes = self.classes.len();
        let mut body = Vec::with_capacity(self.vocab.len() * (8 + 8 * n_classes));
        for g in self.vocab.grams() {
            body.extend_from_slice(&(g.len() as u32).to_le_bytes());
            body.extend_from_slice(g.as_bytes());
        }
        for p in &self.log_prior {
            body.extend_from_slice(&p.to_le_bytes());
        }
        for c in 0..n_classes {
            for f in 0..self.vocab.len() {
                body.extend_from_slice(&self.log_likelihood[f * n_classes + c].to_le_bytes());
            }
        }

        let mut out = Vec::with_capacity(body.len() + 128);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&MODEL_FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.vocab.n() as u32).to_le_bytes());
        out.extend_from_slice(&self.alpha.to_le_bytes());
        out.extend_from_slice(&(n_classes as u32).to_le_bytes());
        for c in &self.classes {
            out.extend_from_slice(c.code().as_bytes());
        }
        out.extend_from_slice(&(self.vocab.len() as u64).to_le_bytes());
        out.extend_from_slice(&(body.len() as u64).to_le_bytes());
        let mut hasher = Sha256::new();
        hasher.update(&out);
        hasher.update(&body);
        out.extend_from_slice(&hasher.finalize());
        out.extend_from_slice(&body);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(8)? != MAGIC {
            return Err(Error::Corrupt("not a model file".into()));
        }
        let version = r.u32()?;
        if version != MODEL_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let n = r.u32()? as usize;
        let alpha = r.f64()?;
        let n_classes = r.u32()? as usize;
        let mut classes = Vec::with_capacity(n_classes.min(LanguageCode::ALL.len()));
        for _ in 0..n_classes {
            let code = std::str::from_utf8(r.take(3)?).map_err(|_| Error::Corrupt("class code".into()))?;
            classes.push(code.parse::<LanguageCode>().map_err(|_| Error::Corrupt(format!("class code {code:?}")))?);
        }
        let vocab_size = r.u64()? as usize;
        let body_len = r.u64()? as usize;
        let header_len = r.position();
        let checksum = r.take(32)?;
        if r.remaining() != body_len {
            return Err(Error::Corrupt(format!(
                "expected {body_len} body bytes, found {}",
                r.remaining()
            )));
        }
        let body = r.take(body_len)?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes[..header_len]);
        hasher.update(body);
        if hasher.finalize().as_slice() != checksum {
            return Err(Error::ChecksumMismatch("model file".into()));
        }

        let mut r = Reader::new(body);
        let mut grams = Vec::with_capacity(vocab_size.min(body_len / 4));
        for _ in 0..vocab_size {
            let len = r.u32()? as usize;
            let g = std::str::from_utf8(r.take(len)?).map_err(|_| Error::Corrupt("vocabulary entry is not UTF-8".into()))?;
            grams.push(g.to_string());
        }
        let vocab = NGramVocabulary::from_sorted_grams(n, grams)?;
        let log_prior = (0..n_classes).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let mut class_major = Vec::with_capacity(n_classes);
        for _ in 0..n_classes {
            class_major.push((0..vocab_size).map(|_| r.f64()).collect::<Result<Vec<_>>>()?);
        }
        if r.remaining() != 0 {
            return Err(Error::Corrupt("trailing bytes after parameters".into()));
        }
        NBModel::from_parts(vocab, classes, log_prior, class_major, alpha)
            .map_err(|e| Error::Corrupt(e.to_string()))
    }

    /// Writes the model file; on failure no file is left at `path`.
    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

pub fn save_model(model: &NBModel, path: &Path) -> Result<()> {
    model.save(path)
}

pub fn load_model(path: &Path) -> Result<NBModel> {
    NBModel::load(path)
}
