//! Language identification for the eleven official South African languages.
//!
//! A character 5-gram multinomial naive Bayes classifier picks a language,
//! and with it a language family; per-language lexicons then vote among the
//! members of that family. The crate also carries the data preparation and
//! evaluation pipeline used to measure both stages at different string
//! lengths.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod io;
pub mod language;
pub mod lexicon;
pub mod nb;
pub mod stacked;

pub use corpus::{
    clean_text, clean_text_with, load_corpus, load_corpus_dir, split_train_test, truncate_word_boundary,
    CleanOptions, CorpusFormat, DatasetSplit, LabeledText, SplitConfig,
};
pub use error::{Error, Result, Shortfall};
pub use eval::{
    compare_external, emit_report, evaluate, length_sweep, ConfusionMatrix, EvalConfig, EvalReport,
    LanguageClassifier, LexiconOnly, ReportFormat,
};
pub use features::{build_vocabulary, extract_ngrams, vectorize, BinaryFeatureVector, NGramVocabulary};
pub use io::{sha256_hex, write_atomic};
pub use language::{family_of, LanguageCode, LanguageFamily};
pub use lexicon::{build_lexicon, count_hits, dominant_language, FamilyHitCounts, HitCounts, Lexicon};
pub use nb::{load_model, save_model, train, NBModel, Prediction};
pub use stacked::{StackedModel, StackedPrediction};

/// Default character n-gram length.
pub const DEFAULT_NGRAM: usize = 5;
/// Default additive smoothing pseudo-count.
pub const DEFAULT_ALPHA: f64 = 1.0;
