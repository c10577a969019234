//! Corpus ingestion, text cleaning, train/test sampling and short-string
//! derivation.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result, Shortfall};
use crate::language::LanguageCode;

/// Identifier of the sampling procedure recorded in every [`DatasetSplit`].
///
/// ChaCha8 seeded with `seed`, one stream per language (stream id = index of
/// the language code), partial Fisher-Yates with rejection-sampled bounds.
pub const SAMPLER_ID: &str = "chacha8-stream-per-language-fisher-yates-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanOptions {
    pub lowercase: bool,
}

impl Default for CleanOptions {
    fn default() -> Self {
        CleanOptions { lowercase: true }
    }
}

fn is_replaced(c: char) -> bool {
    use GeneralCategory::*;
    if c == '-' {
        return false;
    }
    matches!(
        get_general_category(c),
        DecimalNumber
            | ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
            | MathSymbol
            | CurrencySymbol
            | ModifierSymbol
            | OtherSymbol
    )
}

/// Cleans text with the default options (lowercasing on).
pub fn clean_text(raw: &str) -> String {
    clean_text_with(raw, CleanOptions::default())
}

/// Replaces decimal digits and punctuation/symbols other than `-` with
/// spaces, collapses whitespace runs to one space and trims.
///
/// Input is NFC-normalized first. The result is a fixed point:
/// `clean_text_with(clean_text_with(x, o), o) == clean_text_with(x, o)`.
pub fn clean_text_with(raw: &str, options: CleanOptions) -> String {
    let normalized: String = if options.lowercase {
        raw.nfc().collect::<String>().to_lowercase().nfc().collect()
    } else {
        raw.nfc().collect()
    };

    let mut out = String::with_capacity(normalized.len());
    let mut pending_space = false;
    for c in normalized.chars() {
        if c.is_whitespace() || is_replaced(c) {
            pending_space = true;
            continue;
        }
        if pending_space && !out.is_empty() {
            out.push(' ');
        }
        pending_space = false;
        out.push(c);
    }
    out
}

/// One cleaned sentence with its gold label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledText {
    text: String,
    label: LanguageCode,
}

impl LabeledText {
    /// Cleans `raw` with the default options. `None` if nothing survives cleaning.
    pub fn new(raw: &str, label: LanguageCode) -> Option<Self> {
        Self::with_options(raw, label, CleanOptions::default())
    }

    pub fn with_options(raw: &str, label: LanguageCode, options: CleanOptions) -> Option<Self> {
        let text = clean_text_with(raw, options);
        if text.is_empty() {
            None
        } else {
            Some(LabeledText { text, label })
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn label(&self) -> LanguageCode {
        self.label
    }

    /// Length in Unicode scalar values.
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// `text<TAB>code` per line, no header.
    Tsv,
    /// File named `<code>.txt`, one sentence per line.
    PerLanguageLines,
}

impl CorpusFormat {
    /// Guesses the format from the file name: `<code>.txt` is per-language,
    /// anything else is TSV.
    pub fn detect(path: &Path) -> CorpusFormat {
        let is_lang_file = path.extension().is_some_and(|e| e == "txt")
            && path
                .file_stem()
                .and_then(|s| s.to_str())
                .is_some_and(|s| s.parse::<LanguageCode>().is_ok());
        if is_lang_file {
            CorpusFormat::PerLanguageLines
        } else {
            CorpusFormat::Tsv
        }
    }
}

/// Reads a corpus file. Blank lines are skipped; records whose text is
/// empty after cleaning are rejected with their line number.
pub fn load_corpus(path: &Path, format: CorpusFormat, options: CleanOptions) -> Result<Vec<LabeledText>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        CorpusFormat::Tsv => parse_tsv(&content, options),
        CorpusFormat::PerLanguageLines => {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::InvalidArgument(format!("{}: no file name", path.display())))?;
            let label: LanguageCode = stem.parse()?;
            parse_lines(&content, label, options)
        }
    }
}

/// Loads every `<code>.txt` in a directory, in language code order.
pub fn load_corpus_dir(dir: &Path, options: CleanOptions) -> Result<Vec<LabeledText>> {
    let mut out = Vec::new();
    for lang in LanguageCode::ALL {
        let path = dir.join(format!("{}.txt", lang.code()));
        if path.is_file() {
            out.extend(load_corpus(&path, CorpusFormat::PerLanguageLines, options)?);
        }
    }
    Ok(out)
}

pub fn parse_tsv(content: &str, options: CleanOptions) -> Result<Vec<LabeledText>> {
    let mut out = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (raw, code) = line.rsplit_once('\t').ok_or_else(|| Error::MalformedRecord {
            line: line_no,
            message: "missing label column".into(),
        })?;
        let code = code.trim();
        let label: LanguageCode = code.parse().map_err(|_| Error::UnknownLanguageAt {
            line: line_no,
            code: code.to_string(),
        })?;
        out.push(
            LabeledText::with_options(raw, label, options).ok_or_else(|| Error::MalformedRecord {
                line: line_no,
                message: "text is empty after cleaning".into(),
            })?,
        );
    }
    Ok(out)
}

pub fn parse_lines(content: &str, label: LanguageCode, options: CleanOptions) -> Result<Vec<LabeledText>> {
    let mut out = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            LabeledText::with_options(line, label, options).ok_or_else(|| Error::MalformedRecord {
                line: i + 1,
                message: "text is empty after cleaning".into(),
            })?,
        );
    }
    Ok(out)
}

/// Serializes records as TSV, one `text<TAB>code` line each.
pub fn to_tsv(records: &[LabeledText]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(r.text());
        out.push('\t');
        out.push_str(r.label().code());
        out.push('\n');
    }
    out
}

/// Groups records by label, preserving order within each language.
pub fn group_by_language(records: &[LabeledText]) -> BTreeMap<LanguageCode, Vec<LabeledText>> {
    let mut map: BTreeMap<LanguageCode, Vec<LabeledText>> = BTreeMap::new();
    for r in records {
        map.entry(r.label()).or_default().push(r.clone());
    }
    map
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub length_min: usize,
    pub length_max: usize,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            n_train: 3000,
            n_test: 1000,
            length_min: 200,
            length_max: 300,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<LabeledText>,
    pub test: Vec<LabeledText>,
    pub seed: u64,
    pub length_min: usize,
    pub length_max: usize,
    pub sampler: String,
}

fn bounded(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    debug_assert!(n > 0);
    let zone = (u64::MAX / n) * n;
    loop {
        let r = rng.next_u64();
        if r < zone {
            return r % n;
        }
    }
}

/// Samples `n_train + n_test` distinct in-range sentences per language.
///
/// Sentences with identical text are sampled at most once (first occurrence
/// wins), which keeps train and test disjoint. Languages absent from the
/// corpus are skipped; languages present with too few sentences fail the
/// whole split with every shortfall listed.
pub fn split_train_test(corpus: &[LabeledText], config: &SplitConfig) -> Result<DatasetSplit> {
    if config.length_min > config.length_max {
        return Err(Error::InvalidArgument(format!(
            "length_min {} exceeds length_max {}",
            config.length_min, config.length_max
        )));
    }

    let mut seen = HashSet::new();
    let mut per_lang: BTreeMap<LanguageCode, Vec<&LabeledText>> = BTreeMap::new();
    for r in corpus {
        let len = r.char_len();
        if len < config.length_min || len > config.length_max {
            continue;
        }
        if seen.insert(r.text()) {
            per_lang.entry(r.label()).or_default().push(r);
        }
    }
    for r in corpus {
        per_lang.entry(r.label()).or_default();
    }

    let requested = config.n_train + config.n_test;
    let shortfalls: Vec<Shortfall> = per_lang
        .iter()
        .filter(|(_, v)| v.len() < requested)
        .map(|(&language, v)| Shortfall {
            language,
            available: v.len(),
            requested,
        })
        .collect();
    if !shortfalls.is_empty() {
        return Err(Error::InsufficientData(shortfalls));
    }

    let mut train = Vec::with_capacity(per_lang.len() * config.n_train);
    let mut test = Vec::with_capacity(per_lang.len() * config.n_test);
    for (lang, mut pool) in per_lang {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(lang.index() as u64);
        let len = pool.len();
        for i in 0..requested {
            let j = i + bounded(&mut rng, (len - i) as u64) as usize;
            pool.swap(i, j);
        }
        train.extend(pool[..config.n_train].iter().map(|r| (*r).clone()));
        test.extend(pool[config.n_train..requested].iter().map(|r| (*r).clone()));
    }

    Ok(DatasetSplit {
        train,
        test,
        seed: config.seed,
        length_min: config.length_min,
        length_max: config.length_max,
        sampler: SAMPLER_ID.to_string(),
    })
}

/// Shortest prefix of `text` with at least `target_len` characters that ends
/// at the end of a word. Never splits a word and never ends in a space.
pub fn truncate_word_boundary(text: &str, target_len: usize) -> String {
    let chars: Vec<char> = text.chars().collect();
    if target_len >= chars.len() {
        return text.to_string();
    }
    let mut end = target_len.max(1);
    while end < chars.len() && !(chars[end] == ' ' && chars[end - 1] != ' ') {
        end += 1;
    }
    chars[..end].iter().collect()
}

/// Applies [`truncate_word_boundary`] to every record, keeping labels.
pub fn truncate_all(records: &[LabeledText], target_len: usize) -> Vec<LabeledText> {
    records
        .iter()
        .map(|r| LabeledText {
            text: truncate_word_boundary(r.text(), target_len),
            label: r.label(),
        })
        .collect()
}
