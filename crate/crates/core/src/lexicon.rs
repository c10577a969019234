//! Per-language word sets and the within-family dominance vote.
//!
//! A lexicon directory holds one `<code>.lex` file per language (UTF-8,
//! sorted, one word per line) and a `manifest.json` with per-language
//! counts and SHA-256 checksums of the word files.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{clean_text_with, group_by_language, CleanOptions, LabeledText};
use crate::error::{Error, Result};
use crate::io::{sha256_hex, write_atomic};
use crate::language::{LanguageCode, LanguageFamily};

pub const LEXICON_FORMAT_VERSION: u32 = 1;
pub const LEXICON_MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceStats {
    pub sentences: u64,
    pub tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lexicon {
    words: BTreeMap<LanguageCode, HashSet<String>>,
    stats: BTreeMap<LanguageCode, SourceStats>,
}

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(' ').filter(|t| !t.is_empty())
}

/// Builds word sets from cleaned sentences grouped by language.
pub fn build_lexicon(corpora: &BTreeMap<LanguageCode, Vec<LabeledText>>) -> Result<Lexicon> {
    let mut lexicon = Lexicon::default();
    for (&lang, sentences) in corpora {
        if sentences.is_empty() {
            return Err(Error::EmptyCorpus(lang));
        }
        let mut set = HashSet::new();
        let mut stats = SourceStats::default();
        for s in sentences {
            stats.sentences += 1;
            for t in tokens(s.text()) {
                stats.tokens += 1;
                if !set.contains(t) {
                    set.insert(t.to_string());
                }
            }
        }
        lexicon.words.insert(lang, set);
        lexicon.stats.insert(lang, stats);
    }
    Ok(lexicon)
}

impl Lexicon {
    /// Groups `records` by label and builds the lexicon.
    pub fn from_records(records: &[LabeledText]) -> Result<Self> {
        build_lexicon(&group_by_language(records))
    }

    pub fn languages(&self) -> impl Iterator<Item = LanguageCode> + '_ {
        self.words.keys().copied()
    }

    pub fn contains(&self, lang: LanguageCode, word: &str) -> bool {
        self.words.get(&lang).is_some_and(|s| s.contains(word))
    }

    pub fn word_count(&self, lang: LanguageCode) -> usize {
        self.words.get(&lang).map_or(0, HashSet::len)
    }

    pub fn stats(&self, lang: LanguageCode) -> Option<SourceStats> {
        self.stats.get(&lang).copied()
    }

    /// Sorted words of one language.
    pub fn sorted_words(&self, lang: LanguageCode) -> Vec<&str> {
        let mut words: Vec<&str> = self
            .words
            .get(&lang)
            .map(|s| s.iter().map(String::as_str).collect())
            .unwrap_or_default();
        words.sort_unstable();
        words
    }

    fn count(&self, text: &str, langs: &[LanguageCode]) -> HitCounts {
        let mut counts: Vec<(LanguageCode, u32)> = langs.iter().map(|&l| (l, 0)).collect();
        for t in tokens(text) {
            for (lang, n) in counts.iter_mut() {
                if self.contains(*lang, t) {
                    *n += 1;
                }
            }
        }
        HitCounts { counts }
    }

    /// Writes `<code>.lex` files and the manifest into `dir` (created if missing).
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut entries = BTreeMap::new();
        for lang in self.languages() {
            let mut body = String::new();
            for w in self.sorted_words(lang) {
                body.push_str(w);
                body.push('\n');
            }
            write_atomic(&dir.join(format!("{}.lex", lang.code())), body.as_bytes())?;
            let stats = self.stats(lang).unwrap_or_default();
            entries.insert(
                lang,
                ManifestEntry {
                    sentences: stats.sentences,
                    tokens: stats.tokens,
                    words: self.word_count(lang) as u64,
                    sha256: sha256_hex(body.as_bytes()),
                },
            );
        }
        let manifest = LexiconManifest {
            format_version: LEXICON_FORMAT_VERSION,
            languages: entries,
        };
        let json = serde_json::to_string_pretty(&manifest)?;
        write_atomic(&dir.join(LEXICON_MANIFEST), json.as_bytes())
    }

    /// Loads a lexicon directory, verifying every checksum and word count.
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join(LEXICON_MANIFEST);
        let raw = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let manifest: LexiconManifest = serde_json::from_str(&raw)?;
        if manifest.format_version != LEXICON_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: manifest.format_version,
                expected: LEXICON_FORMAT_VERSION,
            });
        }
        let mut lexicon = Lexicon::default();
        for (lang, entry) in manifest.languages {
            let path = dir.join(format!("{}.lex", lang.code()));
            let body = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if sha256_hex(&body) != entry.sha256 {
                return Err(Error::ChecksumMismatch(path.display().to_string()));
            }
            let body = String::from_utf8(body).map_err(|_| Error::Corrupt(format!("{}: not UTF-8", path.display())))?;
            let mut set = HashSet::new();
            for (i, w) in body.lines().enumerate() {
                let valid = !w.is_empty() && clean_text_with(w, CleanOptions { lowercase: false }) == w && !w.contains(' ');
                if !valid {
                    return Err(Error::Corrupt(format!("{}:{}: invalid word {w:?}", path.display(), i + 1)));
                }
                set.insert(w.to_string());
            }
            if set.len() as u64 != entry.words {
                return Err(Error::Corrupt(format!("{}: word count mismatch", path.display())));
            }
            lexicon.words.insert(lang, set);
            lexicon.stats.insert(
                lang,
                SourceStats {
                    sentences: entry.sentences,
                    tokens: entry.tokens,
                },
            );
        }
        Ok(lexicon)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ManifestEntry {
    sentences: u64,
    tokens: u64,
    words: u64,
    sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct LexiconManifest {
    format_version: u32,
    languages: BTreeMap<LanguageCode, ManifestEntry>,
}

/// Lexicon hit counts for a set of languages, in code order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitCounts {
    pub counts: Vec<(LanguageCode, u32)>,
}

/// Hit counts restricted to the members of one family.
pub type FamilyHitCounts = HitCounts;

impl HitCounts {
    pub fn get(&self, lang: LanguageCode) -> Option<u32> {
        self.counts.iter().find(|(l, _)| *l == lang).map(|(_, n)| *n)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|(_, n)| *n as u64).sum()
    }
}

/// For each member of `family`, the number of tokens of `text` (with
/// multiplicity) that appear in that member's word set.
pub fn count_hits(text: &str, lexicon: &Lexicon, family: LanguageFamily) -> FamilyHitCounts {
    lexicon.count(text, family.members())
}

/// Hit counts over all eleven languages.
pub fn count_hits_all(text: &str, lexicon: &Lexicon) -> HitCounts {
    lexicon.count(text, &LanguageCode::ALL)
}

/// The language whose count exceeds every other count by at least `margin`
/// (a missing competitor counts as zero), or `None`.
///
/// A `margin` of zero is treated as one so that a decision is always a
/// unique maximum with a non-zero count.
pub fn dominant_language(counts: &HitCounts, margin: u32) -> Option<LanguageCode> {
    let margin = margin.max(1) as u64;
    let (best_idx, &(best, best_n)) = counts.counts.iter().enumerate().max_by_key(|(_, (_, n))| *n)?;
    let runner_up = counts
        .counts
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best_idx)
        .map(|(_, (_, n))| *n as u64)
        .max()
        .unwrap_or(0);
    (best_n as u64 >= runner_up + margin).then_some(best)
}

/// Stand-alone lexicon classifier over all eleven languages.
///
/// Uses [`dominant_language`] on the all-language counts; without a
/// dominant language it falls back to the highest count, ties going to the
/// smallest language code (all-zero counts yield `afr`).
pub fn classify_lexicon_only(cleaned: &str, lexicon: &Lexicon, margin: u32) -> LanguageCode {
    let counts = count_hits_all(cleaned, lexicon);
    if let Some(lang) = dominant_language(&counts, margin) {
        return lang;
    }
    let mut best = counts.counts[0];
    for &(lang, n) in &counts.counts[1..] {
        if n > best.1 {
            best = (lang, n);
        }
    }
    best.0
}
