//! Two-stage classifier: naive Bayes picks the family, the lexicon vote
//! picks the language within it.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::clean_text;
use crate::error::{Error, Result};
use crate::io::{sha256_hex, write_atomic};
use crate::language::{LanguageCode, LanguageFamily, FAMILY_MAP_VERSION};
use crate::lexicon::{count_hits, dominant_language, FamilyHitCounts, Lexicon, LEXICON_MANIFEST};
use crate::nb::NBModel;

pub use crate::language::family_of;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;
pub const BUNDLE_MANIFEST: &str = "manifest.json";
pub const BUNDLE_MODEL_FILE: &str = "model.nb";
pub const BUNDLE_LEXICON_DIR: &str = "lexicon";
pub const DEFAULT_MARGIN: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct StackedModel {
    pub nb: NBModel,
    pub lexicon: Lexicon,
    pub margin: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedPrediction {
    pub final_label: LanguageCode,
    pub nb_label: LanguageCode,
    pub family: LanguageFamily,
    pub hit_counts: FamilyHitCounts,
    pub lexicon_used: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct BundleManifest {
    format_version: u32,
    margin: u32,
    family_map_version: String,
    model_sha256: String,
    lexicon_manifest_sha256: String,
}

impl StackedModel {
    pub fn new(nb: NBModel, lexicon: Lexicon, margin: u32) -> Self {
        StackedModel { nb, lexicon, margin }
    }

    /// Cleans `text` and classifies it.
    pub fn classify(&self, text: &str) -> StackedPrediction {
        self.classify_cleaned(&clean_text(text))
    }

    pub fn classify_cleaned(&self, cleaned: &str) -> StackedPrediction {
        let nb_label = self.nb.predict_cleaned(cleaned).label;
        let family = family_of(nb_label);
        let hit_counts = count_hits(cleaned, &self.lexicon, family);
        let (final_label, lexicon_used) = match dominant_language(&hit_counts, self.margin) {
            Some(lang) => (lang, true),
            None => (nb_label, false),
        };
        StackedPrediction {
            final_label,
            nb_label,
            family,
            hit_counts,
            lexicon_used,
        }
    }

    /// Element-wise [`classify`](Self::classify); output order matches input order.
    pub fn classify_batch<S: AsRef<str> + Sync>(&self, texts: &[S]) -> Vec<StackedPrediction> {
        texts.par_iter().map(|t| self.classify(t.as_ref())).collect()
    }

    /// Writes `model.nb`, `lexicon/` and `manifest.json` into `dir`.
    pub fn save_bundle(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let model_bytes = self.nb.to_bytes();
        write_atomic(&dir.join(BUNDLE_MODEL_FILE), &model_bytes)?;
        let lex_dir = dir.join(BUNDLE_LEXICON_DIR);
        self.lexicon.save(&lex_dir)?;
        let lex_manifest_path = lex_dir.join(LEXICON_MANIFEST);
        let lex_manifest = fs::read(&lex_manifest_path).map_err(|e| Error::io(&lex_manifest_path, e))?;
        let manifest = BundleManifest {
            format_version: BUNDLE_FORMAT_VERSION,
            margin: self.margin,
            family_map_version: FAMILY_MAP_VERSION.to_string(),
            model_sha256: sha256_hex(&model_bytes),
            lexicon_manifest_sha256: sha256_hex(&lex_manifest),
        };
        write_atomic(&dir.join(BUNDLE_MANIFEST), serde_json::to_string_pretty(&manifest)?.as_bytes())
    }

    pub fn load_bundle(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join(BUNDLE_MANIFEST);
        let raw = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let manifest: BundleManifest = serde_json::from_str(&raw)?;
        if manifest.format_version != BUNDLE_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: manifest.format_version,
                expected: BUNDLE_FORMAT_VERSION,
            });
        }
        if manifest.family_map_version != FAMILY_MAP_VERSION {
            return Err(Error::Corrupt(format!(
                "bundle uses family map {:?}, this build knows {FAMILY_MAP_VERSION:?}",
                manifest.family_map_version
            )));
        }
        let model_path = dir.join(BUNDLE_MODEL_FILE);
        let model_bytes = fs::read(&model_path).map_err(|e| Error::io(&model_path, e))?;
        if sha256_hex(&model_bytes) != manifest.model_sha256 {
            return Err(Error::ChecksumMismatch(model_path.display().to_string()));
        }
        let lex_dir = dir.join(BUNDLE_LEXICON_DIR);
        let lex_manifest_path = lex_dir.join(LEXICON_MANIFEST);
        let lex_manifest = fs::read(&lex_manifest_path).map_err(|e| Error::io(&lex_manifest_path, e))?;
        if sha256_hex(&lex_manifest) != manifest.lexicon_manifest_sha256 {
            return Err(Error::ChecksumMismatch(lex_manifest_path.display().to_string()));
        }
        Ok(StackedModel {
            nb: NBModel::from_bytes(&model_bytes)?,
            lexicon: Lexicon::load(&lex_dir)?,
            margin: manifest.margin,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LabeledText;
    use crate::features::build_vocabulary;
    use crate::nb::train;
    use LanguageCode::*;

    fn lt(text: &str, label: LanguageCode) -> LabeledText {
        LabeledText::new(text, label).unwrap()
    }

    fn toy() -> StackedModel {
        let train_set = vec![
            lt("ngiyabonga kakhulu umngane wami", Zul),
            lt("enkosi kakhulu mhlobo wam", Xho),
            lt("the cat sat on the mat", Eng),
            lt("die kat sit op die mat", Afr),
            lt("ndza khensa swinene", Tso),
        ];
        let vocab = build_vocabulary(&train_set, 3).unwrap();
        let nb = train(&train_set, &vocab, 1.0, &[Afr, Eng, Tso, Xho, Zul]).unwrap();
        let lexicon = Lexicon::from_records(&[
            lt("enkosi mhlobo wam", Xho),
            lt("ngiyabonga umngane wami", Zul),
            lt("the cat sat on mat", Eng),
            lt("die kat sit op mat", Afr),
            lt("ndza khensa swinene", Tso),
            lt("enkosi", Ven),
        ])
        .unwrap();
        StackedModel::new(nb, lexicon, 1)
    }

    #[test]
    fn lexicon_overrides_within_family() {
        let m = toy();
        let p = m.classify("ngiyabonga kakhulu umngane wami");
        assert_eq!(p.nb_label, Zul);
        assert_eq!(p.family, LanguageFamily::Nguni);
        assert_eq!(p.final_label, Zul);
        assert!(p.lexicon_used);

        // NB says zul on the shared word, the lexicon has xho words
        let p = m.classify("kakhulu enkosi mhlobo wam");
        assert_eq!(p.family, LanguageFamily::Nguni);
        assert_eq!(p.final_label, Xho);
        assert_eq!(p.hit_counts.get(Xho), Some(3));
        assert!(p.lexicon_used);
    }

    #[test]
    fn tie_falls_back_to_nb() {
        let m = toy();
        let p = m.classify("the cat sat on the mat die kat");
        assert_eq!(p.family, LanguageFamily::Germanic);
        // eng: the, cat, sat, on, the, mat = 6 ; afr: mat, die, kat = 3
        assert_eq!(p.final_label, Eng);
        let p = m.classify("mat");
        assert_eq!(p.hit_counts.get(Eng), p.hit_counts.get(Afr));
        assert!(!p.lexicon_used);
        assert_eq!(p.final_label, p.nb_label);
    }

    #[test]
    fn singleton_family_keeps_nb_label() {
        let m = toy();
        // "enkosi" is in the ven lexicon, but tso's family has no other member
        let p = m.classify("ndza khensa swinene enkosi");
        assert_eq!(p.nb_label, Tso);
        assert_eq!(p.final_label, Tso);
    }

    #[test]
    fn batch_matches_sequential() {
        let m = toy();
        let texts = ["the cat", "enkosi wam", "", "Die Kat!!"];
        let batch = m.classify_batch(&texts);
        let seq: Vec<_> = texts.iter().map(|t| m.classify(t)).collect();
        assert_eq!(batch, seq);
        assert!(m.classify_batch::<&str>(&[]).is_empty());
    }

    #[test]
    fn bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = toy();
        m.save_bundle(dir.path()).unwrap();
        let back = StackedModel::load_bundle(dir.path()).unwrap();
        assert_eq!(back, m);

        fs::write(dir.path().join(BUNDLE_MODEL_FILE), b"garbage").unwrap();
        assert!(matches!(StackedModel::load_bundle(dir.path()), Err(Error::ChecksumMismatch(_))));
    }
}
