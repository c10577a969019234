//! Synthetic fixtures for the benchmarks.

use zalid_core::{LabeledText, LanguageCode};

const SYLLABLES: [&str; 16] = [
    "ka", "ng", "ba", "tse", "hlo", "di", "mo", "wa", "ni", "le", "ya", "ku", "sh", "ve", "tho", "zi",
];

/// Deterministic pseudo-sentences, a few per language, each ~`len` chars.
pub fn synthetic_corpus(per_language: usize, len: usize) -> Vec<LabeledText> {
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut out = Vec::new();
    for (li, lang) in LanguageCode::ALL.iter().enumerate() {
        for _ in 0..per_language {
            let mut s = String::new();
            while s.chars().count() < len {
                if !s.is_empty() {
                    s.push(' ');
                }
                for _ in 0..3 {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    s.push_str(SYLLABLES[((state as usize) + li) % SYLLABLES.len()]);
                }
                s.push_str(&lang.code()[..1 + li % 3]);
            }
            out.push(LabeledText::new(&s, *lang).expect("non-empty"));
        }
    }
    out
}
