#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use zalid_core::{LabeledText, LanguageCode};

/// Independent smoothed-Bayes scorer: gram presence is tested with
/// `str::contains`, sums run in reverse order.
pub fn oracle_scores(
    train: &[(String, LanguageCode)],
    classes: &[LanguageCode],
    n: usize,
    alpha: f64,
    input: &str,
) -> Vec<(LanguageCode, f64)> {
    let mut vocab = BTreeSet::new();
    for (t, _) in train {
        let chars: Vec<char> = t.chars().collect();
        for i in 0..chars.len().saturating_sub(n - 1) {
            if i + n <= chars.len() {
                vocab.insert(chars[i..i + n].iter().collect::<String>());
            }
        }
    }
    let vocab: Vec<String> = vocab.into_iter().collect();
    let total_docs = train.len() as f64;
    classes
        .iter()
        .map(|&c| {
            let docs: Vec<&String> = train.iter().filter(|(_, l)| *l == c).map(|(t, _)| t).collect();
            let counts: Vec<f64> = vocab
                .iter()
                .map(|g| docs.iter().filter(|d| d.contains(g.as_str())).count() as f64)
                .collect();
            let denom: f64 = counts.iter().rev().sum::<f64>() + alpha * vocab.len() as f64;
            let mut score = 0.0;
            for (g, cnt) in vocab.iter().zip(&counts).rev() {
                if input.contains(g.as_str()) {
                    score += ((cnt + alpha) / denom).ln();
                }
            }
            score += (docs.len() as f64 / total_docs).ln();
            (c, score)
        })
        .collect()
}

pub fn lt(text: &str, label: LanguageCode) -> LabeledText {
    LabeledText::new(text, label).expect("non-empty after cleaning")
}

/// Short words over a tiny alphabet so texts share n-grams.
pub fn small_text(max_words: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec("[abcd]{1,4}", 1..=max_words).prop_map(|w| w.join(" "))
}

pub fn language() -> impl Strategy<Value = LanguageCode> {
    (0..LanguageCode::ALL.len()).prop_map(|i| LanguageCode::ALL[i])
}
