mod common;

use std::collections::HashSet;

use common::{language, lt, oracle_scores, small_text};
use proptest::prelude::*;
use zalid_core::eval::evaluate_predictions;
use zalid_core::lexicon::count_hits_all;
use zalid_core::{
    build_vocabulary, clean_text, clean_text_with, count_hits, dominant_language, extract_ngrams, family_of,
    split_train_test, train, truncate_word_boundary, CleanOptions, EvalConfig, HitCounts, LabeledText,
    LanguageCode, LanguageFamily, Lexicon, NBModel, SplitConfig, StackedModel,
};

fn noisy_text() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop_oneof![
            "[a-zA-Z]{1,6}",
            Just("š".to_string()),
            Just("s\u{30C}".to_string()),
            Just("-".to_string()),
            "[0-9]{1,3}",
            "[!?.,;:'\"()\\[\\]€$%&*+=<>/@#]{1,3}",
            "[ \t\n\u{a0}\u{3000}]{1,3}",
            Just("İ".to_string()),
            Just("\u{301}".to_string()),
        ],
        0..20,
    )
    .prop_map(|parts| parts.concat())
}

proptest! {
    #[test]
    fn clean_is_idempotent(s in any::<String>()) {
        let once = clean_text(&s);
        prop_assert_eq!(clean_text(&once), once.clone());
        let kept = clean_text_with(&s, CleanOptions { lowercase: false });
        prop_assert_eq!(clean_text_with(&kept, CleanOptions { lowercase: false }), kept);
    }

    #[test]
    fn clean_output_shape(s in noisy_text()) {
        let out = clean_text(&s);
        prop_assert_eq!(clean_text(&out), out.clone());
        prop_assert!(!out.contains("  "));
        prop_assert!(!out.starts_with(' ') && !out.ends_with(' '));
        prop_assert!(out.chars().all(|c| c == '-' || c == ' ' || !(c.is_ascii_digit() || c.is_ascii_punctuation())));
        prop_assert!(out.chars().all(|c| c == ' ' || !c.is_whitespace()));
    }

    #[test]
    fn truncation_never_fragments(words in proptest::collection::vec("[a-zš-]{1,8}", 1..15), k in 1usize..80) {
        let text = words.join(" ");
        let cut = truncate_word_boundary(&text, k);
        prop_assert!(text.starts_with(&cut));
        prop_assert!(cut.chars().count() >= k.min(text.chars().count()));
        let got: Vec<&str> = cut.split(' ').collect();
        prop_assert_eq!(&got[..], &words.iter().map(String::as_str).collect::<Vec<_>>()[..got.len()]);
    }

    #[test]
    fn ngram_count_bound(s in "[a-e ]{0,30}", n in 1usize..7) {
        let grams = extract_ngrams(&s, n);
        prop_assert!(grams.len() <= s.chars().count().saturating_sub(n - 1));
        prop_assert!(grams.iter().all(|g| g.chars().count() == n));
    }

    #[test]
    fn vectorize_is_monotone(a in "[abc]{0,12}", b in "[abc]{0,12}", c in "[abc]{0,12}") {
        let corpus = vec![lt("abcabcaabbccacbacb", LanguageCode::Afr)];
        let vocab = build_vocabulary(&corpus, 3).unwrap();
        let inner = vocab.vectorize(&b);
        let outer = vocab.vectorize(&format!("{a}{b}{c}"));
        prop_assert!(inner.indices().iter().all(|&i| outer.contains(i)));
        prop_assert!(outer.indices().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn nb_matches_oracle(
        docs in proptest::collection::vec(("[ab]{2,6}", 0usize..3), 1..=5),
        input in "[ab]{0,8}",
        alpha in 0.1f64..3.0,
    ) {
        let classes_all = [LanguageCode::Afr, LanguageCode::Eng, LanguageCode::Zul];
        let train_docs: Vec<(String, LanguageCode)> = docs.iter().map(|(t, c)| (t.clone(), classes_all[*c])).collect();
        let mut classes: Vec<LanguageCode> = train_docs.iter().map(|(_, l)| *l).collect();
        classes.sort();
        classes.dedup();
        let records: Vec<LabeledText> = train_docs.iter().map(|(t, l)| lt(t, *l)).collect();
        let vocab = build_vocabulary(&records, 2).unwrap();
        let model = train(&records, &vocab, alpha, &classes).unwrap();
        let expected = oracle_scores(&train_docs, &classes, 2, alpha, &input);
        let got = model.predict_cleaned(&input);
        for ((l1, s1), (l2, s2)) in got.log_scores.iter().zip(&expected) {
            prop_assert_eq!(l1, l2);
            prop_assert!((s1 - s2).abs() < 1e-9, "{} vs {}", s1, s2);
        }
    }

    #[test]
    fn training_order_is_irrelevant(
        docs in proptest::collection::vec((small_text(4), language()), 2..12),
        seed in any::<u64>(),
    ) {
        let records: Vec<LabeledText> = docs.iter().map(|(t, l)| lt(t, *l)).collect();
        let mut shuffled = records.clone();
        let mut s = seed | 1;
        for i in (1..shuffled.len()).rev() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            shuffled.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let mut classes: Vec<LanguageCode> = records.iter().map(LabeledText::label).collect();
        classes.sort();
        classes.dedup();
        let Ok(vocab) = build_vocabulary(&records, 3) else { return Ok(()) };
        let a = train(&records, &vocab, 1.0, &classes).unwrap();
        let b = train(&shuffled, &build_vocabulary(&shuffled, 3).unwrap(), 1.0, &classes).unwrap();
        prop_assert_eq!(a.to_bytes(), b.to_bytes());
    }

    #[test]
    fn argmax_invariant_under_prior_shift(
        docs in proptest::collection::vec((small_text(4), language()), 2..10),
        input in small_text(6),
        shift in -50.0f64..50.0,
    ) {
        let records: Vec<LabeledText> = docs.iter().map(|(t, l)| lt(t, *l)).collect();
        let mut classes: Vec<LanguageCode> = records.iter().map(LabeledText::label).collect();
        classes.sort();
        classes.dedup();
        let Ok(vocab) = build_vocabulary(&records, 3) else { return Ok(()) };
        let m = train(&records, &vocab, 1.0, &classes).unwrap();
        let rows = (0..classes.len())
            .map(|c| (0..vocab.len() as u32).map(|f| m.log_likelihood(c, f)).collect())
            .collect();
        let priors = m.log_prior().iter().map(|p| p + shift).collect();
        let shifted = NBModel::from_parts(vocab, classes, priors, rows, 1.0).unwrap();
        let base = m.predict(&input);
        let moved = shifted.predict(&input);
        let top = base.log_scores.iter().map(|(_, s)| *s).fold(f64::NEG_INFINITY, f64::max);
        let runner_up = base
            .log_scores
            .iter()
            .filter(|(l, _)| *l != base.label)
            .map(|(_, s)| *s)
            .fold(f64::NEG_INFINITY, f64::max);
        // the shifted winner is a maximizer of the unshifted scores up to rounding
        prop_assert!(top - base.score(moved.label).unwrap() < 1e-9);
        if top - runner_up > 1e-9 {
            prop_assert_eq!(base.label, moved.label);
        }
    }

    #[test]
    fn favoring_features_increase_margin(
        docs in proptest::collection::vec((small_text(4), 0usize..2), 2..8),
        input in small_text(4),
    ) {
        let langs = [LanguageCode::Afr, LanguageCode::Eng];
        let records: Vec<LabeledText> = docs.iter().map(|(t, c)| lt(t, langs[*c])).collect();
        let mut classes: Vec<LanguageCode> = records.iter().map(LabeledText::label).collect();
        classes.sort();
        classes.dedup();
        prop_assume!(classes.len() == 2);
        let Ok(vocab) = build_vocabulary(&records, 2) else { return Ok(()) };
        let m = train(&records, &vocab, 1.0, &classes).unwrap();
        // the gram with maximal likelihood ratio for class 0
        let best = (0..vocab.len() as u32)
            .max_by(|&a, &b| {
                let ra = m.log_likelihood(0, a) - m.log_likelihood(1, a);
                let rb = m.log_likelihood(0, b) - m.log_likelihood(1, b);
                ra.partial_cmp(&rb).unwrap()
            })
            .unwrap();
        prop_assume!(m.log_likelihood(0, best) >= m.log_likelihood(1, best));
        let gram = &vocab.grams()[best as usize];
        let gap = |t: &str| { let p = m.predict_cleaned(t); p.log_scores[0].1 - p.log_scores[1].1 };
        let extended = [input.as_str(), gram.as_str()].join(" ");
        let before = vocab.vectorize(&input);
        let added: Vec<u32> = vocab.vectorize(&extended).indices().iter().copied().filter(|&f| !before.contains(f)).collect();
        // only texts whose new features all favor class 0
        prop_assume!(added.iter().all(|&f| m.log_likelihood(0, f) >= m.log_likelihood(1, f)));
        prop_assert!(gap(&extended) >= gap(&input) - 1e-12);
    }

    #[test]
    fn dominance_is_unique_argmax_and_margin_monotone(
        counts in proptest::collection::vec(0u32..6, 1..5),
        margin in 1u32..4,
    ) {
        let h = HitCounts { counts: counts.iter().enumerate().map(|(i, &n)| (LanguageCode::ALL[i], n)).collect() };
        if let Some(l) = dominant_language(&h, margin) {
            let n = h.get(l).unwrap();
            prop_assert!(n > 0);
            prop_assert!(h.counts.iter().filter(|(m, _)| *m != l).all(|(_, c)| *c < n));
        }
        if dominant_language(&h, margin).is_none() {
            prop_assert!(dominant_language(&h, margin + 1).is_none());
        }
    }

    #[test]
    fn hit_sum_bound(text in small_text(8), fam in 0usize..5) {
        let lex = Lexicon::from_records(&[lt("a ab abc", LanguageCode::Xho), lt("a b", LanguageCode::Zul), lt("ab d", LanguageCode::Nbl)]).unwrap();
        let family = LanguageFamily::ALL[fam];
        let h = count_hits(&text, &lex, family);
        prop_assert_eq!(h.counts.iter().map(|(l, _)| *l).collect::<Vec<_>>(), family.members().to_vec());
        prop_assert!(h.total() <= (text.split(' ').count() * family.members().len()) as u64);
        prop_assert!(count_hits_all(&text, &lex).total() <= (text.split(' ').count() * 11) as u64);
    }

    #[test]
    fn macro_f1_ignores_order(pairs in proptest::collection::vec((language(), language()), 1..40), rot in 0usize..40) {
        let (gold, pred): (Vec<_>, Vec<_>) = pairs.iter().copied().unzip();
        let a = evaluate_predictions(&gold, &pred, &LanguageCode::ALL, EvalConfig::default()).unwrap();
        let k = rot % pairs.len();
        let mut g2 = gold.clone();
        let mut p2 = pred.clone();
        g2.rotate_left(k);
        p2.rotate_left(k);
        let b = evaluate_predictions(&g2, &p2, &LanguageCode::ALL, EvalConfig::default()).unwrap();
        prop_assert_eq!(a.macro_f1, b.macro_f1);
        prop_assert_eq!(a.family_cm.total(), a.cm.total());
        prop_assert_eq!(a.accuracy, a.cm.trace() as f64 / a.cm.total() as f64);
        let mean = a.per_class.values().map(|m| m.f1).sum::<f64>() / 11.0;
        prop_assert_eq!(a.macro_f1, mean);
    }
}

fn toy_stacked(margin: u32) -> StackedModel {
    let train_set = vec![
        lt("ngiyabonga kakhulu umngane wami", LanguageCode::Zul),
        lt("enkosi kakhulu mhlobo wam", LanguageCode::Xho),
        lt("ngiyabonga kakhulu umngane", LanguageCode::Nbl),
        lt("ngiyabonga umngane wami", LanguageCode::Ssw),
        lt("ke a leboga thata tsala", LanguageCode::Tsn),
        lt("ke a leboga kudu mogwera", LanguageCode::Nso),
        lt("ke a leboha haholo motswalle", LanguageCode::Sot),
        lt("the cat sat on the mat", LanguageCode::Eng),
        lt("die kat sit op die mat", LanguageCode::Afr),
        lt("ndza khensa swinene", LanguageCode::Tso),
        lt("ndo livhuwa nga maanda", LanguageCode::Ven),
    ];
    let vocab = build_vocabulary(&train_set, 3).unwrap();
    let nb = train(&train_set, &vocab, 1.0, &LanguageCode::ALL).unwrap();
    let lexicon = Lexicon::from_records(&train_set).unwrap();
    StackedModel::new(nb, lexicon, margin)
}

fn word_soup() -> impl Strategy<Value = String> {
    let words = [
        "ngiyabonga", "kakhulu", "umngane", "wami", "enkosi", "mhlobo", "wam", "ke", "a", "leboga", "thata",
        "tsala", "kudu", "mogwera", "leboha", "haholo", "the", "cat", "mat", "die", "kat", "ndza", "khensa",
        "ndo", "livhuwa", "maanda", "xyz", "Qwerty!!",
    ];
    proptest::collection::vec(proptest::sample::select(words.to_vec()), 0..8).prop_map(|w| w.join(" "))
}

proptest! {
    #[test]
    fn stacked_preserves_family(text in word_soup(), margin in 1u32..4) {
        let m = toy_stacked(margin);
        let p = m.classify(&text);
        prop_assert_eq!(family_of(p.final_label), family_of(p.nb_label));
        prop_assert_eq!(p.family, family_of(p.nb_label));
        prop_assert_eq!(p.lexicon_used, p.final_label != p.nb_label || dominant_language(&p.hit_counts, margin).is_some());
        if matches!(p.family, LanguageFamily::TswaRonga | LanguageFamily::Venda) {
            prop_assert_eq!(p.final_label, p.nb_label);
        }
        prop_assert_eq!(m.classify(&text), p);
    }

    #[test]
    fn raising_margin_only_abstains_more(texts in proptest::collection::vec(word_soup(), 1..20)) {
        let used = |margin| toy_stacked(margin).classify_batch(&texts).iter().filter(|p| p.lexicon_used).count();
        prop_assert!(used(1) >= used(2));
        prop_assert!(used(2) >= used(3));
    }

    #[test]
    fn split_is_deterministic_and_disjoint(
        sentences in proptest::collection::vec((small_text(6), 0usize..3), 10..60),
        seed in any::<u64>(),
    ) {
        let langs = [LanguageCode::Afr, LanguageCode::Eng, LanguageCode::Zul];
        let corpus: Vec<LabeledText> = sentences.iter().map(|(t, c)| lt(t, langs[*c])).collect();
        let cfg = SplitConfig { n_train: 2, n_test: 1, length_min: 0, length_max: 1000, seed };
        match split_train_test(&corpus, &cfg) {
            Ok(a) => {
                let b = split_train_test(&corpus, &cfg).unwrap();
                prop_assert_eq!(&a, &b);
                let train: HashSet<&str> = a.train.iter().map(LabeledText::text).collect();
                prop_assert!(a.test.iter().all(|r| !train.contains(r.text())));
            }
            Err(zalid_core::Error::InsufficientData(_)) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}
