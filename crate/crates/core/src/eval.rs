//! Accuracy, F-scores, confusion matrices, length sweeps and scoring of
//! externally produced prediction files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{truncate_all, LabeledText};
use crate::error::{Error, Result};
use crate::language::{family_of, LanguageCode, LanguageFamily};
use crate::lexicon::{classify_lexicon_only, Lexicon};
use crate::nb::NBModel;
use crate::stacked::StackedModel;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Default string lengths of a sweep; 300 leaves the long sentences intact.
pub const DEFAULT_SWEEP_LENGTHS: [usize; 6] = [15, 30, 50, 100, 200, 300];

/// Anything that maps a cleaned text to one language label.
pub trait LanguageClassifier: Sync {
    fn label(&self, cleaned: &str) -> LanguageCode;
}

impl LanguageClassifier for NBModel {
    fn label(&self, cleaned: &str) -> LanguageCode {
        self.predict_cleaned(cleaned).label
    }
}

impl LanguageClassifier for StackedModel {
    fn label(&self, cleaned: &str) -> LanguageCode {
        self.classify_cleaned(cleaned).final_label
    }
}

impl<F> LanguageClassifier for F
where
    F: Fn(&str) -> LanguageCode + Sync,
{
    fn label(&self, cleaned: &str) -> LanguageCode {
        self(cleaned)
    }
}

/// The lexicon vote used on its own over all eleven languages.
#[derive(Debug, Clone, Copy)]
pub struct LexiconOnly<'a> {
    pub lexicon: &'a Lexicon,
    pub margin: u32,
}

impl LanguageClassifier for LexiconOnly<'_> {
    fn label(&self, cleaned: &str) -> LanguageCode {
        classify_lexicon_only(cleaned, self.lexicon, self.margin)
    }
}

/// Rows are gold labels, columns are predicted labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.trace(), self.total())
    }

    /// Gold/predicted cell by label name.
    pub fn get(&self, gold: &str, predicted: &str) -> Option<u64> {
        let g = self.labels.iter().position(|l| l == gold)?;
        let p = self.labels.iter().position(|l| l == predicted)?;
        Some(self.counts[g][p])
    }

    /// `gold\pred` header row followed by one row per gold label; no
    /// trailing newline.
    pub fn to_csv(&self) -> String {
        let mut lines = Vec::with_capacity(self.labels.len() + 1);
        lines.push(format!("gold\\pred,{}", self.labels.join(",")));
        for (label, row) in self.labels.iter().zip(&self.counts) {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            lines.push(format!("{label},{}", cells.join(",")));
        }
        lines.join("\n")
    }

    /// Rows normalized to proportions, shown with two decimals. Rounding uses
    /// largest remainders so each non-empty row displays a sum of exactly 1.00.
    pub fn to_heatmap(&self) -> String {
        let width = self.labels.iter().map(String::len).max().unwrap_or(0).max(4);
        let mut out = String::new();
        let _ = write!(out, "{:>width$}", "");
        for l in &self.labels {
            let _ = write!(out, " {l:>width$}");
        }
        let _ = writeln!(out, " {:>width$}", "sum");
        for (label, row) in self.labels.iter().zip(&self.counts) {
            let _ = write!(out, "{label:>width$}");
            let hundredths = round_row(row);
            match hundredths {
                Some(cells) => {
                    for c in &cells {
                        let _ = write!(out, " {:>width$}", format_hundredths(*c));
                    }
                    let sum: u64 = cells.iter().sum();
                    let _ = writeln!(out, " {:>width$}", format_hundredths(sum));
                }
                None => {
                    for _ in row {
                        let _ = write!(out, " {:>width$}", "-");
                    }
                    let _ = writeln!(out, " {:>width$}", "-");
                }
            }
        }
        out
    }
}

fn format_hundredths(h: u64) -> String {
    format!("{}.{:02}", h / 100, h % 100)
}

fn round_row(row: &[u64]) -> Option<Vec<u64>> {
    let total: u64 = row.iter().sum();
    if total == 0 {
        return None;
    }
    let mut cells: Vec<u64> = row.iter().map(|&c| c * 100 / total).collect();
    let mut remainders: Vec<(u64, usize)> = row.iter().enumerate().map(|(i, &c)| (c * 100 % total, i)).collect();
    // largest remainder first, lower index on ties
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let missing = 100 - cells.iter().sum::<u64>();
    for &(_, i) in remainders.iter().take(missing as usize) {
        cells[i] += 1;
    }
    Some(cells)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Parameters recorded with every report.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub classifier: String,
    pub model_id: String,
    /// Target string length, `None` for untruncated text.
    pub length: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub config: EvalConfig,
    pub total: u64,
    pub accuracy: f64,
    pub family_accuracy: f64,
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub per_class: BTreeMap<LanguageCode, ClassMetrics>,
    pub cm: ConfusionMatrix,
    pub family_cm: ConfusionMatrix,
}

impl EvalReport {
    pub fn error_rate(&self) -> f64 {
        1.0 - self.accuracy
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }
}

/// Scores aligned gold/predicted label lists.
///
/// The confusion matrix always spans all eleven languages; per-class
/// metrics and the F-score averages cover `classes` only.
pub fn evaluate_predictions(
    gold: &[LanguageCode],
    predicted: &[LanguageCode],
    classes: &[LanguageCode],
    config: EvalConfig,
) -> Result<EvalReport> {
    if gold.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            expected: gold.len(),
            found: predicted.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let n = LanguageCode::ALL.len();
    let mut counts = vec![vec![0u64; n]; n];
    for (g, p) in gold.iter().zip(predicted) {
        counts[g.index()][p.index()] += 1;
    }
    let cm = ConfusionMatrix {
        labels: LanguageCode::ALL.iter().map(|l| l.code().to_string()).collect(),
        counts,
    };

    let nf = LanguageFamily::ALL.len();
    let mut fam = vec![vec![0u64; nf]; nf];
    for g in LanguageCode::ALL {
        for p in LanguageCode::ALL {
            fam[family_of(g).index()][family_of(p).index()] += cm.counts[g.index()][p.index()];
        }
    }
    let family_cm = ConfusionMatrix {
        labels: LanguageFamily::ALL.iter().map(|f| f.name().to_string()).collect(),
        counts: fam,
    };

    let classes: BTreeSet<LanguageCode> = classes.iter().copied().collect();
    let mut per_class = BTreeMap::new();
    let (mut sum_tp, mut sum_fp, mut sum_fn) = (0u64, 0u64, 0u64);
    for &c in &classes {
        let i = c.index();
        let tp = cm.counts[i][i];
        let predicted_c: u64 = cm.counts.iter().map(|row| row[i]).sum();
        let support: u64 = cm.counts[i].iter().sum();
        let (fp, fnn) = (predicted_c - tp, support - tp);
        sum_tp += tp;
        sum_fp += fp;
        sum_fn += fnn;
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fnn);
        per_class.insert(
            c,
            ClassMetrics {
                precision,
                recall,
                f1: harmonic(precision, recall),
                support,
            },
        );
    }
    let macro_f1 = if per_class.is_empty() {
        0.0
    } else {
        per_class.values().map(|m| m.f1).sum::<f64>() / per_class.len() as f64
    };
    let micro_f1 = harmonic(ratio(sum_tp, sum_tp + sum_fp), ratio(sum_tp, sum_tp + sum_fn));

    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config,
        total: cm.total(),
        accuracy: cm.accuracy(),
        family_accuracy: family_cm.accuracy(),
        micro_f1,
        macro_f1,
        per_class,
        cm,
        family_cm,
    })
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Labels every text, in parallel, preserving order.
pub fn predict_all<C: LanguageClassifier + ?Sized>(classifier: &C, test_set: &[LabeledText]) -> Vec<LanguageCode> {
    test_set.par_iter().map(|r| classifier.label(r.text())).collect()
}

/// Evaluates `classifier` on `test_set` over all eleven languages.
pub fn evaluate<C: LanguageClassifier + ?Sized>(
    classifier: &C,
    test_set: &[LabeledText],
    config: EvalConfig,
) -> Result<EvalReport> {
    if test_set.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let gold: Vec<_> = test_set.iter().map(LabeledText::label).collect();
    let predicted = predict_all(classifier, test_set);
    evaluate_predictions(&gold, &predicted, &LanguageCode::ALL, config)
}

/// Evaluates on word-boundary truncations of `long_test_set`, one report per length.
pub fn length_sweep<C: LanguageClassifier + ?Sized>(
    classifier: &C,
    long_test_set: &[LabeledText],
    lengths: &[usize],
    config: &EvalConfig,
) -> Result<BTreeMap<usize, EvalReport>> {
    let mut out = BTreeMap::new();
    for &k in lengths {
        if k == 0 {
            return Err(Error::InvalidArgument("sweep length must be at least 1".into()));
        }
        let short = truncate_all(long_test_set, k);
        let cfg = EvalConfig {
            length: Some(k),
            ..config.clone()
        };
        out.insert(k, evaluate(classifier, &short, cfg)?);
    }
    Ok(out)
}

/// Parses an external prediction file: one language code per line.
pub fn parse_predictions(content: &str) -> Result<Vec<LanguageCode>> {
    content
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let code = line.trim();
            code.parse().map_err(|_| Error::UnknownLanguageAt {
                line: i + 1,
                code: code.to_string(),
            })
        })
        .collect()
}

/// Scores an external prediction file aligned line-by-line with `test_set`,
/// keeping only samples whose gold label is in `supported`.
pub fn compare_external(
    predictions: &str,
    test_set: &[LabeledText],
    supported: &[LanguageCode],
    config: EvalConfig,
) -> Result<EvalReport> {
    let predicted = parse_predictions(predictions)?;
    if predicted.len() != test_set.len() {
        return Err(Error::LengthMismatch {
            expected: test_set.len(),
            found: predicted.len(),
        });
    }
    let (gold, predicted): (Vec<_>, Vec<_>) = test_set
        .iter()
        .zip(predicted)
        .filter(|(r, _)| supported.contains(&r.label()))
        .map(|(r, p)| (r.label(), p))
        .unzip();
    evaluate_predictions(&gold, &predicted, supported, config)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Heatmap,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "heatmap" | "text-heatmap" => Ok(ReportFormat::Heatmap),
            other => Err(Error::InvalidArgument(format!("unknown report format {other:?}"))),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
            ReportFormat::Heatmap => "txt",
        }
    }
}

/// Renders a report. CSV and heatmap show the language confusion matrix,
/// the heatmap followed by the family matrix and summary figures.
pub fn emit_report(report: &EvalReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s.into_bytes()
        }
        ReportFormat::Csv => report.cm.to_csv().into_bytes(),
        ReportFormat::Heatmap => {
            let mut s = report.cm.to_heatmap();
            s.push('\n');
            s.push_str(&report.family_cm.to_heatmap());
            let _ = writeln!(
                s,
                "\nn={} accuracy={:.4} family_accuracy={:.4} macro_f1={:.4} micro_f1={:.4}",
                report.total, report.accuracy, report.family_accuracy, report.macro_f1, report.micro_f1
            );
            s.into_bytes()
        }
    }
}
