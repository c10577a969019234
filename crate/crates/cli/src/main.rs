mod config;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use zalid_core::corpus::{group_by_language, to_tsv, truncate_all};
use zalid_core::eval::{compare_external, DEFAULT_SWEEP_LENGTHS};
use zalid_core::{
    build_vocabulary, emit_report, evaluate, length_sweep, load_corpus, load_corpus_dir, sha256_hex,
    split_train_test, train, write_atomic, CleanOptions, CorpusFormat, EvalConfig, LabeledText, LanguageCode,
    Lexicon, LexiconOnly, NBModel, ReportFormat, SplitConfig, StackedModel,
};

/// Language identification for the eleven official South African languages.
#[derive(Debug, Parser)]
#[command(name = "zalid", version, args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean a corpus and write it as TSV.
    Clean(CleanArgs),
    /// Sample per-language train/test sets of in-range sentences.
    Split(SplitArgs),
    /// Train the naive Bayes model.
    Train(TrainArgs),
    /// Build per-language word lists.
    BuildLexicon(LexiconArgs),
    /// Package a model, lexicon and margin into one bundle directory.
    Bundle(BundleArgs),
    /// Label text given as arguments, or one label per stdin line.
    Predict(PredictArgs),
    /// Evaluate on a labeled test set, or score an external prediction file.
    Evaluate(EvaluateArgs),
    /// Evaluate over word-boundary truncations of a test set.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum InputFormat {
    Auto,
    Tsv,
    Lines,
}

#[derive(Debug, Args, Serialize)]
struct CorpusInput {
    /// Corpus files (TSV or `<code>.txt`) or directories of `<code>.txt` files.
    #[arg(long = "input", short, required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "auto")]
    format: InputFormat,
    /// Keep letter case when cleaning.
    #[arg(long)]
    no_lowercase: bool,
}

impl CorpusInput {
    fn load(&self) -> Result<Vec<LabeledText>> {
        let options = CleanOptions { lowercase: !self.no_lowercase };
        let mut out = Vec::new();
        for path in &self.inputs {
            let records = if path.is_dir() {
                load_corpus_dir(path, options)?
            } else {
                let format = match self.format {
                    InputFormat::Auto => CorpusFormat::detect(path),
                    InputFormat::Tsv => CorpusFormat::Tsv,
                    InputFormat::Lines => CorpusFormat::PerLanguageLines,
                };
                load_corpus(path, format, options)?
            };
            out.extend(records);
        }
        Ok(out)
    }
}

#[derive(Debug, Args, Serialize)]
struct CleanArgs {
    #[command(flatten)]
    input: CorpusInput,
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SplitArgs {
    #[command(flatten)]
    input: CorpusInput,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 3000)]
    n_train: usize,
    #[arg(long, default_value_t = 1000)]
    n_test: usize,
    #[arg(long, default_value_t = 200)]
    len_min: usize,
    #[arg(long, default_value_t = 300)]
    len_max: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn parse_code(s: &str) -> Result<LanguageCode, String> {
    s.trim().parse::<LanguageCode>().map_err(|e| e.to_string())
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    /// Training TSV (or any corpus input).
    #[arg(long = "train", required = true, num_args = 1..)]
    train: Vec<PathBuf>,
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, default_value_t = zalid_core::DEFAULT_NGRAM)]
    ngram: usize,
    #[arg(long, default_value_t = zalid_core::DEFAULT_ALPHA)]
    alpha: f64,
    /// Comma-separated label set; defaults to all eleven languages.
    #[arg(long, value_delimiter = ',', value_parser = parse_code)]
    classes: Option<Vec<LanguageCode>>,
}

#[derive(Debug, Args, Serialize)]
struct LexiconArgs {
    #[command(flatten)]
    input: CorpusInput,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct BundleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long, default_value_t = zalid_core::stacked::DEFAULT_MARGIN)]
    margin: u32,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ModelArgs {
    /// Bundle directory (model.nb + lexicon/ + manifest.json).
    #[arg(long, env = "ZALID_MODEL_DIR")]
    bundle: Option<PathBuf>,
    /// Stand-alone model file; overrides the bundle's model.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Lexicon directory; overrides the bundle's lexicon.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Dominance margin; overrides the bundle's margin.
    #[arg(long)]
    margin: Option<u32>,
}

struct Loaded {
    nb: NBModel,
    lexicon: Option<Lexicon>,
    margin: u32,
    id: String,
}

impl ModelArgs {
    fn load(&self, need_lexicon: bool) -> Result<Loaded> {
        let bundle = match (&self.bundle, &self.model) {
            (Some(dir), None) => Some(
                StackedModel::load_bundle(dir).with_context(|| format!("loading bundle {}", dir.display()))?,
            ),
            _ => None,
        };
        let (nb, id) = match (&self.model, &bundle) {
            (Some(path), _) => {
                let bytes = fs::read(path).with_context(|| format!("reading model {}", path.display()))?;
                (NBModel::from_bytes(&bytes).with_context(|| format!("loading model {}", path.display()))?, sha256_hex(&bytes))
            }
            (None, Some(b)) => (b.nb.clone(), sha256_hex(&b.nb.to_bytes())),
            (None, None) => bail!("no model: pass --model, --bundle or set ZALID_MODEL_DIR"),
        };
        let lexicon = match (&self.lexicon, bundle.as_ref()) {
            (Some(dir), _) => Some(Lexicon::load(dir).with_context(|| format!("loading lexicon {}", dir.display()))?),
            (None, Some(b)) => Some(b.lexicon.clone()),
            (None, None) => None,
        };
        if need_lexicon && lexicon.is_none() {
            bail!("this mode needs a lexicon: pass --lexicon or --bundle");
        }
        let margin = self
            .margin
            .or(bundle.as_ref().map(|b| b.margin))
            .unwrap_or(zalid_core::stacked::DEFAULT_MARGIN);
        Ok(Loaded { nb, lexicon, margin, id: id[..16].to_string() })
    }
}

#[derive(Debug, Args, Serialize)]
struct PredictArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Naive Bayes label only.
    #[arg(long, conflicts_with = "stacked")]
    nb_only: bool,
    /// Two-stage label (default).
    #[arg(long)]
    stacked: bool,
    /// One JSON object per line with the full prediction.
    #[arg(long)]
    json: bool,
    /// Texts to label; stdin is read when none are given.
    texts: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Nb,
    Stacked,
    Lexicon,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Nb => "nb",
            Mode::Stacked => "stacked",
            Mode::Lexicon => "lexicon",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum OutFormat {
    Json,
    Csv,
    Heatmap,
}

impl From<OutFormat> for ReportFormat {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Json => ReportFormat::Json,
            OutFormat::Csv => ReportFormat::Csv,
            OutFormat::Heatmap => ReportFormat::Heatmap,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct EvaluateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Labeled test set.
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_enum, default_value = "stacked")]
    mode: Mode,
    /// Truncate test sentences to this many characters at word boundaries.
    #[arg(long)]
    length: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutFormat,
    /// Report file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// External prediction file (one code per line) scored instead of a model.
    #[arg(long)]
    external: Option<PathBuf>,
    /// Languages the external system supports; others are left out.
    #[arg(long, value_delimiter = ',', value_parser = parse_code)]
    supported: Option<Vec<LanguageCode>>,
    /// Seed recorded in the report.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_enum, default_value = "nb")]
    mode: Mode,
    #[arg(long, value_delimiter = ',', default_value = "15,30,50,100,200,300")]
    lengths: Vec<usize>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: OutFormat,
    #[arg(long)]
    seed: Option<u64>,
}

fn emit_run_config<T: Serialize>(command: &str, args: &T) -> Result<String> {
    let json = serde_json::to_string(&serde_json::json!({ "command": command, "args": args }))?;
    eprintln!("run config: {json}");
    Ok(json)
}

fn write_with_config(path: &Path, bytes: &[u8], run_config: &str) -> Result<()> {
    write_atomic(path, bytes)?;
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".run.json");
    write_atomic(Path::new(&sidecar), run_config.as_bytes())?;
    Ok(())
}

fn language_counts(records: &[LabeledText]) -> BTreeMap<String, usize> {
    group_by_language(records)
        .into_iter()
        .map(|(l, v)| (l.code().to_string(), v.len()))
        .collect()
}

fn cmd_clean(args: &CleanArgs) -> Result<()> {
    let rc = emit_run_config("clean", args)?;
    let records = args.input.load()?;
    write_with_config(&args.output, to_tsv(&records).as_bytes(), &rc)?;
    for (code, n) in language_counts(&records) {
        println!("{code}\t{n}");
    }
    Ok(())
}

fn cmd_split(args: &SplitArgs) -> Result<()> {
    let rc = emit_run_config("split", args)?;
    let corpus = args.input.load()?;
    let config = SplitConfig {
        n_train: args.n_train,
        n_test: args.n_test,
        length_min: args.len_min,
        length_max: args.len_max,
        seed: args.seed,
    };
    let split = split_train_test(&corpus, &config)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let train_tsv = to_tsv(&split.train);
    let test_tsv = to_tsv(&split.test);
    let manifest = serde_json::json!({
        "run_config": serde_json::from_str::<serde_json::Value>(&rc)?,
        "seed": split.seed,
        "sampler": split.sampler,
        "length_min": split.length_min,
        "length_max": split.length_max,
        "train": { "count": split.train.len(), "per_language": language_counts(&split.train), "sha256": sha256_hex(train_tsv.as_bytes()) },
        "test": { "count": split.test.len(), "per_language": language_counts(&split.test), "sha256": sha256_hex(test_tsv.as_bytes()) },
    });
    write_atomic(&args.out_dir.join("train.tsv"), train_tsv.as_bytes())?;
    write_atomic(&args.out_dir.join("test.tsv"), test_tsv.as_bytes())?;
    write_atomic(&args.out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    println!("train\t{}\ntest\t{}", split.train.len(), split.test.len());
    Ok(())
}

fn load_records(paths: &[PathBuf]) -> Result<Vec<LabeledText>> {
    CorpusInput { inputs: paths.to_vec(), format: InputFormat::Auto, no_lowercase: false }.load()
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let rc = emit_run_config("train", args)?;
    let started = Instant::now();
    let records = load_records(&args.train)?;
    let vocab = build_vocabulary(&records, args.ngram)?;
    let classes = args.classes.clone().unwrap_or_else(|| LanguageCode::ALL.to_vec());
    let model = train(&records, &vocab, args.alpha, &classes)?;
    let bytes = model.to_bytes();
    write_with_config(&args.output, &bytes, &rc)?;
    println!("samples\t{}", records.len());
    println!("vocabulary\t{}", vocab.len());
    println!("model_bytes\t{}", bytes.len());
    println!("wall_seconds\t{:.3}", started.elapsed().as_secs_f64());
    Ok(())
}

fn cmd_build_lexicon(args: &LexiconArgs) -> Result<()> {
    let rc = emit_run_config("build-lexicon", args)?;
    let records = args.input.load()?;
    let lexicon = Lexicon::from_records(&records)?;
    lexicon.save(&args.out_dir)?;
    write_atomic(&args.out_dir.join("run.json"), rc.as_bytes())?;
    for lang in lexicon.languages() {
        println!("{}\t{}", lang.code(), lexicon.word_count(lang));
    }
    Ok(())
}

fn cmd_bundle(args: &BundleArgs) -> Result<()> {
    emit_run_config("bundle", args)?;
    let nb = NBModel::load(&args.model)?;
    let lexicon = Lexicon::load(&args.lexicon)?;
    StackedModel::new(nb, lexicon, args.margin).save_bundle(&args.out_dir)?;
    Ok(())
}

#[derive(Serialize)]
struct NbLine<'a> {
    label: LanguageCode,
    log_scores: &'a BTreeMap<LanguageCode, f64>,
}

fn cmd_predict(args: &PredictArgs) -> Result<bool> {
    emit_run_config("predict", args)?;
    let (nb, lexicon, margin, _) = args.model.load(!args.nb_only)?.into_classifier_parts();
    let model = StackedModel::new(nb, lexicon, margin);
    let nb_only = args.nb_only;

    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let mut all_ok = true;
    let label_line = |text: &str, out: &mut dyn Write| -> Result<()> {
        if nb_only {
            let p = model.nb.predict(text);
            if args.json {
                let scores: BTreeMap<_, _> = p.log_scores.iter().copied().collect();
                writeln!(out, "{}", serde_json::to_string(&NbLine { label: p.label, log_scores: &scores })?)?;
            } else {
                writeln!(out, "{}", p.label)?;
            }
        } else {
            let p = model.classify(text);
            if args.json {
                writeln!(out, "{}", serde_json::to_string(&p)?)?;
            } else {
                writeln!(out, "{}", p.final_label)?;
            }
        }
        Ok(())
    };

    if !args.texts.is_empty() {
        for t in &args.texts {
            label_line(t, &mut out)?;
        }
    } else {
        let stdin = io::stdin();
        for (i, line) in stdin.lock().split(b'\n').enumerate() {
            let mut line = line.context("reading stdin")?;
            if line.last() == Some(&b'\r') {
                line.pop();
            }
            match std::str::from_utf8(&line) {
                Ok(text) => label_line(text, &mut out)?,
                Err(_) => {
                    eprintln!("line {}: not valid UTF-8", i + 1);
                    writeln!(out, "-")?;
                    all_ok = false;
                }
            }
        }
    }
    out.flush()?;
    Ok(all_ok)
}

impl Loaded {
    /// An absent lexicon becomes an empty one, which never overrides NB.
    fn into_classifier_parts(self) -> (NBModel, Lexicon, u32, String) {
        let lexicon = self.lexicon.unwrap_or_default();
        (self.nb, lexicon, self.margin, self.id)
    }
}

fn make_report(
    mode: Mode,
    model: &StackedModel,
    test: &[LabeledText],
    config: EvalConfig,
) -> zalid_core::Result<zalid_core::EvalReport> {
    match mode {
        Mode::Nb => evaluate(&model.nb, test, config),
        Mode::Stacked => evaluate(model, test, config),
        Mode::Lexicon => evaluate(&LexiconOnly { lexicon: &model.lexicon, margin: model.margin }, test, config),
    }
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<()> {
    let rc = emit_run_config("evaluate", args)?;
    let mut test = load_records(std::slice::from_ref(&args.test))?;
    if let Some(k) = args.length {
        if k == 0 {
            bail!("--length must be at least 1");
        }
        test = truncate_all(&test, k);
    }
    let report = if let Some(pred_path) = &args.external {
        let preds = fs::read_to_string(pred_path).with_context(|| format!("reading {}", pred_path.display()))?;
        let supported = args.supported.clone().unwrap_or_else(|| LanguageCode::ALL.to_vec());
        let config = EvalConfig {
            classifier: "external".into(),
            model_id: pred_path.display().to_string(),
            length: args.length,
            seed: args.seed,
        };
        compare_external(&preds, &test, &supported, config)?
    } else {
        let loaded = args.model.load(args.mode != Mode::Nb)?;
        let (nb, lexicon, margin, id) = loaded.into_classifier_parts();
        let model = StackedModel::new(nb, lexicon, margin);
        let config = EvalConfig { classifier: args.mode.name().into(), model_id: id, length: args.length, seed: args.seed };
        make_report(args.mode, &model, &test, config)?
    };
    let bytes = emit_report(&report, args.format.into());
    match &args.output {
        Some(path) => {
            write_with_config(path, &bytes, &rc)?;
            eprintln!("accuracy {:.4} macro_f1 {:.4} family_accuracy {:.4}", report.accuracy, report.macro_f1, report.family_accuracy);
        }
        None => io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let rc = emit_run_config("sweep", args)?;
    let lengths: Vec<usize> = if args.lengths.is_empty() { DEFAULT_SWEEP_LENGTHS.to_vec() } else { args.lengths.clone() };
    let test = load_records(std::slice::from_ref(&args.test))?;
    let loaded = args.model.load(args.mode != Mode::Nb)?;
    let (nb, lexicon, margin, id) = loaded.into_classifier_parts();
    let model = StackedModel::new(nb, lexicon, margin);
    let config = EvalConfig { classifier: args.mode.name().into(), model_id: id, length: None, seed: args.seed };
    let reports = match args.mode {
        Mode::Nb => length_sweep(&model.nb, &test, &lengths, &config)?,
        Mode::Stacked => length_sweep(&model, &test, &lengths, &config)?,
        Mode::Lexicon => length_sweep(&LexiconOnly { lexicon: &model.lexicon, margin: model.margin }, &test, &lengths, &config)?,
    };
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let format: ReportFormat = args.format.into();
    for (k, report) in &reports {
        let path = args.out_dir.join(format!("report_{k}.{}", format.extension()));
        write_atomic(&path, &emit_report(report, format))?;
        println!("{k}\taccuracy={:.4}\tmacro_f1={:.4}\tfamily_accuracy={:.4}", report.accuracy, report.macro_f1, report.family_accuracy);
    }
    write_atomic(&args.out_dir.join("run.json"), rc.as_bytes())?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Clean(a) => cmd_clean(a)?,
        Command::Split(a) => cmd_split(a)?,
        Command::Train(a) => cmd_train(a)?,
        Command::BuildLexicon(a) => cmd_build_lexicon(a)?,
        Command::Bundle(a) => cmd_bundle(a)?,
        Command::Predict(a) => return cmd_predict(a),
        Command::Evaluate(a) => cmd_evaluate(a)?,
        Command::Sweep(a) => cmd_sweep(a)?,
    }
    Ok(true)
}

fn args_with_config() -> Result<Vec<OsString>> {
    let mut args: Vec<OsString> = std::env::args_os().collect();
    if let Some(path) = config::take_config_path(&mut args)? {
        if let Some(idx) = config::subcommand_index(&args) {
            let sub = args[idx].to_string_lossy().into_owned();
            let extra = config::config_args(Path::new(&path), &sub)?;
            args.splice(idx + 1..idx + 1, extra);
        }
    }
    Ok(args)
}

fn main() -> ExitCode {
    let args = match args_with_config() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = Cli::parse_from(args);
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
