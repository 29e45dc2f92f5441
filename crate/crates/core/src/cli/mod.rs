//! Command-line frontend. Each subcommand is one pipeline stage that reads
//! the previous stage's milestone files and writes its own, together with a
//! `<stage>.manifest.json` recording input and output digests.

use std::collections::{BTreeSet, HashSet};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::cf::{
    build_matrix, precompute_weights, ItemWeight, MeanMode, NeighborStrategy, WeightLookup,
    WeightTable,
};
use crate::corpus::{
    filter_sample, load_records, split_train_test, BusinessIndex, BusinessRecord, RawReview,
    SampleThresholds,
};
use crate::embedding::{
    compose_store, load_sentence_vectors, load_word_vectors, PoolingMode, SentenceVectorStore,
};
use crate::eval::{
    render_report, report_from_records, run_baseline, run_review_cf, NeighborMode,
    PredictionRecord, Report, ReportFormat,
};
use crate::milestone::{
    config_digest, input_digest, output_digest, read_jsonl, to_jsonl, to_pretty_json, verify_input,
    FileDigest, Stage, StageManifest, StagedWrite,
};
use crate::textprep::{
    english_abbreviations, english_lemmas, english_stop_list, load_abbreviations, load_stop_list,
    normalize, FrequencyDictionary, LemmaMap, PrepOptions, Preprocessor, TokenList,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "reviewcf",
    version,
    about = "Review-aware item-based collaborative filtering"
)]
pub struct Cli {
    /// Directory that relative paths are resolved against.
    #[arg(long, global = true, env = "REVIEWCF_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Run even if an input no longer matches the manifest that produced it.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter a review dump and split it into train and test sets.
    Sample(SampleArgs),
    /// Clean review texts into token lists.
    Preprocess(PreprocessArgs),
    /// Build a review-vector file by pooling word vectors.
    Compose(ComposeArgs),
    /// Precompute item-item weights over the training set.
    Weights(WeightsArgs),
    /// Predict the test set and report RMSE per configuration.
    Evaluate(EvaluateArgs),
    /// Re-render a report from prediction dumps.
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct TextOptions {
    /// Stop-word list, one word per line (default: bundled English list).
    #[arg(long)]
    pub stop_list: Option<PathBuf>,
    /// Contraction map, `form<TAB>expansion` per line (default: bundled).
    #[arg(long)]
    pub abbreviations: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    /// Review dump, one JSON object per line.
    #[arg(long)]
    pub reviews: PathBuf,
    /// Business dump; required for --state and --restaurants-only.
    #[arg(long)]
    pub businesses: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub state: Option<String>,
    #[arg(long)]
    pub restaurants_only: bool,
    #[arg(long, default_value_t = 35)]
    pub min_user_reviews: usize,
    #[arg(long, default_value_t = 150)]
    pub min_business_reviews: usize,
    /// Minimum words per review after cleaning.
    #[arg(long, default_value_t = 20)]
    pub min_words: usize,
    #[arg(long, default_value_t = 125_000)]
    pub sample_size: usize,
    /// train:test proportion.
    #[arg(long, default_value = "4:1", value_parser = parse_ratio)]
    pub ratio: (u32, u32),
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[command(flatten)]
    pub text: TextOptions,
}

#[derive(Debug, Args, Serialize)]
pub struct PreprocessArgs {
    /// Review files (sample, train or test).
    #[arg(long, required = true)]
    pub reviews: Vec<PathBuf>,
    /// Frequency dictionary, `word<TAB>count` per line.
    #[arg(long)]
    pub dict: PathBuf,
    /// Lemma table, `form<TAB>lemma` per line (default: bundled).
    #[arg(long)]
    pub lemma: Option<PathBuf>,
    /// Write only the lemmatized variant.
    #[arg(long, conflicts_with = "both_lemma")]
    pub lemmatize: bool,
    /// Write both the plain and the lemmatized variant.
    #[arg(long)]
    pub both_lemma: bool,
    #[arg(long)]
    pub no_spell_correct: bool,
    #[arg(long, default_value_t = 2)]
    pub max_edit_distance: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub text: TextOptions,
}

#[derive(Debug, Args, Serialize)]
pub struct ComposeArgs {
    /// Token lists from the preprocess stage.
    #[arg(long, required_unless_present = "sentence_vectors")]
    pub tokens: Option<PathBuf>,
    #[arg(long, requires = "tokens")]
    pub word_vectors: Option<PathBuf>,
    #[arg(long, default_value = "mean")]
    pub pooling: PoolingMode,
    /// Validate and pass through a precomputed review-vector file instead.
    #[arg(long, conflicts_with_all = ["tokens", "word_vectors"])]
    pub sentence_vectors: Option<PathBuf>,
    /// Output vector file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct WeightsArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub min_support: usize,
    #[arg(long, default_value = "co-raters")]
    pub mean_mode: MeanMode,
    /// Output weight records.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// topk:K, all, nonneg, review:K or sweep (every baseline strategy).
    /// Defaults to sweep, plus review:10 when review vectors are given.
    #[arg(long = "neighbor-mode")]
    pub neighbor_modes: Vec<String>,
    /// Review vectors as `[LABEL=]PATH`; repeat for several embeddings.
    #[arg(long = "sentence-vectors")]
    pub sentence_vectors: Vec<String>,
    /// Precomputed weights from the weights stage.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub min_support: usize,
    #[arg(long, default_value = "co-raters")]
    pub mean_mode: MeanMode,
    /// Output directory for predictions and reports.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    #[arg(long, required = true)]
    pub predictions: Vec<PathBuf>,
    #[arg(long, default_value = "markdown")]
    pub format: ReportFormat,
    /// Leave out test cases whose true rating is N.
    #[arg(long, value_name = "N")]
    pub exclude_truth: Option<u8>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_ratio(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected TRAIN:TEST, got {s:?}"))?;
    let part = |x: &str| {
        x.trim()
            .parse::<u32>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| format!("ratio parts must be positive integers, got {s:?}"))
    };
    Ok((part(a)?, part(b)?))
}

/// A failure with its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Diagnostics go to stderr, reports to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            EXIT_DATA
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os(), &mut std::io::stdout().lock())
}

struct Ctx<'a> {
    data_dir: Option<&'a Path>,
    force: bool,
}

impl Ctx<'_> {
    fn path(&self, p: &Path) -> PathBuf {
        match self.data_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_owned(),
        }
    }

    /// Resolves an input path and checks it against its producing manifest.
    fn input(&self, p: &Path) -> CliResult<PathBuf> {
        let path = self.path(p);
        if !path.exists() {
            return Err(anyhow!("input {} does not exist", path.display()).into());
        }
        verify_input(&path, self.force).map_err(|e| anyhow!(e))?;
        Ok(path)
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        // Fails only if the pool was already built, e.g. by an earlier call
        // in the same process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let ctx = Ctx {
        data_dir: cli.data_dir.as_deref(),
        force: cli.force,
    };
    match &cli.command {
        Command::Sample(a) => cmd_sample(&ctx, a, stdout),
        Command::Preprocess(a) => cmd_preprocess(&ctx, a, stdout),
        Command::Compose(a) => cmd_compose(&ctx, a, stdout),
        Command::Weights(a) => cmd_weights(&ctx, a, stdout),
        Command::Evaluate(a) => cmd_evaluate(&ctx, a, stdout),
        Command::Report(a) => cmd_report(&ctx, a, stdout),
    }
}

fn text_options(ctx: &Ctx, t: &TextOptions) -> CliResult<PrepOptions> {
    let mut options = PrepOptions::default();
    if let Some(p) = &t.stop_list {
        let p = ctx.input(p)?;
        options.stop_list = load_stop_list(&p).with_context(|| p.display().to_string())?;
    } else {
        options.stop_list = english_stop_list();
    }
    if let Some(p) = &t.abbreviations {
        let p = ctx.input(p)?;
        options.abbreviation_map =
            load_abbreviations(&p).with_context(|| p.display().to_string())?;
    } else {
        options.abbreviation_map = english_abbreviations();
    }
    Ok(options)
}

/// Collects outputs and writes them, plus the manifest, atomically.
struct StageOutput {
    stage: Stage,
    manifest_dir: PathBuf,
    staged: StagedWrite,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

impl StageOutput {
    fn new(stage: Stage, manifest_dir: PathBuf, inputs: &[&Path]) -> CliResult<Self> {
        let inputs = inputs
            .iter()
            .map(|p| input_digest(p))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| anyhow!(e))?;
        Ok(Self {
            stage,
            manifest_dir,
            staged: StagedWrite::new(),
            inputs,
            outputs: Vec::new(),
        })
    }

    fn add(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        self.staged.add(path, bytes).map_err(|e| anyhow!(e))?;
        self.outputs.push(output_digest(path, bytes));
        Ok(())
    }

    fn commit<C: Serialize>(mut self, config: &C) -> CliResult<()> {
        let manifest = StageManifest {
            stage: self.stage,
            inputs: self.inputs,
            outputs: self.outputs,
            config_digest: config_digest(config),
        };
        let path = self.manifest_dir.join(StageManifest::file_name(self.stage));
        self.staged
            .add(&path, &to_pretty_json(&manifest))
            .map_err(|e| anyhow!(e))?;
        self.staged.commit().map_err(|e| anyhow!(e))?;
        Ok(())
    }
}

fn parent_dir(p: &Path) -> PathBuf {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_owned(),
        _ => PathBuf::from("."),
    }
}

fn read_reviews(path: &Path) -> CliResult<Vec<RawReview>> {
    Ok(read_jsonl(path).map_err(|e| anyhow!(e))?)
}

#[derive(Serialize)]
struct SampleMeta<'a> {
    thresholds: &'a SampleThresholds,
    seed: u64,
    ratio: (u32, u32),
    input_reviews: usize,
    skipped_lines: usize,
    reviews: usize,
    users: usize,
    businesses: usize,
}

fn cmd_sample(ctx: &Ctx, a: &SampleArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if (a.state.is_some() || a.restaurants_only) && a.businesses.is_none() {
        return Err(usage("--state and --restaurants-only need --businesses"));
    }
    let reviews_path = ctx.input(&a.reviews)?;
    let business_path = a.businesses.as_deref().map(|p| ctx.input(p)).transpose()?;
    let options = text_options(ctx, &a.text)?;

    let loaded = load_records::<RawReview>(&reviews_path)
        .with_context(|| reviews_path.display().to_string())?;
    if loaded.skipped > 0 {
        eprintln!(
            "{}: skipped {} malformed lines",
            reviews_path.display(),
            loaded.skipped
        );
    }
    let mut index = BusinessIndex::new();
    if let Some(p) = &business_path {
        let b = load_records::<BusinessRecord>(p).with_context(|| p.display().to_string())?;
        if b.skipped > 0 {
            eprintln!("{}: skipped {} malformed lines", p.display(), b.skipped);
        }
        index = b.records.iter().collect();
    }
    let thresholds = SampleThresholds {
        min_user_reviews: a.min_user_reviews,
        min_business_reviews: a.min_business_reviews,
        min_review_words: a.min_words,
        sample_size: a.sample_size,
        region_filter: a.state.clone(),
        restaurants_only: a.restaurants_only,
    };
    let input_reviews = loaded.records.len();
    let sample = filter_sample(loaded.records, &index, &thresholds, a.seed, |r| {
        normalize(&r.text, &options).len()
    })
    .context("sampling")?;
    let split = split_train_test(&sample, a.ratio, a.seed).context("splitting")?;

    let out = ctx.path(&a.out);
    let meta = |reviews: &[RawReview]| SampleMeta {
        thresholds: &thresholds,
        seed: a.seed,
        ratio: a.ratio,
        input_reviews,
        skipped_lines: loaded.skipped,
        reviews: reviews.len(),
        users: reviews
            .iter()
            .map(|r| &r.user_id)
            .collect::<HashSet<_>>()
            .len(),
        businesses: reviews
            .iter()
            .map(|r| &r.business_id)
            .collect::<HashSet<_>>()
            .len(),
    };
    let mut inputs = vec![reviews_path.as_path()];
    inputs.extend(business_path.as_deref());
    let mut stage = StageOutput::new(Stage::Sample, out.clone(), &inputs)?;
    for (name, set) in [
        ("sample", &sample),
        ("train", &split.train),
        ("test", &split.test),
    ] {
        stage.add(&out.join(format!("{name}.jsonl")), &to_jsonl(&set.reviews))?;
        stage.add(
            &out.join(format!("{name}.meta.json")),
            &to_pretty_json(&meta(&set.reviews)),
        )?;
    }
    stage.commit(a)?;
    let _ = writeln!(
        stdout,
        "sample {} reviews: train {}, test {}",
        sample.len(),
        split.train.len(),
        split.test.len()
    );
    Ok(())
}

fn distinct<'a, I: IntoIterator<Item = &'a TokenList>>(lists: I) -> usize {
    lists
        .into_iter()
        .flat_map(|l| l.tokens.iter())
        .collect::<BTreeSet<_>>()
        .len()
}

fn cmd_preprocess(ctx: &Ctx, a: &PreprocessArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let review_paths = a
        .reviews
        .iter()
        .map(|p| ctx.input(p))
        .collect::<CliResult<Vec<_>>>()?;
    let dict_path = ctx.input(&a.dict)?;
    let lemma_path = a.lemma.as_deref().map(|p| ctx.input(p)).transpose()?;
    let mut options = text_options(ctx, &a.text)?;
    options.spell_correct = !a.no_spell_correct;
    options.max_edit_distance = a.max_edit_distance;

    let dict =
        FrequencyDictionary::load(&dict_path).with_context(|| dict_path.display().to_string())?;
    let lemmas = match &lemma_path {
        Some(p) => LemmaMap::load(p).with_context(|| p.display().to_string())?,
        None => english_lemmas(),
    };
    let mut reviews = Vec::new();
    let mut seen = HashSet::new();
    for p in &review_paths {
        for r in read_reviews(p)? {
            if seen.insert(r.review_id.clone()) {
                reviews.push(r);
            }
        }
    }

    let normalized = crate::par::map(&reviews, |r| normalize(&r.text, &options));
    let raw_vocab = normalized.iter().flatten().collect::<BTreeSet<_>>().len();

    let mut pre = Preprocessor::new(&dict, lemmas, options);
    let want_plain = !a.lemmatize;
    let want_lemma = a.lemmatize || a.both_lemma;
    let out = ctx.path(&a.out);
    let mut inputs: Vec<&Path> = review_paths.iter().map(PathBuf::as_path).collect();
    inputs.push(&dict_path);
    inputs.extend(lemma_path.as_deref());
    let mut stage = StageOutput::new(Stage::Preprocess, out.clone(), &inputs)?;

    let _ = writeln!(stdout, "reviews\t{}", reviews.len());
    let _ = writeln!(stdout, "vocabulary after cleaning\t{raw_vocab}");
    if want_plain || want_lemma {
        pre.set_lemmatize(false);
        let plain = crate::par::map(&reviews, |r| pre.process(r));
        let _ = writeln!(stdout, "vocabulary after correction\t{}", distinct(&plain));
        let dropped: usize = plain.iter().map(|l| l.dropped).sum();
        let corrected: usize = plain.iter().map(|l| l.corrected).sum();
        let _ = writeln!(stdout, "tokens corrected\t{corrected}");
        let _ = writeln!(stdout, "tokens removed\t{dropped}");
        if want_plain {
            stage.add(&out.join("tokens.plain.jsonl"), &to_jsonl(&plain))?;
        }
    }
    if want_lemma {
        pre.set_lemmatize(true);
        let lemma = crate::par::map(&reviews, |r| pre.process(r));
        let _ = writeln!(
            stdout,
            "vocabulary after lemmatization\t{}",
            distinct(&lemma)
        );
        stage.add(&out.join("tokens.lemma.jsonl"), &to_jsonl(&lemma))?;
    }
    stage.commit(a)
}

fn cmd_compose(ctx: &Ctx, a: &ComposeArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let out = ctx.path(&a.out);
    let name = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "reviews".to_owned());
    let (store, inputs) = if let Some(p) = &a.sentence_vectors {
        let p = ctx.input(p)?;
        let store = load_sentence_vectors(&p).with_context(|| p.display().to_string())?;
        (store, vec![p])
    } else {
        let (Some(tokens), Some(words)) = (&a.tokens, &a.word_vectors) else {
            return Err(usage(
                "compose needs --tokens with --word-vectors, or --sentence-vectors",
            ));
        };
        let tokens = ctx.input(tokens)?;
        let words = ctx.input(words)?;
        let lists: Vec<TokenList> = read_jsonl(&tokens).map_err(|e| anyhow!(e))?;
        let wv = load_word_vectors(&words).with_context(|| words.display().to_string())?;
        let store = compose_store(&lists, &wv, a.pooling, name.clone());
        let missing = lists.len() - store.len();
        if missing > 0 {
            eprintln!("{missing} reviews have no in-vocabulary token and get no vector");
        }
        (store, vec![tokens, words])
    };
    let mut bytes = Vec::new();
    store.write(&mut bytes).context("serializing vectors")?;
    let inputs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    let mut stage = StageOutput::new(Stage::Compose, parent_dir(&out), &inputs)?;
    stage.add(&out, &bytes)?;
    stage.commit(a)?;
    let _ = writeln!(stdout, "{} vectors, dim {}", store.len(), store.dim());
    Ok(())
}

fn cmd_weights(ctx: &Ctx, a: &WeightsArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let train_path = ctx.input(&a.train)?;
    let m = build_matrix(&read_reviews(&train_path)?);
    let table = precompute_weights(&m, a.min_support, a.mean_mode);
    let out = ctx.path(&a.out);
    let mut stage = StageOutput::new(Stage::Weights, parent_dir(&out), &[&train_path])?;
    stage.add(&out, &to_jsonl(&table.records(&m)))?;
    stage.commit(a)?;
    let _ = writeln!(
        stdout,
        "{} item pairs over {} items",
        table.len(),
        m.n_items()
    );
    Ok(())
}

/// `LABEL=PATH` or `PATH`.
fn split_label(spec: &str) -> (Option<&str>, &str) {
    match spec.split_once('=') {
        Some((label, path)) if !label.is_empty() && !label.contains(['/', '\\']) => {
            (Some(label), path)
        }
        _ => (None, spec),
    }
}

fn parse_modes(specs: &[String], have_vectors: bool) -> CliResult<Vec<NeighborMode>> {
    let mut modes = Vec::new();
    if specs.is_empty() {
        modes.extend(
            NeighborStrategy::sweep()
                .into_iter()
                .map(NeighborMode::Weight),
        );
        if have_vectors {
            modes.push(NeighborMode::Review(10));
        }
        return Ok(modes);
    }
    for s in specs {
        if s == "sweep" {
            modes.extend(
                NeighborStrategy::sweep()
                    .into_iter()
                    .map(NeighborMode::Weight),
            );
        } else {
            modes.push(s.parse().map_err(usage)?);
        }
    }
    if !have_vectors && modes.iter().any(|m| matches!(m, NeighborMode::Review(_))) {
        return Err(usage("review neighbor modes need --sentence-vectors"));
    }
    let mut seen = HashSet::new();
    modes.retain(|m| seen.insert(*m));
    Ok(modes)
}

fn cmd_evaluate(ctx: &Ctx, a: &EvaluateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let modes = parse_modes(&a.neighbor_modes, !a.sentence_vectors.is_empty())?;
    let train_path = ctx.input(&a.train)?;
    let test_path = ctx.input(&a.test)?;
    let mut inputs = vec![train_path.clone(), test_path.clone()];

    let m = build_matrix(&read_reviews(&train_path)?);
    let test = read_reviews(&test_path)?;
    if test.is_empty() {
        return Err(anyhow!("{} holds no test cases", test_path.display()).into());
    }

    let mut stores: Vec<SentenceVectorStore> = Vec::new();
    for spec in &a.sentence_vectors {
        let (label, p) = split_label(spec);
        let p = ctx.input(Path::new(p))?;
        let mut store = load_sentence_vectors(&p).with_context(|| p.display().to_string())?;
        if let Some(label) = label {
            store.0.name = label.to_owned();
        }
        if stores.iter().any(|s| s.name() == store.name()) {
            return Err(usage(format!("duplicate vector label {:?}", store.name())));
        }
        stores.push(store);
        inputs.push(p);
    }

    let table;
    let weights: &dyn WeightLookup = match &a.weights {
        Some(p) => {
            let p = ctx.input(p)?;
            let records: Vec<ItemWeight> = read_jsonl(&p).map_err(|e| anyhow!(e))?;
            table = WeightTable::from_records(&records, &m, a.min_support);
            inputs.push(p);
            &table
        }
        None => {
            table = precompute_weights(&m, a.min_support, a.mean_mode);
            &table
        }
    };

    let strategies: Vec<NeighborStrategy> = modes
        .iter()
        .filter_map(|m| match m {
            NeighborMode::Weight(s) => Some(*s),
            NeighborMode::Review(_) => None,
        })
        .collect();
    let mut rows = Vec::new();
    let mut records: Vec<PredictionRecord> = Vec::new();
    for run in run_baseline(&m, &test, &strategies, weights).context("baseline")? {
        rows.push(run.row);
        records.extend(run.records);
    }
    for store in &stores {
        for mode in &modes {
            if let NeighborMode::Review(k) = mode {
                let run = run_review_cf(&m, &test, store, *k, weights).context("review run")?;
                rows.push(run.row);
                records.extend(run.records);
            }
        }
    }
    let report = Report::from_rows(rows);

    let out = ctx.path(&a.out);
    let input_refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    let mut stage = StageOutput::new(Stage::Evaluate, out.clone(), &input_refs)?;
    let markdown = render_report(&report, ReportFormat::Markdown);
    stage.add(&out.join("predictions.jsonl"), &to_jsonl(&records))?;
    stage.add(
        &out.join("report.tsv"),
        render_report(&report, ReportFormat::Tsv).as_bytes(),
    )?;
    stage.add(&out.join("report.md"), markdown.as_bytes())?;
    stage.commit(a)?;
    let _ = stdout.write_all(markdown.as_bytes());
    if let (Some(best), Some(review)) = (
        report.best_baseline(),
        report.rows.iter().min_by(|x, y| x.rmse.total_cmp(&y.rmse)),
    ) {
        let _ = writeln!(
            stdout,
            "\nbest review run {} {:.6} vs best baseline {} {:.6}",
            review.label, review.rmse, best.label, best.rmse
        );
    }
    Ok(())
}

fn cmd_report(ctx: &Ctx, a: &ReportArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut records: Vec<PredictionRecord> = Vec::new();
    for p in &a.predictions {
        let p = ctx.input(p)?;
        records.extend(read_jsonl::<PredictionRecord>(&p).map_err(|e| anyhow!(e))?);
    }
    if let Some(n) = a.exclude_truth {
        records.retain(|r| r.truth != n);
    }
    let report = report_from_records(&records).context("no predictions left to report")?;
    let text = render_report(&report, a.format);
    match &a.out {
        Some(p) => {
            let p = ctx.path(p);
            let mut staged = StagedWrite::new();
            staged.add(&p, text.as_bytes()).map_err(|e| anyhow!(e))?;
            staged.commit().map_err(|e| anyhow!(e))?;
        }
        None => {
            let _ = stdout.write_all(text.as_bytes());
        }
    }
    Ok(())
}
