//! `semglove` command line.
//!
//! Exit status is 0 on success, 2 for usage and configuration errors and 1
//! for data errors. Failures print one line to stderr:
//! `error: <category>: <message>`.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use semglove_core::eval::{self, WordVectors};
use semglove_core::{CoocMatrix, Distance, Vocabulary};

use crate::builders;
use crate::config::{Builder, ConfigError, PipelineConfig};
use crate::corpus;
use crate::error::Error;
use crate::formats::{cooc, dataset, lexicon, sgdv, vectors, vocab};
use crate::hogwild;

fn long_version() -> &'static str {
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    let text = format!(
        "{} (semglove-core {}, {profile})",
        env!("CARGO_PKG_VERSION"),
        semglove_core::VERSION
    );
    Box::leak(text.into_boxed_str())
}

#[derive(Debug, Parser)]
#[command(
    name = "semglove",
    version,
    about = "GloVe embeddings from window, attention and MLM co-occurrence counts"
)]
struct Cli {
    /// key=value file; command-line flags take precedence over it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit
    #[arg(long, global = true)]
    dry_run: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count words and write the min-count filtered vocabulary
    Vocab(VocabArgs),
    /// Positional window co-occurrence counts
    CoocWindow(WindowArgs),
    /// Counts distilled from summed self-attention dumps
    CoocSan(SanArgs),
    /// Counts distilled from masked-LM prediction dumps
    CoocMlm(MlmArgs),
    /// Keep the pairs of one matrix with the values of another
    CoocIntersect(IntersectArgs),
    /// Seeded permutation of a co-occurrence file
    Shuffle(ShuffleArgs),
    /// Fit embeddings to a shuffled co-occurrence file
    Train(TrainArgs),
    /// Spearman correlation on word-similarity datasets
    Eval(EvalArgs),
    /// Nearest neighbours of a word by cosine similarity
    Nearest(NearestArgs),
    /// Check an SGDV dump and report invariant violations
    ValidateDump(ValidateArgs),
    /// vocab, co-occurrence, shuffle, train and eval in one run
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
struct VocabArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    min_count: Option<u64>,
    /// Vocabulary file to write
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WindowArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long)]
    window: Option<usize>,
    /// Count both sides of the target (false: left context only)
    #[arg(long)]
    symmetric: Option<bool>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SanArgs {
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Corpus the dump was extracted from; record r matches non-blank line r
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    select_top: Option<usize>,
    #[arg(long)]
    distance: Option<Distance>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MlmArgs {
    /// One or more MLM dumps
    #[arg(long, num_args = 1..)]
    dump: Vec<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Predictions used per masked position
    #[arg(long)]
    top: Option<usize>,
    #[arg(long)]
    distance: Option<Distance>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IntersectArgs {
    #[arg(long)]
    support: Option<PathBuf>,
    #[arg(long)]
    values: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ShuffleArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Shuffled co-occurrence file
    #[arg(long)]
    cooc: Option<PathBuf>,
    #[arg(long)]
    vocab: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    xmax: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-scalar gradient clamp
    #[arg(long)]
    grad_clip: Option<f64>,
    #[arg(long, conflicts_with = "grad_clip")]
    no_grad_clip: bool,
    /// Vector file to write
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    dataset: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct NearestArgs {
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[arg(long)]
    word: Option<String>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Directory for intermediate and output files
    #[arg(long)]
    work_dir: Option<PathBuf>,
    #[arg(long)]
    builder: Option<String>,
    #[arg(long, num_args = 1..)]
    dump: Vec<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    dataset: Vec<PathBuf>,
    #[arg(long)]
    min_count: Option<u64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Flag values destined for the config layer.
#[derive(Default)]
struct Overrides(Vec<(&'static str, String)>);

impl Overrides {
    fn opt<T: Display>(&mut self, key: &'static str, v: &Option<T>) -> &mut Self {
        if let Some(v) = v {
            self.0.push((key, v.to_string()));
        }
        self
    }

    fn path(&mut self, key: &'static str, v: &Option<PathBuf>) -> &mut Self {
        if let Some(v) = v {
            self.0.push((key, v.display().to_string()));
        }
        self
    }

    fn paths(&mut self, key: &'static str, v: &[PathBuf]) -> &mut Self {
        if !v.is_empty() {
            let joined = v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(",");
            self.0.push((key, joined));
        }
        self
    }
}

impl Command {
    fn overrides(&self) -> Overrides {
        let mut o = Overrides::default();
        match self {
            Command::Vocab(a) => {
                o.path("corpus", &a.corpus)
                    .opt("min_count", &a.min_count)
                    .path("vocab", &a.out);
            }
            Command::CoocWindow(a) => {
                o.path("corpus", &a.corpus)
                    .path("vocab", &a.vocab)
                    .opt("window", &a.window)
                    .opt("symmetric", &a.symmetric)
                    .opt("threads", &a.threads)
                    .path("cooc", &a.out);
            }
            Command::CoocSan(a) => {
                o.paths("dump", a.dump.as_slice())
                    .path("corpus", &a.corpus)
                    .path("vocab", &a.vocab)
                    .opt("window", &a.window)
                    .opt("select_top", &a.select_top)
                    .opt("distance", &a.distance)
                    .opt("threads", &a.threads)
                    .path("cooc", &a.out);
            }
            Command::CoocMlm(a) => {
                o.paths("dump", &a.dump)
                    .path("vocab", &a.vocab)
                    .path("lexicon", &a.lexicon)
                    .opt("top_tokens", &a.top)
                    .opt("distance", &a.distance)
                    .opt("threads", &a.threads)
                    .path("cooc", &a.out);
            }
            Command::CoocIntersect(a) => {
                o.path("support", &a.support)
                    .path("values", &a.values)
                    .path("cooc", &a.out);
            }
            Command::Shuffle(a) => {
                o.path("cooc", &a.input).path("shuffled", &a.out).opt("seed", &a.seed);
            }
            Command::Train(a) => {
                o.path("shuffled", &a.cooc)
                    .path("vocab", &a.vocab)
                    .opt("dim", &a.dim)
                    .opt("x_max", &a.xmax)
                    .opt("alpha", &a.alpha)
                    .opt("lr", &a.lr)
                    .opt("iterations", &a.iters)
                    .opt("threads", &a.threads)
                    .opt("seed", &a.seed)
                    .opt("grad_clip", &a.grad_clip)
                    .path("vectors", &a.out);
                if a.no_grad_clip {
                    o.0.push(("grad_clip", "off".into()));
                }
            }
            Command::Eval(a) => {
                o.path("vectors", &a.vectors).paths("dataset", &a.dataset);
            }
            Command::Nearest(a) => {
                o.path("vectors", &a.vectors).opt("word", &a.word).opt("k", &a.k);
            }
            Command::ValidateDump(a) => {
                o.paths("dump", a.dump.as_slice());
            }
            Command::Pipeline(a) => {
                o.path("corpus", &a.corpus)
                    .path("work_dir", &a.work_dir)
                    .opt("builder", &a.builder)
                    .paths("dump", &a.dump)
                    .path("lexicon", &a.lexicon)
                    .paths("dataset", &a.dataset)
                    .opt("min_count", &a.min_count)
                    .opt("window", &a.window)
                    .opt("dim", &a.dim)
                    .opt("iterations", &a.iters)
                    .opt("threads", &a.threads)
                    .opt("seed", &a.seed);
            }
        }
        o
    }
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Data(semglove_core::Error::Config(m)) | Error::Config(m) => Failure::Usage(m),
            other => Failure::Data(other),
        }
    }
}

impl From<semglove_core::Error> for Failure {
    fn from(e: semglove_core::Error) -> Self {
        Error::from(e).into()
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn need<'a>(v: &'a Option<PathBuf>, key: &'static str) -> Result<&'a Path, Failure> {
    v.as_deref().ok_or_else(|| ConfigError::Missing(key).into())
}

fn resolve(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    for (key, value) in cli.command.overrides().0 {
        cfg.set(key, &value)?;
    }
    Ok(cfg)
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn out_io(e: std::io::Error) -> Failure {
    Failure::Data(Error::io("<stdout>", e))
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = Cli::command()
        .long_version(long_version())
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli, &mut std::io::stdout()) {
        Ok(()) => 0,
        Err(Failure::Usage(m)) => {
            eprintln!("error: config: {m}");
            2
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {}: {e}", e.category());
            1
        }
    }
}

fn execute(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<(), Failure> {
    let cfg = resolve(cli)?;
    if cli.dry_run {
        out.write_all(cfg.to_text().as_bytes()).map_err(out_io)?;
        return Ok(());
    }
    let pool = pool(cfg.threads)?;
    pool.install(|| dispatch(&cli.command, &cfg, out))
}

fn dispatch(command: &Command, cfg: &PipelineConfig, out: &mut (dyn Write + Send)) -> Result<(), Failure> {
    match command {
        Command::Vocab(_) => {
            let v = run_vocab(cfg)?;
            vocab::save_vocab(&v, need(&cfg.vocab, "vocab")?)?;
            eprintln!("vocabulary: {} words", v.len());
        }
        Command::CoocWindow(_) => {
            let m = run_window(cfg)?;
            cooc::save_bin(&m, need(&cfg.cooc, "cooc")?)?;
            eprintln!("co-occurrences: {} entries", m.len());
        }
        Command::CoocSan(_) => {
            let m = run_san(cfg)?;
            cooc::save_bin(&m, need(&cfg.cooc, "cooc")?)?;
            eprintln!("co-occurrences: {} entries", m.len());
        }
        Command::CoocMlm(_) => {
            let m = run_mlm(cfg)?;
            cooc::save_bin(&m, need(&cfg.cooc, "cooc")?)?;
            eprintln!("co-occurrences: {} entries", m.len());
        }
        Command::CoocIntersect(_) => {
            let support = cooc::load_bin(need(&cfg.support, "support")?)?;
            let values = cooc::load_bin(need(&cfg.values, "values")?)?;
            let m = CoocMatrix::intersect(&support, &values);
            cooc::save_bin(&m, need(&cfg.cooc, "cooc")?)?;
            eprintln!("co-occurrences: {} of {} support entries", m.len(), support.len());
        }
        Command::Shuffle(_) => {
            let n = cooc::shuffle(need(&cfg.cooc, "cooc")?, need(&cfg.shuffled, "shuffled")?, cfg.seed)?;
            eprintln!("shuffled {n} records");
        }
        Command::Train(_) => run_train(cfg)?,
        Command::Eval(_) => run_eval(cfg, out)?,
        Command::Nearest(_) => {
            let (v, x) = vectors::load_vectors(need(&cfg.vectors, "vectors")?)?;
            let word = cfg.word.as_deref().ok_or(ConfigError::Missing("word"))?;
            let path = need(&cfg.vectors, "vectors")?;
            let hits = eval::nearest(&v, &x, &word.to_lowercase(), cfg.k)
                .ok_or_else(|| Failure::Data(Error::format(path, format!("'{word}' has no vector"))))?;
            for (id, sim) in hits {
                writeln!(out, "{} {sim:.6}", v.word(id).unwrap_or("?")).map_err(out_io)?;
            }
        }
        Command::ValidateDump(_) => {
            let mut failed = false;
            for path in &cfg.dump {
                let report = sgdv::validate(path)?;
                let h = report.header;
                writeln!(
                    out,
                    "{}: mode={} top_k={} layers={} heads={} records={} hard_errors={} flagged_records={} flagged_rows={}",
                    path.display(),
                    h.mode.name(),
                    h.top_k,
                    h.n_layers,
                    h.n_heads,
                    report.records,
                    report.hard_errors.len(),
                    report.flagged_records,
                    report.flagged_rows
                )
                .map_err(out_io)?;
                for e in &report.hard_errors {
                    writeln!(out, "  {e}").map_err(out_io)?;
                }
                failed |= !report.is_ok();
            }
            if cfg.dump.is_empty() {
                return Err(ConfigError::Missing("dump").into());
            }
            if failed {
                return Err(Failure::Data(Error::format(&cfg.dump[0], "dump validation failed")));
            }
        }
        Command::Pipeline(_) => run_pipeline(cfg, out)?,
    }
    Ok(())
}

fn run_vocab(cfg: &PipelineConfig) -> Result<Vocabulary, Failure> {
    let text = corpus::read_corpus(need(&cfg.corpus, "corpus")?)?;
    Ok(corpus::build_vocab(&text, cfg.min_count))
}

fn corpus_sentences(cfg: &PipelineConfig, v: &Vocabulary) -> Result<Vec<Vec<Option<u32>>>, Failure> {
    let text = corpus::read_corpus(need(&cfg.corpus, "corpus")?)?;
    Ok(corpus::encode_sentences(&text, v))
}

fn run_window(cfg: &PipelineConfig) -> Result<CoocMatrix, Failure> {
    cfg.window_config().validate()?;
    let v = vocab::load_vocab(need(&cfg.vocab, "vocab")?)?;
    let sentences = corpus_sentences(cfg, &v)?;
    Ok(builders::window_cooc(&sentences, v.len(), &cfg.window_config())?)
}

fn run_san(cfg: &PipelineConfig) -> Result<CoocMatrix, Failure> {
    cfg.san().validate()?;
    let [dump] = cfg.dump.as_slice() else {
        return Err(Failure::Usage("cooc-san takes exactly one dump".into()));
    };
    let v = vocab::load_vocab(need(&cfg.vocab, "vocab")?)?;
    let sentences = corpus_sentences(cfg, &v)?;
    Ok(builders::san_cooc(dump, &sentences, v.len(), &cfg.san())?)
}

fn run_mlm(cfg: &PipelineConfig) -> Result<CoocMatrix, Failure> {
    if cfg.dump.is_empty() {
        return Err(ConfigError::Missing("dump").into());
    }
    let v = vocab::load_vocab(need(&cfg.vocab, "vocab")?)?;
    let lex = lexicon::load_lexicon(need(&cfg.lexicon, "lexicon")?)?;
    Ok(builders::mlm_cooc(&cfg.dump, &v, &lex, &cfg.mlm())?)
}

fn run_train(cfg: &PipelineConfig) -> Result<(), Failure> {
    let train_cfg = cfg.train();
    train_cfg.validate()?;
    let v = vocab::load_vocab(need(&cfg.vocab, "vocab")?)?;
    let records = cooc::load_records(need(&cfg.shuffled, "shuffled")?)?;
    let total = train_cfg.iterations;
    eprintln!(
        "training: {} records, {} words, dim {}, {} worker(s)",
        records.len(),
        v.len(),
        train_cfg.dim,
        hogwild::workers(train_cfg.threads)
    );
    let emb = hogwild::train(v.len(), &records, &train_cfg, |epoch, loss| {
        eprintln!("epoch {}/{total} loss {loss:.6}", epoch + 1);
    })?;
    vectors::save_vectors(&v, &emb.finalize(), need(&cfg.vectors, "vectors")?)?;
    Ok(())
}

fn print_reports(
    v: &Vocabulary,
    x: &WordVectors,
    cfg: &PipelineConfig,
    out: &mut (dyn Write + Send),
) -> Result<(), Failure> {
    if cfg.dataset.is_empty() {
        return Err(ConfigError::Missing("dataset").into());
    }
    for path in &cfg.dataset {
        let ds = dataset::load_dataset(path)?;
        let r = eval::evaluate(v, x, &ds)?;
        writeln!(out, "{} {:.4} {}/{}", r.dataset, r.spearman, r.covered, r.total).map_err(out_io)?;
    }
    Ok(())
}

fn run_eval(cfg: &PipelineConfig, out: &mut (dyn Write + Send)) -> Result<(), Failure> {
    let (v, x) = vectors::load_vectors(need(&cfg.vectors, "vectors")?)?;
    print_reports(&v, &x, cfg, out)
}

fn run_pipeline(cfg: &PipelineConfig, out: &mut (dyn Write + Send)) -> Result<(), Failure> {
    let work = need(&cfg.work_dir, "work_dir")?;
    std::fs::create_dir_all(work).map_err(|e| Error::io(work, e))?;
    let mut cfg = cfg.clone();
    let default_path = |p: &Option<PathBuf>, name: &str| p.clone().unwrap_or_else(|| work.join(name));
    cfg.vocab = Some(default_path(&cfg.vocab, "vocab.txt"));
    cfg.cooc = Some(default_path(&cfg.cooc, "cooccur.bin"));
    cfg.shuffled = Some(default_path(&cfg.shuffled, "shuf.bin"));
    cfg.vectors = Some(default_path(&cfg.vectors, "vectors.txt"));

    let v = run_vocab(&cfg)?;
    vocab::save_vocab(&v, need(&cfg.vocab, "vocab")?)?;
    eprintln!("vocabulary: {} words", v.len());
    let m = match cfg.builder {
        Builder::Window => run_window(&cfg)?,
        Builder::San => run_san(&cfg)?,
        Builder::Mlm => run_mlm(&cfg)?,
    };
    eprintln!("co-occurrences ({}): {} entries", cfg.builder, m.len());
    cooc::save_bin(&m, need(&cfg.cooc, "cooc")?)?;
    cooc::shuffle(need(&cfg.cooc, "cooc")?, need(&cfg.shuffled, "shuffled")?, cfg.seed)?;
    run_train(&cfg)?;
    if !cfg.dataset.is_empty() {
        run_eval(&cfg, out)?;
    }
    Ok(())
}
