//! Flat `key=value` pipeline configuration.
//!
//! Values resolve in three layers: built-in defaults, then a config file,
//! then command-line flags. Unknown keys are rejected.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use semglove_core::glove::TrainConfig;
use semglove_core::mlm::MlmConfig;
use semglove_core::san::SanConfig;
use semglove_core::window::WindowConfig;
use semglove_core::Distance;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for key '{key}'")]
    InvalidValue { key: String, value: String },
    #[error("line {0}: expected key=value")]
    Syntax(usize),
    #[error("missing required setting '{0}'")]
    Missing(&'static str),
    #[error("{path}: {message}")]
    Read { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Builder {
    #[default]
    Window,
    San,
    Mlm,
}

impl FromStr for Builder {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "window" => Ok(Builder::Window),
            "san" => Ok(Builder::San),
            "mlm" => Ok(Builder::Mlm),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Builder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Builder::Window => "window",
            Builder::San => "san",
            Builder::Mlm => "mlm",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub cooc: Option<PathBuf>,
    pub shuffled: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub dump: Vec<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub support: Option<PathBuf>,
    pub values: Option<PathBuf>,
    pub dataset: Vec<PathBuf>,
    pub work_dir: Option<PathBuf>,
    pub builder: Builder,
    pub min_count: u64,
    pub window: usize,
    pub symmetric: bool,
    /// Defaults to `window` when unset.
    pub select_top: Option<usize>,
    /// Defaults to `2 * window` when unset.
    pub top_tokens: Option<usize>,
    pub distance: Distance,
    pub dim: usize,
    pub x_max: f64,
    pub alpha: f64,
    pub lr: f64,
    pub iterations: usize,
    pub threads: usize,
    pub seed: u64,
    /// `None` disables clamping.
    pub grad_clip: Option<f64>,
    pub word: Option<String>,
    pub k: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        PipelineConfig {
            corpus: None,
            vocab: None,
            cooc: None,
            shuffled: None,
            vectors: None,
            dump: Vec::new(),
            lexicon: None,
            support: None,
            values: None,
            dataset: Vec::new(),
            work_dir: None,
            builder: Builder::Window,
            min_count: 5,
            window: 5,
            symmetric: true,
            select_top: None,
            top_tokens: None,
            distance: Distance::Division,
            dim: train.dim,
            x_max: train.x_max,
            alpha: train.alpha,
            lr: train.lr,
            iterations: train.iterations,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            seed: train.seed,
            grad_clip: train.grad_clip,
            word: None,
            k: 10,
        }
    }
}

/// Every accepted key, in the order `to_text` prints them.
pub const KEYS: &[&str] = &[
    "corpus",
    "vocab",
    "cooc",
    "shuffled",
    "vectors",
    "dump",
    "lexicon",
    "support",
    "values",
    "dataset",
    "work_dir",
    "builder",
    "min_count",
    "window",
    "symmetric",
    "select_top",
    "top_tokens",
    "distance",
    "dim",
    "x_max",
    "alpha",
    "lr",
    "iterations",
    "threads",
    "seed",
    "grad_clip",
    "word",
    "k",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::InvalidValue {
        key: key.into(),
        value: value.into(),
    })
}

fn opt_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn path_list(value: &str) -> Vec<PathBuf> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(PathBuf::from)
        .collect()
}

fn join(paths: &[PathBuf]) -> String {
    paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn show(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl PipelineConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "corpus" => self.corpus = opt_path(value),
            "vocab" => self.vocab = opt_path(value),
            "cooc" => self.cooc = opt_path(value),
            "shuffled" => self.shuffled = opt_path(value),
            "vectors" => self.vectors = opt_path(value),
            "dump" => self.dump = path_list(value),
            "lexicon" => self.lexicon = opt_path(value),
            "support" => self.support = opt_path(value),
            "values" => self.values = opt_path(value),
            "dataset" => self.dataset = path_list(value),
            "work_dir" => self.work_dir = opt_path(value),
            "builder" => self.builder = parse(key, value)?,
            "min_count" => self.min_count = parse(key, value)?,
            "window" => self.window = parse(key, value)?,
            "symmetric" => self.symmetric = parse(key, value)?,
            "select_top" => self.select_top = Some(parse(key, value)?),
            "top_tokens" => self.top_tokens = Some(parse(key, value)?),
            "distance" => self.distance = parse(key, value)?,
            "dim" => self.dim = parse(key, value)?,
            "x_max" => self.x_max = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "iterations" => self.iterations = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "grad_clip" => {
                self.grad_clip = match value {
                    "off" | "none" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "word" => self.word = (!value.is_empty()).then(|| value.to_string()),
            "k" => self.k = parse(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax(k + 1))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        self.apply_text(&text)
    }

    fn get(&self, key: &str) -> String {
        match key {
            "corpus" => show(&self.corpus),
            "vocab" => show(&self.vocab),
            "cooc" => show(&self.cooc),
            "shuffled" => show(&self.shuffled),
            "vectors" => show(&self.vectors),
            "dump" => join(&self.dump),
            "lexicon" => show(&self.lexicon),
            "support" => show(&self.support),
            "values" => show(&self.values),
            "dataset" => join(&self.dataset),
            "work_dir" => show(&self.work_dir),
            "builder" => self.builder.to_string(),
            "min_count" => self.min_count.to_string(),
            "window" => self.window.to_string(),
            "symmetric" => self.symmetric.to_string(),
            "select_top" => self.san().select_top.to_string(),
            "top_tokens" => self.mlm().top_tokens.to_string(),
            "distance" => self.distance.to_string(),
            "dim" => self.dim.to_string(),
            "x_max" => self.x_max.to_string(),
            "alpha" => self.alpha.to_string(),
            "lr" => self.lr.to_string(),
            "iterations" => self.iterations.to_string(),
            "threads" => self.threads.to_string(),
            "seed" => self.seed.to_string(),
            "grad_clip" => self.grad_clip.map_or("off".into(), |c| c.to_string()),
            "word" => self.word.clone().unwrap_or_default(),
            "k" => self.k.to_string(),
            _ => unreachable!("key list and accessor out of sync: {key}"),
        }
    }

    /// Resolved configuration in the file format, one key per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key}={}", self.get(key));
        }
        out
    }

    pub fn window_config(&self) -> WindowConfig {
        WindowConfig {
            window: self.window,
            symmetric: self.symmetric,
        }
    }

    pub fn san(&self) -> SanConfig {
        SanConfig {
            window: self.window,
            select_top: self.select_top.unwrap_or(self.window),
            distance: self.distance,
        }
    }

    pub fn mlm(&self) -> MlmConfig {
        MlmConfig {
            top_tokens: self.top_tokens.unwrap_or(2 * self.window),
            distance: self.distance,
        }
    }

    pub fn train(&self) -> TrainConfig {
        TrainConfig {
            dim: self.dim,
            x_max: self.x_max,
            alpha: self.alpha,
            lr: self.lr,
            iterations: self.iterations,
            threads: self.threads,
            seed: self.seed,
            grad_clip: self.grad_clip,
        }
    }
}
