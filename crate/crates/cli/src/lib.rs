//! `atn`: normalize text streams, attack corpora, run the evaluation matrix,
//! benchmark the normalizer and serve the HTTP API.
//!
//! Every setting resolves as flag > `ATN_*` environment variable > config
//! file section > built-in default. Exit codes are a stable contract:
//! 0 success, 2 partial (lines skipped), 64 usage, 65 data, 69 unavailable.

pub mod config;
mod commands;

use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use atn_core::classifier::{ClassifierHandle, HttpConfig, LexiconClassifier};
use atn_core::labels::Task;
use atn_core::mappings::{CharClassSet, ConfusableTable};
use atn_core::normalizer::{load_lexicon, NormalizerConfig, NormalizerTables, PassSet};

pub use commands::{cmd_attack, cmd_bench, cmd_evaluate, cmd_normalize, cmd_serve};
use config::{FileConfig, NormalizerSection};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_UNAVAILABLE: i32 = 69;

#[derive(Debug, Parser)]
#[command(name = "atn", version, about = "Normalize, attack and evaluate character-level adversarial text")]
pub struct Cli {
    /// TOML config file; flags and ATN_* variables override it.
    #[arg(long, global = true, env = "ATN_CONFIG", value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize stdin line by line, or the text fields of a JSONL file.
    Normalize(NormalizeArgs),
    /// Attack every record of a JSONL dataset.
    Attack(AttackArgs),
    /// Score baseline, attacked and normalized datasets.
    Evaluate(EvaluateArgs),
    /// Measure single-threaded normalization throughput.
    Bench(BenchArgs),
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct NormalizerArgs {
    /// Comma-separated passes to run; "" runs none.
    #[arg(long, env = "ATN_PASSES", value_name = "LIST")]
    pub passes: Option<String>,
    /// Interior punctuation marks needed before a token is collapsed.
    #[arg(long, env = "ATN_THRESHOLD", value_name = "N")]
    pub threshold: Option<usize>,
    /// Leave URL-like tokens alone during insertion collapse.
    #[arg(long, env = "ATN_URL_DETECTION", value_name = "BOOL")]
    pub url_detection: Option<bool>,
    /// Censorship lexicon: one lowercase word per line.
    #[arg(long, env = "ATN_LEXICON", value_name = "PATH")]
    pub lexicon: Option<PathBuf>,
    /// Confusable tables to use instead of the built-in ones.
    #[arg(long, env = "ATN_TABLES", value_name = "PATH", value_delimiter = ',')]
    pub tables: Option<Vec<PathBuf>>,
    /// Character class file to use instead of the built-in one.
    #[arg(long, env = "ATN_CHAR_CLASSES", value_name = "PATH")]
    pub char_classes: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct NormalizeArgs {
    /// JSONL file whose text, premise and hypothesis fields are normalized.
    #[arg(long, env = "ATN_INPUT", value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Emit JSONL with the edit trace of every line.
    #[arg(long, env = "ATN_TRACE")]
    pub trace: bool,
    #[command(flatten)]
    pub normalizer: NormalizerArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct AttackArgs {
    /// Labelled JSONL dataset.
    #[arg(long, env = "ATN_INPUT", value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Attacked JSONL destination (default stdout).
    #[arg(long, env = "ATN_OUT", value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, env = "ATN_KIND")]
    pub kind: Option<String>,
    /// Master seed; drawn and printed when omitted.
    #[arg(long, env = "ATN_SEED")]
    pub seed: Option<u64>,
    /// auto, text, premise, hypothesis or both.
    #[arg(long, env = "ATN_FIELD")]
    pub field: Option<String>,
    #[arg(long, env = "ATN_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvaluateArgs {
    /// Dataset files; each is named after its file stem.
    #[arg(long, env = "ATN_DATASETS", value_name = "PATH", value_delimiter = ',', num_args = 1..)]
    pub datasets: Option<Vec<PathBuf>>,
    /// binary_jsonl, nli_jsonl, csv or auto.
    #[arg(long, env = "ATN_SCHEMA")]
    pub schema: Option<String>,
    /// Attack kinds (default: all nine).
    #[arg(long, env = "ATN_ATTACKS", value_delimiter = ',', num_args = 1..)]
    pub attacks: Option<Vec<String>>,
    /// `[name@]toy`, `[name@]lexicon=PATH`, `[name@]http=URL` or `[name@]http-nli=URL`.
    #[arg(long = "classifier", env = "ATN_CLASSIFIERS", value_delimiter = ',', num_args = 1..)]
    pub classifiers: Option<Vec<String>>,
    #[arg(long, env = "ATN_FIELD")]
    pub field: Option<String>,
    /// Report destination (default stdout).
    #[arg(long, env = "ATN_OUT", value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// markdown, csv or json (default: from --out extension, else markdown).
    #[arg(long, env = "ATN_FORMAT")]
    pub format: Option<String>,
    #[arg(long, env = "ATN_SEED")]
    pub seed: Option<u64>,
    #[arg(long, env = "ATN_THREADS")]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub http: HttpArgs,
    #[command(flatten)]
    pub normalizer: NormalizerArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct HttpArgs {
    /// Attempts per request to an external classifier.
    #[arg(long, env = "ATN_ATTEMPTS")]
    pub attempts: Option<u32>,
    #[arg(long, env = "ATN_TIMEOUT_MS")]
    pub timeout_ms: Option<u64>,
    /// In-flight requests per external classifier.
    #[arg(long, env = "ATN_CONCURRENCY")]
    pub concurrency: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BenchArgs {
    /// One text per line (default: the built-in bench corpus).
    #[arg(long, env = "ATN_CORPUS", value_name = "PATH")]
    pub corpus: Option<PathBuf>,
    #[arg(long, env = "ATN_RUNS")]
    pub runs: Option<usize>,
    /// Print the result as JSON.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub normalizer: NormalizerArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ServeArgs {
    #[arg(long, env = "ATN_BIND")]
    pub bind: Option<String>,
    #[arg(long, env = "ATN_PORT")]
    pub port: Option<u16>,
    /// Same syntax as `evaluate --classifier`; the first is the default.
    #[arg(long = "classifier", env = "ATN_CLASSIFIERS", value_delimiter = ',', num_args = 1..)]
    pub classifiers: Option<Vec<String>>,
    /// Directory served for non-API paths, e.g. the playground build.
    #[arg(long, env = "ATN_STATIC_DIR", value_name = "PATH")]
    pub static_dir: Option<PathBuf>,
    /// Append every session attempt to this JSONL file.
    #[arg(long, env = "ATN_SESSIONS_FILE", value_name = "PATH")]
    pub sessions_file: Option<PathBuf>,
    #[arg(long, env = "ATN_MAX_ATTEMPTS")]
    pub max_attempts: Option<usize>,
    /// Allowed CORS origins (default: any).
    #[arg(long = "cors-origin", env = "ATN_CORS_ORIGINS", value_delimiter = ',', num_args = 1..)]
    pub cors_origins: Option<Vec<String>>,
    #[command(flatten)]
    pub http: HttpArgs,
    #[command(flatten)]
    pub normalizer: NormalizerArgs,
}

/// Why a command stopped early.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Unavailable(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
            Failure::Unavailable(_) => EXIT_UNAVAILABLE,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Unavailable(m) => m,
        }
    }
}

/// Completed command: `partial` means some input was skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub partial: bool,
}

pub type CmdResult = Result<Outcome, Failure>;

pub(crate) fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// Normalizer settings after merging flags and the config file, checked
/// but not yet loaded.
#[derive(Debug, Clone)]
pub(crate) struct NormalizerPlan {
    passes: PassSet,
    threshold: Option<usize>,
    url_detection: Option<bool>,
    lexicon: Option<PathBuf>,
    tables: Option<Vec<PathBuf>>,
    char_classes: Option<PathBuf>,
}

impl NormalizerPlan {
    pub(crate) fn resolve(args: NormalizerArgs, file: NormalizerSection) -> Result<Self, Failure> {
        let passes = match pick(args.passes, file.passes) {
            Some(list) => PassSet::parse_list(&list).map_err(|e| Failure::Usage(e.to_string()))?,
            None => PassSet::all(),
        };
        let threshold = pick(args.threshold, file.threshold);
        if threshold == Some(0) {
            return Err(Failure::Usage("--threshold must be at least 1".into()));
        }
        Ok(NormalizerPlan {
            passes,
            threshold,
            url_detection: pick(args.url_detection, file.url_detection),
            lexicon: pick(args.lexicon, file.lexicon),
            tables: pick(args.tables, file.tables),
            char_classes: pick(args.char_classes, file.char_classes),
        })
    }

    pub(crate) fn build(&self) -> Result<NormalizerConfig, Failure> {
        let data = |e: &dyn std::fmt::Display| Failure::Data(e.to_string());
        let mut b = NormalizerConfig::builder().passes(self.passes);
        if let Some(t) = self.threshold {
            b = b.threshold(t);
        }
        if let Some(u) = self.url_detection {
            b = b.url_detection(u);
        }
        if let Some(path) = &self.lexicon {
            let words = load_lexicon(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            b = b.censor_lexicon(words);
        }
        if self.tables.is_some() || self.char_classes.is_some() {
            let tables: Vec<ConfusableTable> = match &self.tables {
                Some(paths) => paths
                    .iter()
                    .map(|p| ConfusableTable::load(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display()))))
                    .collect::<Result<_, _>>()?,
                None => ConfusableTable::builtin_parts().to_vec(),
            };
            let classes = match &self.char_classes {
                Some(p) => CharClassSet::load(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?,
                None => CharClassSet::builtin().clone(),
            };
            let t = NormalizerTables::new(&tables, classes).map_err(|e| data(&e))?;
            b = b.tables(std::sync::Arc::new(t));
        }
        b.build().map_err(|e| data(&e))
    }
}

/// A `--classifier` value, parsed but not yet connected.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ClassifierSpec {
    Toy { name: String },
    Lexicon { name: String, path: PathBuf },
    Http { name: String, url: String, task: Task },
}

impl ClassifierSpec {
    pub(crate) fn parse(s: &str) -> Result<Self, Failure> {
        let (name, body) = match s.split_once('@') {
            Some((n, b)) if !n.is_empty() && !n.contains('=') => (Some(n.to_string()), b),
            _ => (None, s),
        };
        let (kind, value) = body.split_once('=').map_or((body, None), |(k, v)| (k, Some(v)));
        let bad = || {
            Failure::Usage(format!(
                "invalid classifier '{s}' (expected [name@]toy, [name@]lexicon=PATH, [name@]http=URL or [name@]http-nli=URL)"
            ))
        };
        Ok(match (kind, value) {
            ("toy", None) => ClassifierSpec::Toy { name: name.unwrap_or_else(|| "toy_lexicon".into()) },
            ("lexicon", Some(p)) if !p.is_empty() => {
                let path = PathBuf::from(p);
                let stem = path.file_stem().map_or("lexicon".into(), |s| s.to_string_lossy().into_owned());
                ClassifierSpec::Lexicon { name: name.unwrap_or(stem), path }
            }
            ("http", Some(u)) | ("http-nli", Some(u)) if !u.is_empty() => {
                let task = if kind == "http" { Task::Binary } else { Task::Nli };
                ClassifierSpec::Http { name: name.unwrap_or_else(|| kind.to_string()), url: u.to_string(), task }
            }
            _ => return Err(bad()),
        })
    }

    pub(crate) fn name(&self) -> &str {
        match self {
            ClassifierSpec::Toy { name } | ClassifierSpec::Lexicon { name, .. } | ClassifierSpec::Http { name, .. } => name,
        }
    }

    pub(crate) fn connect(&self, http: &HttpArgs, file_http: (Option<u32>, Option<u64>, Option<usize>)) -> Result<ClassifierHandle, Failure> {
        match self {
            ClassifierSpec::Toy { name } => Ok(ClassifierHandle::lexicon(name.clone(), LexiconClassifier::builtin().clone())),
            ClassifierSpec::Lexicon { name, path } => {
                let c = LexiconClassifier::from_file(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
                Ok(ClassifierHandle::lexicon(name.clone(), c))
            }
            ClassifierSpec::Http { name, url, task } => {
                let mut cfg = HttpConfig::new(url.clone(), *task);
                if let Some(a) = pick(http.attempts, file_http.0) {
                    cfg.attempts = a;
                }
                if let Some(ms) = pick(http.timeout_ms, file_http.1) {
                    cfg.timeout = Duration::from_millis(ms);
                }
                if let Some(c) = pick(http.concurrency, file_http.2) {
                    cfg.concurrency = c;
                }
                ClassifierHandle::http(name.clone(), cfg).map_err(|e| Failure::Usage(e.to_string()))
            }
        }
    }
}

pub(crate) fn parse_classifiers(specs: Option<Vec<String>>) -> Result<Vec<ClassifierSpec>, Failure> {
    let specs: Vec<ClassifierSpec> = match specs {
        Some(list) if !list.is_empty() => list.iter().map(|s| ClassifierSpec::parse(s)).collect::<Result<_, _>>()?,
        _ => vec![ClassifierSpec::Toy { name: "toy_lexicon".into() }],
    };
    for (i, s) in specs.iter().enumerate() {
        if specs[..i].iter().any(|p| p.name() == s.name()) {
            return Err(Failure::Usage(format!("classifier name '{}' used twice; rename one with name@", s.name())));
        }
    }
    Ok(specs)
}

pub(crate) fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Failure::Usage(e.to_string()))
}

/// Parses `args` and runs the command against the given streams, returning
/// the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(stdout, "{e}");
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        EXIT_USAGE
                    } else {
                        EXIT_OK
                    }
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let file = match &cli.config {
        Some(path) => match FileConfig::load(path) {
            Ok(f) => f,
            Err(e) => {
                let _ = writeln!(stderr, "atn: config: {e}");
                return EXIT_USAGE;
            }
        },
        None => FileConfig::default(),
    };
    let result = match cli.command {
        Command::Normalize(a) => cmd_normalize(a, file, stdin, stdout, stderr),
        Command::Attack(a) => cmd_attack(a, file, stdout, stderr),
        Command::Evaluate(a) => cmd_evaluate(a, file, stdout, stderr),
        Command::Bench(a) => cmd_bench(a, file, stdout),
        Command::Serve(a) => cmd_serve(a, file, stderr),
    };
    match result {
        Ok(Outcome { partial: false }) => EXIT_OK,
        Ok(Outcome { partial: true }) => EXIT_PARTIAL,
        Err(f) => {
            let _ = writeln!(stderr, "atn: {}", f.message());
            f.code()
        }
    }
}
