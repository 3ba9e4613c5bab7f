use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, ErrorKind, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use atn_core::attacks::{attack_record, AttackKind, FieldSelector, SeedPlan};
use atn_core::corpus::{clean_sentences, BENCH_SEED};
use atn_core::evaluation::{
    config_hash, emit_report, load_dataset, run_matrix, summary_lines, throughput_bench_runs, DatasetSchema, EvalRecord, EvalReport, MatrixSpec,
    ReportFormat,
};
use atn_core::normalizer::{normalize, NormalizerConfig};
use atn_service::{serve, AppState, RouterOptions, ServiceConfig, SessionStore, DEFAULT_SESSION_ATTEMPTS};

use crate::config::FileConfig;
use crate::{
    parse_classifiers, pick, thread_pool, AttackArgs, BenchArgs, CmdResult, EvaluateArgs, Failure, NormalizeArgs, NormalizerPlan, Outcome,
    ServeArgs,
};

/// Records per parallel batch in `attack`; bounds memory on long inputs.
const ATTACK_BATCH: usize = 1024;

const TEXT_FIELDS: [&str; 3] = ["text", "premise", "hypothesis"];

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

/// Raised when the reader of our output went away; the command stops quietly.
struct Closed;

fn emit(out: &mut dyn Write, bytes: &[u8]) -> Result<(), Result<Closed, Failure>> {
    out.write_all(bytes).map_err(|e| match e.kind() {
        ErrorKind::BrokenPipe => Ok(Closed),
        _ => Err(Failure::Data(format!("write failed: {e}"))),
    })
}

fn finish(r: Result<(), Result<Closed, Failure>>, partial: bool) -> CmdResult {
    match r {
        Ok(()) | Err(Ok(Closed)) => Ok(Outcome { partial }),
        Err(Err(f)) => Err(f),
    }
}

/// Reads `\n`-terminated lines as bytes, stripping the terminator and a
/// trailing `\r`. Yields `(line_number, bytes)`.
fn byte_lines(mut r: impl BufRead) -> impl Iterator<Item = Result<(usize, Vec<u8>), Failure>> {
    let mut n = 0;
    std::iter::from_fn(move || {
        let mut buf = Vec::new();
        match r.read_until(b'\n', &mut buf) {
            Ok(0) => None,
            Ok(_) => {
                n += 1;
                if buf.last() == Some(&b'\n') {
                    buf.pop();
                    if buf.last() == Some(&b'\r') {
                        buf.pop();
                    }
                }
                Some(Ok((n, buf)))
            }
            Err(e) => Some(Err(Failure::Data(format!("read failed: {e}")))),
        }
    })
}

pub fn cmd_normalize(args: NormalizeArgs, file: FileConfig, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let plan = NormalizerPlan::resolve(args.normalizer, file.normalizer)?;
    let input = pick(args.input, file.normalize.input);
    let trace = args.trace || file.normalize.trace.unwrap_or(false);
    let config = plan.build()?;

    let mut opened;
    let reader: &mut dyn BufRead = match &input {
        Some(p) => {
            opened = open(p)?;
            &mut opened
        }
        None => stdin,
    };
    let mut out = BufWriter::new(stdout);
    let mut partial = false;
    let r = (|| {
        for line in byte_lines(reader) {
            let (n, bytes) = line.map_err(Err)?;
            let Ok(text) = String::from_utf8(bytes) else {
                let _ = writeln!(stderr, "atn: line {n}: invalid UTF-8, skipped");
                partial = true;
                continue;
            };
            let rendered = if input.is_some() {
                if text.trim().is_empty() {
                    continue;
                }
                normalize_json_line(&text, n, trace, &config).map_err(Err)?
            } else if trace {
                let r = normalize(&text, &config);
                json!({ "input": text, "normalized": r.output, "edits": r.edits }).to_string()
            } else {
                normalize(&text, &config).output
            };
            emit(&mut out, rendered.as_bytes())?;
            emit(&mut out, b"\n")?;
        }
        out.flush().map_err(|e| Err(Failure::Data(format!("write failed: {e}"))))
    })();
    finish(r, partial)
}

fn normalize_json_line(line: &str, n: usize, trace: bool, config: &NormalizerConfig) -> Result<String, Failure> {
    let value: Value = serde_json::from_str(line).map_err(|e| Failure::Data(format!("line {n}: {e}")))?;
    let Value::Object(mut obj) = value else {
        return Err(Failure::Data(format!("line {n}: expected a JSON object")));
    };
    let mut edits = Map::new();
    for field in TEXT_FIELDS {
        if let Some(Value::String(s)) = obj.get(field) {
            let r = normalize(s, config);
            if trace {
                edits.insert(field.into(), serde_json::to_value(&r.edits).expect("edits serialize"));
            }
            obj.insert(field.into(), Value::String(r.output));
        }
    }
    if !TEXT_FIELDS.iter().any(|f| obj.get(*f).is_some_and(Value::is_string)) {
        return Err(Failure::Data(format!("line {n}: no text, premise or hypothesis field")));
    }
    if trace {
        obj.insert("edits".into(), Value::Object(edits));
    }
    Ok(Value::Object(obj).to_string())
}

/// Where `attack` writes per-record seeds and params.
pub fn sidecar_path(input: &Path) -> PathBuf {
    let mut s = input.as_os_str().to_owned();
    s.push(".attacks.jsonl");
    PathBuf::from(s)
}

fn parse_kind(s: &str) -> Result<AttackKind, Failure> {
    s.parse().map_err(|e: atn_core::AttackError| Failure::Usage(e.to_string()))
}

fn parse_field(s: Option<String>) -> Result<FieldSelector, Failure> {
    s.map_or(Ok(FieldSelector::Auto), |f| f.parse().map_err(|e: atn_core::AttackError| Failure::Usage(e.to_string())))
}

fn resolve_seed(seed: Option<u64>, stderr: &mut dyn Write) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random();
        let _ = writeln!(stderr, "atn: seed {s} (pass --seed {s} to reproduce)");
        s
    })
}

pub fn cmd_attack(args: AttackArgs, file: FileConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let f = file.attack;
    let input = pick(args.input, f.input).ok_or_else(|| Failure::Usage("attack needs --input".into()))?;
    let kind = parse_kind(&pick(args.kind, f.kind).ok_or_else(|| Failure::Usage(format!("attack needs --kind ({})", AttackKind::names())))?)?;
    let field = parse_field(pick(args.field, f.field))?;
    let pool = thread_pool(pick(args.threads, f.threads))?;
    let out_path = pick(args.out, f.out);
    let reader = open(&input)?;
    let seed = resolve_seed(pick(args.seed, f.seed), stderr);
    let plan = SeedPlan::PerRecord { kind, master_seed: seed };

    let mut owned;
    let out: &mut dyn Write = match &out_path {
        Some(p) => {
            owned = create(p)?;
            &mut owned
        }
        None => stdout,
    };
    let mut out = BufWriter::new(out);
    let mut meta_out = create(&sidecar_path(&input))?;
    let mut partial = false;

    let r = (|| {
        // (record index, line number, line)
        let mut batch: Vec<(usize, usize, String)> = Vec::with_capacity(ATTACK_BATCH);
        let mut index = 0;
        let mut lines = byte_lines(reader).peekable();
        while lines.peek().is_some() {
            batch.clear();
            while batch.len() < ATTACK_BATCH {
                let Some(line) = lines.next() else { break };
                let (n, bytes) = line.map_err(Err)?;
                if bytes.iter().all(u8::is_ascii_whitespace) {
                    continue;
                }
                let i = index;
                index += 1;
                match String::from_utf8(bytes) {
                    Ok(text) => batch.push((i, n, text)),
                    Err(_) => {
                        let _ = writeln!(stderr, "atn: line {n}: invalid UTF-8, skipped");
                        partial = true;
                    }
                }
            }
            let done: Vec<Result<(String, String), Failure>> = pool.install(|| {
                batch
                    .par_iter()
                    .map(|(i, n, text)| {
                        let record = EvalRecord::from_json_line(text, None, *n).map_err(|e| Failure::Data(e.to_string()))?;
                        let a = attack_record(&record, *i, &plan, field).map_err(|e| Failure::Data(format!("line {n}: {e}")))?;
                        Ok((a.record.to_json().to_string(), serde_json::to_string(&a.meta).expect("meta serializes")))
                    })
                    .collect()
            });
            for d in done {
                let (record, meta) = d.map_err(Err)?;
                emit(&mut out, record.as_bytes())?;
                emit(&mut out, b"\n")?;
                emit(&mut meta_out, meta.as_bytes())?;
                emit(&mut meta_out, b"\n")?;
            }
        }
        let flush = |w: &mut dyn Write| w.flush().map_err(|e| Err(Failure::Data(format!("write failed: {e}"))));
        flush(&mut out)?;
        flush(&mut meta_out)
    })();
    finish(r, partial)
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn infer_format(format: Option<String>, out: Option<&Path>) -> Result<ReportFormat, Failure> {
    let name = format.or_else(|| {
        out.and_then(|p| p.extension()).and_then(|e| e.to_str()).and_then(|e| match e {
            "json" => Some("json".to_string()),
            "csv" => Some("csv".to_string()),
            "md" | "markdown" => Some("markdown".to_string()),
            _ => None,
        })
    });
    name.map_or(Ok(ReportFormat::Markdown), |n| n.parse().map_err(|e: atn_core::evaluation::EvalError| Failure::Usage(e.to_string())))
}

pub fn cmd_evaluate(args: EvaluateArgs, file: FileConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let f = file.evaluate;
    let plan = NormalizerPlan::resolve(args.normalizer, file.normalizer)?;
    let datasets = pick(args.datasets, f.datasets).filter(|d| !d.is_empty()).ok_or_else(|| Failure::Usage("evaluate needs --datasets".into()))?;
    let schema: DatasetSchema = pick(args.schema, f.schema)
        .map_or(Ok(DatasetSchema::Auto), |s| s.parse())
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let attacks: Vec<AttackKind> = match pick(args.attacks, f.attacks) {
        Some(names) => names.iter().map(|n| parse_kind(n.trim())).collect::<Result<_, _>>()?,
        None => AttackKind::ALL.to_vec(),
    };
    let specs = parse_classifiers(pick(args.classifiers, f.classifiers))?;
    let field = parse_field(pick(args.field, f.field))?;
    let out_path = pick(args.out, f.out);
    let format = infer_format(pick(args.format, f.format), out_path.as_deref())?;
    let pool = thread_pool(pick(args.threads, f.threads))?;
    let names: Vec<String> = datasets.iter().map(|p| dataset_name(p)).collect();
    if let Some(dup) = names.iter().enumerate().find(|(i, n)| names[..*i].contains(n)) {
        return Err(Failure::Usage(format!("two datasets are named '{}'", dup.1)));
    }

    let config = plan.build()?;
    let classifiers = specs
        .iter()
        .map(|s| s.connect(&args.http, (f.attempts, f.timeout_ms, f.concurrency)))
        .collect::<Result<Vec<_>, _>>()?;
    let seed = resolve_seed(pick(args.seed, f.seed), stderr);

    let mut loaded = Vec::new();
    for (path, name) in datasets.iter().zip(&names) {
        let records = load_dataset(path, schema).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        let Some(first) = records.first() else {
            return Err(Failure::Data(format!("{}: no records", path.display())));
        };
        let task = first.task();
        if let Some(r) = records.iter().find(|r| r.task() != task) {
            return Err(Failure::Data(format!("{}: record {} mixes {task} and {} inputs", path.display(), r.id, r.task())));
        }
        if !classifiers.iter().any(|c| c.task() == task) {
            return Err(Failure::Data(format!("{}: no {task} classifier configured", path.display())));
        }
        loaded.push((name.as_str(), task, records));
    }

    let hash = config_hash(&json!({
        "master_seed": seed,
        "datasets": names,
        "attacks": attacks,
        "field": field.to_string(),
        "classifiers": specs.iter().map(|s| s.name()).collect::<Vec<_>>(),
        "normalizer": config.settings(),
    }));
    let mut report = EvalReport::new(seed, hash);
    for (name, task, records) in &loaded {
        for c in classifiers.iter().filter(|c| c.task() == *task) {
            let spec = MatrixSpec { dataset: name, attacks: &attacks, field, master_seed: seed };
            let rows = pool.install(|| {
                run_matrix(records, &spec, c, &config).map_err(|e| {
                    if e.is_unavailable() {
                        Failure::Unavailable(e.to_string())
                    } else {
                        Failure::Data(e.to_string())
                    }
                })
            })?;
            report.results.extend(rows);
        }
    }

    let bytes = emit_report(&report, format);
    let summary = summary_lines(&report).join("\n") + "\n";
    let r = match &out_path {
        Some(p) => {
            std::fs::write(p, &bytes).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
            emit(stdout, summary.as_bytes())
        }
        None => {
            let _ = stderr.write_all(summary.as_bytes());
            emit(stdout, &bytes)
        }
    };
    finish(r, false)
}

pub fn cmd_bench(args: BenchArgs, file: FileConfig, stdout: &mut dyn Write) -> CmdResult {
    let plan = NormalizerPlan::resolve(args.normalizer, file.normalizer)?;
    let runs = pick(args.runs, file.bench.runs).unwrap_or(5);
    if runs == 0 {
        return Err(Failure::Usage("--runs must be at least 1".into()));
    }
    let corpus_path = pick(args.corpus, file.bench.corpus);
    let config = plan.build()?;
    let corpus: Vec<String> = match &corpus_path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
            text.lines().filter(|l| !l.trim().is_empty()).map(str::to_string).collect()
        }
        None => clean_sentences(BENCH_SEED, 1000),
    };
    if corpus.is_empty() {
        return Err(Failure::Data("bench corpus is empty".into()));
    }
    let result = throughput_bench_runs(&corpus, &config, runs);
    let line = if args.json {
        serde_json::to_string(&result).expect("bench result serializes")
    } else {
        format!("{} texts, median of {} runs: {:.0} examples/s", result.texts, result.runs.len(), result.median)
    };
    finish(emit(stdout, format!("{line}\n").as_bytes()), false)
}

pub fn cmd_serve(args: ServeArgs, file: FileConfig, stderr: &mut dyn Write) -> CmdResult {
    let f = file.serve;
    let plan = NormalizerPlan::resolve(args.normalizer, file.normalizer)?;
    let bind = pick(args.bind, f.bind).unwrap_or_else(|| "127.0.0.1".into());
    let port = pick(args.port, f.port).unwrap_or(8080);
    let addr: SocketAddr = format!("{bind}:{port}")
        .parse()
        .or_else(|_| format!("[{bind}]:{port}").parse())
        .map_err(|_| Failure::Usage(format!("invalid --bind address '{bind}'")))?;
    let specs = parse_classifiers(pick(args.classifiers, f.classifiers))?;
    let max_attempts = pick(args.max_attempts, f.max_attempts).unwrap_or(DEFAULT_SESSION_ATTEMPTS);
    let options = RouterOptions {
        cors_origins: pick(args.cors_origins, f.cors_origins).unwrap_or_default(),
        static_dir: pick(args.static_dir, f.static_dir),
    };
    let sessions_file = pick(args.sessions_file, f.sessions_file);

    let normalizer = plan.build()?;
    let classifiers = specs
        .iter()
        .map(|s| s.connect(&args.http, (f.attempts, f.timeout_ms, f.concurrency)))
        .collect::<Result<Vec<_>, _>>()?;
    let sessions = SessionStore::new(max_attempts, sessions_file.as_deref()).map_err(|e| Failure::Data(format!("sessions file: {e}")))?;
    let mut config = ServiceConfig::new(normalizer, classifiers);
    config.sessions = sessions;

    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Unavailable(e.to_string()))?;
    let _ = writeln!(stderr, "atn: serving on http://{addr}");
    runtime
        .block_on(serve(addr, AppState::ready(config), &options))
        .map_err(|e| Failure::Unavailable(format!("{addr}: {e}")))?;
    Ok(Outcome { partial: false })
}
