//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Tolerances and runtime budgets are fixed here.

use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use atn_core::attacks::{apply_attack, AttackKind, AttackSpec};
use atn_core::corpus::is_clean_fixpoint;
use atn_core::evaluation::{throughput_bench, EvalReport, BASELINE};
use atn_core::normalizer::{builtin_censor_lexicon, normalize_text, NormalizerConfig};

const ZERO_WIDTH: [char; 5] = ['\u{200B}', '\u{200C}', '\u{200D}', '\u{2060}', '\u{FEFF}'];
const FLOOR_EXAMPLES_PER_SEC: f64 = 77.0;
const DAMAGE_RATIO_MAX: f64 = 0.20;
const NEUTRALITY_TOLERANCE: f64 = 0.02;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn bench_corpus() -> Vec<String> {
    std::fs::read_to_string(data("bench_corpus.txt")).unwrap().lines().map(str::to_string).collect()
}

/// Codepoint Levenshtein distance, two-row dynamic programme.
fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            cur[j] = (prev[j - 1] + usize::from(a[i - 1] != b[j - 1])).min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn atn(args: &[&str]) -> (i32, Vec<u8>, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["atn"];
    argv.extend_from_slice(args);
    let code = atn_cli::run(argv, &mut Cursor::new(Vec::new()), &mut out, &mut err);
    (code, out, String::from_utf8_lossy(&err).into_owned())
}

type Verdict = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Verdict);

fn golden_examples() -> Verdict {
    let original = "This is augmented text";
    let zero_width: String = original.chars().enumerate().flat_map(|(i, c)| [c, ZERO_WIDTH[i % 5]]).collect();
    let rows = [
        ("none", original.to_string(), original),
        ("insert_punctuation_chars", "Th.i.s ,is ...a.ug;m!en't?ed, ,te!x.t".into(), "This ,is ...augmented, ,text"),
        ("insert_whitespace_chars", "T h i s  is  a u g m e n t e d   text".into(), original),
        ("insert_zero_width_chars", zero_width, original),
        ("merge_words", "Thisis augmented text".into(), "Thisis augmented text"),
        ("replace_fun_fonts", "𝐓𝐡𝐢𝐬 𝐢𝐬 𝐚𝐮𝐠𝐦𝐞𝐧𝐭𝐞𝐝 𝐭𝐞𝐱𝐭".into(), original),
        ("replace_similar_chars", "Th!s is @ugmented tex7".into(), "Th!s is @ugmented tex7"),
        ("replace_similar_unicode_chars", "Тhіѕ іѕ аugmеntеd tехt".into(), original),
        ("simulate_typos", "This is augmentde texht".into(), "This is augmentde texht"),
        ("split_words", "Th is is augment ed text".into(), "Th is is augment ed text"),
    ];
    let cfg = NormalizerConfig::default();
    let bad: Vec<String> = rows
        .iter()
        .filter_map(|(name, input, want)| {
            let got = normalize_text(input, &cfg);
            (got != *want).then(|| format!("{name}: got {got:?}, want {want:?}"))
        })
        .collect();
    if bad.is_empty() {
        Ok(format!("{}/{} rows byte-exact", rows.len(), rows.len()))
    } else {
        Err(bad.join("; "))
    }
}

fn idempotence_fuzz() -> Verdict {
    let corpus = bench_corpus();
    let configs = [
        NormalizerConfig::default(),
        NormalizerConfig::builder().censor_lexicon(builtin_censor_lexicon()).build().unwrap(),
    ];
    let mut failures = Vec::new();
    for i in 0..10_000usize {
        let kind = AttackKind::ALL[i % AttackKind::ALL.len()];
        let x = &corpus[i % corpus.len()];
        let y = apply_attack(x, &AttackSpec::sampled(kind, 0x1DE0_0000 + i as u64)).unwrap();
        for cfg in &configs {
            let once = normalize_text(&y, cfg);
            if normalize_text(&once, cfg) != once {
                failures.push(format!("{kind} #{i}: {y:?}"));
            }
        }
    }
    if failures.is_empty() {
        Ok("10000 pairs x 2 configs, 0 failures".into())
    } else {
        Err(format!("{} failures, first {}", failures.len(), failures[0]))
    }
}

fn exact_round_trip() -> Verdict {
    let corpus = bench_corpus();
    let cfg = NormalizerConfig::default();
    if let Some(x) = corpus.iter().find(|x| !is_clean_fixpoint(x, &[])) {
        return Err(format!("corpus sentence is not a clean fixpoint: {x:?}"));
    }
    let mut failures = Vec::new();
    for (i, x) in corpus.iter().enumerate() {
        for kind in AttackKind::REVERSIBLE {
            let mut spec = AttackSpec::sampled(kind, 0x5EED_0000 + i as u64);
            spec.params.vary_fonts = false;
            let y = apply_attack(x, &spec).unwrap();
            if normalize_text(&y, &cfg) != *x {
                failures.push(format!("{kind} #{i}"));
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{} sentences x 3 attacks, 0 failures", corpus.len()))
    } else {
        Err(format!("{} failures: {}", failures.len(), failures.iter().take(5).cloned().collect::<Vec<_>>().join(", ")))
    }
}

fn damage_reduction() -> Verdict {
    let corpus = bench_corpus();
    let cfg = NormalizerConfig::default();
    let mut notes = Vec::new();
    for kind in [AttackKind::InsertPunctuationChars, AttackKind::InsertWhitespaceChars] {
        let (mut attacked, mut residual, mut changed) = (0usize, 0usize, 0usize);
        for (i, x) in corpus.iter().enumerate() {
            let y = apply_attack(x, &AttackSpec::sampled(kind, 0xDA_0000 + i as u64)).unwrap();
            let z = normalize_text(&y, &cfg);
            let (dy, dz) = (levenshtein(&y, x), levenshtein(&z, x));
            if y != *x {
                changed += 1;
                if dz >= dy {
                    return Err(format!("{kind} #{i}: distance {dy} -> {dz} did not decrease"));
                }
            }
            attacked += dy;
            residual += dz;
        }
        let ratio = residual as f64 / attacked as f64;
        if ratio > DAMAGE_RATIO_MAX {
            return Err(format!("{kind}: residual/attacked {ratio:.4} > {DAMAGE_RATIO_MAX}"));
        }
        notes.push(format!("{kind}: {changed} changed, strict decrease, residual/attacked {ratio:.4}"));
    }
    Ok(notes.join("; ") + &format!(" (max {DAMAGE_RATIO_MAX})"))
}

fn oracle_sandwich() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let corpus = data("demo_binary.jsonl");
    let lines = std::fs::read_to_string(&corpus).unwrap().lines().count();
    if lines != 200 {
        return Err(format!("demo corpus has {lines} records, expected 200"));
    }
    let (code, _, err) = atn(&[
        "evaluate",
        "--datasets",
        corpus.to_str().unwrap(),
        "--classifier",
        "toy",
        "--seed",
        "42",
        "--out",
        out.to_str().unwrap(),
    ]);
    if code != 0 {
        return Err(format!("evaluate exited {code}: {err}"));
    }
    let report = EvalReport::from_json(&std::fs::read(&out).unwrap()).unwrap();
    let metric = |aug: &str, normalized: bool| report.find("demo_binary", aug, normalized, "toy_lexicon").map(|r| r.metric);
    let base = metric(BASELINE, false).ok_or("missing baseline row")?;
    let mut notes = vec![format!("baseline {:.4}", base)];
    for kind in AttackKind::REVERSIBLE {
        let (aug, norm) = (metric(kind.as_str(), false).ok_or("missing row")?, metric(kind.as_str(), true).ok_or("missing row")?);
        if norm != base {
            return Err(format!("{kind}: normalized {norm} != baseline {base}"));
        }
        notes.push(format!("{kind} {aug:.4}->{norm:.4}"));
    }
    for kind in AttackKind::UNCOVERED {
        let (aug, norm) = (metric(kind.as_str(), false).ok_or("missing row")?, metric(kind.as_str(), true).ok_or("missing row")?);
        if (norm - aug).abs() > NEUTRALITY_TOLERANCE {
            return Err(format!("{kind}: |{norm} - {aug}| > {NEUTRALITY_TOLERANCE}"));
        }
        notes.push(format!("{kind} |d|={:.4}", (norm - aug).abs()));
    }
    Ok(notes.join(", "))
}

fn censorship_decode() -> Verdict {
    let cfg = NormalizerConfig::builder().censor_lexicon(["kill"]).build().unwrap();
    let cases = [("k***", "kill"), ("k!ll", "kill"), ("k#*!", "kill"), ("kind", "kind"), ("kill", "kill")];
    let bad: Vec<String> = cases
        .iter()
        .filter_map(|(i, want)| {
            let got = normalize_text(i, &cfg);
            (got != *want).then(|| format!("{i:?} -> {got:?}, want {want:?}"))
        })
        .collect();
    if bad.is_empty() {
        Ok("k*** k!ll k#*! -> kill; kind, kill unchanged".into())
    } else {
        Err(bad.join("; "))
    }
}

fn throughput() -> Verdict {
    let corpus = bench_corpus();
    let mean = corpus.iter().map(|s| s.chars().count()).sum::<usize>() as f64 / corpus.len() as f64;
    let rate = throughput_bench(&corpus, &NormalizerConfig::default());
    let line = format!("{rate:.0} examples/s single-threaded over {} texts (mean {mean:.1} codepoints), floor {FLOOR_EXAMPLES_PER_SEC}", corpus.len());
    if rate >= FLOOR_EXAMPLES_PER_SEC {
        Ok(line)
    } else {
        Err(line)
    }
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("demo.jsonl");
    std::fs::copy(data("demo_binary.jsonl"), &input).unwrap();
    let input_s = input.to_str().unwrap();
    let sidecar = format!("{input_s}.attacks.jsonl");

    for kind in AttackKind::ALL {
        let mut runs = Vec::new();
        for threads in ["1", "1", "4"] {
            let (code, out, err) = atn(&["attack", "--input", input_s, "--kind", kind.as_str(), "--seed", "1234", "--threads", threads]);
            if code != 0 {
                return Err(format!("attack {kind} exited {code}: {err}"));
            }
            runs.push((out, std::fs::read(&sidecar).unwrap()));
        }
        if runs[0] != runs[1] || runs[0] != runs[2] {
            return Err(format!("attack {kind}: outputs differ across runs or thread counts"));
        }
    }

    let mut reports = Vec::new();
    for (i, threads) in ["1", "1", "4"].iter().enumerate() {
        let out = dir.path().join(format!("r{i}.json"));
        let (code, _, err) = atn(&["evaluate", "--datasets", input_s, "--seed", "1234", "--threads", threads, "--out", out.to_str().unwrap()]);
        if code != 0 {
            return Err(format!("evaluate exited {code}: {err}"));
        }
        reports.push(std::fs::read(&out).unwrap());
    }
    if reports[0] != reports[1] || reports[0] != reports[2] {
        return Err("evaluate reports differ across runs or thread counts".into());
    }
    Ok("attack (9 kinds) and evaluate byte-identical over 2 runs at 1 thread and 1 run at 4 threads".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("golden_examples", Duration::from_secs(1), golden_examples),
        ("idempotence_fuzz", Duration::from_secs(30), idempotence_fuzz),
        ("exact_round_trip", Duration::from_secs(30), exact_round_trip),
        ("damage_reduction", Duration::from_secs(60), damage_reduction),
        ("oracle_sandwich", Duration::from_secs(120), oracle_sandwich),
        ("censorship_decode", Duration::from_secs(1), censorship_decode),
        ("throughput", Duration::from_secs(60), throughput),
        ("determinism", Duration::from_secs(120), determinism),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let started = Instant::now();
        let verdict = check();
        let took = started.elapsed();
        let verdict = match verdict {
            Ok(detail) if took > budget => Err(format!("{detail}; took {took:.2?}, budget {budget:?}")),
            v => v,
        };
        match verdict {
            Ok(detail) => println!("PASS {name}: {detail} [{took:.2?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{took:.2?}]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
