//! The baseline / augmented / normalized experiment matrix and its reports.

mod dataset;
mod report;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::attacks::{attack_record, AttackError, AttackKind, FieldSelector, SeedPlan};
use crate::classifier::{ClassifierError, ClassifierHandle};
use crate::normalizer::{normalize_text, NormalizerConfig};

pub use dataset::{load_dataset, read_csv, read_jsonl, DatasetError, DatasetSchema, EvalRecord, RecordInput};
pub use report::{emit_report, summary_lines, ReportFormat};

/// Share of failed records a condition tolerates before it aborts.
pub const FAILURE_BUDGET: f64 = 0.10;

pub const BASELINE: &str = "baseline";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dataset '{0}' has no records")]
    Empty(String),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error("{dataset}/{augmentation} (normalized={normalized}) with {classifier}: {failed} of {n} records failed, first: record {first_id}: {first_error}")]
    ConditionAborted {
        dataset: String,
        augmentation: String,
        normalized: bool,
        classifier: String,
        failed: usize,
        n: usize,
        first_id: String,
        first_error: Box<ClassifierError>,
    },
    #[error("report: {0}")]
    Report(String),
}

impl EvalError {
    /// True when the failure came from an endpoint that could not be reached.
    pub fn is_unavailable(&self) -> bool {
        matches!(self, EvalError::ConditionAborted { first_error, .. } if first_error.is_unavailable())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub dataset: String,
    /// Attack kind name, or "baseline".
    pub augmentation: String,
    pub normalized: bool,
    pub classifier: String,
    /// Accuracy: correct / n.
    pub metric: f64,
    /// Records scored successfully.
    pub n: usize,
    pub correct: usize,
    /// Records whose scoring failed (excluded from n).
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    /// SHA-256 over the canonical JSON of the run configuration.
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_unix: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_unix: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metric: String,
    pub provenance: Provenance,
    pub results: Vec<ConditionResult>,
}

impl EvalReport {
    pub fn new(master_seed: u64, config_hash: String) -> Self {
        EvalReport {
            metric: "accuracy".into(),
            provenance: Provenance { master_seed, config_hash, started_unix: None, finished_unix: None },
            results: Vec::new(),
        }
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, EvalError> {
        serde_json::from_slice(bytes).map_err(|e| EvalError::Report(e.to_string()))
    }

    pub fn find(&self, dataset: &str, augmentation: &str, normalized: bool, classifier: &str) -> Option<&ConditionResult> {
        self.results.iter().find(|r| {
            r.dataset == dataset && r.augmentation == augmentation && r.normalized == normalized && r.classifier == classifier
        })
    }

    pub fn datasets(&self) -> Vec<&str> {
        unique(self.results.iter().map(|r| r.dataset.as_str()))
    }

    pub fn classifiers(&self) -> Vec<&str> {
        unique(self.results.iter().map(|r| r.classifier.as_str()))
    }

    pub fn augmentations(&self, dataset: &str) -> Vec<&str> {
        unique(self.results.iter().filter(|r| r.dataset == dataset).map(|r| r.augmentation.as_str()))
    }
}

fn unique<'a>(it: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for s in it {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// Hex SHA-256 of a JSON value's compact serialization.
pub fn config_hash(value: &serde_json::Value) -> String {
    let digest = Sha256::digest(value.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// What one `run_matrix` call evaluates.
#[derive(Debug, Clone)]
pub struct MatrixSpec<'a> {
    pub dataset: &'a str,
    pub attacks: &'a [AttackKind],
    pub field: FieldSelector,
    pub master_seed: u64,
}

fn normalize_input(input: &RecordInput, config: &NormalizerConfig) -> RecordInput {
    match input {
        RecordInput::Text(t) => RecordInput::Text(normalize_text(t, config)),
        RecordInput::Pair { premise, hypothesis } => RecordInput::Pair {
            premise: normalize_text(premise, config),
            hypothesis: normalize_text(hypothesis, config),
        },
    }
}

/// Scores every condition of one dataset with one classifier: baseline,
/// normalized baseline, then each attack with and without normalization.
/// Conditions run in parallel; results come back in that fixed order.
pub fn run_matrix(
    records: &[EvalRecord],
    spec: &MatrixSpec<'_>,
    classifier: &ClassifierHandle,
    config: &NormalizerConfig,
) -> Result<Vec<ConditionResult>, EvalError> {
    if records.is_empty() {
        return Err(EvalError::Empty(spec.dataset.to_string()));
    }
    let mut sources: Vec<Option<AttackKind>> = vec![None];
    sources.extend(spec.attacks.iter().copied().map(Some));

    let inputs: Vec<Vec<RecordInput>> = sources
        .par_iter()
        .map(|kind| match kind {
            None => Ok(records.iter().map(|r| r.input.clone()).collect()),
            Some(kind) => {
                let plan = SeedPlan::PerRecord { kind: *kind, master_seed: spec.master_seed };
                records
                    .par_iter()
                    .enumerate()
                    .map(|(i, r)| attack_record(r, i, &plan, spec.field).map(|a| a.record.input))
                    .collect::<Result<Vec<_>, _>>()
            }
        })
        .collect::<Result<_, AttackError>>()?;

    let conditions: Vec<(usize, bool)> = (0..sources.len()).flat_map(|s| [(s, false), (s, true)]).collect();
    conditions
        .par_iter()
        .map(|&(s, normalized)| {
            let augmentation = sources[s].map_or(BASELINE.to_string(), |k| k.as_str().to_string());
            let requests: Vec<(String, RecordInput)> = records
                .iter()
                .zip(&inputs[s])
                .map(|(r, input)| (r.id.clone(), if normalized { normalize_input(input, config) } else { input.clone() }))
                .collect();
            let started = Instant::now();
            let predictions = classifier.predict_batch(&requests);
            log::debug!("{}/{augmentation} normalized={normalized}: scored in {:?}", spec.dataset, started.elapsed());
            let mut correct = 0;
            let mut failed = Vec::new();
            for (record, p) in records.iter().zip(predictions) {
                match p {
                    Ok(p) if p.label == record.label => correct += 1,
                    Ok(_) => {}
                    Err(e) => {
                        log::warn!("record {}: {e}", record.id);
                        failed.push((record.id.clone(), e));
                    }
                }
            }
            let n_total = records.len();
            if failed.len() as f64 > FAILURE_BUDGET * n_total as f64 || failed.len() == n_total {
                let (first_id, first_error) = failed.swap_remove(0);
                return Err(EvalError::ConditionAborted {
                    dataset: spec.dataset.to_string(),
                    augmentation,
                    normalized,
                    classifier: classifier.name().to_string(),
                    failed: failed.len() + 1,
                    n: n_total,
                    first_id,
                    first_error: Box::new(first_error),
                });
            }
            let n = n_total - failed.len();
            Ok(ConditionResult {
                dataset: spec.dataset.to_string(),
                augmentation,
                normalized,
                classifier: classifier.name().to_string(),
                metric: correct as f64 / n as f64,
                n,
                correct,
                errors: failed.len(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub texts: usize,
    /// Examples per second of each run, in run order.
    pub runs: Vec<f64>,
    pub median: f64,
}

/// Single-threaded normalization rate over `corpus`, median of `runs` runs.
pub fn throughput_bench_runs<S: AsRef<str>>(corpus: &[S], config: &NormalizerConfig, runs: usize) -> BenchResult {
    let mut rates: Vec<f64> = (0..runs.max(1))
        .map(|_| {
            let started = Instant::now();
            for text in corpus {
                std::hint::black_box(crate::normalizer::normalize(text.as_ref(), config));
            }
            let secs = started.elapsed().as_secs_f64().max(1e-9);
            corpus.len() as f64 / secs
        })
        .collect();
    let runs = rates.clone();
    rates.sort_by(f64::total_cmp);
    BenchResult { texts: corpus.len(), runs, median: rates[rates.len() / 2] }
}

/// Median of five runs, in examples per second.
pub fn throughput_bench<S: AsRef<str>>(corpus: &[S], config: &NormalizerConfig) -> f64 {
    throughput_bench_runs(corpus, config, 5).median
}
