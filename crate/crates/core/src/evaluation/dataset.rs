//! Evaluation records and the JSONL / CSV dataset loaders.

use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};
use thiserror::Error;

use crate::labels::{Label, Task};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: label '{label}' is not a valid {task} label")]
    UnknownLabel { line: usize, label: String, task: Task },
    #[error("line {line}: missing field '{field}'")]
    MissingField { line: usize, field: &'static str },
    #[error("unknown dataset schema '{0}' (expected binary_jsonl, nli_jsonl, csv or auto)")]
    UnknownSchema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordInput {
    Text(String),
    Pair { premise: String, hypothesis: String },
}

/// One labelled example. Unknown JSON fields ride along in `extra` and are
/// written back unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub id: String,
    pub input: RecordInput,
    pub label: Label,
    pub extra: Map<String, Value>,
}

impl EvalRecord {
    pub fn binary(id: impl Into<String>, text: impl Into<String>, label: Label) -> Self {
        debug_assert_eq!(label.task(), Task::Binary);
        EvalRecord { id: id.into(), input: RecordInput::Text(text.into()), label, extra: Map::new() }
    }

    pub fn nli(id: impl Into<String>, premise: impl Into<String>, hypothesis: impl Into<String>, label: Label) -> Self {
        debug_assert_eq!(label.task(), Task::Nli);
        EvalRecord {
            id: id.into(),
            input: RecordInput::Pair { premise: premise.into(), hypothesis: hypothesis.into() },
            label,
            extra: Map::new(),
        }
    }

    pub fn task(&self) -> Task {
        match self.input {
            RecordInput::Text(_) => Task::Binary,
            RecordInput::Pair { .. } => Task::Nli,
        }
    }

    /// Builds a record from a parsed JSON object. `expect` pins the task;
    /// `None` infers it from the fields present.
    pub fn from_json(value: Value, expect: Option<Task>, line: usize) -> Result<Self, DatasetError> {
        let Value::Object(mut obj) = value else {
            return Err(DatasetError::Parse { line, message: "expected a JSON object".into() });
        };
        let take_str = |obj: &mut Map<String, Value>, field: &'static str| -> Result<Option<String>, DatasetError> {
            match obj.shift_remove(field) {
                None | Some(Value::Null) => Ok(None),
                Some(Value::String(s)) => Ok(Some(s)),
                Some(Value::Number(n)) if field == "id" || field == "label" => Ok(Some(n.to_string())),
                Some(Value::Bool(b)) if field == "label" => Ok(Some(b.to_string())),
                Some(other) => Err(DatasetError::Parse { line, message: format!("field '{field}' must be a string, got {other}") }),
            }
        };
        let id = take_str(&mut obj, "id")?.ok_or(DatasetError::MissingField { line, field: "id" })?;
        let text = take_str(&mut obj, "text")?;
        let premise = take_str(&mut obj, "premise")?;
        let hypothesis = take_str(&mut obj, "hypothesis")?;
        let label = take_str(&mut obj, "label")?.ok_or(DatasetError::MissingField { line, field: "label" })?;
        let task = match expect {
            Some(t) => t,
            None if text.is_some() => Task::Binary,
            None if premise.is_some() || hypothesis.is_some() => Task::Nli,
            None => return Err(DatasetError::MissingField { line, field: "text" }),
        };
        let input = match task {
            Task::Binary => {
                if premise.is_some() || hypothesis.is_some() {
                    return Err(DatasetError::Parse { line, message: "binary record must not carry premise/hypothesis".into() });
                }
                RecordInput::Text(text.ok_or(DatasetError::MissingField { line, field: "text" })?)
            }
            Task::Nli => {
                if text.is_some() {
                    return Err(DatasetError::Parse { line, message: "nli record must not carry text".into() });
                }
                RecordInput::Pair {
                    premise: premise.ok_or(DatasetError::MissingField { line, field: "premise" })?,
                    hypothesis: hypothesis.ok_or(DatasetError::MissingField { line, field: "hypothesis" })?,
                }
            }
        };
        let label = Label::parse(&label, task).ok_or(DatasetError::UnknownLabel { line, label, task })?;
        Ok(EvalRecord { id, input, label, extra: obj })
    }

    pub fn from_json_line(line_text: &str, expect: Option<Task>, line: usize) -> Result<Self, DatasetError> {
        let value: Value = serde_json::from_str(line_text).map_err(|e| DatasetError::Parse { line, message: e.to_string() })?;
        Self::from_json(value, expect, line)
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("id".into(), Value::String(self.id.clone()));
        match &self.input {
            RecordInput::Text(t) => {
                obj.insert("text".into(), Value::String(t.clone()));
            }
            RecordInput::Pair { premise, hypothesis } => {
                obj.insert("premise".into(), Value::String(premise.clone()));
                obj.insert("hypothesis".into(), Value::String(hypothesis.clone()));
            }
        }
        obj.insert("label".into(), Value::String(self.label.as_str().into()));
        for (k, v) in &self.extra {
            obj.insert(k.clone(), v.clone());
        }
        Value::Object(obj)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetSchema {
    BinaryJsonl,
    NliJsonl,
    Csv,
    /// JSONL with the task inferred per line, or CSV by file extension.
    Auto,
}

impl FromStr for DatasetSchema {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary_jsonl" => Ok(DatasetSchema::BinaryJsonl),
            "nli_jsonl" => Ok(DatasetSchema::NliJsonl),
            "csv" => Ok(DatasetSchema::Csv),
            "auto" => Ok(DatasetSchema::Auto),
            other => Err(DatasetError::UnknownSchema(other.to_string())),
        }
    }
}

/// Lazily parses JSONL records; blank lines are skipped.
pub fn read_jsonl<R: BufRead>(reader: R, expect: Option<Task>) -> impl Iterator<Item = Result<EvalRecord, DatasetError>> {
    reader.lines().enumerate().filter_map(move |(i, line)| {
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(DatasetError::Io(e))),
        };
        if line.trim().is_empty() {
            return None;
        }
        Some(EvalRecord::from_json_line(&line, expect, i + 1))
    })
}

pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Vec<EvalRecord>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| DatasetError::Parse { line: 1, message: e.to_string() })?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (id_col, label_col) = (col("id"), col("label"));
    let task = if col("text").is_some() { Task::Binary } else { Task::Nli };
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| DatasetError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let get = |c: Option<usize>, field: &'static str| {
            c.and_then(|c| row.get(c)).map(str::to_string).ok_or(DatasetError::MissingField { line, field })
        };
        let id = get(id_col, "id")?;
        let label = get(label_col, "label")?;
        let label_parsed = Label::parse(&label, task).ok_or(DatasetError::UnknownLabel { line, label, task })?;
        let input = match task {
            Task::Binary => RecordInput::Text(get(col("text"), "text")?),
            Task::Nli => RecordInput::Pair { premise: get(col("premise"), "premise")?, hypothesis: get(col("hypothesis"), "hypothesis")? },
        };
        out.push(EvalRecord { id, input, label: label_parsed, extra: Map::new() });
    }
    Ok(out)
}

/// Loads a dataset file in file order.
pub fn load_dataset(path: impl AsRef<Path>, schema: DatasetSchema) -> Result<Vec<EvalRecord>, DatasetError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let schema = match schema {
        DatasetSchema::Auto if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => DatasetSchema::Csv,
        s => s,
    };
    match schema {
        DatasetSchema::Csv => read_csv(reader),
        DatasetSchema::BinaryJsonl => read_jsonl(reader, Some(Task::Binary)).collect(),
        DatasetSchema::NliJsonl => read_jsonl(reader, Some(Task::Nli)).collect(),
        DatasetSchema::Auto => read_jsonl(reader, None).collect(),
    }
}
