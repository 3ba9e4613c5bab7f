//! Scoring backends: a lexicon classifier used as a predictable oracle and
//! a JSON-over-HTTP client for external model endpoints.

mod http;

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::RecordInput;
use crate::labels::{Label, Task};
use crate::mappings::CharClassSet;
use crate::normalizer::{parse_lexicon, ConfigError};

pub use http::{HttpClassifier, HttpConfig};

/// Binary probability of the positive class, or an NLI distribution in
/// (entailment, neutral, contradiction) order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Score {
    Binary(f64),
    Nli([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub score: Score,
}

impl Prediction {
    /// Label by argmax; a 0.5 binary score is a tie and goes negative.
    pub fn from_binary(score: f64) -> Result<Self, ClassifierError> {
        if !(0.0..=1.0).contains(&score) {
            return Err(ClassifierError::Schema(format!("binary score {score} is outside [0, 1]")));
        }
        let label = if score > 0.5 { Label::Hate } else { Label::NotHate };
        Ok(Prediction { label, score: Score::Binary(score) })
    }

    /// Label by argmax; ties prefer neutral, then entailment.
    pub fn from_distribution(dist: [f64; 3]) -> Result<Self, ClassifierError> {
        let sum: f64 = dist.iter().sum();
        if dist.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > 1e-9 {
            return Err(ClassifierError::Schema(format!("distribution {dist:?} is not a probability vector")));
        }
        let max = dist.iter().copied().fold(f64::MIN, f64::max);
        let idx = if dist[1] == max { 1 } else if dist[0] == max { 0 } else { 2 };
        Ok(Prediction { label: Label::NLI[idx], score: Score::Nli(dist) })
    }

    pub fn task(&self) -> Task {
        self.label.task()
    }
}

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("response schema mismatch: {0}")]
    Schema(String),
    #[error("input does not match the classifier's {0} task")]
    TaskMismatch(Task),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: Box<ClassifierError> },
    #[error("classifier configuration: {0}")]
    Config(String),
}

impl ClassifierError {
    pub fn is_retriable(&self) -> bool {
        match self {
            ClassifierError::Transport(_) | ClassifierError::Timeout => true,
            ClassifierError::Status { status, .. } => *status >= 500 || *status == 429,
            _ => false,
        }
    }

    /// True when the endpoint itself could not be reached or kept failing,
    /// as opposed to answering with something unusable.
    pub fn is_unavailable(&self) -> bool {
        match self {
            ClassifierError::Exhausted { last, .. } => last.is_unavailable(),
            other => other.is_retriable(),
        }
    }
}

/// Token-lexicon classifier. Tokens are split on whitespace and punctuation
/// and case-folded; zero-width and other codepoints stay inside tokens.
#[derive(Debug, Clone)]
pub struct LexiconClassifier {
    lexicon: Vec<String>,
}

impl LexiconClassifier {
    pub fn new<I, S>(words: I) -> Result<Self, ClassifierError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let lexicon: Vec<String> = words.into_iter().map(|w| w.into().to_lowercase()).collect();
        if lexicon.is_empty() {
            return Err(ClassifierError::Config("lexicon must not be empty".into()));
        }
        Ok(LexiconClassifier { lexicon })
    }

    /// The shipped toy lexicon.
    pub fn builtin() -> &'static LexiconClassifier {
        static TOY: OnceLock<LexiconClassifier> = OnceLock::new();
        TOY.get_or_init(|| {
            let words = parse_lexicon(include_str!("../../data/toy_lexicon.txt").as_bytes()).expect("shipped lexicon parses");
            LexiconClassifier::new(words).expect("shipped lexicon is non-empty")
        })
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self, ClassifierError> {
        let words = crate::normalizer::load_lexicon(path).map_err(|e: ConfigError| ClassifierError::Config(e.to_string()))?;
        LexiconClassifier::new(words)
    }

    pub fn lexicon(&self) -> &[String] {
        &self.lexicon
    }

    pub fn hits(&self, text: &str) -> usize {
        let classes = CharClassSet::builtin();
        text.split(|c: char| classes.is_whitespace(c) || classes.is_punctuation(c))
            .filter(|t| !t.is_empty())
            .filter(|t| {
                let folded = t.to_lowercase();
                self.lexicon.contains(&folded)
            })
            .count()
    }

    /// Positive iff any lexicon word occurs as a token; score = min(1, hits/2).
    pub fn score(&self, text: &str) -> Prediction {
        let hits = self.hits(text);
        Prediction {
            label: if hits > 0 { Label::Hate } else { Label::NotHate },
            score: Score::Binary((hits as f64 / 2.0).min(1.0)),
        }
    }
}

/// Scores `text` against an ad-hoc lexicon.
pub fn score_builtin(text: &str, lexicon: &[&str]) -> Result<Prediction, ClassifierError> {
    Ok(LexiconClassifier::new(lexicon.iter().copied())?.score(text))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    BuiltinLexicon,
    ExternalHttp,
}

#[derive(Debug, Clone)]
enum Backend {
    Lexicon(LexiconClassifier),
    Http(HttpClassifier),
}

/// A named classifier bound to one task.
#[derive(Debug, Clone)]
pub struct ClassifierHandle {
    name: String,
    task: Task,
    backend: Backend,
}

impl ClassifierHandle {
    pub fn lexicon(name: impl Into<String>, classifier: LexiconClassifier) -> Self {
        ClassifierHandle { name: name.into(), task: Task::Binary, backend: Backend::Lexicon(classifier) }
    }

    pub fn toy() -> Self {
        Self::lexicon("toy_lexicon", LexiconClassifier::builtin().clone())
    }

    pub fn http(name: impl Into<String>, config: HttpConfig) -> Result<Self, ClassifierError> {
        let task = config.task;
        Ok(ClassifierHandle { name: name.into(), task, backend: Backend::Http(HttpClassifier::new(config)?) })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn backend(&self) -> BackendKind {
        match self.backend {
            Backend::Lexicon(_) => BackendKind::BuiltinLexicon,
            Backend::Http(_) => BackendKind::ExternalHttp,
        }
    }

    pub fn predict(&self, id: &str, input: &RecordInput) -> Result<Prediction, ClassifierError> {
        self.check_task(input)?;
        match &self.backend {
            Backend::Lexicon(l) => match input {
                RecordInput::Text(t) => Ok(l.score(t)),
                RecordInput::Pair { .. } => unreachable!("checked above"),
            },
            Backend::Http(h) => h.score(id, input),
        }
    }

    /// Scores a batch; the result at index i belongs to request i.
    pub fn predict_batch(&self, requests: &[(String, RecordInput)]) -> Vec<Result<Prediction, ClassifierError>> {
        match &self.backend {
            Backend::Lexicon(_) => requests.iter().map(|(id, input)| self.predict(id, input)).collect(),
            Backend::Http(h) => {
                let checked: Vec<Option<ClassifierError>> = requests.iter().map(|(_, i)| self.check_task(i).err()).collect();
                let mut results = h.score_batch(requests);
                for (r, err) in results.iter_mut().zip(checked) {
                    if let Some(e) = err {
                        *r = Err(e);
                    }
                }
                results
            }
        }
    }

    fn check_task(&self, input: &RecordInput) -> Result<(), ClassifierError> {
        let task = match input {
            RecordInput::Text(_) => Task::Binary,
            RecordInput::Pair { .. } => Task::Nli,
        };
        if task == self.task {
            Ok(())
        } else {
            Err(ClassifierError::TaskMismatch(self.task))
        }
    }
}

impl fmt::Display for ClassifierHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} {:?})", self.name, self.task, self.backend())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_examples() {
        let p = score_builtin("I will kill you", &["kill"]).unwrap();
        assert_eq!((p.label, p.score), (Label::Hate, Score::Binary(0.5)));
        let p = score_builtin("k\u{200B}ill them", &["kill"]).unwrap();
        assert_eq!(p.label, Label::NotHate);
        let p = score_builtin("hello world", &["kill"]).unwrap();
        assert_eq!((p.label, p.score), (Label::NotHate, Score::Binary(0.0)));
        let p = score_builtin("KILL, kill! kill", &["kill"]).unwrap();
        assert_eq!(p.score, Score::Binary(1.0));
        assert!(score_builtin("x", &[]).is_err());
    }

    #[test]
    fn punctuation_delimits_tokens() {
        let c = LexiconClassifier::new(["scum"]).unwrap();
        assert_eq!(c.hits("(scum)"), 1);
        assert_eq!(c.hits("s.cum"), 0);
        assert_eq!(c.hits("scumbag"), 0);
    }

    #[test]
    fn argmax_and_ties() {
        assert_eq!(Prediction::from_distribution([0.2, 0.5, 0.3]).unwrap().label, Label::Neutral);
        assert_eq!(Prediction::from_distribution([0.4, 0.4, 0.2]).unwrap().label, Label::Neutral);
        assert_eq!(Prediction::from_distribution([0.4, 0.2, 0.4]).unwrap().label, Label::Entailment);
        assert_eq!(Prediction::from_distribution([0.1, 0.2, 0.7]).unwrap().label, Label::Contradiction);
        assert!(Prediction::from_distribution([0.5, 0.5, 0.5]).is_err());
        assert_eq!(Prediction::from_binary(0.9).unwrap().label, Label::Hate);
        assert_eq!(Prediction::from_binary(0.5).unwrap().label, Label::NotHate);
        assert!(Prediction::from_binary(1.5).is_err());
    }

    #[test]
    fn handle_rejects_wrong_task() {
        let h = ClassifierHandle::toy();
        let pair = RecordInput::Pair { premise: "a".into(), hypothesis: "b".into() };
        assert!(matches!(h.predict("1", &pair), Err(ClassifierError::TaskMismatch(Task::Binary))));
    }
}
