use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::{json, Value};

use super::{ClassifierError, Prediction};
use crate::evaluation::RecordInput;
use crate::labels::{Label, Task};

#[derive(Debug, Clone)]
pub struct HttpConfig {
    /// Full URL the payloads are POSTed to (plain HTTP).
    pub endpoint: String,
    pub task: Task,
    pub timeout: Duration,
    /// Total attempts per request, including the first.
    pub attempts: u32,
    pub backoff: Duration,
    pub concurrency: usize,
}

impl HttpConfig {
    pub fn new(endpoint: impl Into<String>, task: Task) -> Self {
        HttpConfig {
            endpoint: endpoint.into(),
            task,
            timeout: Duration::from_secs(10),
            attempts: 3,
            backoff: Duration::from_millis(100),
            concurrency: 8,
        }
    }
}

#[derive(Debug, Deserialize)]
struct WireResponse {
    id: Value,
    #[serde(default)]
    label: Option<String>,
    score: Value,
}

#[derive(Clone)]
pub struct HttpClassifier {
    config: HttpConfig,
    agent: ureq::Agent,
}

impl std::fmt::Debug for HttpClassifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpClassifier").field("config", &self.config).finish()
    }
}

impl HttpClassifier {
    pub fn new(config: HttpConfig) -> Result<Self, ClassifierError> {
        if !config.endpoint.starts_with("http://") {
            return Err(ClassifierError::Config(format!("endpoint '{}' must be an http:// URL", config.endpoint)));
        }
        if config.attempts == 0 || config.concurrency == 0 {
            return Err(ClassifierError::Config("attempts and concurrency must be at least 1".into()));
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpClassifier { config, agent })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    fn payload(id: &str, input: &RecordInput) -> Value {
        match input {
            RecordInput::Text(text) => json!({ "id": id, "text": text }),
            RecordInput::Pair { premise, hypothesis } => json!({ "id": id, "premise": premise, "hypothesis": hypothesis }),
        }
    }

    fn attempt(&self, id: &str, body: &str) -> Result<Prediction, ClassifierError> {
        let started = Instant::now();
        let result = self
            .agent
            .post(&self.config.endpoint)
            .header("content-type", "application/json")
            .send(body);
        let mut response = match result {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => return Err(ClassifierError::Timeout),
            Err(e) => return Err(ClassifierError::Transport(e.to_string())),
        };
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(|e| match e {
            ureq::Error::Timeout(_) => ClassifierError::Timeout,
            other => ClassifierError::Transport(other.to_string()),
        })?;
        log::debug!("POST {} id={id} status={status} latency={:?}", self.config.endpoint, started.elapsed());
        if !(200..300).contains(&status) {
            return Err(ClassifierError::Status { status, body: text.chars().take(200).collect() });
        }
        self.parse(id, &text)
    }

    fn parse(&self, id: &str, text: &str) -> Result<Prediction, ClassifierError> {
        let wire: WireResponse = serde_json::from_str(text).map_err(|e| ClassifierError::Schema(e.to_string()))?;
        let got_id = match &wire.id {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            other => return Err(ClassifierError::Schema(format!("id must be a string, got {other}"))),
        };
        if got_id != id {
            return Err(ClassifierError::Schema(format!("response id '{got_id}' does not match request id '{id}'")));
        }
        let prediction = match (self.config.task, &wire.score) {
            (Task::Binary, Value::Number(n)) => Prediction::from_binary(n.as_f64().unwrap_or(f64::NAN))?,
            (Task::Nli, Value::Array(items)) if items.len() == 3 => {
                let mut dist = [0.0; 3];
                for (slot, v) in dist.iter_mut().zip(items) {
                    *slot = v.as_f64().ok_or_else(|| ClassifierError::Schema(format!("non-numeric score entry {v}")))?;
                }
                Prediction::from_distribution(dist)?
            }
            (task, other) => return Err(ClassifierError::Schema(format!("score {other} does not fit a {task} task"))),
        };
        if let Some(label) = &wire.label {
            match Label::parse(label, self.config.task) {
                Some(l) if l != prediction.label => {
                    log::warn!("id={id}: endpoint label '{label}' disagrees with score argmax '{}'", prediction.label)
                }
                Some(_) => {}
                None => return Err(ClassifierError::Schema(format!("unknown label '{label}'"))),
            }
        }
        Ok(prediction)
    }

    /// One request with retries on transport failures, timeouts and 5xx.
    pub fn score(&self, id: &str, input: &RecordInput) -> Result<Prediction, ClassifierError> {
        let body = Self::payload(id, input).to_string();
        let mut last = None;
        for attempt in 0..self.config.attempts {
            if attempt > 0 {
                std::thread::sleep(self.config.backoff * attempt);
            }
            match self.attempt(id, &body) {
                Ok(p) => return Ok(p),
                Err(e) if e.is_retriable() => {
                    log::debug!("id={id}: attempt {} failed: {e}", attempt + 1);
                    last = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(ClassifierError::Exhausted {
            attempts: self.config.attempts,
            last: Box::new(last.expect("at least one attempt")),
        })
    }

    /// Scores requests with at most `concurrency` in flight.
    pub fn score_batch(&self, requests: &[(String, RecordInput)]) -> Vec<Result<Prediction, ClassifierError>> {
        let slots: Vec<Mutex<Option<Result<Prediction, ClassifierError>>>> = requests.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.config.concurrency.min(requests.len());
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some((id, input)) = requests.get(i) else { break };
                    let r = self.score(id, input);
                    *slots[i].lock().expect("slot lock") = Some(r);
                });
            }
        });
        slots
            .into_iter()
            .map(|m| m.into_inner().expect("slot lock").expect("every slot filled"))
            .collect()
    }
}
