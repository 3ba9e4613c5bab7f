use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// hate / nothate
    Binary,
    /// entailment / neutral / contradiction
    Nli,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Binary => "binary",
            Task::Nli => "nli",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    #[serde(rename = "nothate")]
    NotHate,
    Hate,
    Entailment,
    Neutral,
    Contradiction,
}

impl Label {
    /// NLI classes in distribution order.
    pub const NLI: [Label; 3] = [Label::Entailment, Label::Neutral, Label::Contradiction];

    pub fn task(self) -> Task {
        match self {
            Label::Hate | Label::NotHate => Task::Binary,
            _ => Task::Nli,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::NotHate => "nothate",
            Label::Hate => "hate",
            Label::Entailment => "entailment",
            Label::Neutral => "neutral",
            Label::Contradiction => "contradiction",
        }
    }

    /// Parses a label for `task`, accepting common aliases
    /// (`positive`/`negative`, `1`/`0`, `e`/`n`/`c`).
    pub fn parse(s: &str, task: Task) -> Option<Label> {
        let s = s.trim().to_ascii_lowercase();
        match task {
            Task::Binary => match s.as_str() {
                "hate" | "positive" | "1" | "true" => Some(Label::Hate),
                "nothate" | "not_hate" | "negative" | "0" | "false" => Some(Label::NotHate),
                _ => None,
            },
            Task::Nli => match s.as_str() {
                "entailment" | "e" => Some(Label::Entailment),
                "neutral" | "n" => Some(Label::Neutral),
                "contradiction" | "c" => Some(Label::Contradiction),
                _ => None,
            },
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
