//! The `--config` file. Each section mirrors the flags of one subcommand;
//! `[normalizer]` is shared by every subcommand that normalizes.
//!
//! ```toml
//! [normalizer]
//! passes = "zero_width,confusables,insertion_collapse"
//! threshold = 2
//!
//! [evaluate]
//! datasets = ["data/demo_binary.jsonl"]
//! classifiers = ["toy"]
//! format = "json"
//! seed = 7
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub normalizer: NormalizerSection,
    pub normalize: NormalizeSection,
    pub attack: AttackSection,
    pub evaluate: EvaluateSection,
    pub bench: BenchSection,
    pub serve: ServeSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizerSection {
    /// Comma-separated pass names; "" disables every pass.
    pub passes: Option<String>,
    pub threshold: Option<usize>,
    pub url_detection: Option<bool>,
    /// Censorship lexicon file.
    pub lexicon: Option<PathBuf>,
    /// Confusable tables replacing the built-in ones.
    pub tables: Option<Vec<PathBuf>>,
    pub char_classes: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizeSection {
    pub input: Option<PathBuf>,
    pub trace: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackSection {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub kind: Option<String>,
    pub seed: Option<u64>,
    pub field: Option<String>,
    pub threads: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub datasets: Option<Vec<PathBuf>>,
    pub schema: Option<String>,
    pub attacks: Option<Vec<String>>,
    pub classifiers: Option<Vec<String>>,
    pub field: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub attempts: Option<u32>,
    pub timeout_ms: Option<u64>,
    pub concurrency: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub corpus: Option<PathBuf>,
    pub runs: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeSection {
    pub bind: Option<String>,
    pub port: Option<u16>,
    pub classifiers: Option<Vec<String>>,
    pub static_dir: Option<PathBuf>,
    pub sessions_file: Option<PathBuf>,
    pub max_attempts: Option<usize>,
    pub cors_origins: Option<Vec<String>>,
    pub attempts: Option<u32>,
    pub timeout_ms: Option<u64>,
    pub concurrency: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let cfg = FileConfig::parse("[normalizer]\npasses = \"\"\n[attack]\nseed = 3\nkind = \"merge_words\"\n").unwrap();
        assert_eq!(cfg.normalizer.passes.as_deref(), Some(""));
        assert_eq!(cfg.attack.seed, Some(3));
        assert!(cfg.evaluate.datasets.is_none());
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(FileConfig::parse("[attack]\nsede = 3\n").is_err());
        assert!(FileConfig::parse("[attak]\n").is_err());
    }
}
