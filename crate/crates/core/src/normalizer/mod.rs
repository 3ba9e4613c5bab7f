//! The adversarial text normalizer: a fixed-order pipeline of reversal
//! passes (zero-width strip, confusable mapping, insertion collapse,
//! censorship decoding) that returns the normalized text together with an
//! edit trace against the original input.
//!
//! New reversal passes slot into [`Pass`]; the pipeline runs enabled passes
//! in the order of [`Pass::ALL`].

mod passes;
mod trace;

use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mappings::{CharClassSet, ConfusableTable, TableError};

pub use passes::{censor_match, is_url_like};
pub use trace::replay_edits;

use trace::{apply_local, LocalEdit, Trace};

const BUILTIN_CENSOR_LEXICON: &str = include_str!("../../data/censor_lexicon.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pass {
    ZeroWidth,
    Confusables,
    InsertionCollapse,
    Censorship,
}

impl Pass {
    /// Canonical execution order.
    pub const ALL: [Pass; 4] = [Pass::ZeroWidth, Pass::Confusables, Pass::InsertionCollapse, Pass::Censorship];

    pub fn as_str(self) -> &'static str {
        match self {
            Pass::ZeroWidth => "zero_width",
            Pass::Confusables => "confusables",
            Pass::InsertionCollapse => "insertion_collapse",
            Pass::Censorship => "censorship",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pass {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pass::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| ConfigError::UnknownPass(s.to_string()))
    }
}

/// A subset of passes, always iterated in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PassSet(u8);

impl PassSet {
    pub const fn none() -> Self {
        PassSet(0)
    }

    pub fn all() -> Self {
        Pass::ALL.into_iter().collect()
    }

    pub fn contains(self, pass: Pass) -> bool {
        self.0 & pass.bit() != 0
    }

    pub fn insert(&mut self, pass: Pass) {
        self.0 |= pass.bit();
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Pass> {
        Pass::ALL.into_iter().filter(move |p| self.contains(*p))
    }

    /// Parses a comma-separated list; the empty string is the empty set.
    pub fn parse_list(list: &str) -> Result<Self, ConfigError> {
        let mut set = PassSet::none();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            set.insert(name.parse()?);
        }
        Ok(set)
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self, ConfigError> {
        let mut set = PassSet::none();
        for name in names {
            set.insert(name.as_ref().trim().parse()?);
        }
        Ok(set)
    }
}

impl Default for PassSet {
    fn default() -> Self {
        PassSet::all()
    }
}

impl FromIterator<Pass> for PassSet {
    fn from_iter<I: IntoIterator<Item = Pass>>(iter: I) -> Self {
        let mut set = PassSet::none();
        for p in iter {
            set.insert(p);
        }
        set
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("interior punctuation threshold must be at least 1")]
    Threshold,
    #[error("unknown pass '{0}' (expected one of zero_width, confusables, insertion_collapse, censorship)")]
    UnknownPass(String),
    #[error("censor lexicon line {line}: '{word}' must be lowercase ASCII letters, at least 3 long")]
    LexiconWord { line: usize, word: String },
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Confusable mappings and character classes shared by every config built
/// from them.
#[derive(Debug)]
pub struct NormalizerTables {
    confusables: ConfusableTable,
    classes: CharClassSet,
    ids: Vec<String>,
}

impl NormalizerTables {
    pub fn new(tables: &[ConfusableTable], classes: CharClassSet) -> Result<Self, TableError> {
        let ids = tables.iter().map(|t| format!("{}@{}", t.name(), t.version())).collect();
        Ok(NormalizerTables {
            confusables: ConfusableTable::merged("normalizer", tables)?,
            classes,
            ids,
        })
    }

    pub fn builtin() -> Arc<NormalizerTables> {
        static TABLES: OnceLock<Arc<NormalizerTables>> = OnceLock::new();
        TABLES
            .get_or_init(|| {
                let parts = ConfusableTable::builtin_parts();
                Arc::new(NormalizerTables {
                    confusables: ConfusableTable::builtin().clone(),
                    classes: CharClassSet::builtin().clone(),
                    ids: parts.iter().map(|t| format!("{}@{}", t.name(), t.version())).collect(),
                })
            })
            .clone()
    }

    pub fn confusables(&self) -> &ConfusableTable {
        &self.confusables
    }

    pub fn classes(&self) -> &CharClassSet {
        &self.classes
    }

    /// `name@version` of each source table.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}

/// Validates and normalizes one censorship lexicon word.
fn check_lexicon_word(line: usize, word: &str) -> Result<String, ConfigError> {
    let w = word.trim();
    if w.len() >= 3 && w.bytes().all(|b| b.is_ascii_lowercase()) {
        Ok(w.to_string())
    } else {
        Err(ConfigError::LexiconWord { line, word: w.to_string() })
    }
}

/// Reads a lexicon file: one lowercase word per line, `#` comments.
/// Duplicates are dropped, first occurrence keeps its position.
pub fn parse_lexicon<R: BufRead>(reader: R) -> Result<Vec<String>, ConfigError> {
    let mut words: Vec<String> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let w = check_lexicon_word(i + 1, t)?;
        if !words.contains(&w) {
            words.push(w);
        }
    }
    Ok(words)
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Vec<String>, ConfigError> {
    let file = std::fs::File::open(path)?;
    parse_lexicon(std::io::BufReader::new(file))
}

/// The sample censorship lexicon shipped in `data/censor_lexicon.txt`.
pub fn builtin_censor_lexicon() -> Vec<String> {
    parse_lexicon(BUILTIN_CENSOR_LEXICON.as_bytes()).expect("built-in lexicon is valid")
}

/// Validated normalizer configuration. Immutable once built.
#[derive(Debug, Clone)]
pub struct NormalizerConfig {
    threshold: usize,
    url_detection: bool,
    censor_lexicon: Arc<[String]>,
    passes: PassSet,
    tables: Arc<NormalizerTables>,
}

impl Default for NormalizerConfig {
    /// Built-in tables, all passes, threshold 2, URL detection on and an
    /// empty censorship lexicon.
    fn default() -> Self {
        NormalizerConfig {
            threshold: 2,
            url_detection: true,
            censor_lexicon: Arc::from(Vec::new()),
            passes: PassSet::all(),
            tables: NormalizerTables::builtin(),
        }
    }
}

impl NormalizerConfig {
    pub fn builder() -> NormalizerConfigBuilder {
        NormalizerConfigBuilder::default()
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn url_detection(&self) -> bool {
        self.url_detection
    }

    pub fn censor_lexicon(&self) -> &[String] {
        &self.censor_lexicon
    }

    pub fn passes(&self) -> PassSet {
        self.passes
    }

    pub fn tables(&self) -> &Arc<NormalizerTables> {
        &self.tables
    }

    /// Same config with a different pass set.
    pub fn with_passes(&self, passes: PassSet) -> Self {
        NormalizerConfig { passes, ..self.clone() }
    }

    /// Serializable summary, used for config hashing and reports.
    pub fn settings(&self) -> NormalizerSettings {
        NormalizerSettings {
            interior_punct_threshold: self.threshold,
            url_detection: self.url_detection,
            censor_lexicon: self.censor_lexicon.to_vec(),
            enabled_passes: self.passes.iter().collect(),
            tables: self.tables.ids.clone(),
            char_classes: format!("{}@{}", self.tables.classes.name(), self.tables.classes.version()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizerSettings {
    pub interior_punct_threshold: usize,
    pub url_detection: bool,
    pub censor_lexicon: Vec<String>,
    pub enabled_passes: Vec<Pass>,
    pub tables: Vec<String>,
    pub char_classes: String,
}

#[derive(Debug, Default)]
pub struct NormalizerConfigBuilder {
    threshold: Option<usize>,
    url_detection: Option<bool>,
    lexicon: Option<Vec<String>>,
    passes: Option<PassSet>,
    tables: Option<Arc<NormalizerTables>>,
}

impl NormalizerConfigBuilder {
    pub fn threshold(mut self, threshold: usize) -> Self {
        self.threshold = Some(threshold);
        self
    }

    pub fn url_detection(mut self, on: bool) -> Self {
        self.url_detection = Some(on);
        self
    }

    pub fn censor_lexicon<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.lexicon = Some(words.into_iter().map(Into::into).collect());
        self
    }

    pub fn passes(mut self, passes: PassSet) -> Self {
        self.passes = Some(passes);
        self
    }

    pub fn tables(mut self, tables: Arc<NormalizerTables>) -> Self {
        self.tables = Some(tables);
        self
    }

    pub fn build(self) -> Result<NormalizerConfig, ConfigError> {
        let defaults = NormalizerConfig::default();
        let threshold = self.threshold.unwrap_or(defaults.threshold);
        if threshold == 0 {
            return Err(ConfigError::Threshold);
        }
        let mut lexicon: Vec<String> = Vec::new();
        for (i, w) in self.lexicon.unwrap_or_default().iter().enumerate() {
            let w = check_lexicon_word(i + 1, w)?;
            if !lexicon.contains(&w) {
                lexicon.push(w);
            }
        }
        Ok(NormalizerConfig {
            threshold,
            url_detection: self.url_detection.unwrap_or(defaults.url_detection),
            censor_lexicon: Arc::from(lexicon),
            passes: self.passes.unwrap_or(defaults.passes),
            tables: self.tables.unwrap_or(defaults.tables),
        })
    }
}

/// One change, in codepoint offsets of the text the edit list refers to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub replacement: String,
    pub pass: Pass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationResult {
    pub output: String,
    pub edits: Vec<Edit>,
}

fn run_pass(pass: Pass, chars: &[char], config: &NormalizerConfig) -> Vec<LocalEdit> {
    let classes = &config.tables.classes;
    match pass {
        Pass::ZeroWidth => passes::strip_zero_width(chars, classes),
        Pass::Confusables => passes::map_confusables(chars, &config.tables.confusables),
        Pass::InsertionCollapse => passes::collapse_insertions(chars, config),
        Pass::Censorship => passes::decode_censorship(chars, classes, &config.censor_lexicon),
    }
}

/// Runs the enabled passes in canonical order. Total on valid UTF-8.
pub fn normalize(text: &str, config: &NormalizerConfig) -> NormalizationResult {
    let mut chars: Vec<char> = text.chars().collect();
    let mut trace = Trace::new(&chars);
    for pass in config.passes.iter() {
        let edits = run_pass(pass, &chars, config);
        if edits.is_empty() {
            continue;
        }
        trace.apply(&chars, &edits, pass);
        chars = apply_local(&chars, &edits);
    }
    NormalizationResult {
        output: chars.into_iter().collect(),
        edits: trace.into_edits(),
    }
}

/// Output text only; skips nothing, the trace is cheap.
pub fn normalize_text(text: &str, config: &NormalizerConfig) -> String {
    normalize(text, config).output
}

fn single_pass(pass: Pass, text: &str, config: &NormalizerConfig) -> (String, Vec<Edit>) {
    let chars: Vec<char> = text.chars().collect();
    let local = run_pass(pass, &chars, config);
    let output = apply_local(&chars, &local).into_iter().collect();
    let edits = local
        .into_iter()
        .map(|e| Edit { start: e.start, end: e.end, replacement: e.replacement, pass })
        .collect();
    (output, edits)
}

/// Removes every zero-width codepoint of `classes`.
pub fn pass_strip_zero_width(text: &str, classes: &CharClassSet) -> (String, Vec<Edit>) {
    let chars: Vec<char> = text.chars().collect();
    let local = passes::strip_zero_width(&chars, classes);
    finish(Pass::ZeroWidth, &chars, local)
}

/// Replaces table sources left to right, longest match first.
pub fn pass_map_confusables(text: &str, table: &ConfusableTable) -> (String, Vec<Edit>) {
    let chars: Vec<char> = text.chars().collect();
    let local = passes::map_confusables(&chars, table);
    finish(Pass::Confusables, &chars, local)
}

pub fn pass_collapse_insertions(text: &str, config: &NormalizerConfig) -> (String, Vec<Edit>) {
    single_pass(Pass::InsertionCollapse, text, config)
}

pub fn pass_decode_censorship(text: &str, config: &NormalizerConfig) -> (String, Vec<Edit>) {
    single_pass(Pass::Censorship, text, config)
}

fn finish(pass: Pass, chars: &[char], local: Vec<LocalEdit>) -> (String, Vec<Edit>) {
    let output = apply_local(chars, &local).into_iter().collect();
    let edits = local
        .into_iter()
        .map(|e| Edit { start: e.start, end: e.end, replacement: e.replacement, pass })
        .collect();
    (output, edits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexicon_config(words: &[&str]) -> NormalizerConfig {
        NormalizerConfig::builder().censor_lexicon(words.iter().copied()).build().unwrap()
    }

    #[test]
    fn golden_rows() {
        let cfg = NormalizerConfig::default();
        let cases = [
            ("This is augmented text", "This is augmented text"),
            ("Th.i.s ,is ...a.ug;m!en't?ed, ,te!x.t", "This ,is ...augmented, ,text"),
            ("T h i s  is  a u g m e n t e d   text", "This is augmented text"),
            ("Thisis augmented text", "Thisis augmented text"),
            ("Th!s is @ugmented tex7", "Th!s is @ugmented tex7"),
            ("This is augmentde texht", "This is augmentde texht"),
            ("Th is is augment ed text", "Th is is augment ed text"),
        ];
        for (input, expected) in cases {
            assert_eq!(normalize(input, &cfg).output, expected, "input {input:?}");
        }
    }

    #[test]
    fn zero_width_pass() {
        let classes = CharClassSet::builtin();
        let (out, edits) = pass_strip_zero_width("T\u{200B}h\u{200B}is is augmented text", classes);
        assert_eq!(out, "This is augmented text");
        assert_eq!(edits.len(), 2);
        assert!(edits.iter().all(|e| e.pass == Pass::ZeroWidth && e.replacement.is_empty()));
        assert_eq!(pass_strip_zero_width("", classes).0, "");
        assert_eq!(pass_strip_zero_width("abc", classes), ("abc".to_string(), vec![]));
    }

    #[test]
    fn confusable_pass() {
        let t = ConfusableTable::builtin();
        assert_eq!(pass_map_confusables("Ｔｈｉｓ", t).0, "This");
        assert_eq!(pass_map_confusables("𝐓𝐡𝐢𝐬 𝐢𝐬 𝐚𝐮𝐠𝐦𝐞𝐧𝐭𝐞𝐝 𝐭𝐞𝐱𝐭", t).0, "This is augmented text");
        assert_eq!(pass_map_confusables("Th!s is @ugmented tex7", t).0, "Th!s is @ugmented tex7");
    }

    #[test]
    fn collapse_pass_tokens() {
        let cfg = NormalizerConfig::default();
        let collapse = |s: &str| pass_collapse_insertions(s, &cfg).0;
        assert_eq!(collapse("a.ug;m!en't?ed,"), "augmented,");
        assert_eq!(collapse(",is"), ",is");
        assert_eq!(collapse("don't"), "don't");
        assert_eq!(collapse("well-known"), "well-known");
        assert_eq!(collapse("see https://a.b.c/d?x=1 now"), "see https://a.b.c/d?x=1 now");
        assert_eq!(collapse("go to www.ex.am.ple.org now"), "go to www.ex.am.ple.org now");
        assert_eq!(collapse("x  y"), "xy");
        assert_eq!(collapse("a, b"), "a, b");
    }

    #[test]
    fn url_exemption_can_be_disabled() {
        let cfg = NormalizerConfig::builder().url_detection(false).build().unwrap();
        assert_eq!(pass_collapse_insertions("www.a.b.org", &cfg).0, "wwwaborg");
    }

    #[test]
    fn threshold_controls_collapse() {
        let cfg = NormalizerConfig::builder().threshold(1).build().unwrap();
        assert_eq!(normalize("don't", &cfg).output, "dont");
        let cfg = NormalizerConfig::builder().threshold(3).build().unwrap();
        assert_eq!(normalize("Th.i.s", &cfg).output, "Th.i.s");
        assert!(matches!(NormalizerConfig::builder().threshold(0).build(), Err(ConfigError::Threshold)));
    }

    #[test]
    fn censorship_examples() {
        let cfg = lexicon_config(&["kill"]);
        for (input, expected) in [
            ("k!ll", "kill"),
            ("k***", "kill"),
            ("k#*!", "kill"),
            ("kind", "kind"),
            ("kill", "kill"),
            ("K!ll them", "Kill them"),
            ("K!LL", "KILL"),
            ("(k***),", "(kill),"),
            ("k**l", "kill"),
        ] {
            assert_eq!(normalize(input, &cfg).output, expected, "{input}");
        }
        // without a lexicon nothing is decoded
        assert_eq!(normalize("k!ll", &NormalizerConfig::default()).output, "k!ll");
    }

    #[test]
    fn lexicon_validation() {
        assert!(NormalizerConfig::builder().censor_lexicon(["ab"]).build().is_err());
        assert!(NormalizerConfig::builder().censor_lexicon(["Kill"]).build().is_err());
        assert!(parse_lexicon("# c\nkill\n\nkill\nhate\n".as_bytes()).unwrap() == vec!["kill", "hate"]);
        assert!(matches!(parse_lexicon("kill\nk1ll\n".as_bytes()), Err(ConfigError::LexiconWord { line: 2, .. })));
        assert!(!builtin_censor_lexicon().is_empty());
    }

    #[test]
    fn empty_pass_set_is_identity() {
        let cfg = NormalizerConfig::default().with_passes(PassSet::none());
        let s = "T h i s\u{200B} 𝐢𝐬  k!ll";
        let r = normalize(s, &cfg);
        assert_eq!(r.output, s);
        assert!(r.edits.is_empty());
    }

    #[test]
    fn pass_set_parsing() {
        assert_eq!(PassSet::parse_list("").unwrap(), PassSet::none());
        let set = PassSet::parse_list("censorship, zero_width").unwrap();
        assert_eq!(set.iter().collect::<Vec<_>>(), vec![Pass::ZeroWidth, Pass::Censorship]);
        assert!(matches!(PassSet::parse_list("zero_width,bogus"), Err(ConfigError::UnknownPass(p)) if p == "bogus"));
    }

    #[test]
    fn trace_replays_through_all_passes() {
        let cfg = lexicon_config(&["kill"]);
        let input = "𝐓\u{200B}h.i.s  i s ⒜ k!ll Ｘ";
        let r = normalize(input, &cfg);
        assert_eq!(replay_edits(input, &r.edits).unwrap(), r.output);
        assert!(r.edits.windows(2).all(|w| w[0].end <= w[1].start));
    }
}
