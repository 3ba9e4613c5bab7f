//! Seeded generators for character-level augmentations.
//!
//! Parameters and positions come from two independent ChaCha streams keyed
//! by the spec's seed, and positions are drawn left to right, so an attack
//! is a pure function of `(text, spec)`.

mod fonts;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evaluation::{EvalRecord, RecordInput};
use crate::labels::Task;
use crate::mappings::{CharClassSet, ConfusableTable, MANDATORY_ZERO_WIDTH};

pub use fonts::Font;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    InsertPunctuationChars,
    InsertWhitespaceChars,
    InsertZeroWidthChars,
    MergeWords,
    ReplaceFunFonts,
    ReplaceSimilarChars,
    ReplaceSimilarUnicodeChars,
    SimulateTypos,
    SplitWords,
}

impl AttackKind {
    pub const ALL: [AttackKind; 9] = [
        AttackKind::InsertPunctuationChars,
        AttackKind::InsertWhitespaceChars,
        AttackKind::InsertZeroWidthChars,
        AttackKind::MergeWords,
        AttackKind::ReplaceFunFonts,
        AttackKind::ReplaceSimilarChars,
        AttackKind::ReplaceSimilarUnicodeChars,
        AttackKind::SimulateTypos,
        AttackKind::SplitWords,
    ];

    /// Kinds the normalizer undoes exactly on clean text.
    pub const REVERSIBLE: [AttackKind; 3] =
        [AttackKind::InsertZeroWidthChars, AttackKind::ReplaceFunFonts, AttackKind::ReplaceSimilarUnicodeChars];

    /// Kinds the normalizer deliberately leaves alone.
    pub const UNCOVERED: [AttackKind; 4] =
        [AttackKind::MergeWords, AttackKind::ReplaceSimilarChars, AttackKind::SimulateTypos, AttackKind::SplitWords];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackKind::InsertPunctuationChars => "insert_punctuation_chars",
            AttackKind::InsertWhitespaceChars => "insert_whitespace_chars",
            AttackKind::InsertZeroWidthChars => "insert_zero_width_chars",
            AttackKind::MergeWords => "merge_words",
            AttackKind::ReplaceFunFonts => "replace_fun_fonts",
            AttackKind::ReplaceSimilarChars => "replace_similar_chars",
            AttackKind::ReplaceSimilarUnicodeChars => "replace_similar_unicode_chars",
            AttackKind::SimulateTypos => "simulate_typos",
            AttackKind::SplitWords => "split_words",
        }
    }

    pub fn names() -> String {
        Self::ALL.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", ")
    }

    fn tag(self) -> u64 {
        Self::ALL.iter().position(|k| *k == self).expect("kind in ALL") as u64 + 1
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackKind {
    type Err = AttackError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| AttackError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("unknown attack kind '{0}' (expected one of: {names})", names = AttackKind::names())]
    UnknownKind(String),
    #[error("invalid attack parameter: {0}")]
    InvalidParams(String),
    #[error("unknown field selector '{0}' (expected text, premise, hypothesis, both or auto)")]
    UnknownField(String),
    #[error("record {id}: field selector '{field}' does not apply to a {task} record")]
    FieldMismatch { id: String, field: FieldSelector, task: Task },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Char,
    Word,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackParams {
    pub aug_p: f64,
    pub aug_word_p: f64,
    pub aug_char_p: f64,
    pub granularity: Granularity,
    pub vary_fonts: bool,
}

impl AttackParams {
    pub const AUG_P: (f64, f64) = (0.3, 1.0);
    pub const AUG_WORD_P: (f64, f64) = (0.3, 1.0);
    pub const AUG_CHAR_P: (f64, f64) = (0.1, 0.4);

    /// Checks that every probability lies in [0, 1]. Hand-written params may
    /// leave the sampling ranges (e.g. zeros to disable an attack).
    pub fn validate(&self) -> Result<(), AttackError> {
        for (name, p) in [("aug_p", self.aug_p), ("aug_word_p", self.aug_word_p), ("aug_char_p", self.aug_char_p)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(AttackError::InvalidParams(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// True when every field lies in the sampling ranges.
    pub fn in_sampling_ranges(&self) -> bool {
        let within = |p: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&p);
        within(self.aug_p, Self::AUG_P) && within(self.aug_word_p, Self::AUG_WORD_P) && within(self.aug_char_p, Self::AUG_CHAR_P)
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws every parameter uniformly from its range or choice list.
pub fn sample_params(seed: u64) -> AttackParams {
    let mut rng = rng_for(seed, 0);
    let aug_p = rng.random_range(AttackParams::AUG_P.0..=AttackParams::AUG_P.1);
    let aug_word_p = rng.random_range(AttackParams::AUG_WORD_P.0..=AttackParams::AUG_WORD_P.1);
    let aug_char_p = rng.random_range(AttackParams::AUG_CHAR_P.0..=AttackParams::AUG_CHAR_P.1);
    let granularity = *[Granularity::Char, Granularity::Word, Granularity::All].choose(&mut rng).expect("non-empty");
    let vary_fonts = rng.random_bool(0.5);
    AttackParams { aug_p, aug_word_p, aug_char_p, granularity, vary_fonts }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-record seed; independent of processing order.
pub fn derive_seed(master_seed: u64, index: u64, kind: AttackKind) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ index) ^ kind.tag())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub params: AttackParams,
    pub seed: u64,
}

impl AttackSpec {
    /// Spec with parameters sampled from `seed`.
    pub fn sampled(kind: AttackKind, seed: u64) -> Self {
        AttackSpec { kind, params: sample_params(seed), seed }
    }

    pub fn for_record(kind: AttackKind, master_seed: u64, index: u64) -> Self {
        Self::sampled(kind, derive_seed(master_seed, index, kind))
    }
}

const PUNCTUATION_POOL: [char; 6] = ['.', ',', ';', '!', '?', '\''];

fn similar_chars(c: char) -> &'static [char] {
    match c {
        'a' | 'A' => &['@', '4'],
        'b' | 'B' => &['8'],
        'e' | 'E' => &['3'],
        'g' => &['9'],
        'G' => &['6'],
        'i' | 'I' => &['!', '1'],
        'l' | 'L' => &['1'],
        'o' | 'O' => &['0'],
        's' | 'S' => &['5', '$'],
        't' | 'T' => &['7'],
        'z' | 'Z' => &['2'],
        _ => &[],
    }
}

fn qwerty_neighbors(c: char) -> &'static str {
    match c {
        'q' => "was",
        'w' => "qeasd",
        'e' => "wrsdf",
        'r' => "etdfg",
        't' => "ryfgh",
        'y' => "tughj",
        'u' => "yihjk",
        'i' => "uojkl",
        'o' => "ipkl",
        'p' => "ol",
        'a' => "qwszx",
        's' => "qweadzxc",
        'd' => "wersfxcv",
        'f' => "ertdgcvb",
        'g' => "rtyfhvbn",
        'h' => "tyugjbnm",
        'j' => "yuihknm",
        'k' => "uiojlm",
        'l' => "iopk",
        'z' => "asx",
        'x' => "zcasd",
        'c' => "xvsdf",
        'v' => "cbdfg",
        'b' => "vnfgh",
        'n' => "bmghj",
        'm' => "nhjk",
        _ => "",
    }
}

/// Look-alike substitutes per ASCII character, inverted from the shipped
/// look-alike table so every substitute maps back.
fn lookalike_inverse() -> &'static BTreeMap<char, Vec<char>> {
    static INV: OnceLock<BTreeMap<char, Vec<char>>> = OnceLock::new();
    INV.get_or_init(|| {
        ConfusableTable::builtin_part("lookalike")
            .map(ConfusableTable::inverse)
            .unwrap_or_default()
    })
}

#[derive(Debug, Clone, Copy)]
struct Word {
    start: usize,
    end: usize,
    core_start: usize,
    core_end: usize,
}

impl Word {
    fn core_len(&self) -> usize {
        self.core_end - self.core_start
    }
}

fn words(chars: &[char], classes: &CharClassSet) -> Vec<Word> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if classes.is_whitespace(chars[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !classes.is_whitespace(chars[i]) {
            i += 1;
        }
        let mut core_start = start;
        while core_start < i && classes.is_punctuation(chars[core_start]) {
            core_start += 1;
        }
        let mut core_end = i;
        while core_end > core_start && classes.is_punctuation(chars[core_end - 1]) {
            core_end -= 1;
        }
        out.push(Word { start, end: i, core_start, core_end });
    }
    out
}

/// Position-indexed rewrite of a codepoint sequence: insertions before each
/// index, and per-codepoint replacement or deletion.
struct Rewrite<'a> {
    chars: &'a [char],
    inserts: Vec<String>,
    replace: Vec<Option<String>>,
}

impl<'a> Rewrite<'a> {
    fn new(chars: &'a [char]) -> Self {
        Rewrite { chars, inserts: vec![String::new(); chars.len() + 1], replace: vec![None; chars.len()] }
    }

    fn insert(&mut self, at: usize, s: &str) {
        self.inserts[at].push_str(s);
    }

    fn set(&mut self, at: usize, s: impl Into<String>) {
        self.replace[at] = Some(s.into());
    }

    fn render(self) -> String {
        let mut out = String::with_capacity(self.chars.len() * 2);
        for (i, c) in self.chars.iter().enumerate() {
            out.push_str(&self.inserts[i]);
            match &self.replace[i] {
                Some(r) => out.push_str(r),
                None => out.push(*c),
            }
        }
        out.push_str(&self.inserts[self.chars.len()]);
        out
    }
}

/// Applies one augmentation. Deterministic per `(text, spec)`.
pub fn apply_attack(text: &str, spec: &AttackSpec) -> Result<String, AttackError> {
    spec.params.validate()?;
    let chars: Vec<char> = text.chars().collect();
    let classes = CharClassSet::builtin();
    let ws = words(&chars, classes);
    let mut rng = rng_for(spec.seed, 1);
    let p = &spec.params;
    let out = match spec.kind {
        AttackKind::InsertPunctuationChars => insert_punctuation(&chars, &ws, p, &mut rng),
        AttackKind::InsertWhitespaceChars => insert_whitespace(&chars, &ws, p, &mut rng, classes),
        AttackKind::InsertZeroWidthChars => insert_zero_width(&chars, &ws, p, &mut rng),
        AttackKind::MergeWords => merge_words(&chars, &ws, p, &mut rng),
        AttackKind::ReplaceFunFonts => fun_fonts(&chars, &ws, p, &mut rng),
        AttackKind::ReplaceSimilarChars => substitute(&chars, &ws, p, &mut rng, |c| similar_chars(c)),
        AttackKind::ReplaceSimilarUnicodeChars => {
            let inv = lookalike_inverse();
            substitute(&chars, &ws, p, &mut rng, |c| inv.get(&c).map_or(&[][..], Vec::as_slice))
        }
        AttackKind::SimulateTypos => typos(&chars, &ws, p, &mut rng),
        AttackKind::SplitWords => split_words(&chars, &ws, p, &mut rng),
    };
    Ok(out)
}

fn punct_run(rng: &mut ChaCha8Rng) -> String {
    let len = if rng.random_bool(0.25) { rng.random_range(2..=3) } else { 1 };
    (0..len).map(|_| *PUNCTUATION_POOL.choose(rng).expect("non-empty")).collect()
}

// Selected words get marks at interior boundaries (every boundary for
// `word`, each with aug_char_p otherwise) and at least two marks in total;
// `all` also decorates the edges of selected words.
fn insert_punctuation(chars: &[char], ws: &[Word], p: &AttackParams, rng: &mut ChaCha8Rng) -> String {
    let mut rw = Rewrite::new(chars);
    for w in ws {
        if !rng.random_bool(p.aug_word_p) || w.core_len() < 2 {
            continue;
        }
        if p.granularity == Granularity::All && rng.random_bool(p.aug_char_p) {
            rw.insert(w.start, &punct_run(rng));
        }
        let bounds: Vec<usize> = (w.core_start + 1..w.core_end).collect();
        let mut marks = 0;
        for &b in &bounds {
            if p.granularity == Granularity::Word || rng.random_bool(p.aug_char_p) {
                let run = punct_run(rng);
                marks += run.chars().count();
                rw.insert(b, &run);
            }
        }
        while marks < 2 {
            let b = *bounds.choose(rng).expect("core has a boundary");
            rw.insert(b, &PUNCTUATION_POOL.choose(rng).expect("non-empty").to_string());
            marks += 1;
        }
        if p.granularity == Granularity::All && rng.random_bool(p.aug_char_p) {
            rw.insert(w.end, &punct_run(rng));
        }
    }
    rw.render()
}

// Selected words without interior punctuation are spaced out completely and
// their outer gaps widened by one space; `all` also widens other gaps.
fn insert_whitespace(chars: &[char], ws: &[Word], p: &AttackParams, rng: &mut ChaCha8Rng, classes: &CharClassSet) -> String {
    let mut rw = Rewrite::new(chars);
    let mut widened = vec![false; ws.len() + 1];
    for (i, w) in ws.iter().enumerate() {
        if !rng.random_bool(p.aug_word_p) || w.core_len() < 2 {
            continue;
        }
        if chars[w.core_start..w.core_end].iter().any(|c| classes.is_punctuation(*c)) {
            continue;
        }
        for b in w.core_start + 1..w.core_end {
            rw.insert(b, " ");
        }
        widened[i] = true;
        widened[i + 1] = true;
    }
    // gap i sits between word i-1 and word i
    for i in 1..ws.len() {
        let extra = widened[i] || (p.granularity == Granularity::All && rng.random_bool(p.aug_char_p));
        if extra {
            rw.insert(ws[i].start, " ");
        }
    }
    rw.render()
}

fn insert_zero_width(chars: &[char], ws: &[Word], p: &AttackParams, rng: &mut ChaCha8Rng) -> String {
    let mut rw = Rewrite::new(chars);
    let put = |rw: &mut Rewrite, at: usize, rng: &mut ChaCha8Rng| {
        rw.insert(at, &MANDATORY_ZERO_WIDTH.choose(rng).expect("non-empty").to_string());
    };
    match p.granularity {
        Granularity::All => {
            for b in 1..chars.len() {
                if rng.random_bool(p.aug_char_p) {
                    put(&mut rw, b, rng);
                }
            }
        }
        Granularity::Word | Granularity::Char => {
            for w in ws {
                if !rng.random_bool(p.aug_word_p) {
                    continue;
                }
                for b in w.start + 1..w.end {
                    if p.granularity == Granularity::Word || rng.random_bool(p.aug_char_p) {
                        put(&mut rw, b, rng);
                    }
                }
            }
        }
    }
    rw.render()
}

fn merge_words(chars: &[char], ws: &[Word], p: &AttackParams, rng: &mut ChaCha8Rng) -> String {
    let mut rw = Rewrite::new(chars);
    for pair in ws.windows(2) {
        if rng.random_bool(p.aug_word_p) {
            for i in pair[0].end..pair[1].start {
                rw.set(i, "");
            }
        }
    }
    rw.render()
}

// `word` styles letters of selected words, `all` letters and digits, `char`
// each alphanumeric of selected words with probability aug_p.
fn fun_fonts(chars: &[char], ws: &[Word], p: &AttackParams, rng: &mut ChaCha8Rng) -> String {
    let mut rw = Rewrite::new(chars);
    let fixed = *Font::ALL.choose(rng).expect("non-empty");
    for w in ws {
        let font = if p.vary_fonts { *Font::ALL.choose(rng).expect("non-empty") } else { fixed };
        if !rng.random_bool(p.aug_word_p) {
            continue;
        }
        for (i, &c) in chars.iter().enumerate().take(w.end).skip(w.start) {
            let wanted = match p.granularity {
                Granularity::Word => c.is_ascii_alphabetic(),
                Granularity::All => c.is_ascii_alphanumeric(),
                Granularity::Char => c.is_ascii_alphanumeric() && rng.random_bool(p.aug_p),
            };
            if wanted {
                if let Some(s) = font.style(c) {
                    rw.set(i, s);
                }
            }
        }
    }
    rw.render()
}

// `word` touches only selected words; `char` and `all` consider every word.
// Each substitutable character is replaced with probability aug_char_p.
fn substitute<'t>(
    chars: &[char],
    ws: &[Word],
    p: &AttackParams,
    rng: &mut ChaCha8Rng,
    options: impl Fn(char) -> &'t [char],
) -> String {
    let mut rw = Rewrite::new(chars);
    for w in ws {
        if p.granularity == Granularity::Word && !rng.random_bool(p.aug_word_p) {
            continue;
        }
        for (i, &c) in chars.iter().enumerate().take(w.end).skip(w.start) {
            let opts = options(c);
            if !opts.is_empty() && rng.random_bool(p.aug_char_p) {
                rw.set(i, *opts.choose(rng).expect("non-empty"));
            }
        }
    }
    rw.render()
}

fn typos(chars: &[char], ws: &[Word], p: &AttackParams, rng: &mut ChaCha8Rng) -> String {
    let mut rw = Rewrite::new(chars);
    for w in ws {
        if !rng.random_bool(p.aug_word_p) {
            continue;
        }
        let letters: Vec<usize> = (w.core_start..w.core_end).filter(|&i| chars[i].is_ascii_alphabetic()).collect();
        if letters.len() < 2 {
            continue;
        }
        let pairs: Vec<usize> = letters.iter().copied().filter(|&i| letters.contains(&(i + 1))).collect();
        match rng.random_range(0..4) {
            1 if !pairs.is_empty() => {
                let i = *pairs.choose(rng).expect("non-empty");
                rw.set(i, chars[i + 1]);
                rw.set(i + 1, chars[i]);
            }
            2 => {
                let i = *letters.choose(rng).expect("non-empty");
                rw.set(i, "");
            }
            3 => {
                let i = *letters.choose(rng).expect("non-empty");
                rw.set(i, format!("{0}{0}", chars[i]));
            }
            _ => {
                let i = *letters.choose(rng).expect("non-empty");
                let c = chars[i];
                let near = qwerty_neighbors(c.to_ascii_lowercase()).as_bytes();
                let mut n = *near.choose(rng).expect("every letter has neighbors") as char;
                if c.is_ascii_uppercase() {
                    n = n.to_ascii_uppercase();
                }
                rw.set(i, n);
            }
        }
    }
    rw.render()
}

fn split_words(chars: &[char], ws: &[Word], p: &AttackParams, rng: &mut ChaCha8Rng) -> String {
    let mut rw = Rewrite::new(chars);
    for w in ws {
        if !rng.random_bool(p.aug_word_p) || w.core_len() < 2 {
            continue;
        }
        let at = rng.random_range(w.core_start + 1..w.core_end);
        rw.insert(at, " ");
    }
    rw.render()
}

/// Which fields of a record an attack rewrites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSelector {
    /// `text` for binary records, `hypothesis` for NLI records.
    #[default]
    Auto,
    Text,
    Premise,
    Hypothesis,
    Both,
}

impl fmt::Display for FieldSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldSelector::Auto => "auto",
            FieldSelector::Text => "text",
            FieldSelector::Premise => "premise",
            FieldSelector::Hypothesis => "hypothesis",
            FieldSelector::Both => "both",
        })
    }
}

impl FromStr for FieldSelector {
    type Err = AttackError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "auto" => FieldSelector::Auto,
            "text" => FieldSelector::Text,
            "premise" => FieldSelector::Premise,
            "hypothesis" => FieldSelector::Hypothesis,
            "both" => FieldSelector::Both,
            other => return Err(AttackError::UnknownField(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeedPlan {
    /// The same spec for every record.
    Fixed(AttackSpec),
    /// Fresh params and seed per record, derived from the master seed and
    /// the record's index.
    PerRecord { kind: AttackKind, master_seed: u64 },
}

impl SeedPlan {
    pub fn spec_for(&self, index: usize) -> AttackSpec {
        match self {
            SeedPlan::Fixed(spec) => spec.clone(),
            SeedPlan::PerRecord { kind, master_seed } => AttackSpec::for_record(*kind, *master_seed, index as u64),
        }
    }
}

/// One line of the attack metadata sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackMeta {
    pub id: String,
    pub kind: AttackKind,
    pub seed: u64,
    pub params: AttackParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackedRecord {
    pub record: EvalRecord,
    pub meta: AttackMeta,
}

/// Attacks one record; `index` is its position in the corpus.
pub fn attack_record(record: &EvalRecord, index: usize, plan: &SeedPlan, field: FieldSelector) -> Result<AttackedRecord, AttackError> {
    let spec = plan.spec_for(index);
    let mismatch = || AttackError::FieldMismatch { id: record.id.clone(), field, task: record.task() };
    let input = match (&record.input, field) {
        (RecordInput::Text(t), FieldSelector::Auto | FieldSelector::Text) => RecordInput::Text(apply_attack(t, &spec)?),
        (RecordInput::Text(_), _) => return Err(mismatch()),
        (RecordInput::Pair { .. }, FieldSelector::Text) => return Err(mismatch()),
        (RecordInput::Pair { premise, hypothesis }, f) => {
            let attack_premise = matches!(f, FieldSelector::Premise | FieldSelector::Both);
            let attack_hypothesis = matches!(f, FieldSelector::Auto | FieldSelector::Hypothesis | FieldSelector::Both);
            let premise = if attack_premise { apply_attack(premise, &spec)? } else { premise.clone() };
            let hypothesis = if attack_hypothesis {
                // the second field gets its own position stream
                let spec = if attack_premise { AttackSpec { seed: splitmix64(spec.seed), ..spec.clone() } } else { spec.clone() };
                apply_attack(hypothesis, &spec)?
            } else {
                hypothesis.clone()
            };
            RecordInput::Pair { premise, hypothesis }
        }
    };
    Ok(AttackedRecord {
        record: EvalRecord { input, ..record.clone() },
        meta: AttackMeta { id: record.id.clone(), kind: spec.kind, seed: spec.seed, params: spec.params },
    })
}

/// Attacks a corpus in parallel; output order and content do not depend on
/// the thread count.
pub fn attack_corpus(records: &[EvalRecord], plan: &SeedPlan, field: FieldSelector) -> Result<Vec<AttackedRecord>, AttackError> {
    records.par_iter().enumerate().map(|(i, r)| attack_record(r, i, plan, field)).collect()
}
