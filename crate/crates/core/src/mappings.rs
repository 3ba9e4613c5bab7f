//! Character-class data: confusable-to-keyboard mappings and the zero-width,
//! punctuation and whitespace sets the normalizer passes key off.
//!
//! Everything here is loaded from plain data files so that coverage can be
//! audited and extended without touching code. The built-in files live in
//! `crates/core/data/` and are embedded at compile time.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::sync::OnceLock;

use thiserror::Error;

const BUILTIN_MATHEMATICAL: &str = include_str!("../data/mathematical.tsv");
const BUILTIN_FULLWIDTH: &str = include_str!("../data/fullwidth.tsv");
const BUILTIN_ENCLOSED: &str = include_str!("../data/enclosed.tsv");
const BUILTIN_LOOKALIKE: &str = include_str!("../data/lookalike.tsv");
const BUILTIN_CHAR_CLASSES: &str = include_str!("../data/char_classes.tsv");

/// Zero-width codepoints every [`CharClassSet`] must contain.
pub const MANDATORY_ZERO_WIDTH: [char; 5] = ['\u{200B}', '\u{200C}', '\u{200D}', '\u{2060}', '\u{FEFF}'];

#[derive(Debug, Error)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: source {codepoints} is declared more than once")]
    Conflict { line: usize, codepoints: String },
    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },
    #[error("table '{table}' conflicts with an earlier table on source {codepoints}")]
    MergeConflict { table: String, codepoints: String },
    #[error("char class set is invalid: {0}")]
    Classes(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Formats a codepoint sequence the way the table files spell it: `1D413 FE0F`.
pub fn format_codepoints(chars: &[char]) -> String {
    let hex: Vec<String> = chars.iter().map(|c| format!("{:04X}", *c as u32)).collect();
    hex.join(" ")
}

fn parse_codepoint(tok: &str) -> Option<char> {
    let tok = tok.trim_start_matches("U+").trim_start_matches("u+");
    u32::from_str_radix(tok, 16).ok().and_then(char::from_u32)
}

/// Reads `line` number-annotated UTF-8 lines, reporting invalid UTF-8 as a
/// parse error rather than an I/O error.
fn read_lines<R: BufRead>(mut reader: R, mut f: impl FnMut(usize, &str) -> Result<(), TableError>) -> Result<(), TableError> {
    let mut buf = Vec::new();
    let mut line = 0usize;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            return Ok(());
        }
        line += 1;
        let text = std::str::from_utf8(&buf).map_err(|e| TableError::Parse {
            line,
            message: format!("invalid UTF-8: {e}"),
        })?;
        let text = text.strip_suffix('\n').unwrap_or(text);
        let text = text.strip_suffix('\r').unwrap_or(text);
        f(line, text)?;
    }
}

/// `# @key value` directive inside a comment line.
fn directive(line: &str) -> Option<(&str, &str)> {
    let rest = line.strip_prefix('#')?.trim_start().strip_prefix('@')?;
    let (key, value) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
    Some((key, value.trim()))
}

#[derive(Debug, Clone, Default)]
struct Slot {
    single: Option<usize>,
    /// Indices of multi-codepoint entries starting with this codepoint,
    /// longest source first.
    multi: Vec<usize>,
}

/// Mapping from non-keyboard codepoint sequences to printable-ASCII
/// replacements, with longest-match lookup.
#[derive(Clone)]
pub struct ConfusableTable {
    name: String,
    version: String,
    entries: Vec<(Vec<char>, String)>,
    index: HashMap<char, Slot>,
}

impl fmt::Debug for ConfusableTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConfusableTable")
            .field("name", &self.name)
            .field("version", &self.version)
            .field("entries", &self.entries.len())
            .finish()
    }
}

impl ConfusableTable {
    pub fn empty(name: impl Into<String>) -> Self {
        ConfusableTable {
            name: name.into(),
            version: String::new(),
            entries: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Parses the table file format: `<hex codepoints><TAB><replacement>`
    /// per line, `#` comment lines, `# @name` / `# @version` directives.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, TableError> {
        let mut table = ConfusableTable::empty("unnamed");
        read_lines(reader, |line, text| {
            if text.trim().is_empty() {
                return Ok(());
            }
            if text.starts_with('#') {
                match directive(text) {
                    Some(("name", v)) if !v.is_empty() => table.name = v.to_string(),
                    Some(("version", v)) => table.version = v.to_string(),
                    _ => {}
                }
                return Ok(());
            }
            let (src, replacement) = text.split_once('\t').ok_or_else(|| TableError::Parse {
                line,
                message: "expected <codepoints><TAB><replacement>".into(),
            })?;
            let mut source = Vec::new();
            for tok in src.split_whitespace() {
                let c = parse_codepoint(tok).ok_or_else(|| TableError::Parse {
                    line,
                    message: format!("'{tok}' is not a hex codepoint"),
                })?;
                source.push(c);
            }
            table.insert(line, source, replacement.to_string())
        })?;
        Ok(table)
    }

    pub fn parse_str(text: &str) -> Result<Self, TableError> {
        Self::parse(text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TableError> {
        let file = std::fs::File::open(path)?;
        Self::parse(std::io::BufReader::new(file))
    }

    fn insert(&mut self, line: usize, source: Vec<char>, replacement: String) -> Result<(), TableError> {
        if source.is_empty() {
            return Err(TableError::Parse { line, message: "empty source sequence".into() });
        }
        if replacement.is_empty() {
            return Err(TableError::Validation { line, message: "replacement is empty".into() });
        }
        if let Some(bad) = replacement.chars().find(|c| !matches!(*c, ' '..='~')) {
            return Err(TableError::Validation {
                line,
                message: format!("replacement {replacement:?} contains non-printable-ASCII U+{:04X}", bad as u32),
            });
        }
        if source.iter().copied().eq(replacement.chars()) {
            return Err(TableError::Validation {
                line,
                message: format!("source {} maps to itself", format_codepoints(&source)),
            });
        }
        let slot = self.index.entry(source[0]).or_default();
        let duplicate = if source.len() == 1 {
            slot.single.is_some()
        } else {
            slot.multi.iter().any(|&i| self.entries[i].0 == source)
        };
        if duplicate {
            return Err(TableError::Conflict { line, codepoints: format_codepoints(&source) });
        }
        let idx = self.entries.len();
        if source.len() == 1 {
            slot.single = Some(idx);
        } else {
            slot.multi.push(idx);
            let entries = &self.entries;
            let len_of = |i: usize| if i == idx { source.len() } else { entries[i].0.len() };
            slot.multi.sort_by_key(|&i| std::cmp::Reverse(len_of(i)));
        }
        self.entries.push((source, replacement));
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in declaration order.
    pub fn entries(&self) -> impl Iterator<Item = (&[char], &str)> {
        self.entries.iter().map(|(s, r)| (s.as_slice(), r.as_str()))
    }

    /// Longest source matching `text` at `pos`, as (matched codepoints,
    /// replacement). Absence is a value, not an error; an out-of-range
    /// position simply matches nothing.
    pub fn lookup(&self, text: &[char], pos: usize) -> Option<(usize, &str)> {
        let first = text.get(pos)?;
        let slot = self.index.get(first)?;
        for &i in &slot.multi {
            let (src, repl) = &self.entries[i];
            if text[pos..].starts_with(src) {
                return Some((src.len(), repl));
            }
        }
        slot.single.map(|i| (1, self.entries[i].1.as_str()))
    }

    /// Combines several tables into one lookup structure. A source declared
    /// in two tables must agree on its replacement.
    pub fn merged<'a>(name: impl Into<String>, tables: impl IntoIterator<Item = &'a ConfusableTable>) -> Result<Self, TableError> {
        let mut out = ConfusableTable::empty(name);
        let mut versions = Vec::new();
        for table in tables {
            versions.push(format!("{}@{}", table.name, table.version));
            for (src, repl) in table.entries() {
                if let Some((len, existing)) = out.lookup(src, 0) {
                    if len == src.len() {
                        if existing == repl {
                            continue;
                        }
                        return Err(TableError::MergeConflict {
                            table: table.name.clone(),
                            codepoints: format_codepoints(src),
                        });
                    }
                }
                out.insert(0, src.to_vec(), repl.to_string())?;
            }
        }
        out.version = versions.join("+");
        Ok(out)
    }

    /// Single-codepoint sources grouped by the single character they map to,
    /// in declaration order. Used by the substitution attack so every
    /// generated codepoint is one this table can reverse.
    pub fn inverse(&self) -> BTreeMap<char, Vec<char>> {
        let mut inv: BTreeMap<char, Vec<char>> = BTreeMap::new();
        for (src, repl) in self.entries() {
            let mut r = repl.chars();
            if let (1, Some(target), None) = (src.len(), r.next(), r.next()) {
                inv.entry(target).or_default().push(src[0]);
            }
        }
        inv
    }

    /// The four shipped tables, parsed once.
    pub fn builtin_parts() -> &'static [ConfusableTable] {
        static PARTS: OnceLock<Vec<ConfusableTable>> = OnceLock::new();
        PARTS.get_or_init(|| {
            [BUILTIN_MATHEMATICAL, BUILTIN_FULLWIDTH, BUILTIN_ENCLOSED, BUILTIN_LOOKALIKE]
                .iter()
                .map(|src| ConfusableTable::parse_str(src).expect("built-in table parses"))
                .collect()
        })
    }

    pub fn builtin_part(name: &str) -> Option<&'static ConfusableTable> {
        Self::builtin_parts().iter().find(|t| t.name == name)
    }

    /// All shipped tables merged.
    pub fn builtin() -> &'static ConfusableTable {
        static MERGED: OnceLock<ConfusableTable> = OnceLock::new();
        MERGED.get_or_init(|| ConfusableTable::merged("builtin", Self::builtin_parts()).expect("built-in tables are disjoint"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CharClass {
    ZeroWidth,
    Punctuation,
    Whitespace,
    Other,
}

impl CharClass {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "zero_width" => Some(CharClass::ZeroWidth),
            "punctuation" => Some(CharClass::Punctuation),
            "whitespace" => Some(CharClass::Whitespace),
            _ => None,
        }
    }
}

/// Disjoint zero-width / punctuation / whitespace sets.
#[derive(Debug, Clone)]
pub struct CharClassSet {
    name: String,
    version: String,
    ascii: [CharClass; 128],
    other: HashMap<char, CharClass>,
}

impl CharClassSet {
    /// Builds a set from explicit members, checking disjointness and the
    /// mandatory zero-width floor.
    pub fn new(
        zero_width: impl IntoIterator<Item = char>,
        punctuation: impl IntoIterator<Item = char>,
        whitespace: impl IntoIterator<Item = char>,
    ) -> Result<Self, TableError> {
        let mut set = CharClassSet::blank();
        for (class, members) in [
            (CharClass::ZeroWidth, zero_width.into_iter().collect::<Vec<_>>()),
            (CharClass::Punctuation, punctuation.into_iter().collect()),
            (CharClass::Whitespace, whitespace.into_iter().collect()),
        ] {
            for c in members {
                set.assign(c, class).map_err(TableError::Classes)?;
            }
        }
        set.check_floor()?;
        Ok(set)
    }

    fn blank() -> Self {
        CharClassSet {
            name: "unnamed".into(),
            version: String::new(),
            ascii: [CharClass::Other; 128],
            other: HashMap::new(),
        }
    }

    fn assign(&mut self, c: char, class: CharClass) -> Result<(), String> {
        let current = self.classify(c);
        if current != CharClass::Other && current != class {
            return Err(format!("U+{:04X} is in both {current:?} and {class:?}", c as u32));
        }
        if c.is_ascii() {
            self.ascii[c as usize] = class;
        } else {
            self.other.insert(c, class);
        }
        Ok(())
    }

    fn check_floor(&self) -> Result<(), TableError> {
        match MANDATORY_ZERO_WIDTH.iter().find(|c| self.classify(**c) != CharClass::ZeroWidth) {
            Some(c) => Err(TableError::Classes(format!("zero_width set is missing U+{:04X}", *c as u32))),
            None => Ok(()),
        }
    }

    /// Parses `<class><TAB><hex>[-<hex>]` lines.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, TableError> {
        let mut set = CharClassSet::blank();
        read_lines(reader, |line, text| {
            if text.trim().is_empty() {
                return Ok(());
            }
            if text.starts_with('#') {
                match directive(text) {
                    Some(("name", v)) if !v.is_empty() => set.name = v.to_string(),
                    Some(("version", v)) => set.version = v.to_string(),
                    _ => {}
                }
                return Ok(());
            }
            let bad = |message: String| TableError::Parse { line, message };
            let (class, range) = text
                .split_once('\t')
                .ok_or_else(|| bad("expected <class><TAB><codepoint range>".into()))?;
            let class = CharClass::from_name(class.trim()).ok_or_else(|| bad(format!("unknown class '{class}'")))?;
            let range = range.trim();
            let (lo, hi) = range.split_once('-').unwrap_or((range, range));
            let lo = parse_codepoint(lo).ok_or_else(|| bad(format!("bad codepoint '{lo}'")))?;
            let hi = parse_codepoint(hi).ok_or_else(|| bad(format!("bad codepoint '{hi}'")))?;
            if lo > hi {
                return Err(bad(format!("empty range {range}")));
            }
            for c in lo..=hi {
                set.assign(c, class).map_err(|m| TableError::Validation { line, message: m })?;
            }
            Ok(())
        })?;
        set.check_floor()?;
        Ok(set)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TableError> {
        let file = std::fs::File::open(path)?;
        Self::parse(std::io::BufReader::new(file))
    }

    pub fn builtin() -> &'static CharClassSet {
        static SET: OnceLock<CharClassSet> = OnceLock::new();
        SET.get_or_init(|| CharClassSet::parse(BUILTIN_CHAR_CLASSES.as_bytes()).expect("built-in char classes parse"))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    #[inline]
    pub fn classify(&self, c: char) -> CharClass {
        if c.is_ascii() {
            self.ascii[c as usize]
        } else {
            self.other.get(&c).copied().unwrap_or(CharClass::Other)
        }
    }

    #[inline]
    pub fn is_zero_width(&self, c: char) -> bool {
        self.classify(c) == CharClass::ZeroWidth
    }

    #[inline]
    pub fn is_punctuation(&self, c: char) -> bool {
        self.classify(c) == CharClass::Punctuation
    }

    #[inline]
    pub fn is_whitespace(&self, c: char) -> bool {
        self.classify(c) == CharClass::Whitespace
    }

    /// Members of one class, sorted.
    pub fn members(&self, class: CharClass) -> Vec<char> {
        let mut out: Vec<char> = (0u8..128)
            .map(char::from)
            .filter(|c| self.ascii[*c as usize] == class)
            .chain(self.other.iter().filter(|(_, k)| **k == class).map(|(c, _)| *c))
            .collect();
        out.sort_unstable();
        out
    }
}
