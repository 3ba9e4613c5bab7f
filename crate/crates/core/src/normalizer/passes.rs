use crate::mappings::{CharClassSet, ConfusableTable};

use super::trace::LocalEdit;
use super::NormalizerConfig;

pub(crate) fn strip_zero_width(chars: &[char], classes: &CharClassSet) -> Vec<LocalEdit> {
    let mut edits: Vec<LocalEdit> = Vec::new();
    for (i, &c) in chars.iter().enumerate() {
        if classes.is_zero_width(c) {
            match edits.last_mut() {
                Some(last) if last.end == i => last.end = i + 1,
                _ => edits.push(LocalEdit::delete(i, i + 1)),
            }
        }
    }
    edits
}

pub(crate) fn map_confusables(chars: &[char], table: &ConfusableTable) -> Vec<LocalEdit> {
    let mut edits = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        match table.lookup(chars, i) {
            Some((len, repl)) => {
                edits.push(LocalEdit::replace(i, i + len, repl));
                i += len;
            }
            None => i += 1,
        }
    }
    edits
}

/// True iff the token contains `://`, starts with `www.`, or looks like
/// `label(.label)+/...` where the last host label is 2 to 6 ASCII letters.
pub fn is_url_like(token: &str) -> bool {
    if token.contains("://") {
        return true;
    }
    if token.get(..4).is_some_and(|p| p.eq_ignore_ascii_case("www.")) {
        return true;
    }
    let Some((host, _)) = token.split_once('/') else {
        return false;
    };
    let labels: Vec<&str> = host.split('.').collect();
    labels.len() >= 2
        && labels.iter().all(|l| !l.is_empty() && l.chars().all(|c| c.is_alphanumeric()))
        && labels
            .last()
            .is_some_and(|tld| (2..=6).contains(&tld.len()) && tld.bytes().all(|b| b.is_ascii_alphabetic()))
}

fn is_mask(c: char, classes: &CharClassSet) -> bool {
    c == '*' || classes.is_punctuation(c)
}

/// Matches a whitespace-free token against the censorship lexicon.
///
/// The token may carry leading and trailing punctuation; the censored core
/// must have the lexicon word's length and first letter, and every other
/// position either keeps the word's letter or is masked with punctuation
/// (at least one masked). Returns the core's offset and the first matching
/// word in lexicon order.
pub fn censor_match<'a>(token: &[char], classes: &CharClassSet, lexicon: &'a [String]) -> Option<(usize, &'a str)> {
    let lead = token.iter().take_while(|c| is_mask(**c, classes)).count();
    let first = token.get(lead)?.to_ascii_lowercase();
    if !first.is_ascii_alphabetic() {
        return None;
    }
    'words: for word in lexicon {
        let w = word.as_bytes();
        if w[0] != first as u8 || lead + w.len() > token.len() {
            continue;
        }
        let core = &token[lead..lead + w.len()];
        if !token[lead + w.len()..].iter().all(|c| is_mask(*c, classes)) {
            continue;
        }
        let mut masked = 0;
        for (c, &expected) in core.iter().zip(w).skip(1) {
            if is_mask(*c, classes) {
                masked += 1;
            } else if c.to_ascii_lowercase() != expected as char {
                continue 'words;
            }
        }
        if masked > 0 {
            return Some((lead, word.as_str()));
        }
    }
    None
}

#[derive(Debug, Clone, Copy)]
struct Token {
    start: usize,
    end: usize,
    lead: usize,
    trail: usize,
}

impl Token {
    fn core(&self) -> (usize, usize) {
        (self.start + self.lead, self.end - self.trail)
    }
}

fn tokenize(chars: &[char], classes: &CharClassSet) -> Vec<Token> {
    let mut tokens = Vec::new();
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
        let body = &chars[start..i];
        let lead = body.iter().take_while(|c| classes.is_punctuation(**c)).count();
        let trail = body[lead..].iter().rev().take_while(|c| classes.is_punctuation(**c)).count();
        tokens.push(Token { start, end: i, lead, trail });
    }
    tokens
}

fn push_merged(edits: &mut Vec<LocalEdit>, edit: LocalEdit) {
    if let Some(last) = edits.last_mut() {
        if last.end == edit.start && last.replacement.is_empty() && edit.replacement.is_empty() {
            last.end = edit.end;
            return;
        }
    }
    edits.push(edit);
}

/// Insertion collapse: per-token interior punctuation removal, then joining
/// runs of single-character tokens, then whitespace runs to one space.
pub(crate) fn collapse_insertions(chars: &[char], config: &NormalizerConfig) -> Vec<LocalEdit> {
    let classes = &config.tables.classes;
    let tokens = tokenize(chars, classes);
    let lexicon: &[String] = if config.passes.contains(super::Pass::Censorship) {
        &config.censor_lexicon
    } else {
        &[]
    };

    // per-token: positions of interior punctuation to drop
    let mut drops: Vec<Vec<usize>> = Vec::with_capacity(tokens.len());
    // single-character entities: the core is exactly one alphanumeric codepoint
    let mut entity: Vec<bool> = Vec::with_capacity(tokens.len());
    for t in &tokens {
        let (cs, ce) = t.core();
        let interior: Vec<usize> = (cs..ce).filter(|&i| classes.is_punctuation(chars[i])).collect();
        let token = &chars[t.start..t.end];
        let collapse = interior.len() >= config.threshold
            && !(config.url_detection && is_url_like(&token[t.lead..].iter().collect::<String>()))
            && censor_match(token, classes, lexicon).is_none();
        drops.push(if collapse { interior } else { Vec::new() });
        entity.push(ce == cs + 1 && chars[cs].is_alphanumeric());
    }

    // joins between token i and i+1
    let n = tokens.len();
    let gap_len = |i: usize| tokens[i + 1].start - tokens[i].end;
    let joinable = |i: usize| entity[i] && entity[i + 1] && tokens[i].trail == 0 && tokens[i + 1].lead == 0;
    let mut join: Vec<bool> = (0..n.saturating_sub(1)).map(|i| joinable(i) && gap_len(i) == 1).collect();
    // Entities left alone by the soft-gap joins (both sides across hard
    // gaps) join each other too, otherwise the output would still contain
    // adjacent single-character tokens and a second run would change it.
    let lone = |i: usize, join: &[bool]| entity[i] && !(i > 0 && join[i - 1]) && !(i + 1 < n && join[i]);
    let soft_joins = join.clone();
    for i in 0..n.saturating_sub(1) {
        if !soft_joins[i] && joinable(i) && lone(i, &soft_joins) && lone(i + 1, &soft_joins) {
            join[i] = true;
        }
    }

    let mut edits = Vec::new();
    let gap = |edits: &mut Vec<LocalEdit>, start: usize, end: usize, joined: bool| {
        if joined {
            push_merged(edits, LocalEdit::delete(start, end));
        } else if end - start != 1 || chars[start] != ' ' {
            edits.push(LocalEdit::replace(start, end, " "));
        }
    };
    let first_start = tokens.first().map_or(chars.len(), |t| t.start);
    if first_start > 0 {
        gap(&mut edits, 0, first_start, false);
    }
    for (i, t) in tokens.iter().enumerate() {
        for &p in &drops[i] {
            push_merged(&mut edits, LocalEdit::delete(p, p + 1));
        }
        let next = tokens.get(i + 1).map_or(chars.len(), |u| u.start);
        if next > t.end {
            gap(&mut edits, t.end, next, i + 1 < n && join[i]);
        }
    }
    edits
}

pub(crate) fn decode_censorship(chars: &[char], classes: &CharClassSet, lexicon: &[String]) -> Vec<LocalEdit> {
    if lexicon.is_empty() {
        return Vec::new();
    }
    let mut edits: Vec<LocalEdit> = Vec::new();
    for t in tokenize(chars, classes) {
        let token = &chars[t.start..t.end];
        let Some((offset, word)) = censor_match(token, classes, lexicon) else {
            continue;
        };
        let core = &token[offset..offset + word.len()];
        let letters: Vec<char> = core.iter().copied().filter(|c| c.is_alphabetic()).collect();
        let shout = letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase());
        let base = t.start + offset;
        for (i, (c, w)) in core.iter().zip(word.chars()).enumerate() {
            let want = if shout || (i == 0 && c.is_uppercase()) {
                w.to_ascii_uppercase()
            } else if i == 0 {
                *c
            } else {
                w
            };
            if *c != want {
                let pos = base + i;
                match edits.last_mut() {
                    Some(last) if last.end == pos => {
                        last.end = pos + 1;
                        last.replacement.push(want);
                    }
                    _ => edits.push(LocalEdit::replace(pos, pos + 1, want.to_string())),
                }
            }
        }
    }
    edits
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_examples() {
        assert!(is_url_like("https://x.com/a.b"));
        assert!(is_url_like("www.example.org"));
        assert!(is_url_like("WWW.example.org"));
        assert!(is_url_like("example.com/path.x"));
        assert!(!is_url_like("a.ug;m!en't?ed,"));
        assert!(!is_url_like("example.com"));
        assert!(!is_url_like("a.b/c"));
        assert!(!is_url_like("x.toolonglabel/c"));
        assert!(!is_url_like("a..com/c"));
        assert!(!is_url_like("wwé.x"));
    }

    #[test]
    fn censor_match_rules() {
        let classes = CharClassSet::builtin();
        let lex = vec!["kill".to_string(), "kiss".to_string()];
        let m = |s: &str| censor_match(&s.chars().collect::<Vec<_>>(), classes, &lex).map(|(o, w)| (o, w.to_string()));
        assert_eq!(m("k***"), Some((0, "kill".into())));
        assert_eq!(m("k!ss"), Some((0, "kiss".into())));
        assert_eq!(m("...k!ll!"), Some((3, "kill".into())));
        assert_eq!(m("kill"), None);
        assert_eq!(m("k!l"), None);
        assert_eq!(m("k!llx"), None);
        assert_eq!(m("****"), None);
        assert_eq!(m("b!ll"), None);
    }

    #[test]
    fn whitespace_runs_collapse() {
        let cfg = NormalizerConfig::default();
        let chars: Vec<char> = "  ab \t cd\n".chars().collect();
        let edits = collapse_insertions(&chars, &cfg);
        let out: String = super::super::trace::apply_local(&chars, &edits).into_iter().collect();
        assert_eq!(out, " ab cd ");
    }

    #[test]
    fn single_char_runs_respect_attached_punctuation() {
        let cfg = NormalizerConfig::default();
        let run = |s: &str| {
            let chars: Vec<char> = s.chars().collect();
            let edits = collapse_insertions(&chars, &cfg);
            super::super::trace::apply_local(&chars, &edits).into_iter().collect::<String>()
        };
        assert_eq!(run("t e x t."), "text.");
        assert_eq!(run("(a b c)"), "(abc)");
        assert_eq!(run("a, b"), "a, b");
        assert_eq!(run("T h i s  is  a u g"), "This is aug");
        assert_eq!(run("a  b  c"), "abc");
        assert_eq!(run("a  b c"), "a bc");
    }
}
