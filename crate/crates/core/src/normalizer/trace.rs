//! Composition of per-pass edits into a single edit list expressed in
//! codepoint offsets of the original input.

use super::{Edit, Pass};

/// An edit against the text a single pass received.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LocalEdit {
    pub start: usize,
    pub end: usize,
    pub replacement: String,
}

impl LocalEdit {
    pub fn delete(start: usize, end: usize) -> Self {
        LocalEdit { start, end, replacement: String::new() }
    }

    pub fn replace(start: usize, end: usize, replacement: impl Into<String>) -> Self {
        LocalEdit { start, end, replacement: replacement.into() }
    }
}

/// Applies sorted, non-overlapping local edits to `chars`.
pub(crate) fn apply_local(chars: &[char], edits: &[LocalEdit]) -> Vec<char> {
    let mut out = Vec::with_capacity(chars.len());
    let mut cursor = 0;
    for e in edits {
        out.extend_from_slice(&chars[cursor..e.start]);
        out.extend(e.replacement.chars());
        cursor = e.end;
    }
    out.extend_from_slice(&chars[cursor..]);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Original(usize),
    Produced(usize),
}

/// One codepoint of the current text, or a tombstone (`ch == None`) that
/// remembers a deletion.
#[derive(Debug, Clone, Copy)]
struct Piece {
    ch: Option<char>,
    origin: Origin,
}

#[derive(Debug, Clone, Copy)]
struct Group {
    start: usize,
    end: usize,
    pass: Pass,
}

/// Tracks the lineage of every codepoint through successive passes.
///
/// Pieces always tile the original input in order: each original codepoint
/// is either still present as an `Original` piece or covered by exactly one
/// produced group's span.
#[derive(Debug)]
pub(crate) struct Trace {
    pieces: Vec<Piece>,
    groups: Vec<Group>,
}

impl Trace {
    pub fn new(chars: &[char]) -> Self {
        Trace {
            pieces: chars
                .iter()
                .enumerate()
                .map(|(i, &c)| Piece { ch: Some(c), origin: Origin::Original(i) })
                .collect(),
            groups: Vec::new(),
        }
    }

    fn span(&self, origin: Origin) -> (usize, usize) {
        match origin {
            Origin::Original(i) => (i, i + 1),
            Origin::Produced(g) => (self.groups[g].start, self.groups[g].end),
        }
    }

    /// Widens edits to whole produced groups and merges the ones that then
    /// overlap, so no group is ever split between two edits.
    fn widen(&self, chars: &[char], edits: &[LocalEdit]) -> Vec<LocalEdit> {
        let groups: Vec<Option<usize>> = self
            .pieces
            .iter()
            .filter(|p| p.ch.is_some())
            .map(|p| match p.origin {
                Origin::Produced(g) => Some(g),
                Origin::Original(_) => None,
            })
            .collect();
        let same = |i: usize, j: usize| groups[i].is_some() && groups[i] == groups[j];
        let mut clusters: Vec<(usize, usize, Vec<&LocalEdit>)> = Vec::new();
        for e in edits {
            let (mut s, mut t) = (e.start, e.end);
            if s == t {
                if s > 0 && s < chars.len() && same(s - 1, s) {
                    while s > 0 && same(s - 1, s) {
                        s -= 1;
                    }
                    while t < chars.len() && same(t - 1, t) {
                        t += 1;
                    }
                }
            } else {
                while s > 0 && same(s - 1, s) {
                    s -= 1;
                }
                while t < chars.len() && same(t - 1, t) {
                    t += 1;
                }
            }
            match clusters.last_mut() {
                Some((_, end, members)) if s < *end || (s == *end && s > 0 && s < chars.len() && same(s - 1, s)) => {
                    *end = (*end).max(t);
                    members.push(e);
                }
                _ => clusters.push((s, t, vec![e])),
            }
        }
        clusters
            .into_iter()
            .map(|(s, t, members)| {
                if members.len() == 1 && members[0].start == s && members[0].end == t {
                    return members[0].clone();
                }
                let shifted: Vec<LocalEdit> = members
                    .iter()
                    .map(|e| LocalEdit::replace(e.start - s, e.end - s, e.replacement.clone()))
                    .collect();
                let replacement: String = apply_local(&chars[s..t], &shifted).into_iter().collect();
                LocalEdit::replace(s, t, replacement)
            })
            .collect()
    }

    /// Records one pass's edits, given against the current text `chars`.
    pub fn apply(&mut self, chars: &[char], edits: &[LocalEdit], pass: Pass) {
        if edits.is_empty() {
            return;
        }
        let edits = self.widen(chars, edits);
        let char_pieces: Vec<usize> = self
            .pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| p.ch.is_some())
            .map(|(i, _)| i)
            .collect();
        let piece_at = |char_idx: usize| char_pieces.get(char_idx).copied().unwrap_or(self.pieces.len());

        let mut out: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        let mut cursor = 0usize; // next old piece to copy
        for e in &edits {
            // an insertion goes after any tombstones preceding the next codepoint
            let (a, b) = if e.start == e.end {
                let at = piece_at(e.start);
                (at, at)
            } else {
                (piece_at(e.start), char_pieces[e.end - 1] + 1)
            };
            out.extend_from_slice(&self.pieces[cursor..a]);
            cursor = b;
            if a == b && e.replacement.is_empty() {
                continue;
            }
            let (start, end) = if a < b {
                (self.span(self.pieces[a].origin).0, self.span(self.pieces[b - 1].origin).1)
            } else {
                let p = out.last().map(|prev| self.span(prev.origin).1).unwrap_or(0);
                (p, p)
            };
            let g = self.groups.len();
            self.groups.push(Group { start, end, pass });
            if e.replacement.is_empty() {
                out.push(Piece { ch: None, origin: Origin::Produced(g) });
            } else {
                out.extend(e.replacement.chars().map(|c| Piece { ch: Some(c), origin: Origin::Produced(g) }));
            }
        }
        out.extend_from_slice(&self.pieces[cursor..]);
        self.pieces = out;
    }

    /// Final edits against the original input, sorted and non-overlapping.
    pub fn into_edits(self) -> Vec<Edit> {
        let mut edits: Vec<Edit> = Vec::new();
        let mut current: Option<usize> = None;
        for piece in &self.pieces {
            match piece.origin {
                Origin::Original(_) => current = None,
                Origin::Produced(g) => {
                    if current != Some(g) {
                        let group = self.groups[g];
                        edits.push(Edit {
                            start: group.start,
                            end: group.end,
                            replacement: String::new(),
                            pass: group.pass,
                        });
                        current = Some(g);
                    }
                    if let Some(c) = piece.ch {
                        edits.last_mut().expect("edit pushed above").replacement.push(c);
                    }
                }
            }
        }
        edits
    }
}

/// Replays edits (sorted, non-overlapping, codepoint offsets) over `input`.
pub fn replay_edits(input: &str, edits: &[Edit]) -> Option<String> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = String::with_capacity(input.len());
    let mut cursor = 0usize;
    for e in edits {
        if e.start < cursor || e.end < e.start || e.end > chars.len() {
            return None;
        }
        out.extend(&chars[cursor..e.start]);
        out.push_str(&e.replacement);
        cursor = e.end;
    }
    out.extend(&chars[cursor..]);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(input: &str, steps: &[(Vec<LocalEdit>, Pass)]) -> (String, Vec<Edit>) {
        let mut chars: Vec<char> = input.chars().collect();
        let mut trace = Trace::new(&chars);
        for (edits, pass) in steps {
            trace.apply(&chars, edits, *pass);
            chars = apply_local(&chars, edits);
        }
        (chars.into_iter().collect(), trace.into_edits())
    }

    #[test]
    fn single_pass_deletions() {
        let (out, edits) = run("a\u{200B}b\u{200B}", &[(vec![LocalEdit::delete(1, 2), LocalEdit::delete(3, 4)], Pass::ZeroWidth)]);
        assert_eq!(out, "ab");
        assert_eq!(edits.len(), 2);
        assert_eq!((edits[0].start, edits[0].end), (1, 2));
        assert_eq!(replay_edits("a\u{200B}b\u{200B}", &edits).unwrap(), out);
    }

    #[test]
    fn later_pass_partially_rewrites_earlier_output() {
        // "xﬆy": ligature -> "st", then the 't' is deleted by a later pass
        let steps = vec![
            (vec![LocalEdit::replace(1, 2, "st")], Pass::Confusables),
            (vec![LocalEdit::delete(2, 3)], Pass::InsertionCollapse),
        ];
        let (out, edits) = run("xﬆy", &steps);
        assert_eq!(out, "xsy");
        assert_eq!(edits.len(), 1);
        assert_eq!((edits[0].start, edits[0].end, edits[0].replacement.as_str()), (1, 2, "s"));
        assert_eq!(edits[0].pass, Pass::InsertionCollapse);
        assert_eq!(replay_edits("xﬆy", &edits).unwrap(), out);
    }

    #[test]
    fn two_edits_inside_one_group_merge() {
        // "x⒜y" -> "x(a)y", then both parentheses removed separately
        let steps = vec![
            (vec![LocalEdit::replace(1, 2, "(a)")], Pass::Confusables),
            (vec![LocalEdit::delete(1, 2), LocalEdit::delete(3, 4)], Pass::InsertionCollapse),
        ];
        let (out, edits) = run("x⒜y", &steps);
        assert_eq!(out, "xay");
        assert_eq!(edits.len(), 1);
        assert_eq!(replay_edits("x⒜y", &edits).unwrap(), out);
    }

    #[test]
    fn insertion_after_tombstone() {
        let steps = vec![
            (vec![LocalEdit::delete(1, 2)], Pass::ZeroWidth),
            (vec![LocalEdit::replace(1, 1, "-")], Pass::Censorship),
        ];
        let (out, edits) = run("a.b", &steps);
        assert_eq!(out, "a-b");
        assert_eq!(replay_edits("a.b", &edits).unwrap(), out);
        assert!(edits.windows(2).all(|w| w[0].end <= w[1].start));
    }
}
