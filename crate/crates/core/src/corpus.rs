//! Synthetic clean sentences and a labelled demo corpus built from them.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::evaluation::EvalRecord;
use crate::labels::Label;
use crate::mappings::CharClassSet;
use crate::normalizer::censor_match;

/// Seed of the shipped bench corpus.
pub const BENCH_SEED: u64 = 77;
/// Seed of the shipped demo corpus.
pub const DEMO_SEED: u64 = 42;

const WORDS: &[&str] = &[
    "a", "I", "the", "and", "people", "we", "they", "you", "this", "that", "those", "these", "is", "are", "was", "were",
    "will", "would", "could", "should", "can", "have", "has", "had", "been", "be", "not", "no", "yes", "very", "really",
    "just", "only", "also", "still", "again", "always", "never", "often", "sometimes", "today", "tomorrow", "yesterday",
    "morning", "evening", "night", "week", "year", "time", "day", "city", "town", "street", "house", "home", "school",
    "office", "market", "garden", "river", "mountain", "forest", "beach", "park", "bridge", "road", "train", "bus",
    "car", "bike", "ticket", "station", "airport", "family", "friend", "friends", "neighbor", "neighbors", "teacher",
    "doctor", "driver", "player", "team", "game", "match", "song", "movie", "book", "story", "letter", "message",
    "phone", "computer", "window", "door", "table", "chair", "coffee", "tea", "bread", "dinner", "lunch", "breakfast",
    "weather", "rain", "snow", "sun", "wind", "summer", "winter", "spring", "autumn", "music", "party", "meeting",
    "plan", "idea", "question", "answer", "problem", "reason", "result", "change", "news", "word", "world", "country",
    "group", "community", "government", "company", "money", "price", "job", "work", "project", "report", "rule",
    "good", "great", "nice", "happy", "quiet", "loud", "small", "large", "new", "old", "young", "early", "late",
    "busy", "free", "open", "closed", "warm", "cold", "bright", "dark", "simple", "careful", "honest", "friendly",
    "strange", "local", "public", "private", "important", "different", "similar", "ready", "tired", "hungry", "calm",
    "go", "went", "come", "came", "see", "saw", "think", "thought", "know", "knew", "say", "said", "make", "made",
    "take", "took", "give", "gave", "find", "found", "tell", "told", "ask", "asked", "work", "call", "called", "try",
    "tried", "need", "feel", "felt", "leave", "left", "keep", "kept", "start", "started", "help", "helped", "play",
    "played", "move", "moved", "live", "lived", "believe", "bring", "brought", "happen", "happened", "write", "wrote",
    "read", "walk", "walked", "watch", "watched", "follow", "stop", "stopped", "open", "wait", "waited", "visit",
    "visited", "in", "on", "at", "from", "with", "about", "after", "before", "under", "over", "between", "into",
    "through", "during", "without", "around", "near", "because", "but", "or", "so", "if", "when", "while", "where",
    "don't", "can't", "won't", "it's", "we're", "they're", "I'm", "didn't", "isn't", "wasn't", "that's", "let's",
    "well-known", "long-term", "part-time", "self-made", "old-fashioned", "e-mail", "x-ray",
];

/// One sentence of `min..=max` words: ASCII, single spaces, at most one
/// interior punctuation mark per word, no two single-letter words in a row.
pub fn clean_sentence(rng: &mut impl Rng, min_words: usize, max_words: usize) -> String {
    let n = rng.random_range(min_words..=max_words);
    let mut words: Vec<String> = Vec::with_capacity(n);
    while words.len() < n {
        let w = *WORDS.choose(rng).expect("non-empty");
        let short = |s: &str| s.chars().count() == 1;
        if short(w) && words.last().is_some_and(|p| short(p.trim_end_matches(','))) {
            continue;
        }
        let mut w = w.to_string();
        if words.is_empty() {
            let mut cs = w.chars();
            let first = cs.next().expect("non-empty word").to_ascii_uppercase();
            w = std::iter::once(first).chain(cs).collect();
        }
        if words.len() + 1 < n && rng.random_bool(0.08) {
            w.push(',');
        }
        words.push(w);
    }
    let mut s = words.join(" ");
    s.push('.');
    s
}

/// `n` sentences averaging roughly 100 codepoints.
pub fn clean_sentences(seed: u64, n: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| clean_sentence(&mut rng, 12, 21)).collect()
}

/// Labelled binary corpus: about half the records carry one or two words
/// from `lexicon` and are labelled hate; a `noise` share of labels is flipped
/// so no lexicon classifier scores perfectly.
pub fn synthetic_binary_corpus(seed: u64, n: usize, lexicon: &[String], noise: f64) -> Vec<EvalRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let mut words: Vec<String> = clean_sentence(&mut rng, 8, 15).split(' ').map(str::to_string).collect();
            let hateful = i % 2 == 0;
            if hateful {
                for _ in 0..rng.random_range(1..=2) {
                    // never the first word, so capitalization stays plain
                    let at = rng.random_range(1..words.len());
                    let tail: String = words[at].chars().filter(|c| *c == ',' || *c == '.').collect();
                    words[at] = format!("{}{tail}", lexicon.choose(&mut rng).expect("non-empty lexicon"));
                }
            }
            let flip = rng.random_bool(noise);
            let label = if hateful != flip { Label::Hate } else { Label::NotHate };
            EvalRecord::binary(format!("demo-{:04}", i + 1), words.join(" "), label)
        })
        .collect()
}

/// True for text the default normalizer maps to itself by construction:
/// printable ASCII words separated by single spaces, at most one interior
/// punctuation mark per word, no adjacent single-character words, and no
/// censorship match against `lexicon`.
pub fn is_clean_fixpoint(text: &str, lexicon: &[String]) -> bool {
    let classes = CharClassSet::builtin();
    if !text.bytes().all(|b| (0x20..0x7F).contains(&b)) || text.starts_with(' ') || text.ends_with(' ') || text.contains("  ") {
        return false;
    }
    let mut prev_single = false;
    for token in text.split(' ') {
        let chars: Vec<char> = token.chars().collect();
        let lead = chars.iter().take_while(|c| classes.is_punctuation(**c)).count();
        let trail = chars[lead..].iter().rev().take_while(|c| classes.is_punctuation(**c)).count();
        let core = &chars[lead..chars.len() - trail];
        if core.iter().filter(|c| classes.is_punctuation(**c)).count() > 1 {
            return false;
        }
        let single = core.len() == 1;
        if single && prev_single {
            return false;
        }
        prev_single = single;
        if censor_match(&chars, classes, lexicon).is_some() {
            return false;
        }
    }
    true
}
