//! Sentence segmentation, word tokenization, syllable counting and the
//! word/character/sentence/syllable/polysyllable counts behind every
//! readability index.

use crate::error::{Error, Result};

/// Tokens (lowercased, trailing period included) that never end a sentence.
pub const ABBREVIATIONS: [&str; 8] = ["mr.", "mrs.", "dr.", "st.", "vs.", "etc.", "e.g.", "i.e."];

/// Words with at least this many syllables are polysyllables.
pub const POLYSYLLABLE_MIN: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub text: String,
    /// Position in the document, starting at 0.
    pub index: usize,
}

/// Raw counts for one text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct TextCounts {
    pub words: usize,
    /// Letters and digits inside words.
    pub characters: usize,
    pub sentences: usize,
    pub syllables: usize,
    pub polysyllables: usize,
}

impl TextCounts {
    pub fn new(
        words: usize,
        characters: usize,
        sentences: usize,
        syllables: usize,
        polysyllables: usize,
    ) -> Self {
        Self {
            words,
            characters,
            sentences,
            syllables,
            polysyllables,
        }
    }
}

impl std::ops::Add for TextCounts {
    type Output = TextCounts;

    fn add(self, o: TextCounts) -> TextCounts {
        TextCounts {
            words: self.words + o.words,
            characters: self.characters + o.characters,
            sentences: self.sentences + o.sentences,
            syllables: self.syllables + o.syllables,
            polysyllables: self.polysyllables + o.polysyllables,
        }
    }
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(
        c,
        '"' | '\'' | ')' | ']' | '}' | '\u{201D}' | '\u{2019}' | '\u{00BB}'
    )
}

fn is_opener(c: char) -> bool {
    matches!(
        c,
        '"' | '\'' | '(' | '[' | '{' | '\u{201C}' | '\u{2018}' | '\u{00AB}'
    )
}

fn ends_with_abbreviation(before_and_dot: &str) -> bool {
    let token = before_and_dot
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(is_opener)
        .to_lowercase();
    ABBREVIATIONS.contains(&token.as_str())
}

fn push_sentence(out: &mut Vec<Sentence>, raw: &str) {
    let text = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    if !text.is_empty() {
        out.push(Sentence {
            text,
            index: out.len(),
        });
    }
}

/// Splits text into sentences.
///
/// A sentence ends after a run of `.`, `!` or `?` (plus any closing quotes or
/// brackets) that is followed by whitespace or the end of the text, unless the
/// run is a single period closing one of [`ABBREVIATIONS`]. A blank line also
/// ends a sentence. Internal whitespace is collapsed to single spaces and
/// empty segments are dropped.
pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c == '\n' {
            // Blank line: newline, optional horizontal whitespace, newline.
            let mut j = i + 1;
            while j < chars.len() && chars[j].1 != '\n' && chars[j].1.is_whitespace() {
                j += 1;
            }
            if j < chars.len() && chars[j].1 == '\n' {
                push_sentence(&mut out, &text[start..pos]);
                while j < chars.len() && chars[j].1.is_whitespace() {
                    j += 1;
                }
                start = chars.get(j).map_or(text.len(), |&(p, _)| p);
                i = j;
                continue;
            }
            i += 1;
            continue;
        }
        if is_terminator(c) {
            let mut j = i;
            while j < chars.len() && is_terminator(chars[j].1) {
                j += 1;
            }
            let single_period = j == i + 1 && c == '.';
            while j < chars.len() && is_closer(chars[j].1) {
                j += 1;
            }
            let end = chars.get(j).map_or(text.len(), |&(p, _)| p);
            let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
            let abbreviation = single_period && ends_with_abbreviation(&text[start..pos + 1]);
            if at_boundary && !abbreviation {
                push_sentence(&mut out, &text[start..end]);
                start = end;
            }
            i = j;
            continue;
        }
        i += 1;
    }
    push_sentence(&mut out, &text[start..]);
    out
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

/// Words are maximal runs of letters and digits, joined by apostrophes or
/// hyphens that sit between two such characters.
pub fn tokenize_words(sentence: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = sentence.char_indices().collect();
    let mut words = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let begin = chars[i].0;
        let mut j = i + 1;
        loop {
            if j < chars.len() && chars[j].1.is_alphanumeric() {
                j += 1;
            } else if j + 1 < chars.len()
                && is_joiner(chars[j].1)
                && chars[j + 1].1.is_alphanumeric()
            {
                j += 2;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(sentence.len(), |&(p, _)| p);
        words.push(&sentence[begin..end]);
        i = j;
    }
    words
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel-group syllable heuristic with the silent-e rule. Tokens without
/// letters count as one syllable.
pub fn count_syllables(word: &str) -> Result<usize> {
    if word.is_empty() {
        return Err(Error::Domain(
            "cannot count syllables of an empty word".into(),
        ));
    }
    let lower: Vec<char> = word.chars().flat_map(char::to_lowercase).collect();
    if !lower.iter().any(|c| c.is_alphabetic()) {
        return Ok(1);
    }
    let mut groups = 0usize;
    let mut in_group = false;
    for &c in &lower {
        let v = is_vowel(c);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }
    let n = lower.len();
    if lower[n - 1] == 'e' {
        let consonant_le = n >= 3
            && lower[n - 2] == 'l'
            && lower[n - 3].is_alphabetic()
            && !is_vowel(lower[n - 3]);
        if !consonant_le {
            groups = groups.saturating_sub(1);
        }
    }
    Ok(groups.max(1))
}

fn counts_of_sentence(sentence: &str) -> TextCounts {
    let mut c = TextCounts {
        sentences: 1,
        ..TextCounts::default()
    };
    for w in tokenize_words(sentence) {
        let syl = count_syllables(w).expect("tokens are non-empty");
        c.words += 1;
        c.characters += w.chars().filter(|ch| ch.is_alphanumeric()).count();
        c.syllables += syl;
        if syl >= POLYSYLLABLE_MIN {
            c.polysyllables += 1;
        }
    }
    c
}

/// Counts over an already segmented list of sentences.
pub fn counts_for_sentences(sentences: &[Sentence]) -> TextCounts {
    sentences
        .iter()
        .map(|s| counts_of_sentence(&s.text))
        .fold(TextCounts::default(), |a, b| a + b)
}

pub fn compute_counts(text: &str) -> TextCounts {
    counts_for_sentences(&segment_sentences(text))
}
