use aho_corasick::{AhoCorasick, MatchKind};

use super::{Mention, Technique, Verdict};
use crate::lexicon::{is_word_break, normalize_seed_term, EntryId, Lexicon};
use crate::text::{lemmatize, CharIndex, Document, Token};

fn mention(
    doc: &Document,
    lexicon: &Lexicon,
    index: &CharIndex,
    (start, end): (usize, usize),
    tokens: Option<(usize, usize)>,
    entry: EntryId,
    technique: Technique,
) -> Mention {
    Mention {
        doc_id: doc.doc_id.clone(),
        start,
        end,
        matched_text: index.slice(&doc.text, start, end).to_string(),
        entry_ref: entry,
        technique,
        senses: lexicon.senses_of(entry).cloned().collect(),
        disambiguation: Verdict::Kept,
        non_identity_possible: lexicon.has_non_identity_sense(entry),
        tokens,
        ner_source: None,
    }
}

/// Token index range overlapping a character span.
fn covering_tokens(tokens: &[Token], start: usize, end: usize) -> Option<(usize, usize)> {
    let first = tokens.iter().position(|t| t.end > start)?;
    let last = tokens.iter().rposition(|t| t.start < end)?;
    (first <= last).then_some((first, last + 1))
}

/// Case-insensitive character-level search for every lexicon surface.
///
/// Building the automaton is the expensive part; keep one per lexicon.
pub struct SubstringMatcher {
    automaton: Option<AhoCorasick>,
    pattern_entries: Vec<Vec<EntryId>>,
}

impl SubstringMatcher {
    pub fn new(lexicon: &Lexicon) -> Self {
        let mut surfaces: Vec<&str> = lexicon.surface_keys().collect();
        surfaces.sort_unstable();
        let pattern_entries = surfaces
            .iter()
            .map(|s| lexicon.surface_ids(s).to_vec())
            .collect();
        let automaton = (!surfaces.is_empty()).then(|| {
            AhoCorasick::builder()
                .match_kind(MatchKind::Standard)
                .build(&surfaces)
                .expect("lexicon surfaces form a valid automaton")
        });
        SubstringMatcher {
            automaton,
            pattern_entries,
        }
    }

    /// All occurrences, including overlapping ones and those inside words.
    pub fn find(&self, doc: &Document, lexicon: &Lexicon) -> Vec<Mention> {
        let Some(automaton) = &self.automaton else {
            return Vec::new();
        };
        // one lowercase char per source char keeps offsets aligned
        let folded: String = doc
            .text
            .chars()
            .map(|c| c.to_lowercase().next().unwrap_or(c))
            .collect();
        let folded_index = CharIndex::new(&folded);
        let index = CharIndex::new(&doc.text);
        let mut out = Vec::new();
        for hit in automaton.find_overlapping_iter(&folded) {
            let start = folded_index.char_of_byte(hit.start());
            let end = folded_index.char_of_byte(hit.end());
            let tokens = covering_tokens(&doc.tokens, start, end);
            for &entry in &self.pattern_entries[hit.pattern().as_usize()] {
                out.push(mention(
                    doc,
                    lexicon,
                    &index,
                    (start, end),
                    tokens,
                    entry,
                    Technique::Substring,
                ));
            }
        }
        out.sort_by_key(|m| (m.start, m.end, m.entry_ref));
        out
    }
}

pub fn match_substring(doc: &Document, lexicon: &Lexicon) -> Vec<Mention> {
    SubstringMatcher::new(lexicon).find(doc, lexicon)
}

/// Left-to-right, longest-first matching of contiguous token sequences.
///
/// `piece` gives each token's normalized contribution; tokens with an empty
/// piece may only sit inside a match when they are hyphens or slashes.
fn match_sequences<'l>(
    doc: &Document,
    lexicon: &'l Lexicon,
    technique: Technique,
    piece: impl Fn(&Token) -> String,
    lookup: impl Fn(&str) -> &'l [EntryId],
) -> Vec<Mention> {
    let tokens = &doc.tokens;
    let pieces: Vec<String> = tokens.iter().map(&piece).collect();
    let max_words = lexicon.max_surface_words();
    let index = CharIndex::new(&doc.text);
    let mut out = Vec::new();

    let mut i = 0;
    while i < tokens.len() {
        if pieces[i].is_empty() {
            i += 1;
            continue;
        }
        let mut words: Vec<&str> = Vec::new();
        let mut best: Option<(usize, &[EntryId])> = None;
        for j in i..tokens.len() {
            if pieces[j].is_empty() {
                let joiner = tokens[j].text.chars().all(is_word_break);
                if joiner && j > i {
                    continue;
                }
                break;
            }
            words.push(&pieces[j]);
            if words.len() > max_words {
                break;
            }
            let ids = lookup(&words.join(" "));
            if !ids.is_empty() {
                best = Some((j, ids));
            }
        }
        match best {
            Some((j, ids)) => {
                let span = (tokens[i].start, tokens[j].end);
                for &entry in ids {
                    out.push(mention(
                        doc,
                        lexicon,
                        &index,
                        span,
                        Some((i, j + 1)),
                        entry,
                        technique,
                    ));
                }
                i = j + 1;
            }
            None => i += 1,
        }
    }
    out
}

/// Token-sequence match against every entry surface (heads and related forms).
pub fn match_exact(doc: &Document, lexicon: &Lexicon) -> Vec<Mention> {
    match_sequences(
        doc,
        lexicon,
        Technique::Exact,
        |t| normalize_seed_term(&t.text),
        |key| lexicon.surface_ids(key),
    )
}

/// Token-lemma match against head entries only.
pub fn match_lemma(doc: &Document, lexicon: &Lexicon) -> Vec<Mention> {
    match_sequences(
        doc,
        lexicon,
        Technique::Lemma,
        |t| {
            let lemma = match &t.lemma {
                Some(l) => l.clone(),
                None => lemmatize(&t.text, Some(lexicon)),
            };
            normalize_seed_term(&lemma)
        },
        |key| lexicon.lemma_ids(key),
    )
}
