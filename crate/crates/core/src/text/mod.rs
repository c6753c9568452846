//! Tokens, documents and the linguistic annotation that feeds the matchers.
//!
//! Offsets are character offsets, never byte offsets.

mod conllu;
mod lemma;
mod tagger;
mod tokenize;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use conllu::{ingest_conllu, ingest_conllu_file, to_conllu};
pub use lemma::lemmatize;
pub use tagger::heuristic_tag;
pub use tokenize::{is_punctuation, sentence_starts, tokenize};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub morph: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dep_head: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dep_rel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ner_tag: Option<String>,
}

impl Token {
    pub fn new(text: impl Into<String>, start: usize, end: usize) -> Self {
        Token {
            text: text.into(),
            start,
            end,
            ..Token::default()
        }
    }

    pub fn coarse_pos(&self) -> CoarsePos {
        self.pos
            .as_deref()
            .map(CoarsePos::from_tag)
            .unwrap_or(CoarsePos::Other)
    }

    /// True when a parser supplied an attachment for this token (including root).
    pub fn has_dependency(&self) -> bool {
        self.dep_head.is_some() || self.dep_rel.is_some()
    }

    /// Lemma if known, otherwise the lowercased surface.
    pub fn lemma_or_lower(&self) -> String {
        self.lemma
            .clone()
            .unwrap_or_else(|| self.text.to_lowercase())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarsePos {
    Noun,
    Propn,
    Adj,
    Verb,
    Other,
}

impl CoarsePos {
    pub fn from_tag(tag: &str) -> Self {
        match tag {
            "NOUN" => CoarsePos::Noun,
            "PROPN" => CoarsePos::Propn,
            "ADJ" => CoarsePos::Adj,
            "VERB" | "AUX" => CoarsePos::Verb,
            _ => CoarsePos::Other,
        }
    }

    pub fn is_nominal(self) -> bool {
        matches!(self, CoarsePos::Noun | CoarsePos::Propn)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnnotationSource {
    #[default]
    BuiltinHeuristic,
    Ingested,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub text: String,
    pub tokens: Vec<Token>,
    /// Index of the first token of each sentence.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sentence_starts: Vec<usize>,
    #[serde(default)]
    pub annotation_source: AnnotationSource,
}

impl Document {
    /// Tokenizes `text` with no further annotation.
    pub fn from_text(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        let sentence_starts = sentence_starts(&tokens);
        Document {
            doc_id: doc_id.into(),
            text,
            tokens,
            sentence_starts,
            annotation_source: AnnotationSource::BuiltinHeuristic,
        }
    }

    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }

    /// Checks offset and dependency invariants.
    pub fn validate(&self) -> Result<()> {
        let index = CharIndex::new(&self.text);
        let mut prev_end = 0;
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.start >= tok.end || tok.end > index.len() || tok.start < prev_end {
                return Err(Error::Integrity {
                    row: None,
                    message: format!(
                        "{}: token {i} span {}..{} is out of order or out of bounds",
                        self.doc_id, tok.start, tok.end
                    ),
                });
            }
            if index.slice(&self.text, tok.start, tok.end) != tok.text {
                return Err(Error::Integrity {
                    row: None,
                    message: format!("{}: token {i} text does not match its span", self.doc_id),
                });
            }
            if let Some(head) = tok.dep_head {
                if head >= self.tokens.len() {
                    return Err(Error::Integrity {
                        row: None,
                        message: format!("{}: token {i} head {head} out of range", self.doc_id),
                    });
                }
            }
            prev_end = tok.end;
        }
        Ok(())
    }
}

/// Maps character offsets to byte offsets for one string.
#[derive(Debug, Clone)]
pub struct CharIndex {
    bytes: Vec<usize>,
}

impl CharIndex {
    pub fn new(text: &str) -> Self {
        let mut bytes: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bytes.push(text.len());
        CharIndex { bytes }
    }

    /// Number of characters.
    pub fn len(&self) -> usize {
        self.bytes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn byte(&self, char_offset: usize) -> usize {
        self.bytes[char_offset]
    }

    pub fn slice<'t>(&self, text: &'t str, start: usize, end: usize) -> &'t str {
        &text[self.bytes[start]..self.bytes[end]]
    }

    /// Character offset of a byte offset that falls on a char boundary.
    pub fn char_of_byte(&self, byte: usize) -> usize {
        self.bytes
            .binary_search(&byte)
            .expect("byte offset on a char boundary")
    }
}
