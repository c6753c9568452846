//! Matching identity terms in documents and deciding which matches are
//! identity readings.
//!
//! An [`Annotator`] runs one matcher ([`Technique`]), resolves overlapping
//! matches (longest span first, then leftmost), applies the person-noun
//! rules and attaches the lexicon's sense contexts. Filtered mentions stay
//! in the output with their verdict so false-negative trade-offs can be
//! audited.

mod eval;
mod matchers;
mod person;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::lexicon::{Connotation, EntryId, IdentityGroup, Lexicon, SenseContext};
use crate::text::{heuristic_tag, Document};

pub use eval::{evaluate_annotations, evaluate_group_sets, groups_by_doc, EvalReport, GroupScore};
pub use matchers::{match_exact, match_lemma, match_substring, SubstringMatcher};
pub use person::{apply_person_rules, PersonNounLexicon, NON_PERSON_ANCHORS, PERSON_ANCHORS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Technique {
    Substring,
    Exact,
    Lemma,
}

impl FromStr for Technique {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "substring" => Ok(Technique::Substring),
            "exact" => Ok(Technique::Exact),
            "lemma" => Ok(Technique::Lemma),
            other => Err(format!("unknown technique `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PersonFilter {
    #[default]
    None,
    Lexicon,
    Similarity,
}

impl FromStr for PersonFilter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(PersonFilter::None),
            "lexicon" => Ok(PersonFilter::Lexicon),
            "similarity" => Ok(PersonFilter::Similarity),
            other => Err(format!("unknown person filter `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Kept,
    FilteredPersonLexicon,
    FilteredSimilarity,
    FilteredDependency,
}

impl Verdict {
    pub fn is_kept(self) -> bool {
        self == Verdict::Kept
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Kept => "KEPT",
            Verdict::FilteredPersonLexicon => "FILTERED_PERSON_LEXICON",
            Verdict::FilteredSimilarity => "FILTERED_SIMILARITY",
            Verdict::FilteredDependency => "FILTERED_DEPENDENCY",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorConfig {
    pub technique: Technique,
    pub person_filter: PersonFilter,
    pub use_dependency_rule: bool,
    pub use_ner_rule: bool,
    pub similarity_threshold: f64,
}

impl Default for AnnotatorConfig {
    fn default() -> Self {
        AnnotatorConfig {
            technique: Technique::Exact,
            person_filter: PersonFilter::None,
            use_dependency_rule: false,
            use_ner_rule: false,
            similarity_threshold: 0.25,
        }
    }
}

impl AnnotatorConfig {
    pub fn new(technique: Technique) -> Self {
        AnnotatorConfig {
            technique,
            ..AnnotatorConfig::default()
        }
    }

    /// A person filter with the dependency and NER rules switched on.
    pub fn with_person_filter(mut self, filter: PersonFilter) -> Self {
        self.person_filter = filter;
        if filter != PersonFilter::None {
            self.use_dependency_rule = true;
            self.use_ner_rule = true;
        }
        self
    }

    pub fn validate(&self, resources: &Resources<'_>) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.similarity_threshold) {
            return Err(Error::Config(format!(
                "similarity threshold {} outside [-1, 1]",
                self.similarity_threshold
            )));
        }
        let needs_person_nouns = self.person_filter == PersonFilter::Lexicon
            || (self.person_filter == PersonFilter::None && self.use_dependency_rule);
        if needs_person_nouns && resources.person_nouns.map_or(true, |p| p.is_empty()) {
            return Err(Error::Config(
                "person-noun filtering needs a non-empty person-noun lexicon".into(),
            ));
        }
        if self.person_filter == PersonFilter::Similarity {
            let table = resources.embeddings.ok_or_else(|| {
                Error::Config("similarity person filter needs an embedding table".into())
            })?;
            for anchors in [&PERSON_ANCHORS[..], &NON_PERSON_ANCHORS[..]] {
                if anchors.iter().all(|a| table.term_vector(a).is_none()) {
                    return Err(Error::Config(format!(
                        "embedding table has none of the anchor terms {anchors:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// External resources an annotator may consult.
#[derive(Debug, Clone, Copy, Default)]
pub struct Resources<'a> {
    pub person_nouns: Option<&'a PersonNounLexicon>,
    pub embeddings: Option<&'a EmbeddingTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mention {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
    pub matched_text: String,
    pub entry_ref: EntryId,
    pub technique: Technique,
    pub senses: Vec<SenseContext>,
    pub disambiguation: Verdict,
    pub non_identity_possible: bool,
    /// Token index range covered by the span, end exclusive.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<(usize, usize)>,
    /// Entity label that kept this mention, when the NER rule fired.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ner_source: Option<String>,
}

impl Mention {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn groups(&self) -> BTreeSet<IdentityGroup> {
        self.senses.iter().map(|s| s.identity_group).collect()
    }

    pub fn subgroups(&self) -> BTreeSet<String> {
        self.senses.iter().map(|s| s.subgroup.clone()).collect()
    }

    pub fn connotations(&self) -> BTreeSet<Connotation> {
        self.senses
            .iter()
            .flat_map(|s| s.connotations.iter().copied())
            .collect()
    }

    pub fn overlaps(&self, other: &Mention) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn to_record(&self) -> MentionRecord {
        MentionRecord {
            doc_id: self.doc_id.clone(),
            start: self.start,
            end: self.end,
            text: self.matched_text.clone(),
            entry_id: self.entry_ref,
            technique: self.technique,
            groups: self.groups().into_iter().collect(),
            subgroups: self.subgroups().into_iter().collect(),
            connotations: self.connotations().into_iter().collect(),
            verdict: self.disambiguation,
            non_identity_possible: self.non_identity_possible,
        }
    }
}

/// Flat JSONL form of a mention.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub entry_id: EntryId,
    pub technique: Technique,
    pub groups: Vec<IdentityGroup>,
    pub subgroups: Vec<String>,
    pub connotations: Vec<Connotation>,
    pub verdict: Verdict,
    #[serde(default)]
    pub non_identity_possible: bool,
}

/// Keeps the longest mentions, breaking ties by leftmost start and then by
/// entry id, and drops anything overlapping an accepted mention. Output is
/// ordered by start.
pub fn resolve_overlaps(mut mentions: Vec<Mention>) -> Vec<Mention> {
    mentions.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then(a.start.cmp(&b.start))
            .then(a.entry_ref.cmp(&b.entry_ref))
    });
    let mut kept: Vec<Mention> = Vec::with_capacity(mentions.len());
    for m in mentions {
        if !kept.iter().any(|k| k.overlaps(&m)) {
            kept.push(m);
        }
    }
    kept.sort_by_key(|m| (m.start, m.end, m.entry_ref));
    kept
}

/// Configured annotation pipeline over a shared lexicon.
pub struct Annotator<'a> {
    lexicon: &'a Lexicon,
    config: AnnotatorConfig,
    resources: Resources<'a>,
    substring: Option<SubstringMatcher>,
}

impl<'a> Annotator<'a> {
    pub fn new(
        lexicon: &'a Lexicon,
        config: AnnotatorConfig,
        resources: Resources<'a>,
    ) -> Result<Self> {
        config.validate(&resources)?;
        let substring =
            (config.technique == Technique::Substring).then(|| SubstringMatcher::new(lexicon));
        Ok(Annotator {
            lexicon,
            config,
            resources,
            substring,
        })
    }

    pub fn config(&self) -> &AnnotatorConfig {
        &self.config
    }

    pub fn lexicon(&self) -> &'a Lexicon {
        self.lexicon
    }

    /// Tokenizes and tags raw text with the built-in heuristics.
    pub fn prepare(&self, doc_id: &str, text: &str) -> Document {
        let mut doc = Document::from_text(doc_id, text);
        doc.tokens = heuristic_tag(
            std::mem::take(&mut doc.tokens),
            self.lexicon,
            self.resources.person_nouns,
        );
        doc
    }

    pub fn annotate_text(&self, doc_id: &str, text: &str) -> Result<Vec<Mention>> {
        self.annotate(&self.prepare(doc_id, text))
    }

    pub fn annotate(&self, doc: &Document) -> Result<Vec<Mention>> {
        let raw = match self.config.technique {
            Technique::Substring => self
                .substring
                .as_ref()
                .expect("built for substring technique")
                .find(doc, self.lexicon),
            Technique::Exact => match_exact(doc, self.lexicon),
            Technique::Lemma => match_lemma(doc, self.lexicon),
        };
        apply_person_rules(
            resolve_overlaps(raw),
            doc,
            self.resources.person_nouns,
            &self.config,
            self.resources.embeddings,
        )
    }
}

/// One-shot annotation of a single document.
pub fn annotate(
    doc: &Document,
    lexicon: &Lexicon,
    config: &AnnotatorConfig,
    resources: Resources<'_>,
) -> Result<Vec<Mention>> {
    Annotator::new(lexicon, config.clone(), resources)?.annotate(doc)
}
