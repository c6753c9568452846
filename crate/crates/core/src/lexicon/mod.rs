//! Identity-term lexicon: entries, sense contexts and lookup indices.
//!
//! A lexicon holds head entries (canonical terms such as `muslim`) and their
//! related forms (`muslims`, `muslim man`, ...). Each entry carries one or
//! more [`SenseContext`]s describing the identity group, subgroup and
//! connotation of that usage. The structure is immutable once built and can
//! be shared freely between worker threads.

mod cache;
mod load;
mod normalize;
mod stats;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cache::{cache_path_for, load_with_cache, CACHE_FORMAT_VERSION};
pub use load::{load_lexicon, read_lexicon, write_lexicon};
pub use normalize::normalize_seed_term;
pub(crate) use normalize::is_word_break;
pub use stats::{
    compare_to_published, ConnotationClass, Deviation, DistributionReport, GroupCounts,
};

pub const LEXICON_FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntryId(pub u32);

impl fmt::Display for EntryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IdentityGroup {
    #[serde(rename = "RNE")]
    Rne,
    #[serde(rename = "RELIGION")]
    Religion,
    #[serde(rename = "SOGIESC")]
    Sogiesc,
}

impl IdentityGroup {
    pub const ALL: [IdentityGroup; 3] = [
        IdentityGroup::Rne,
        IdentityGroup::Religion,
        IdentityGroup::Sogiesc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityGroup::Rne => "RNE",
            IdentityGroup::Religion => "RELIGION",
            IdentityGroup::Sogiesc => "SOGIESC",
        }
    }
}

impl fmt::Display for IdentityGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "RNE" => Ok(IdentityGroup::Rne),
            "RELIGION" => Ok(IdentityGroup::Religion),
            "SOGIESC" => Ok(IdentityGroup::Sogiesc),
            other => Err(format!("unknown identity group `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntryKind {
    Head,
    PersonNounCompound,
    RelatedForm,
}

impl EntryKind {
    pub const ALL: [EntryKind; 3] = [
        EntryKind::Head,
        EntryKind::PersonNounCompound,
        EntryKind::RelatedForm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntryKind::Head => "HEAD",
            EntryKind::PersonNounCompound => "PERSON_NOUN_COMPOUND",
            EntryKind::RelatedForm => "RELATED_FORM",
        }
    }
}

impl FromStr for EntryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_uppercase();
        match key.as_str() {
            "HEAD" => Ok(EntryKind::Head),
            "PERSONNOUNCOMPOUND" | "PNC" => Ok(EntryKind::PersonNounCompound),
            "RELATEDFORM" | "OTHERRELATEDFORM" | "RELATED" | "OTHER" => Ok(EntryKind::RelatedForm),
            _ => Err(format!("unknown entry kind `{}`", s.trim())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Connotation {
    Neutral,
    Pejorative,
}

impl Connotation {
    pub fn as_str(self) -> &'static str {
        match self {
            Connotation::Neutral => "NEUTRAL",
            Connotation::Pejorative => "PEJORATIVE",
        }
    }

    /// Parses a connotation cell. `BOTH` and multi-valued cells
    /// (`NEUTRAL|PEJORATIVE`) expand to both members.
    pub fn parse_set(cell: &str) -> Result<BTreeSet<Connotation>, String> {
        let mut set = BTreeSet::new();
        for part in cell.split(['|', ';', ',']) {
            match part.trim().to_ascii_uppercase().as_str() {
                "" => {}
                "NEUTRAL" => {
                    set.insert(Connotation::Neutral);
                }
                "PEJORATIVE" => {
                    set.insert(Connotation::Pejorative);
                }
                "BOTH" => {
                    set.insert(Connotation::Neutral);
                    set.insert(Connotation::Pejorative);
                }
                other => return Err(format!("unknown connotation `{other}`")),
            }
        }
        if set.is_empty() {
            return Err("empty connotation".to_string());
        }
        Ok(set)
    }

    pub fn format_set(set: &BTreeSet<Connotation>) -> &'static str {
        match (
            set.contains(&Connotation::Neutral),
            set.contains(&Connotation::Pejorative),
        ) {
            (true, true) => "BOTH",
            (false, true) => "PEJORATIVE",
            _ => "NEUTRAL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexicalEntry {
    pub id: EntryId,
    pub surface: String,
    pub lemma: String,
    pub is_head: bool,
    pub head_ref: Option<EntryId>,
    pub entry_kind: EntryKind,
    pub pos: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenseContext {
    pub entry_ref: EntryId,
    pub identity_group: IdentityGroup,
    pub subgroup: String,
    pub connotations: BTreeSet<Connotation>,
    pub has_non_identity_sense: bool,
    pub provenance: String,
    /// Columns outside the known schema, carried through untouched.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, String>,
}

/// Immutable identity lexicon with surface and lemma indices.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: Vec<LexicalEntry>,
    senses: Vec<SenseContext>,
    senses_by_entry: Vec<Vec<usize>>,
    surface_index: HashMap<String, Vec<EntryId>>,
    lemma_index: HashMap<String, Vec<EntryId>>,
    max_surface_words: usize,
    extra_columns: Vec<String>,
    version: String,
}

impl Lexicon {
    /// Builds a lexicon from already-validated parts and derives the indices.
    ///
    /// Entry ids must equal their position in `entries`.
    pub fn from_parts(
        entries: Vec<LexicalEntry>,
        senses: Vec<SenseContext>,
        extra_columns: Vec<String>,
    ) -> Result<Self> {
        for (pos, entry) in entries.iter().enumerate() {
            if entry.id.0 as usize != pos {
                return Err(Error::Integrity {
                    row: None,
                    message: format!("entry id {} stored at position {pos}", entry.id),
                });
            }
            if entry.surface.is_empty() || entry.surface != entry.surface.trim() {
                return Err(Error::Integrity {
                    row: None,
                    message: format!("entry {} has a non-normalized surface", entry.id),
                });
            }
            if entry.is_head != entry.head_ref.is_none() {
                return Err(Error::Integrity {
                    row: None,
                    message: format!(
                        "entry `{}` head flag disagrees with its head reference",
                        entry.surface
                    ),
                });
            }
            if entry.is_head != (entry.entry_kind == EntryKind::Head) {
                return Err(Error::Integrity {
                    row: None,
                    message: format!(
                        "entry `{}` head flag disagrees with kind {}",
                        entry.surface,
                        entry.entry_kind.as_str()
                    ),
                });
            }
            if let Some(head) = entry.head_ref {
                match entries.get(head.0 as usize) {
                    Some(h) if h.is_head => {}
                    _ => {
                        return Err(Error::Integrity {
                            row: None,
                            message: format!(
                                "entry `{}` references missing head {head}",
                                entry.surface
                            ),
                        })
                    }
                }
            }
        }

        let mut senses_by_entry = vec![Vec::new(); entries.len()];
        for (idx, sense) in senses.iter().enumerate() {
            let Some(slot) = senses_by_entry.get_mut(sense.entry_ref.0 as usize) else {
                return Err(Error::Integrity {
                    row: None,
                    message: format!("sense references missing entry {}", sense.entry_ref),
                });
            };
            if sense.connotations.is_empty() {
                return Err(Error::Integrity {
                    row: None,
                    message: format!("sense of entry {} has no connotation", sense.entry_ref),
                });
            }
            slot.push(idx);
        }

        let mut surface_index: HashMap<String, Vec<EntryId>> = HashMap::new();
        let mut lemma_index: HashMap<String, Vec<EntryId>> = HashMap::new();
        let mut max_surface_words = 0;
        for entry in &entries {
            surface_index
                .entry(entry.surface.clone())
                .or_default()
                .push(entry.id);
            if entry.is_head {
                lemma_index
                    .entry(entry.lemma.clone())
                    .or_default()
                    .push(entry.id);
            }
            max_surface_words = max_surface_words.max(entry.surface.split(' ').count());
        }

        Ok(Lexicon {
            entries,
            senses,
            senses_by_entry,
            surface_index,
            lemma_index,
            max_surface_words,
            extra_columns,
            version: LEXICON_FORMAT_VERSION.to_string(),
        })
    }

    pub fn empty() -> Self {
        Lexicon::from_parts(Vec::new(), Vec::new(), Vec::new()).expect("empty lexicon is valid")
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

    pub fn entries(&self) -> &[LexicalEntry] {
        &self.entries
    }

    pub fn senses(&self) -> &[SenseContext] {
        &self.senses
    }

    pub fn extra_columns(&self) -> &[String] {
        &self.extra_columns
    }

    pub fn entry(&self, id: EntryId) -> Option<&LexicalEntry> {
        self.entries.get(id.0 as usize)
    }

    pub fn senses_of(&self, id: EntryId) -> impl Iterator<Item = &SenseContext> + '_ {
        self.senses_by_entry
            .get(id.0 as usize)
            .into_iter()
            .flatten()
            .map(move |&i| &self.senses[i])
    }

    pub fn groups_of(&self, id: EntryId) -> BTreeSet<IdentityGroup> {
        self.senses_of(id).map(|s| s.identity_group).collect()
    }

    pub fn has_non_identity_sense(&self, id: EntryId) -> bool {
        self.senses_of(id).any(|s| s.has_non_identity_sense)
    }

    /// All entries whose surface equals `token_text` exactly.
    pub fn lookup_surface(&self, token_text: &str) -> Vec<&LexicalEntry> {
        self.surface_ids(token_text)
            .iter()
            .map(|id| &self.entries[id.0 as usize])
            .collect()
    }

    /// Head entries keyed by `lemma`.
    pub fn lookup_lemma(&self, lemma: &str) -> Vec<&LexicalEntry> {
        self.lemma_ids(lemma)
            .iter()
            .map(|id| &self.entries[id.0 as usize])
            .collect()
    }

    pub fn surface_ids(&self, surface: &str) -> &[EntryId] {
        self.surface_index
            .get(surface)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn lemma_ids(&self, lemma: &str) -> &[EntryId] {
        self.lemma_index.get(lemma).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn surface_keys(&self) -> impl Iterator<Item = &str> + '_ {
        self.surface_index.keys().map(String::as_str)
    }

    pub fn lemma_key_count(&self) -> usize {
        self.lemma_index.len()
    }

    pub fn surface_key_count(&self) -> usize {
        self.surface_index.len()
    }

    /// Largest number of space-separated words in any surface.
    pub fn max_surface_words(&self) -> usize {
        self.max_surface_words
    }

    /// Entries that carry at least one sense in `group`, in id order.
    pub fn entries_in_group(&self, group: IdentityGroup) -> impl Iterator<Item = &LexicalEntry> + '_ {
        self.entries
            .iter()
            .filter(move |e| self.senses_of(e.id).any(|s| s.identity_group == group))
    }

    pub fn stats(&self) -> DistributionReport {
        DistributionReport::from_lexicon(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connotation_cells() {
        let both = Connotation::parse_set("BOTH").unwrap();
        assert_eq!(both.len(), 2);
        assert_eq!(Connotation::format_set(&both), "BOTH");
        let pair = Connotation::parse_set("neutral|PEJORATIVE").unwrap();
        assert_eq!(pair, both);
        assert!(Connotation::parse_set("").is_err());
        assert!(Connotation::parse_set("rude").is_err());
    }

    #[test]
    fn entry_kind_spellings() {
        assert_eq!("head".parse::<EntryKind>().unwrap(), EntryKind::Head);
        assert_eq!(
            "Person Noun Compound".parse::<EntryKind>().unwrap(),
            EntryKind::PersonNounCompound
        );
        assert_eq!(
            "other related form".parse::<EntryKind>().unwrap(),
            EntryKind::RelatedForm
        );
        assert!("stem".parse::<EntryKind>().is_err());
    }

    #[test]
    fn group_spellings() {
        assert_eq!("Religion".parse::<IdentityGroup>().unwrap(), IdentityGroup::Religion);
        assert!("caste".parse::<IdentityGroup>().is_err());
    }

    #[test]
    fn empty_lexicon_has_empty_indices() {
        let lex = Lexicon::empty();
        assert!(lex.is_empty());
        assert_eq!(lex.surface_key_count(), 0);
        assert_eq!(lex.lemma_key_count(), 0);
        assert!(lex.lookup_lemma("").is_empty());
    }

    #[test]
    fn rejects_dangling_head() {
        let entries = vec![LexicalEntry {
            id: EntryId(0),
            surface: "muslims".into(),
            lemma: "muslim".into(),
            is_head: false,
            head_ref: Some(EntryId(7)),
            entry_kind: EntryKind::RelatedForm,
            pos: None,
        }];
        assert!(matches!(
            Lexicon::from_parts(entries, Vec::new(), Vec::new()),
            Err(Error::Integrity { .. })
        ));
    }
}
