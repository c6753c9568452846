//! Counterfactual variants of labeled text: identity mentions removed
//! (ablation) or swapped for distant same-group terms (replacement).

mod flips;

use std::collections::{BTreeMap, BTreeSet};

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::annotate::Mention;
use crate::debias::LabeledExample;
use crate::embed::{build_subspace, least_similar, EmbeddingTable};
use crate::error::{Error, Result};
use crate::lexicon::{normalize_seed_term, IdentityGroup, Lexicon};
use crate::text::{CharIndex, Document};

pub use flips::{
    flip_rate, flip_rate_diff, flip_report, read_predictions, FlipReport, FlipRow, Prediction,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    AblationKeyword,
    AblationAnnotation,
    Replacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AblationMode {
    Keyword,
    Annotation,
}

/// One spliced span, in character offsets of the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub start: usize,
    pub end: usize,
    pub original: String,
    pub replacement: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualExample {
    pub source_doc_id: String,
    pub variant_id: u32,
    pub method: Method,
    pub text: String,
    pub substitutions: Vec<Substitution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toxicity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity_attack: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipWhen {
    #[default]
    AtOrAbove,
    Below,
}

/// Decides which labeled examples may be varied without relabeling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardConfig {
    pub threshold: f64,
    pub skip_when: SkipWhen,
}

impl Default for GuardConfig {
    fn default() -> Self {
        GuardConfig {
            threshold: 0.5,
            skip_when: SkipWhen::AtOrAbove,
        }
    }
}

impl GuardConfig {
    /// Examples without an identity-attack label are admitted.
    pub fn admits(&self, identity_attack: Option<f64>) -> bool {
        match (identity_attack, self.skip_when) {
            (None, _) => true,
            (Some(v), SkipWhen::AtOrAbove) => v < self.threshold,
            (Some(v), SkipWhen::Below) => v >= self.threshold,
        }
    }
}

fn check_disjoint(spans: &[(usize, usize)]) -> Result<Vec<(usize, usize)>> {
    let mut sorted = spans.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(Error::Contract(format!(
                "overlapping spans {}..{} and {}..{}",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    Ok(sorted)
}

/// Rewrites `text` with the given substitutions, rightmost first. Removed
/// spans leave no doubled whitespace behind.
fn splice(text: &str, subs: &[Substitution]) -> String {
    let index = CharIndex::new(text);
    let mut out = text.to_string();
    for sub in subs.iter().rev() {
        let (a, b) = (index.byte(sub.start), index.byte(sub.end));
        match &sub.replacement {
            Some(r) => out.replace_range(a..b, r),
            None => {
                let left = &out[..a];
                let right = &out[b..];
                let left_open = left.is_empty() || left.ends_with(char::is_whitespace);
                let right_ws = right.len() - right.trim_start().len();
                let (cut_left, cut_right) = if left_open && right_ws > 0 {
                    (0, right_ws)
                } else if right.is_empty() || right.starts_with(|c: char| ",.;:!?".contains(c)) {
                    (left.len() - left.trim_end().len(), 0)
                } else {
                    (0, 0)
                };
                out.replace_range(a - cut_left..b + cut_right, "");
            }
        }
    }
    out
}

/// Removes every span in one variant.
pub fn ablate(
    doc_id: &str,
    text: &str,
    spans: &[(usize, usize)],
    mode: AblationMode,
) -> Result<CounterfactualExample> {
    let spans = check_disjoint(spans)?;
    let index = CharIndex::new(text);
    if let Some(&(s, e)) = spans.iter().find(|(s, e)| s > e || *e > index.len()) {
        return Err(Error::Contract(format!("span {s}..{e} outside the text")));
    }
    let substitutions: Vec<Substitution> = spans
        .iter()
        .map(|&(start, end)| Substitution {
            start,
            end,
            original: index.slice(text, start, end).to_string(),
            replacement: None,
        })
        .collect();
    Ok(CounterfactualExample {
        source_doc_id: doc_id.to_string(),
        variant_id: 0,
        method: match mode {
            AblationMode::Keyword => Method::AblationKeyword,
            AblationMode::Annotation => Method::AblationAnnotation,
        },
        text: splice(text, &substitutions),
        substitutions,
        toxicity: None,
        identity_attack: None,
    })
}

/// Ablation of one labeled example; labels are copied.
pub fn ablate_example(
    example: &LabeledExample,
    spans: &[(usize, usize)],
    mode: AblationMode,
) -> Result<CounterfactualExample> {
    let mut cf = ablate(&example.doc_id, &example.text, spans, mode)?;
    cf.toxicity = example.toxicity;
    cf.identity_attack = example.identity_attack;
    Ok(cf)
}

/// Plain keyword list matched on whole token sequences, case-insensitively.
#[derive(Debug, Clone, Default)]
pub struct KeywordList {
    keywords: BTreeSet<String>,
    max_words: usize,
}

impl KeywordList {
    pub fn new<I, S>(keywords: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let keywords: BTreeSet<String> = keywords
            .into_iter()
            .map(|k| normalize_seed_term(k.as_ref()))
            .filter(|k| !k.is_empty())
            .collect();
        let max_words = keywords.iter().map(|k| k.split(' ').count()).max().unwrap_or(0);
        KeywordList { keywords, max_words }
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }

    /// Longest leftmost keyword spans, non-overlapping.
    pub fn spans(&self, doc: &Document) -> Vec<(usize, usize)> {
        let pieces: Vec<String> = doc.tokens.iter().map(|t| normalize_seed_term(&t.text)).collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < pieces.len() {
            let mut best = None;
            let mut words = Vec::new();
            for j in i..pieces.len().min(i + self.max_words) {
                if pieces[j].is_empty() {
                    break;
                }
                words.push(pieces[j].as_str());
                if self.keywords.contains(&words.join(" ")) {
                    best = Some(j);
                }
            }
            match best {
                Some(j) => {
                    out.push((doc.tokens[i].start, doc.tokens[j].end));
                    i = j + 1;
                }
                None => i += 1,
            }
        }
        out
    }
}

/// Per-term replacement candidates for one identity group, nearest to the
/// term's reflection first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualMap {
    pub group: IdentityGroup,
    pub k: usize,
    pub map: BTreeMap<String, Vec<String>>,
    /// Group terms with no embedding.
    pub skipped: Vec<String>,
}

pub fn build_counterfactual_map(
    lexicon: &Lexicon,
    table: &EmbeddingTable,
    group: IdentityGroup,
    k: usize,
) -> Result<CounterfactualMap> {
    build_counterfactual_map_with(lexicon, table, group, k, false)
}

/// As [`build_counterfactual_map`], optionally refusing candidates that
/// share a subgroup with the term.
pub fn build_counterfactual_map_with(
    lexicon: &Lexicon,
    table: &EmbeddingTable,
    group: IdentityGroup,
    k: usize,
    exclude_same_subgroup: bool,
) -> Result<CounterfactualMap> {
    if k == 0 {
        warn!("counterfactual map for {group} built with k = 0");
    }
    let subspace = build_subspace(lexicon, table, group)?;
    let mut map = BTreeMap::new();
    for member in &subspace.members {
        let ranked = least_similar(&member.term, &subspace, subspace.len() - 1)?;
        let picks: Vec<String> = ranked
            .into_iter()
            .map(|(t, _)| t)
            .filter(|t| {
                !exclude_same_subgroup
                    || subspace
                        .member(t)
                        .is_some_and(|m| m.subgroups.is_disjoint(&member.subgroups))
            })
            .take(k)
            .collect();
        map.insert(member.term.clone(), picks);
    }
    let skipped: Vec<String> = lexicon
        .entries_in_group(group)
        .map(|e| e.surface.clone())
        .filter(|s| !map.contains_key(s))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    Ok(CounterfactualMap {
        group,
        k,
        map,
        skipped,
    })
}

/// Maps for several groups, consulted in group order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualMaps {
    pub groups: BTreeMap<IdentityGroup, CounterfactualMap>,
}

impl CounterfactualMaps {
    /// Builds a map for every group with a usable subspace; the others are
    /// logged and left out.
    pub fn build(lexicon: &Lexicon, table: &EmbeddingTable, k: usize, exclude_same_subgroup: bool) -> Self {
        let mut groups = BTreeMap::new();
        for group in IdentityGroup::ALL {
            match build_counterfactual_map_with(lexicon, table, group, k, exclude_same_subgroup) {
                Ok(m) => {
                    groups.insert(group, m);
                }
                Err(e) => warn!("no counterfactual map for {group}: {e}"),
            }
        }
        CounterfactualMaps { groups }
    }

    pub fn insert(&mut self, map: CounterfactualMap) {
        self.groups.insert(map.group, map);
    }

    pub fn candidates(&self, term: &str, groups: &BTreeSet<IdentityGroup>) -> Option<&[String]> {
        groups
            .iter()
            .filter_map(|g| self.groups.get(g))
            .find_map(|m| m.map.get(term))
            .map(Vec::as_slice)
    }
}

/// Carries the case shape of `original` over to `replacement`.
fn match_case(original: &str, replacement: &str) -> String {
    let letters: Vec<char> = original.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        return replacement.to_uppercase();
    }
    if letters.first().is_some_and(|c| c.is_uppercase()) {
        let mut chars = replacement.chars();
        if let Some(first) = chars.next() {
            return first.to_uppercase().chain(chars).collect();
        }
    }
    replacement.to_string()
}

/// Variant `j` swaps every kept mention for the `j`-th candidate of its
/// term. Mentions without a `j`-th candidate keep their text. Examples the
/// guard rejects, or with nothing to swap, yield no variants.
pub fn generate_replacements(
    example: &LabeledExample,
    mentions: &[Mention],
    lexicon: &Lexicon,
    maps: &CounterfactualMaps,
    k: usize,
    guard: &GuardConfig,
) -> Result<Vec<CounterfactualExample>> {
    if !guard.admits(example.identity_attack) {
        debug!("{}: skipped by identity-attack guard", example.doc_id);
        return Ok(Vec::new());
    }
    let kept: Vec<&Mention> = mentions.iter().filter(|m| m.disambiguation.is_kept()).collect();
    let spans: Vec<(usize, usize)> = kept.iter().map(|m| (m.start, m.end)).collect();
    check_disjoint(&spans)?;

    let mut slots: Vec<(&Mention, &[String])> = kept
        .iter()
        .map(|m| {
            let term = lexicon
                .entry(m.entry_ref)
                .map(|e| e.surface.clone())
                .unwrap_or_else(|| normalize_seed_term(&m.matched_text));
            (*m, maps.candidates(&term, &m.groups()).unwrap_or(&[]))
        })
        .collect();
    slots.sort_by_key(|(m, _)| m.start);
    let ranks = slots.iter().map(|(_, c)| c.len()).max().unwrap_or(0).min(k);

    let mut out = Vec::with_capacity(ranks);
    for j in 0..ranks {
        let substitutions: Vec<Substitution> = slots
            .iter()
            .map(|(m, cands)| Substitution {
                start: m.start,
                end: m.end,
                original: m.matched_text.clone(),
                replacement: Some(match cands.get(j) {
                    Some(c) => match_case(&m.matched_text, c),
                    None => m.matched_text.clone(),
                }),
            })
            .collect();
        out.push(CounterfactualExample {
            source_doc_id: example.doc_id.clone(),
            variant_id: j as u32 + 1,
            method: Method::Replacement,
            text: splice(&example.text, &substitutions),
            substitutions,
            toxicity: example.toxicity,
            identity_attack: example.identity_attack,
        });
    }
    Ok(out)
}
