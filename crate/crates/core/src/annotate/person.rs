use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

use log::debug;

use super::{AnnotatorConfig, Mention, PersonFilter, Verdict};
use crate::embed::{cosine, EmbeddingTable};
use crate::error::{Error, Result};
use crate::lexicon::normalize_seed_term;
use crate::text::{Document, Token};

pub const PERSON_ANCHORS: [&str; 2] = ["person", "people"];
pub const NON_PERSON_ANCHORS: [&str; 2] = ["object", "thing"];

const PERSON_ENTITIES: [&str; 3] = ["PERSON", "NORP", "GPE"];

/// Normalized nouns that denote people (`man`, `people`, `neighbour`, ...).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PersonNounLexicon {
    terms: BTreeSet<String>,
}

impl PersonNounLexicon {
    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        PersonNounLexicon {
            terms: terms
                .into_iter()
                .map(|t| normalize_seed_term(t.as_ref()))
                .filter(|t| !t.is_empty())
                .collect(),
        }
    }

    /// One term per line; blank lines and `#` comments are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut terms = Vec::new();
        for line in std::io::BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                terms.push(line.to_string());
            }
        }
        Ok(Self::from_terms(terms))
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.contains(term)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        self.terms.iter().map(String::as_str)
    }
}

/// Decides whether a token denotes a person. `None` means the resource
/// cannot tell (for example an out-of-vocabulary word).
enum PersonTest<'a> {
    Lexicon(&'a PersonNounLexicon),
    Similarity {
        table: &'a EmbeddingTable,
        threshold: f64,
    },
}

impl PersonTest<'_> {
    fn is_person(&self, tok: &Token) -> Option<bool> {
        let lower = normalize_seed_term(&tok.text);
        let lemma = tok
            .lemma
            .as_deref()
            .map(normalize_seed_term)
            .unwrap_or_else(|| lower.clone());
        match self {
            PersonTest::Lexicon(list) => Some(list.contains(&lower) || list.contains(&lemma)),
            PersonTest::Similarity { table, threshold } => {
                let v = table.term_vector(&lemma).or_else(|| table.term_vector(&lower))?;
                let best = |anchors: &[&str]| {
                    anchors
                        .iter()
                        .filter_map(|a| table.term_vector(a))
                        .map(|a| cosine(&v, &a))
                        .fold(f64::NEG_INFINITY, f64::max)
                };
                let person = best(&PERSON_ANCHORS);
                let thing = best(&NON_PERSON_ANCHORS);
                Some(person > thing && person >= *threshold)
            }
        }
    }
}

fn is_modifier_relation(rel: Option<&str>) -> bool {
    rel.is_some_and(|r| r.starts_with("amod") || r.starts_with("compound") || r.starts_with("nmod"))
}

/// Applies the person-noun disambiguation rules to matcher output.
///
/// A mention whose token modifies a noun keeps its identity reading only if
/// that noun denotes a person; a nominal mention is tested itself. Conjuncts
/// inherit the verdict of the token they are conjoined to. Tokens inside a
/// PERSON, NORP or GPE entity are kept when the NER rule is on, and tokens
/// without dependency information are always kept.
pub fn apply_person_rules(
    mut mentions: Vec<Mention>,
    doc: &Document,
    person_nouns: Option<&PersonNounLexicon>,
    config: &AnnotatorConfig,
    embeddings: Option<&EmbeddingTable>,
) -> Result<Vec<Mention>> {
    let (test, filtered) = match config.person_filter {
        PersonFilter::Similarity => {
            let table = embeddings.ok_or_else(|| {
                Error::Config("similarity person filter needs an embedding table".into())
            })?;
            (
                Some(PersonTest::Similarity {
                    table,
                    threshold: config.similarity_threshold,
                }),
                Verdict::FilteredSimilarity,
            )
        }
        PersonFilter::Lexicon => {
            let list = person_nouns.ok_or_else(|| {
                Error::Config("lexicon person filter needs a person-noun lexicon".into())
            })?;
            (Some(PersonTest::Lexicon(list)), Verdict::FilteredPersonLexicon)
        }
        PersonFilter::None if config.use_dependency_rule => {
            let list = person_nouns.ok_or_else(|| {
                Error::Config("dependency rule needs a person-noun lexicon".into())
            })?;
            (Some(PersonTest::Lexicon(list)), Verdict::FilteredDependency)
        }
        PersonFilter::None => (None, Verdict::Kept),
    };
    let Some(test) = test else {
        return Ok(mentions);
    };

    let tokens = &doc.tokens;
    for m in mentions.iter_mut() {
        let Some((first, last)) = m.tokens.filter(|(a, b)| a < b && *b <= tokens.len()) else {
            continue;
        };
        if config.use_ner_rule {
            if let Some(label) = tokens[first..last]
                .iter()
                .filter_map(|t| t.ner_tag.as_deref())
                .find(|l| PERSON_ENTITIES.contains(l))
            {
                if label == "GPE" {
                    debug!("{}: `{}` kept through a GPE entity", m.doc_id, m.matched_text);
                }
                m.disambiguation = Verdict::Kept;
                m.ner_source = Some(label.to_string());
                continue;
            }
        }
        let anchor = last - 1;
        if !tokens[anchor].has_dependency() {
            continue;
        }

        let mut cur = anchor;
        if config.use_dependency_rule {
            let mut hops = 0;
            while tokens[cur].dep_rel.as_deref() == Some("conj") && hops < tokens.len() {
                match tokens[cur].dep_head {
                    Some(h) => cur = h,
                    None => break,
                }
                hops += 1;
            }
        }
        let tok = &tokens[cur];
        let judged = if is_modifier_relation(tok.dep_rel.as_deref()) || !tok.coarse_pos().is_nominal() {
            if !config.use_dependency_rule {
                None
            } else {
                tok.dep_head
                    .map(|h| &tokens[h])
                    .filter(|h| h.coarse_pos().is_nominal())
                    .and_then(|h| test.is_person(h))
            }
        } else if config.person_filter != PersonFilter::None {
            test.is_person(tok)
        } else {
            None
        };
        if judged == Some(false) {
            m.disambiguation = filtered;
        }
    }
    Ok(mentions)
}
