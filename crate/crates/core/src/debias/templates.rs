use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read};

use log::warn;
use serde::{Deserialize, Serialize};

use super::LabeledExample;
use crate::error::{Error, Result};
use crate::lexicon::{IdentityGroup, Lexicon};

const IDENTITY_TERM: &str = "identity_term";
const PERSON_NOUN: &str = "person_noun";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub template_id: String,
    pub pattern: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toxicity: Option<f64>,
}

impl Template {
    /// Placeholder names in order of appearance, checking that every brace
    /// opens a known placeholder and closes it.
    pub fn placeholders(&self) -> Result<Vec<&str>> {
        let mut out = Vec::new();
        let mut rest = self.pattern.as_str();
        while let Some(open) = rest.find(['{', '}']) {
            if rest[open..].starts_with('}') {
                return Err(Error::Config(format!("{}: stray `}}`", self.template_id)));
            }
            let after = &rest[open + 1..];
            let close = after
                .find(['{', '}'])
                .filter(|&i| after[i..].starts_with('}'))
                .ok_or_else(|| Error::Config(format!("{}: unclosed `{{`", self.template_id)))?;
            let name = &after[..close];
            if name != IDENTITY_TERM && name != PERSON_NOUN {
                return Err(Error::Config(format!(
                    "{}: unknown placeholder `{{{name}}}`",
                    self.template_id
                )));
            }
            out.push(name);
            rest = &after[close + 1..];
        }
        if out.is_empty() {
            return Err(Error::Config(format!("{}: no placeholder", self.template_id)));
        }
        Ok(out)
    }
}

/// Reads `{template_id, pattern}` lines. Malformed templates are skipped
/// with a warning; malformed JSON is an error.
pub fn read_templates<R: Read>(reader: R) -> Result<Vec<Template>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::format(i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let t: Template =
            serde_json::from_str(&line).map_err(|e| Error::format(i + 1, e.to_string()))?;
        match t.placeholders() {
            Ok(_) => out.push(t),
            Err(e) => warn!("line {}: template skipped: {e}", i + 1),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpansionOptions {
    /// Only terms with a sense in one of these groups; all groups when empty.
    pub groups: BTreeSet<IdentityGroup>,
    /// Use every form rather than head terms only.
    pub all_forms: bool,
    pub person_nouns: Vec<String>,
}

/// Every template filled with every selected term (and person noun, when
/// the template asks for one). Ids are `template:entry` or
/// `template:entry:noun-index`.
pub fn expand_templates(
    templates: &[Template],
    lexicon: &Lexicon,
    options: &ExpansionOptions,
) -> Vec<LabeledExample> {
    let terms: Vec<_> = lexicon
        .entries()
        .iter()
        .filter(|e| options.all_forms || e.is_head)
        .filter(|e| {
            options.groups.is_empty() || !lexicon.groups_of(e.id).is_disjoint(&options.groups)
        })
        .collect();
    if terms.is_empty() {
        warn!("no lexicon terms match the group filter");
    }
    let mut out = Vec::new();
    for t in templates {
        let names = match t.placeholders() {
            Ok(n) => n,
            Err(e) => {
                warn!("template skipped: {e}");
                continue;
            }
        };
        let wants_term = names.contains(&IDENTITY_TERM);
        let wants_noun = names.contains(&PERSON_NOUN);
        if (wants_term && terms.is_empty()) || (wants_noun && options.person_nouns.is_empty()) {
            warn!("{}: a placeholder has no substitutions, template skipped", t.template_id);
            continue;
        }
        let term_slots: Vec<Option<_>> = if wants_term {
            terms.iter().map(Some).collect()
        } else {
            vec![None]
        };
        let noun_slots: Vec<Option<(usize, &String)>> = if wants_noun {
            options.person_nouns.iter().enumerate().map(Some).collect()
        } else {
            vec![None]
        };
        for term in &term_slots {
            for noun in &noun_slots {
                let mut text = t.pattern.clone();
                let mut id = t.template_id.clone();
                let mut subgroups = BTreeSet::new();
                if let Some(entry) = term {
                    text = text.replace("{identity_term}", &entry.surface);
                    id.push_str(&format!(":{}", entry.id));
                    subgroups.extend(lexicon.senses_of(entry.id).map(|s| s.subgroup.clone()));
                }
                if let Some((i, n)) = noun {
                    text = text.replace("{person_noun}", n);
                    id.push_str(&format!(":{i}"));
                }
                out.push(LabeledExample {
                    toxicity: t.toxicity,
                    gold_subgroups: Some(subgroups),
                    ..LabeledExample::new(id, text)
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::read_lexicon;

    fn lex() -> Lexicon {
        read_lexicon(
            "term,head_term,is_head,identity_group,subgroup,connotation,non_identity,entry_kind\n\
             gay,,true,SOGIESC,homosexual,NEUTRAL,false,HEAD\n\
             gays,gay,false,SOGIESC,homosexual,NEUTRAL,false,RELATED_FORM\n\
             muslim,,true,RELIGION,muslim,NEUTRAL,false,HEAD\n\
             black,,true,RNE,black,NEUTRAL,true,HEAD\n"
                .as_bytes(),
        )
        .unwrap()
    }

    fn t(id: &str, pattern: &str) -> Template {
        Template {
            template_id: id.into(),
            pattern: pattern.into(),
            toxicity: None,
        }
    }

    #[test]
    fn product_of_templates_and_terms() {
        let out = expand_templates(
            &[t("t1", "I am {identity_term}."), t("t2", "{identity_term} people rock")],
            &lex(),
            &ExpansionOptions::default(),
        );
        assert_eq!(out.len(), 6);
        assert_eq!(out[0].text, "I am gay.");
        assert_eq!(out[0].doc_id, "t1:0");
    }

    #[test]
    fn person_noun_product() {
        let opts = ExpansionOptions {
            person_nouns: vec!["man".into(), "woman".into(), "person".into(), "kid".into()],
            ..ExpansionOptions::default()
        };
        let out = expand_templates(&[t("t", "a {identity_term} {person_noun}")], &lex(), &opts);
        assert_eq!(out.len(), 12);
        assert!(out.iter().any(|e| e.text == "a muslim kid"));
    }

    #[test]
    fn group_filter() {
        let opts = ExpansionOptions {
            groups: BTreeSet::from([IdentityGroup::Sogiesc]),
            all_forms: true,
            ..ExpansionOptions::default()
        };
        let out = expand_templates(&[t("t", "{identity_term}")], &lex(), &opts);
        assert_eq!(out.iter().map(|e| e.text.as_str()).collect::<Vec<_>>(), ["gay", "gays"]);
        let empty = expand_templates(&[t("t", "{identity_term}")], &Lexicon::empty(), &ExpansionOptions::default());
        assert!(empty.is_empty());
    }

    #[test]
    fn malformed_templates() {
        for bad in ["no slots", "{identity_term", "{nope}", "x } {identity_term}"] {
            assert!(t("t", bad).placeholders().is_err(), "{bad}");
        }
        let jsonl = "{\"template_id\":\"a\",\"pattern\":\"{identity_term} ok\"}\n{\"template_id\":\"b\",\"pattern\":\"oops {\"}\n";
        let read = read_templates(jsonl.as_bytes()).unwrap();
        assert_eq!(read.len(), 1);
        // a person-noun template with no nouns is skipped
        assert!(expand_templates(&[t("t", "{person_noun}")], &lex(), &ExpansionOptions::default()).is_empty());
    }
}
