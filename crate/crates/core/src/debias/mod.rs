//! Labeled corpora, subgroup rebalancing and template-generated probes.

mod assemble;
mod templates;

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use assemble::{
    assemble_augmented, counterfactual_examples, source_balancing_examples, AugmentedDataset,
    AugmentedExample, Manifest, Provenance, Sourced, SourcingOptions,
};
pub use templates::{expand_templates, read_templates, ExpansionOptions, Template};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Split {
    Train,
    Test,
    #[default]
    Unsplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub doc_id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toxicity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity_attack: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_subgroups: Option<BTreeSet<String>>,
    #[serde(default)]
    pub split: Split,
}

impl LabeledExample {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        LabeledExample {
            doc_id: doc_id.into(),
            text: text.into(),
            toxicity: None,
            identity_attack: None,
            gold_subgroups: None,
            split: Split::Unsplit,
        }
    }

    pub fn is_toxic(&self, threshold: f64) -> Option<bool> {
        self.toxicity.map(|t| t >= threshold)
    }
}

/// Where each field of a tabular corpus lives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    /// Row number is used when absent.
    pub id: Option<String>,
    pub text: String,
    pub toxicity: Option<String>,
    pub identity_attack: Option<String>,
    /// Rater agreement for the whole row. When absent each label's own
    /// majority share, max(v, 1 - v), stands in for it.
    pub agreement: Option<String>,
    /// A `;`-separated list of subgroups.
    pub subgroups: Option<String>,
    /// Columns holding the share of raters that tagged a subgroup.
    pub subgroup_columns: Vec<String>,
    pub lowercase: bool,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            id: Some("id".into()),
            text: "text".into(),
            toxicity: Some("toxicity".into()),
            identity_attack: Some("identity_attack".into()),
            agreement: None,
            subgroups: Some("subgroups".into()),
            subgroup_columns: Vec::new(),
            lowercase: true,
        }
    }
}

fn parse_score(raw: &str, line: usize, column: &str) -> Result<Option<f64>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    let v: f64 = raw.parse().map_err(|_| Error::Format {
        line,
        column: Some(column.to_string()),
        message: format!("`{raw}` is not a number"),
    })?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Format {
            line,
            column: Some(column.to_string()),
            message: format!("{v} outside [0, 1]"),
        });
    }
    Ok(Some(v))
}

/// Reads a CSV corpus, keeping only labels whose rater agreement is
/// strictly above `agreement_threshold`.
pub fn ingest_labeled_corpus<R: Read>(
    reader: R,
    columns: &ColumnMap,
    agreement_threshold: f64,
) -> Result<Vec<LabeledExample>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let find = |name: &str| headers.iter().position(|h| h == name);
    let text_col = find(&columns.text).ok_or_else(|| Error::Format {
        line: 1,
        column: Some(columns.text.clone()),
        message: "missing text column".into(),
    })?;
    let opt = |name: &Option<String>| name.as_deref().and_then(|n| find(n).map(|i| (n.to_string(), i)));
    let id_col = opt(&columns.id);
    let tox_col = opt(&columns.toxicity);
    let ia_col = opt(&columns.identity_attack);
    let agree_col = opt(&columns.agreement);
    let sub_col = opt(&columns.subgroups);
    let frac_cols: Vec<(String, usize)> = columns
        .subgroup_columns
        .iter()
        .map(|c| {
            find(c).map(|i| (c.clone(), i)).ok_or_else(|| Error::Format {
                line: 1,
                column: Some(c.clone()),
                message: "missing subgroup column".into(),
            })
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::format(line, e.to_string()))?;
        let cell = |c: usize| rec.get(c).unwrap_or("");
        let doc_id = match &id_col {
            Some((_, c)) => cell(*c).to_string(),
            None => (i + 1).to_string(),
        };
        if !seen.insert(doc_id.clone()) {
            return Err(Error::Integrity {
                row: Some(line),
                message: format!("duplicate doc id `{doc_id}`"),
            });
        }
        let mut text = cell(text_col).to_string();
        if columns.lowercase {
            text = text.to_lowercase();
        }
        let row_agreement = match &agree_col {
            Some((name, c)) => parse_score(cell(*c), line, name)?,
            None => None,
        };
        let agreed = |v: f64| match (&agree_col, row_agreement) {
            (Some(_), Some(a)) => a > agreement_threshold,
            (Some(_), None) => false,
            (None, _) => v.max(1.0 - v) > agreement_threshold,
        };
        let label = |col: &Option<(String, usize)>| -> Result<Option<f64>> {
            let Some((name, c)) = col else { return Ok(None) };
            Ok(parse_score(cell(*c), line, name)?.filter(|v| agreed(*v)))
        };
        let toxicity = label(&tox_col)?;
        let identity_attack = label(&ia_col)?;

        let mut subgroups: Option<BTreeSet<String>> = None;
        if let Some((_, c)) = &sub_col {
            let listed: BTreeSet<String> = cell(*c)
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
            if agree_col.is_none() || row_agreement.is_some_and(|a| a > agreement_threshold) {
                subgroups = Some(listed);
            }
        }
        for (name, c) in &frac_cols {
            if let Some(v) = parse_score(cell(*c), line, name)? {
                let set = subgroups.get_or_insert_with(BTreeSet::new);
                if v > agreement_threshold && agreed(v) {
                    set.insert(name.clone());
                }
            }
        }
        out.push(LabeledExample {
            doc_id,
            text,
            toxicity,
            identity_attack,
            gold_subgroups: subgroups,
            split: Split::Unsplit,
        });
    }
    Ok(out)
}

/// One [`LabeledExample`] per JSON line.
pub fn read_labeled_jsonl<R: Read>(reader: R) -> Result<Vec<LabeledExample>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::format(i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let ex: LabeledExample =
            serde_json::from_str(&line).map_err(|e| Error::format(i + 1, e.to_string()))?;
        for v in [ex.toxicity, ex.identity_attack].into_iter().flatten() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::format(i + 1, format!("label {v} outside [0, 1]")));
            }
        }
        if !seen.insert(ex.doc_id.clone()) {
            return Err(Error::Integrity {
                row: Some(i + 1),
                message: format!("duplicate doc id `{}`", ex.doc_id),
            });
        }
        out.push(ex);
    }
    Ok(out)
}

/// Seeded shuffle, then the first `ratio.0 / (ratio.0 + ratio.1)` share
/// (rounded half up) goes to training.
pub fn split_corpus(
    mut examples: Vec<LabeledExample>,
    ratio: (usize, usize),
    seed: u64,
) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>)> {
    let parts = ratio.0 + ratio.1;
    if parts == 0 {
        return Err(Error::Config("split ratio must not be 0:0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    examples.shuffle(&mut rng);
    let n_train = (examples.len() * ratio.0 + parts / 2) / parts;
    let mut test = examples.split_off(n_train);
    examples.iter_mut().for_each(|e| e.split = Split::Train);
    test.iter_mut().for_each(|e| e.split = Split::Test);
    Ok((examples, test))
}

/// Gold subgroups of each example, for slicing by ground truth.
pub fn gold_subgroups(ex: &LabeledExample) -> BTreeSet<String> {
    ex.gold_subgroups.clone().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols() -> ColumnMap {
        ColumnMap {
            agreement: Some("agreement".into()),
            ..ColumnMap::default()
        }
    }

    #[test]
    fn agreement_is_strict() {
        let csv = "id,text,toxicity,agreement\na,Hello,0.9,0.6\nb,There,0.9,0.5\n";
        let out = ingest_labeled_corpus(csv.as_bytes(), &cols(), 0.5).unwrap();
        assert_eq!(out[0].toxicity, Some(0.9));
        assert_eq!(out[1].toxicity, None);
        assert_eq!(out[0].text, "hello");
    }

    #[test]
    fn derived_agreement_and_fraction_columns() {
        let csv = "id,text,toxicity,black,muslim\na,x,0.5,0.8,0.2\nb,y,0.3,0.5,0.0\n";
        let map = ColumnMap {
            subgroup_columns: vec!["black".into(), "muslim".into()],
            ..ColumnMap::default()
        };
        let out = ingest_labeled_corpus(csv.as_bytes(), &map, 0.5).unwrap();
        assert_eq!(out[0].toxicity, None);
        assert_eq!(out[0].gold_subgroups, Some(BTreeSet::from(["black".to_string()])));
        assert_eq!(out[1].toxicity, Some(0.3));
        assert_eq!(out[1].gold_subgroups, Some(BTreeSet::new()));
    }

    #[test]
    fn empty_and_missing_text() {
        assert!(ingest_labeled_corpus("".as_bytes(), &cols(), 0.5).unwrap().is_empty());
        assert!(matches!(
            ingest_labeled_corpus("id,body\n1,x\n".as_bytes(), &cols(), 0.5),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn subgroup_list_column() {
        let csv = "id,text,subgroups\na,x,gay; black\n";
        let out = ingest_labeled_corpus(csv.as_bytes(), &ColumnMap::default(), 0.5).unwrap();
        assert_eq!(out[0].gold_subgroups.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn split_sizes() {
        let mk = |n: usize| (0..n).map(|i| LabeledExample::new(i.to_string(), "")).collect::<Vec<_>>();
        let (train, test) = split_corpus(mk(100), (3, 1), 7).unwrap();
        assert_eq!((train.len(), test.len()), (75, 25));
        assert!(train.iter().all(|e| e.split == Split::Train));
        let (train, test) = split_corpus(mk(1), (3, 1), 7).unwrap();
        assert_eq!((train.len(), test.len()), (1, 0));
        let a = split_corpus(mk(40), (3, 1), 11).unwrap();
        let b = split_corpus(mk(40), (3, 1), 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn jsonl_round_trip() {
        let mut ex = LabeledExample::new("a", "text");
        ex.toxicity = Some(0.2);
        let line = serde_json::to_string(&ex).unwrap();
        assert_eq!(read_labeled_jsonl(line.as_bytes()).unwrap(), vec![ex]);
        assert!(read_labeled_jsonl("{\"doc_id\":\"a\",\"text\":\"\",\"toxicity\":2}".as_bytes()).is_err());
    }
}
