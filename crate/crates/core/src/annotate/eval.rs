use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::Mention;
use crate::error::{Error, Result};
use crate::lexicon::IdentityGroup;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupScore {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl GroupScore {
    fn finish(mut self) -> Self {
        let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
        self.precision = ratio(self.tp, self.tp + self.fp);
        self.recall = ratio(self.tp, self.tp + self.fn_);
        self.f1 = ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn_);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub documents: usize,
    pub per_group: BTreeMap<IdentityGroup, GroupScore>,
    pub micro: GroupScore,
}

/// Identity groups carried by the KEPT mentions of each document.
pub fn groups_by_doc(
    predicted: &BTreeMap<String, Vec<Mention>>,
) -> BTreeMap<String, BTreeSet<IdentityGroup>> {
    predicted
        .iter()
        .map(|(doc, mentions)| {
            let groups = mentions
                .iter()
                .filter(|m| m.disambiguation.is_kept())
                .flat_map(|m| m.groups())
                .collect();
            (doc.clone(), groups)
        })
        .collect()
}

/// Document-by-group scoring of predicted mentions against gold labels.
pub fn evaluate_annotations(
    predicted: &BTreeMap<String, Vec<Mention>>,
    gold: &BTreeMap<String, BTreeSet<IdentityGroup>>,
) -> Result<EvalReport> {
    evaluate_group_sets(&groups_by_doc(predicted), gold)
}

pub fn evaluate_group_sets(
    predicted: &BTreeMap<String, BTreeSet<IdentityGroup>>,
    gold: &BTreeMap<String, BTreeSet<IdentityGroup>>,
) -> Result<EvalReport> {
    let predicted_only: Vec<String> = predicted
        .keys()
        .filter(|k| !gold.contains_key(*k))
        .cloned()
        .collect();
    let gold_only: Vec<String> = gold
        .keys()
        .filter(|k| !predicted.contains_key(*k))
        .cloned()
        .collect();
    if !predicted_only.is_empty() || !gold_only.is_empty() {
        return Err(Error::Evaluation {
            predicted_only,
            gold_only,
        });
    }

    let mut per_group: BTreeMap<IdentityGroup, GroupScore> = IdentityGroup::ALL
        .iter()
        .map(|g| (*g, GroupScore::default()))
        .collect();
    for (doc, gold_groups) in gold {
        let pred = &predicted[doc];
        for group in IdentityGroup::ALL {
            let score = per_group.get_mut(&group).expect("all groups present");
            match (pred.contains(&group), gold_groups.contains(&group)) {
                (true, true) => score.tp += 1,
                (true, false) => score.fp += 1,
                (false, true) => score.fn_ += 1,
                (false, false) => {}
            }
        }
    }
    let mut micro = GroupScore::default();
    for s in per_group.values() {
        micro.tp += s.tp;
        micro.fp += s.fp;
        micro.fn_ += s.fn_;
    }
    Ok(EvalReport {
        documents: gold.len(),
        per_group: per_group.into_iter().map(|(g, s)| (g, s.finish())).collect(),
        micro: micro.finish(),
    })
}
