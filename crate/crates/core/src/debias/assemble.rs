use std::collections::{BTreeMap, BTreeSet};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::LabeledExample;
use crate::counterfactual::CounterfactualExample;
use crate::metrics::{toxicity_rates, FairnessReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourcingOptions {
    pub threshold: f64,
    /// Admit supplement rows that carry no toxicity label.
    pub assume_nontoxic: bool,
    /// Texts that must not be sourced again, typically the organic ones.
    #[serde(skip)]
    pub exclude_texts: BTreeSet<String>,
}

impl Default for SourcingOptions {
    fn default() -> Self {
        SourcingOptions {
            threshold: 0.5,
            assume_nontoxic: false,
            exclude_texts: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sourced {
    pub examples: Vec<LabeledExample>,
    pub shortfall: u64,
}

/// Up to `deficit` non-toxic supplement examples tagged with `subgroup`,
/// taken in corpus order.
pub fn source_balancing_examples<F>(
    supplement: &[LabeledExample],
    subgroup_of: F,
    subgroup: &str,
    deficit: u64,
    options: &SourcingOptions,
) -> Sourced
where
    F: Fn(&LabeledExample) -> BTreeSet<String>,
{
    let mut picked = Vec::new();
    let mut texts = BTreeSet::new();
    for ex in supplement {
        if picked.len() as u64 >= deficit {
            break;
        }
        let non_toxic = match ex.toxicity {
            Some(t) => t < options.threshold,
            None => options.assume_nontoxic,
        };
        if !non_toxic
            || options.exclude_texts.contains(&ex.text)
            || texts.contains(&ex.text)
            || !subgroup_of(ex).contains(subgroup)
        {
            continue;
        }
        texts.insert(ex.text.clone());
        let mut ex = ex.clone();
        ex.toxicity.get_or_insert(0.0);
        picked.push(ex);
    }
    let shortfall = deficit - picked.len() as u64;
    if shortfall > 0 {
        warn!("{subgroup}: supplement is {shortfall} examples short of the deficit {deficit}");
    }
    Sourced {
        examples: picked,
        shortfall,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    Organic,
    Sourced,
    Counterfactual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedExample {
    #[serde(flatten)]
    pub example: LabeledExample,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sourced_for: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub organic: usize,
    pub sourced: usize,
    pub counterfactual: usize,
    pub sourced_per_subgroup: BTreeMap<String, usize>,
    pub duplicates_removed: Vec<String>,
    pub rates_before: FairnessReport,
    pub rates_after: FairnessReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedDataset {
    pub examples: Vec<AugmentedExample>,
    pub manifest: Manifest,
}

/// Appends sourced and counterfactual examples after the organic ones.
/// Organic examples are never touched; an addition whose text is already
/// present is dropped, and one whose id is taken gets a suffixed id.
pub fn assemble_augmented<F>(
    dataset: Vec<LabeledExample>,
    sourced: BTreeMap<String, Vec<LabeledExample>>,
    counterfactuals: Vec<LabeledExample>,
    subgroup_of: F,
    threshold: f64,
) -> AugmentedDataset
where
    F: Fn(&LabeledExample) -> BTreeSet<String>,
{
    let rates_before = toxicity_rates(&dataset, &subgroup_of, threshold);
    let mut texts: BTreeSet<String> = dataset.iter().map(|e| e.text.clone()).collect();
    let mut ids: BTreeSet<String> = dataset.iter().map(|e| e.doc_id.clone()).collect();
    let organic = dataset.len();
    let mut examples: Vec<AugmentedExample> = dataset
        .into_iter()
        .map(|example| AugmentedExample {
            example,
            provenance: Provenance::Organic,
            sourced_for: None,
        })
        .collect();

    let mut duplicates_removed = Vec::new();
    let mut sourced_per_subgroup = BTreeMap::new();
    let additions = sourced
        .into_iter()
        .flat_map(|(g, exs)| exs.into_iter().map(move |e| (Provenance::Sourced, Some(g.clone()), e)))
        .chain(counterfactuals.into_iter().map(|e| (Provenance::Counterfactual, None, e)));
    for (provenance, sourced_for, mut example) in additions {
        if provenance == Provenance::Sourced && !texts.insert(example.text.clone()) {
            duplicates_removed.push(example.doc_id);
            continue;
        }
        if ids.contains(&example.doc_id) {
            let base = example.doc_id.clone();
            let mut n = 1;
            while ids.contains(&format!("{base}#{n}")) {
                n += 1;
            }
            example.doc_id = format!("{base}#{n}");
        }
        ids.insert(example.doc_id.clone());
        if let Some(g) = &sourced_for {
            *sourced_per_subgroup.entry(g.clone()).or_insert(0) += 1;
        }
        examples.push(AugmentedExample {
            example,
            provenance,
            sourced_for,
        });
    }
    if !duplicates_removed.is_empty() {
        info!("dropped {} sourced examples duplicating existing text", duplicates_removed.len());
    }

    let flat: Vec<LabeledExample> = examples.iter().map(|a| a.example.clone()).collect();
    let rates_after = toxicity_rates(&flat, &subgroup_of, threshold);
    let count = |p: Provenance| examples.iter().filter(|a| a.provenance == p).count();
    let manifest = Manifest {
        organic,
        sourced: count(Provenance::Sourced),
        counterfactual: count(Provenance::Counterfactual),
        sourced_per_subgroup,
        duplicates_removed,
        rates_before,
        rates_after,
    };
    AugmentedDataset { examples, manifest }
}

/// Counterfactual variants as labeled examples with `source#variant` ids.
/// Subgroup tags are not carried over since replacement changes them.
pub fn counterfactual_examples(variants: &[CounterfactualExample]) -> Vec<LabeledExample> {
    variants
        .iter()
        .map(|cf| LabeledExample {
            toxicity: cf.toxicity,
            identity_attack: cf.identity_attack,
            ..LabeledExample::new(format!("{}#cf{}", cf.source_doc_id, cf.variant_id), cf.text.clone())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::debias::gold_subgroups;

    fn ex(id: &str, text: &str, tox: Option<f64>, groups: &[&str]) -> LabeledExample {
        LabeledExample {
            toxicity: tox,
            gold_subgroups: Some(groups.iter().map(|s| s.to_string()).collect()),
            ..LabeledExample::new(id, text)
        }
    }

    #[test]
    fn sourcing_counts_and_filters() {
        let supplement = vec![
            ex("s1", "one", Some(0.1), &["gay"]),
            ex("s2", "two", Some(0.9), &["gay"]),
            ex("s3", "three", Some(0.0), &["gay"]),
            ex("s4", "four", Some(0.2), &["black"]),
            ex("s5", "five", None, &["gay"]),
            ex("s6", "six", Some(0.3), &["gay"]),
        ];
        let opts = SourcingOptions::default();
        let out = source_balancing_examples(&supplement, gold_subgroups, "gay", 5, &opts);
        assert_eq!(out.examples.iter().map(|e| e.doc_id.as_str()).collect::<Vec<_>>(), ["s1", "s3", "s6"]);
        assert_eq!(out.shortfall, 2);
        assert!(source_balancing_examples(&supplement, gold_subgroups, "gay", 0, &opts).examples.is_empty());

        let lenient = SourcingOptions {
            assume_nontoxic: true,
            ..SourcingOptions::default()
        };
        let out = source_balancing_examples(&supplement, gold_subgroups, "gay", 5, &lenient);
        assert_eq!(out.examples.len(), 4);
        assert_eq!(out.examples[2].toxicity, Some(0.0));
    }

    #[test]
    fn assembly_keeps_organic_and_dedups() {
        let organic = vec![ex("a", "x", Some(0.9), &["gay"]), ex("b", "y", Some(0.1), &[])];
        let sourced = BTreeMap::from([(
            "gay".to_string(),
            vec![ex("a", "new", Some(0.0), &["gay"]), ex("c", "x", Some(0.0), &["gay"])],
        )]);
        let out = assemble_augmented(organic.clone(), sourced, Vec::new(), gold_subgroups, 0.5);
        assert_eq!(out.examples[..2].iter().map(|a| a.example.clone()).collect::<Vec<_>>(), organic);
        assert_eq!(out.manifest.duplicates_removed, ["c"]);
        assert_eq!(out.examples[2].example.doc_id, "a#1");
        assert_eq!(out.manifest.rates_before.subgroups["gay"].rate, Some(1.0));
        assert_eq!(out.manifest.rates_after.subgroups["gay"].rate, Some(0.5));
        assert_eq!(out.manifest.organic + out.manifest.sourced + out.manifest.counterfactual, out.examples.len());
    }

    #[test]
    fn no_additions_is_identity() {
        let organic = vec![ex("a", "x", Some(0.9), &["gay"])];
        let out = assemble_augmented(organic.clone(), BTreeMap::new(), Vec::new(), gold_subgroups, 0.5);
        assert_eq!(out.examples.len(), 1);
        assert_eq!(out.examples[0].example, organic[0]);
        assert_eq!(out.manifest.rates_before, out.manifest.rates_after);
    }
}
