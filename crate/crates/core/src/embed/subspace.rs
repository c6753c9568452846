use std::collections::{BTreeMap, BTreeSet};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::{euclidean, EmbeddingTable};
use crate::error::{Error, Result};
use crate::lexicon::{IdentityGroup, Lexicon};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceMember {
    pub term: String,
    #[serde(skip)]
    pub vector: Vec<f64>,
    #[serde(skip)]
    pub subgroups: BTreeSet<String>,
}

/// In-vocabulary terms of one identity group and their mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    pub group: IdentityGroup,
    pub center: Vec<f64>,
    pub members: Vec<SubspaceMember>,
}

impl Subspace {
    /// Members given directly; the center is their mean.
    pub fn from_members(group: IdentityGroup, members: Vec<SubspaceMember>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::InsufficientSubspace {
                group: group.as_str().to_string(),
                found: members.len(),
            });
        }
        let dim = members[0].vector.len();
        let mut center = vec![0.0; dim];
        for m in &members {
            for (c, x) in center.iter_mut().zip(&m.vector) {
                *c += x;
            }
        }
        let n = members.len() as f64;
        center.iter_mut().for_each(|c| *c /= n);
        Ok(Subspace {
            group,
            center,
            members,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, term: &str) -> Option<&SubspaceMember> {
        self.members.iter().find(|m| m.term == term)
    }
}

/// Collects every distinct lexicon surface of `group` that has a vector.
pub fn build_subspace(lexicon: &Lexicon, table: &EmbeddingTable, group: IdentityGroup) -> Result<Subspace> {
    let mut terms: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for entry in lexicon.entries_in_group(group) {
        let subgroups = terms.entry(entry.surface.as_str()).or_default();
        subgroups.extend(
            lexicon
                .senses_of(entry.id)
                .filter(|s| s.identity_group == group)
                .map(|s| s.subgroup.clone()),
        );
    }
    let total = terms.len();
    let members: Vec<SubspaceMember> = terms
        .into_iter()
        .filter_map(|(term, subgroups)| {
            table.term_vector(term).map(|vector| SubspaceMember {
                term: term.to_string(),
                vector,
                subgroups,
            })
        })
        .collect();
    info!(
        "{group}: {} of {total} terms in embedding vocabulary, {} skipped",
        members.len(),
        total - members.len()
    );
    Subspace::from_members(group, members)
}

/// Distances closer than this rank as ties.
pub const TIE_RESOLUTION: f64 = 1e-9;

pub fn reflect(v: &[f64], center: &[f64]) -> Vec<f64> {
    v.iter().zip(center).map(|(x, c)| 2.0 * c - x).collect()
}

/// The `k` other members closest to the reflection of `term` through the
/// center, nearest first, ties broken by term.
pub fn least_similar(term: &str, subspace: &Subspace, k: usize) -> Result<Vec<(String, f64)>> {
    let member = subspace.member(term).ok_or_else(|| {
        Error::Contract(format!("`{term}` is not a member of the {} subspace", subspace.group))
    })?;
    let target = reflect(&member.vector, &subspace.center);
    let mut ranked: Vec<(String, f64)> = subspace
        .members
        .iter()
        .filter(|m| m.term != term)
        .map(|m| (m.term.clone(), euclidean(&m.vector, &target)))
        .collect();
    // equal distances can differ in the last bits depending on how the
    // mirror image was formed, so ties are judged at a fixed resolution
    let key = |d: f64| (d / TIE_RESOLUTION).round();
    ranked.sort_by(|a, b| key(a.1).total_cmp(&key(b.1)).then_with(|| a.0.cmp(&b.0)));
    if k > ranked.len() {
        warn!(
            "asked for {k} counterfactuals of `{term}` but only {} exist",
            ranked.len()
        );
    }
    ranked.truncate(k);
    Ok(ranked)
}
