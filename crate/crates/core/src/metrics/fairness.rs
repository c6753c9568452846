use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::debias::LabeledExample;
use crate::error::{Error, Result};

pub const TOXIC_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupStats {
    pub total: u64,
    pub toxic: u64,
    /// Absent for an empty slice.
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deficit: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
}

impl SubgroupStats {
    fn new(total: u64, toxic: u64) -> Self {
        SubgroupStats {
            total,
            toxic,
            rate: (total > 0).then(|| toxic as f64 / total as f64),
            deficit: None,
            auc: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub threshold: f64,
    pub total: u64,
    pub toxic: u64,
    pub overall_rate: Option<f64>,
    pub subgroups: BTreeMap<String, SubgroupStats>,
}

impl FairnessReport {
    /// Fills in each subgroup's deficit against `target`, or against the
    /// overall rate when no target is given.
    pub fn attach_deficits(&mut self, target: Option<f64>) -> Result<()> {
        let target = match target.or(self.overall_rate) {
            Some(t) => t,
            None => return Ok(()),
        };
        for stats in self.subgroups.values_mut() {
            stats.deficit = Some(compute_deficit(stats.toxic, stats.total, target)?);
        }
        Ok(())
    }

    /// Adds empty slices for subgroups that should be reported even when
    /// nothing was tagged with them.
    pub fn ensure_subgroups<I, S>(&mut self, names: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        for name in names {
            self.subgroups
                .entry(name.into())
                .or_insert_with(|| SubgroupStats::new(0, 0));
        }
    }
}

/// Toxicity rate overall and per subgroup; unlabeled examples are ignored.
pub fn toxicity_rates<F>(examples: &[LabeledExample], subgroup_of: F, threshold: f64) -> FairnessReport
where
    F: Fn(&LabeledExample) -> BTreeSet<String>,
{
    let mut counts: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    let (mut total, mut toxic) = (0u64, 0u64);
    for ex in examples {
        let Some(score) = ex.toxicity else { continue };
        let is_toxic = score >= threshold;
        total += 1;
        toxic += u64::from(is_toxic);
        for g in subgroup_of(ex) {
            let c = counts.entry(g).or_default();
            c.0 += 1;
            c.1 += u64::from(is_toxic);
        }
    }
    FairnessReport {
        threshold,
        total,
        toxic,
        overall_rate: (total > 0).then(|| toxic as f64 / total as f64),
        subgroups: counts
            .into_iter()
            .map(|(g, (t, x))| (g, SubgroupStats::new(t, x)))
            .collect(),
    }
}

/// Fewest non-toxic additions bringing `toxic / (total + a)` down to `target`.
pub fn compute_deficit(toxic: u64, total: u64, target: f64) -> Result<u64> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::Config(format!("target rate {target} outside [0, 1]")));
    }
    if toxic > total {
        return Err(Error::Contract(format!("{toxic} toxic of only {total} examples")));
    }
    if toxic == 0 {
        return Ok(0);
    }
    if target == 0.0 {
        return Err(Error::UnsatisfiableTarget { target, toxic });
    }
    let meets = |a: u64| toxic as f64 / (total + a) as f64 <= target;
    let mut a = (toxic as f64 / target - total as f64).ceil().max(0.0) as u64;
    // the closed form can be off by one under rounding
    while a > 0 && meets(a - 1) {
        a -= 1;
    }
    while !meets(a) {
        a += 1;
    }
    Ok(a)
}

/// Mann-Whitney AUC; tied scores count one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Contract(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let pos = labels.iter().filter(|l| **l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric {
            metric: "auc",
            reason: "labels contain a single class".into(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Contract("NaN score".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid_rank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid_rank * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// AUC within each subgroup slice, scoring examples by `score_of` against
/// their binarized toxicity. Slices where AUC is undefined are left out.
pub fn subgroup_aucs<F, S>(
    examples: &[LabeledExample],
    subgroup_of: F,
    score_of: S,
    threshold: f64,
) -> BTreeMap<String, f64>
where
    F: Fn(&LabeledExample) -> BTreeSet<String>,
    S: Fn(&LabeledExample) -> Option<f64>,
{
    let mut slices: BTreeMap<String, (Vec<f64>, Vec<bool>)> = BTreeMap::new();
    for ex in examples {
        let (Some(label), Some(score)) = (ex.toxicity, score_of(ex)) else {
            continue;
        };
        for g in subgroup_of(ex) {
            let s = slices.entry(g).or_default();
            s.0.push(score);
            s.1.push(label >= threshold);
        }
    }
    slices
        .into_iter()
        .filter_map(|(g, (s, l))| auc(&s, &l).ok().map(|v| (g, v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(id: usize, tox: f64, groups: &[&str]) -> LabeledExample {
        LabeledExample {
            toxicity: Some(tox),
            gold_subgroups: Some(groups.iter().map(|s| s.to_string()).collect()),
            ..LabeledExample::new(format!("d{id}"), "")
        }
    }

    fn gold(ex: &LabeledExample) -> BTreeSet<String> {
        ex.gold_subgroups.clone().unwrap_or_default()
    }

    #[test]
    fn rate_thirty_of_fifty() {
        let data: Vec<_> = (0..50)
            .map(|i| labeled(i, if i < 30 { 0.9 } else { 0.1 }, &["gay"]))
            .collect();
        let r = toxicity_rates(&data, gold, TOXIC_THRESHOLD);
        assert_eq!(r.subgroups["gay"].rate, Some(0.6));
        assert_eq!(r.overall_rate, Some(0.6));
    }

    #[test]
    fn untagged_dataset() {
        let data = vec![labeled(0, 0.9, &[]), labeled(1, 0.2, &[])];
        let mut r = toxicity_rates(&data, gold, TOXIC_THRESHOLD);
        assert!(r.subgroups.is_empty());
        r.ensure_subgroups(["muslim"]);
        assert_eq!(r.subgroups["muslim"].rate, None);
    }

    #[test]
    fn two_subgroups_by_hand() {
        let data = vec![
            labeled(0, 0.9, &["a"]),
            labeled(1, 0.5, &["a", "b"]),
            labeled(2, 0.49, &["b"]),
            labeled(3, 0.0, &["b"]),
        ];
        let mut r = toxicity_rates(&data, gold, TOXIC_THRESHOLD);
        assert_eq!((r.subgroups["a"].total, r.subgroups["a"].toxic), (2, 2));
        assert_eq!((r.subgroups["b"].total, r.subgroups["b"].toxic), (3, 1));
        r.attach_deficits(None).unwrap();
        // overall 2/4; a needs 2 more, b is already below
        assert_eq!(r.subgroups["a"].deficit, Some(2));
        assert_eq!(r.subgroups["b"].deficit, Some(0));
    }

    #[test]
    fn deficit_examples() {
        assert_eq!(compute_deficit(30, 50, 0.1).unwrap(), 250);
        assert_eq!(30.0 / 300.0, 0.1);
        assert_eq!(compute_deficit(1, 10, 0.5).unwrap(), 0);
        assert_eq!(compute_deficit(1, 1, 0.5).unwrap(), 1);
        assert!(matches!(compute_deficit(1, 2, 0.0), Err(Error::UnsatisfiableTarget { .. })));
        assert_eq!(compute_deficit(0, 2, 0.0).unwrap(), 0);
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.9, 0.8, 0.3], &[true, true, false]).unwrap(), 1.0);
        assert_eq!(auc(&[0.1, 0.2, 0.9], &[true, true, false]).unwrap(), 0.0);
        assert_eq!(auc(&[0.5, 0.5, 0.5, 0.5], &[true, false, true, false]).unwrap(), 0.5);
        assert!(matches!(auc(&[0.5], &[true]), Err(Error::UndefinedMetric { .. })));
    }

    #[test]
    fn auc_brute_force() {
        let scores = [0.3, 0.7, 0.7, 0.1, 0.9, 0.3, 0.5];
        let labels = [false, true, false, false, true, true, false];
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &si) in scores.iter().enumerate() {
            for (j, &sj) in scores.iter().enumerate() {
                if labels[i] && !labels[j] {
                    pairs += 1.0;
                    wins += if si > sj { 1.0 } else if si == sj { 0.5 } else { 0.0 };
                }
            }
        }
        assert!((auc(&scores, &labels).unwrap() - wins / pairs).abs() < 1e-12);
    }

    #[test]
    fn per_subgroup_auc() {
        let data = vec![labeled(0, 0.9, &["a"]), labeled(1, 0.1, &["a"]), labeled(2, 0.9, &["b"])];
        let aucs = subgroup_aucs(&data, gold, |e| e.toxicity, TOXIC_THRESHOLD);
        assert_eq!(aucs.get("a"), Some(&1.0));
        assert!(!aucs.contains_key("b"));
    }
}
