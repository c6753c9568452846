use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A classifier score for an original (`variant_id` absent) or a
/// counterfactual text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant_id: Option<u32>,
    pub score: f64,
}

pub fn read_predictions<R: Read>(reader: R) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::format(i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let p: Prediction =
            serde_json::from_str(&line).map_err(|e| Error::format(i + 1, e.to_string()))?;
        out.push(p);
    }
    Ok(out)
}

/// Share of aligned positions whose labels differ.
pub fn flip_rate(original: &[bool], counterfactual: &[bool]) -> Result<f64> {
    if original.len() != counterfactual.len() {
        return Err(Error::Contract(format!(
            "{} original predictions but {} counterfactual ones",
            original.len(),
            counterfactual.len()
        )));
    }
    if original.is_empty() {
        return Err(Error::UndefinedMetric {
            metric: "flip_rate",
            reason: "no prediction pairs".into(),
        });
    }
    let flips = original.iter().zip(counterfactual).filter(|(a, b)| a != b).count();
    Ok(flips as f64 / original.len() as f64)
}

pub fn flip_rate_diff(treated: f64, base: f64) -> f64 {
    treated - base
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRate {
    pub pairs: usize,
    pub flips: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipRow {
    pub name: String,
    pub overall: SliceRate,
    pub subgroups: BTreeMap<String, SliceRate>,
    /// Rate minus the base model's rate; absent for the base row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff_overall: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diff_subgroups: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipReport {
    pub threshold: f64,
    pub base: FlipRow,
    pub treated: Vec<FlipRow>,
}

fn slice(pairs: &[(&str, bool, bool)], keep: impl Fn(&str) -> bool) -> Option<SliceRate> {
    let (orig, cf): (Vec<bool>, Vec<bool>) = pairs
        .iter()
        .filter(|(d, _, _)| keep(d))
        .map(|(_, a, b)| (*a, *b))
        .unzip();
    let rate = flip_rate(&orig, &cf).ok()?;
    Some(SliceRate {
        pairs: orig.len(),
        flips: orig.iter().zip(&cf).filter(|(a, b)| a != b).count(),
        rate,
    })
}

fn rates(
    name: &str,
    predictions: &[Prediction],
    subgroups: &BTreeMap<String, BTreeSet<String>>,
    threshold: f64,
) -> Result<FlipRow> {
    let mut originals: BTreeMap<&str, bool> = BTreeMap::new();
    for p in predictions.iter().filter(|p| p.variant_id.is_none()) {
        if originals.insert(&p.doc_id, p.score >= threshold).is_some() {
            return Err(Error::Contract(format!(
                "{name}: two original predictions for `{}`",
                p.doc_id
            )));
        }
    }
    let mut pairs = Vec::new();
    for p in predictions.iter().filter(|p| p.variant_id.is_some()) {
        let orig = originals.get(p.doc_id.as_str()).ok_or_else(|| {
            Error::Contract(format!(
                "{name}: counterfactual prediction for `{}` has no original",
                p.doc_id
            ))
        })?;
        pairs.push((p.doc_id.as_str(), *orig, p.score >= threshold));
    }
    let overall = slice(&pairs, |_| true).ok_or_else(|| Error::UndefinedMetric {
        metric: "flip_rate",
        reason: format!("{name}: no counterfactual predictions"),
    })?;
    let names: BTreeSet<&String> = subgroups.values().flatten().collect();
    let subgroups = names
        .into_iter()
        .filter_map(|g| {
            slice(&pairs, |d| subgroups.get(d).is_some_and(|s| s.contains(g))).map(|r| (g.clone(), r))
        })
        .collect();
    Ok(FlipRow {
        name: name.to_string(),
        overall,
        subgroups,
        diff_overall: None,
        diff_subgroups: BTreeMap::new(),
    })
}

/// Flip rates of a base model and each treated model on the same
/// counterfactual set, with treated-minus-base differences overall and per
/// subgroup. Scores at or above `threshold` count as positive.
pub fn flip_report(
    base: &[Prediction],
    treated: &[(String, Vec<Prediction>)],
    subgroups: &BTreeMap<String, BTreeSet<String>>,
    threshold: f64,
) -> Result<FlipReport> {
    let base_row = rates("base", base, subgroups, threshold)?;
    let mut rows = Vec::with_capacity(treated.len());
    for (name, preds) in treated {
        let mut row = rates(name, preds, subgroups, threshold)?;
        row.diff_overall = Some(flip_rate_diff(row.overall.rate, base_row.overall.rate));
        row.diff_subgroups = row
            .subgroups
            .iter()
            .filter_map(|(g, r)| {
                base_row
                    .subgroups
                    .get(g)
                    .map(|b| (g.clone(), flip_rate_diff(r.rate, b.rate)))
            })
            .collect();
        rows.push(row);
    }
    Ok(FlipReport {
        threshold,
        base: base_row,
        treated: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_examples() {
        let b = |v: &[u8]| v.iter().map(|x| *x == 1).collect::<Vec<_>>();
        assert_eq!(flip_rate(&b(&[1, 0, 1, 1]), &b(&[1, 1, 1, 0])).unwrap(), 0.5);
        assert_eq!(flip_rate(&b(&[1, 0]), &b(&[1, 0])).unwrap(), 0.0);
        assert_eq!(flip_rate(&b(&[1, 0]), &b(&[0, 1])).unwrap(), 1.0);
        assert!(matches!(flip_rate(&b(&[1]), &b(&[])), Err(Error::Contract(_))));
    }

    #[test]
    fn diff_arithmetic() {
        assert!((flip_rate_diff(0.0045, 0.0037) - 0.0008).abs() < 1e-12);
        assert_eq!(flip_rate_diff(0.2, 0.2), 0.0);
    }

    fn p(doc: &str, variant: Option<u32>, score: f64) -> Prediction {
        Prediction {
            doc_id: doc.into(),
            variant_id: variant,
            score,
        }
    }

    #[test]
    fn report_pairs_by_doc() {
        let subgroups = BTreeMap::from([
            ("a".to_string(), BTreeSet::from(["black".to_string()])),
            ("b".to_string(), BTreeSet::from(["gay".to_string()])),
        ]);
        let base = vec![p("a", None, 0.9), p("a", Some(1), 0.1), p("b", None, 0.2), p("b", Some(1), 0.3)];
        let treated = vec![p("a", None, 0.9), p("a", Some(1), 0.8), p("b", None, 0.2), p("b", Some(1), 0.7)];
        let report = flip_report(&base, &[("t".into(), treated)], &subgroups, 0.5).unwrap();
        assert_eq!(report.base.overall.rate, 0.5);
        assert_eq!(report.treated[0].overall.rate, 0.5);
        assert_eq!(report.treated[0].diff_subgroups["black"], -1.0);
        assert_eq!(report.treated[0].diff_subgroups["gay"], 1.0);
        assert_eq!(report.treated[0].diff_overall, Some(0.0));
    }

    #[test]
    fn orphan_counterfactual_rejected() {
        let preds = vec![p("a", Some(1), 0.1)];
        assert!(matches!(
            flip_report(&preds, &[], &BTreeMap::new(), 0.5),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn read_jsonl() {
        let preds = read_predictions("{\"doc_id\":\"a\",\"score\":0.4}\n\n{\"doc_id\":\"a\",\"variant_id\":2,\"score\":0.6}\n".as_bytes()).unwrap();
        assert_eq!(preds, vec![p("a", None, 0.4), p("a", Some(2), 0.6)]);
        assert!(matches!(read_predictions("{oops".as_bytes()), Err(Error::Format { line: 1, .. })));
    }
}
