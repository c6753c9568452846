use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Categorical ratings of units by raters; any cell may be missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgmentMatrix {
    units: Vec<String>,
    categories: Vec<String>,
    raters: BTreeSet<String>,
    /// Per unit, rater → category index.
    ratings: Vec<BTreeMap<String, usize>>,
}

impl JudgmentMatrix {
    pub fn new<I, S>(categories: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut categories: Vec<String> = categories.into_iter().map(Into::into).collect();
        categories.sort();
        categories.dedup();
        if categories.len() < 2 {
            return Err(Error::Config(format!(
                "a rating scale needs at least two categories, got {categories:?}"
            )));
        }
        Ok(JudgmentMatrix {
            units: Vec::new(),
            categories,
            raters: BTreeSet::new(),
            ratings: Vec::new(),
        })
    }

    /// Records one rating; a repeated (unit, rater) pair overwrites.
    pub fn rate(&mut self, unit: &str, rater: &str, category: &str) -> Result<()> {
        let c = self
            .categories
            .binary_search_by(|k| k.as_str().cmp(category))
            .map_err(|_| Error::Integrity {
                row: None,
                message: format!("category `{category}` is not on the scale {:?}", self.categories),
            })?;
        let u = match self.units.iter().position(|x| x == unit) {
            Some(u) => u,
            None => {
                self.units.push(unit.to_string());
                self.ratings.push(BTreeMap::new());
                self.units.len() - 1
            }
        };
        self.raters.insert(rater.to_string());
        self.ratings[u].insert(rater.to_string(), c);
        Ok(())
    }

    /// Reads the long CSV form `unit_id,rater_id,category`. Without a
    /// declared scale the observed categories are used; if only one is
    /// observed an unobserved second category completes the scale.
    pub fn from_long_csv<R: Read>(reader: R, declared: Option<&[String]>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers.iter().position(|h| h == name).ok_or_else(|| Error::Format {
                line: 1,
                column: Some(name.to_string()),
                message: "missing column".into(),
            })
        };
        let (cu, cr, cc) = (col("unit_id")?, col("rater_id")?, col("category")?);
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let get = |c: usize| rec.get(c).unwrap_or("").to_string();
            let row = (get(cu), get(cr), get(cc));
            if row.0.is_empty() || row.1.is_empty() {
                return Err(Error::format(i + 2, "empty unit or rater id"));
            }
            if !row.2.is_empty() {
                rows.push(row);
            }
        }
        let mut categories: Vec<String> = match declared {
            Some(d) => d.to_vec(),
            None => rows.iter().map(|r| r.2.clone()).collect::<BTreeSet<_>>().into_iter().collect(),
        };
        if declared.is_none() && categories.len() == 1 {
            warn!("only one category observed; completing the scale with an unobserved one");
            categories.push(format!("not {}", categories[0]));
        }
        let mut m = JudgmentMatrix::new(categories)?;
        for (unit, rater, cat) in &rows {
            m.rate(unit, rater, cat)?;
        }
        Ok(m)
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn rater_count(&self) -> usize {
        self.raters.len()
    }

    pub fn rating_count(&self) -> usize {
        self.ratings.iter().map(BTreeMap::len).sum()
    }

    /// Per unit, ratings per category.
    fn counts(&self) -> Vec<Vec<u64>> {
        self.ratings
            .iter()
            .map(|unit| {
                let mut c = vec![0u64; self.categories.len()];
                for &k in unit.values() {
                    c[k] += 1;
                }
                c
            })
            .collect()
    }

    pub fn eligible_units(&self) -> usize {
        self.ratings.iter().filter(|u| u.len() >= 2).count()
    }
}

pub fn percent_agreement(m: &JudgmentMatrix) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for c in m.counts() {
        let r: u64 = c.iter().sum();
        if r < 2 {
            continue;
        }
        let agree: u64 = c.iter().map(|x| x * x.saturating_sub(1)).sum();
        sum += agree as f64 / (r * (r - 1)) as f64;
        n += 1;
    }
    if n == 0 {
        return Err(Error::UndefinedMetric {
            metric: "percent_agreement",
            reason: "no unit has two or more ratings".into(),
        });
    }
    Ok(sum / n as f64)
}

/// Nominal Krippendorff's alpha from the coincidence matrix.
pub fn krippendorff_alpha(m: &JudgmentMatrix) -> Result<f64> {
    let q = m.categories.len();
    let mut o = vec![vec![0.0f64; q]; q];
    for c in m.counts() {
        let r: u64 = c.iter().sum();
        if r < 2 {
            continue;
        }
        let w = 1.0 / (r - 1) as f64;
        for a in 0..q {
            for b in 0..q {
                let pairs = if a == b { c[a] * c[a].saturating_sub(1) } else { c[a] * c[b] };
                o[a][b] += pairs as f64 * w;
            }
        }
    }
    let marginals: Vec<f64> = o.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = marginals.iter().sum();
    let mut disagree = 0.0;
    let mut expected = 0.0;
    for a in 0..q {
        for b in 0..q {
            if a != b {
                disagree += o[a][b];
                expected += marginals[a] * marginals[b];
            }
        }
    }
    if n <= 1.0 || expected == 0.0 {
        return Err(Error::UndefinedMetric {
            metric: "krippendorff_alpha",
            reason: "expected disagreement is zero (fewer than two categories observed)".into(),
        });
    }
    let d_o = disagree / n;
    let d_e = expected / (n * (n - 1.0));
    Ok(1.0 - d_o / d_e)
}

pub fn gwet_ac1(m: &JudgmentMatrix) -> Result<f64> {
    let pa = percent_agreement(m)?;
    let q = m.categories.len();
    let mut pi = vec![0.0f64; q];
    let mut rated = 0usize;
    for c in m.counts() {
        let r: u64 = c.iter().sum();
        if r == 0 {
            continue;
        }
        rated += 1;
        for k in 0..q {
            pi[k] += c[k] as f64 / r as f64;
        }
    }
    let pe = pi
        .iter()
        .map(|p| p / rated as f64)
        .map(|p| p * (1.0 - p))
        .sum::<f64>()
        / (q - 1) as f64;
    if (1.0 - pe).abs() < f64::EPSILON {
        return Err(Error::UndefinedMetric {
            metric: "gwet_ac1",
            reason: "chance agreement is 1".into(),
        });
    }
    Ok((pa - pe) / (1.0 - pe))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IarReport {
    pub units: usize,
    pub eligible_units: usize,
    pub raters: usize,
    pub categories: Vec<String>,
    pub percent_agreement: Option<f64>,
    pub krippendorff_alpha: Option<f64>,
    pub gwet_ac1: Option<f64>,
    /// Why a metric is absent.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub undefined: BTreeMap<String, String>,
}

/// All three metrics; undefined ones are absent with their reason recorded.
pub fn iar_report(m: &JudgmentMatrix) -> IarReport {
    let mut undefined = BTreeMap::new();
    let mut keep = |name: &str, r: Result<f64>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            undefined.insert(name.to_string(), e.to_string());
            None
        }
    };
    let pa = keep("percent_agreement", percent_agreement(m));
    let alpha = keep("krippendorff_alpha", krippendorff_alpha(m));
    let ac1 = keep("gwet_ac1", gwet_ac1(m));
    IarReport {
        units: m.units.len(),
        eligible_units: m.eligible_units(),
        raters: m.rater_count(),
        categories: m.categories.clone(),
        percent_agreement: pa,
        krippendorff_alpha: alpha,
        gwet_ac1: ac1,
        undefined,
    }
}

/// Turns multi-label judgments into one yes/no question per label, with
/// `doc|label` units.
pub fn decompose_multilabel<'a, I>(judgments: I, labels: &[String]) -> Result<JudgmentMatrix>
where
    I: IntoIterator<Item = (&'a str, &'a str, &'a BTreeSet<String>)>,
{
    let mut m = JudgmentMatrix::new(["no", "yes"])?;
    for (doc, rater, chosen) in judgments {
        for label in labels {
            let answer = if chosen.contains(label) { "yes" } else { "no" };
            m.rate(&format!("{doc}|{label}"), rater, answer)?;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(units: &[&[&str]]) -> JudgmentMatrix {
        let mut m = JudgmentMatrix::new(["a", "b"]).unwrap();
        for (u, ratings) in units.iter().enumerate() {
            for (r, c) in ratings.iter().enumerate() {
                m.rate(&format!("u{u}"), &format!("r{r}"), c).unwrap();
            }
        }
        m
    }

    #[test]
    fn worked_four_units() {
        let m = matrix(&[&["a", "a"], &["a", "a"], &["b", "b"], &["a", "b"]]);
        assert!((percent_agreement(&m).unwrap() - 0.75).abs() < 1e-12);
        assert!((krippendorff_alpha(&m).unwrap() - 16.0 / 30.0).abs() < 1e-12);
        assert!((gwet_ac1(&m).unwrap() - 0.28125 / 0.53125).abs() < 1e-12);
    }

    #[test]
    fn three_ratings_one_unit() {
        let m = matrix(&[&["a", "a", "b"]]);
        assert!((percent_agreement(&m).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn unanimous() {
        let m = matrix(&[&["a", "a"], &["b", "b", "b"], &["a", "a"]]);
        assert_eq!(percent_agreement(&m).unwrap(), 1.0);
        assert_eq!(krippendorff_alpha(&m).unwrap(), 1.0);
        assert_eq!(gwet_ac1(&m).unwrap(), 1.0);
    }

    #[test]
    fn single_category_alpha_undefined() {
        let m = matrix(&[&["a", "a"], &["a", "a"]]);
        let report = iar_report(&m);
        assert_eq!(report.percent_agreement, Some(1.0));
        assert_eq!(report.gwet_ac1, Some(1.0));
        assert!(report.krippendorff_alpha.is_none());
        assert!(report.undefined.contains_key("krippendorff_alpha"));
    }

    #[test]
    fn no_eligible_units() {
        let m = matrix(&[&["a"], &["b"]]);
        assert!(matches!(percent_agreement(&m), Err(Error::UndefinedMetric { .. })));
    }

    #[test]
    fn unknown_category_rejected() {
        let mut m = JudgmentMatrix::new(["a", "b"]).unwrap();
        assert!(m.rate("u", "r", "c").is_err());
        assert!(JudgmentMatrix::new(["a"]).is_err());
    }

    #[test]
    fn long_csv() {
        let csv = "unit_id,rater_id,category\nu1,r1,a\nu1,r2,a\nu2,r1,b\nu2,r2,b\nu3,r1,a\nu3,r2,\n";
        let m = JudgmentMatrix::from_long_csv(csv.as_bytes(), None).unwrap();
        assert_eq!(m.units().len(), 3);
        assert_eq!(m.eligible_units(), 2);
        assert_eq!(m.rating_count(), 5);

        let single = "unit_id,rater_id,category\nu1,r1,x\nu1,r2,x\n";
        let m = JudgmentMatrix::from_long_csv(single.as_bytes(), None).unwrap();
        assert_eq!(m.categories().len(), 2);
        assert!(JudgmentMatrix::from_long_csv("unit,rater\n".as_bytes(), None).is_err());
    }

    #[test]
    fn decomposition() {
        let rne = BTreeSet::from(["RNE".to_string()]);
        let both = BTreeSet::from(["RNE".to_string(), "RELIGION".to_string()]);
        let labels = ["RNE".to_string(), "RELIGION".to_string()];
        let m = decompose_multilabel([("d", "r1", &rne), ("d", "r2", &both)], &labels).unwrap();
        assert_eq!(m.units().len(), 2);
        assert!((percent_agreement(&m).unwrap() - 0.5).abs() < 1e-12);
    }
}
