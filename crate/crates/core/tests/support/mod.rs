//! Oracles, generators and fixture paths shared by the integration and
//! acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use idlex_core::embed::{Subspace, SubspaceMember};
use idlex_core::lexicon::IdentityGroup;
use idlex_core::metrics::JudgmentMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures().join(name)
}

// ---- agreement ------------------------------------------------------------

/// Dense ratings: `cells[unit][rater]`, `None` when missing.
#[derive(Debug, Clone)]
pub struct Ratings {
    pub categories: usize,
    pub cells: Vec<Vec<Option<usize>>>,
}

pub fn random_ratings(rng: &mut impl Rng) -> Ratings {
    let units = rng.gen_range(1..=10);
    let raters = rng.gen_range(1..=5);
    let categories = rng.gen_range(2..=4);
    let missing = rng.gen_range(0.0..=0.3);
    let cells = (0..units)
        .map(|_| {
            (0..raters)
                .map(|_| (!rng.gen_bool(missing)).then(|| rng.gen_range(0..categories)))
                .collect()
        })
        .collect();
    Ratings { categories, cells }
}

pub fn category_name(c: usize) -> String {
    format!("c{c}")
}

pub fn to_matrix(r: &Ratings) -> JudgmentMatrix {
    let mut m = JudgmentMatrix::new((0..r.categories).map(category_name)).unwrap();
    for (u, row) in r.cells.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if let Some(c) = cell {
                m.rate(&format!("u{u}"), &format!("r{j}"), &category_name(*c)).unwrap();
            }
        }
    }
    m
}

fn present(row: &[Option<usize>]) -> Vec<usize> {
    row.iter().flatten().copied().collect()
}

/// Mean over units with two or more ratings of the share of agreeing
/// ordered rater pairs.
pub fn oracle_percent_agreement(r: &Ratings) -> Option<f64> {
    let mut shares = Vec::new();
    for row in &r.cells {
        let v = present(row);
        if v.len() < 2 {
            continue;
        }
        let (mut agree, mut pairs) = (0usize, 0usize);
        for i in 0..v.len() {
            for j in 0..v.len() {
                if i != j {
                    pairs += 1;
                    agree += usize::from(v[i] == v[j]);
                }
            }
        }
        shares.push(agree as f64 / pairs as f64);
    }
    (!shares.is_empty()).then(|| shares.iter().sum::<f64>() / shares.len() as f64)
}

/// Nominal alpha by enumerating pairs: observed disagreement over ordered
/// pairs within units (weighted 1/(m-1)), expected disagreement over all
/// ordered pairs of pairable values.
pub fn oracle_alpha(r: &Ratings) -> Option<f64> {
    let units: Vec<Vec<usize>> = r.cells.iter().map(|row| present(row)).filter(|v| v.len() >= 2).collect();
    let pool: Vec<usize> = units.iter().flatten().copied().collect();
    let n = pool.len() as f64;
    if pool.len() < 2 {
        return None;
    }
    let mut observed = 0.0;
    for v in &units {
        let w = 1.0 / (v.len() - 1) as f64;
        for i in 0..v.len() {
            for j in 0..v.len() {
                if i != j && v[i] != v[j] {
                    observed += w;
                }
            }
        }
    }
    let mut expected = 0usize;
    for i in 0..pool.len() {
        for j in 0..pool.len() {
            if i != j && pool[i] != pool[j] {
                expected += 1;
            }
        }
    }
    if expected == 0 {
        return None;
    }
    let d_o = observed / n;
    let d_e = expected as f64 / (n * (n - 1.0));
    Some(1.0 - d_o / d_e)
}

pub fn oracle_ac1(r: &Ratings) -> Option<f64> {
    let pa = oracle_percent_agreement(r)?;
    let q = r.categories;
    let rated: Vec<Vec<usize>> = r.cells.iter().map(|row| present(row)).filter(|v| !v.is_empty()).collect();
    let pe: f64 = (0..q)
        .map(|k| {
            let pi = rated
                .iter()
                .map(|v| v.iter().filter(|&&c| c == k).count() as f64 / v.len() as f64)
                .sum::<f64>()
                / rated.len() as f64;
            pi * (1.0 - pi)
        })
        .sum::<f64>()
        / (q - 1) as f64;
    Some((pa - pe) / (1.0 - pe))
}

/// Two raters over four units: (a,a), (a,a), (b,b), (a,b).
pub fn worked_matrix() -> JudgmentMatrix {
    let mut m = JudgmentMatrix::new(["a", "b"]).unwrap();
    for (u, pair) in [("a", "a"), ("a", "a"), ("b", "b"), ("a", "b")].iter().enumerate() {
        m.rate(&format!("u{u}"), "r1", pair.0).unwrap();
        m.rate(&format!("u{u}"), "r2", pair.1).unwrap();
    }
    m
}

pub fn close(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() <= tol,
        (None, None) => true,
        _ => false,
    }
}

// ---- geometry --------------------------------------------------------------

pub fn member(term: &str, vector: Vec<f64>) -> SubspaceMember {
    SubspaceMember {
        term: term.to_string(),
        vector,
        subgroups: BTreeSet::new(),
    }
}

/// A subspace of `n` members; on a coarse integer grid when `grid` is set,
/// which makes distance ties common.
pub fn random_subspace(rng: &mut impl Rng, n: usize, dim: usize, grid: bool) -> Subspace {
    let mut names: Vec<String> = (0..n).map(|i| format!("t{i:02}")).collect();
    names.shuffle(rng);
    let members = names
        .into_iter()
        .map(|t| {
            let v = (0..dim)
                .map(|_| {
                    if grid {
                        rng.gen_range(-2i32..=2) as f64
                    } else {
                        rng.gen_range(-1.0..1.0)
                    }
                })
                .collect();
            member(&t, v)
        })
        .collect();
    Subspace::from_members(IdentityGroup::Rne, members).unwrap()
}

/// Every other member with its distance to the term's mirror image,
/// sorted by distance only.
pub fn brute_least_similar(term: &str, s: &Subspace) -> Vec<(String, f64)> {
    let dim = s.center.len();
    let v = &s.member(term).unwrap().vector;
    let mirror: Vec<f64> = (0..dim).map(|i| s.center[i] + (s.center[i] - v[i])).collect();
    let mut out: Vec<(String, f64)> = s
        .members
        .iter()
        .filter(|m| m.term != term)
        .map(|m| {
            let d = (0..dim).map(|i| (m.vector[i] - mirror[i]).powi(2)).sum::<f64>().sqrt();
            (m.term.clone(), d)
        })
        .collect();
    out.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    out
}

/// Checks a ranking against brute-force distances: same members, same
/// distances, ascending, and ascending terms among equal distances.
pub fn ranking_agrees(got: &[(String, f64)], term: &str, s: &Subspace) -> Result<(), String> {
    let brute: BTreeMap<String, f64> = brute_least_similar(term, s).into_iter().collect();
    if got.len() != brute.len() {
        return Err(format!("{} ranked, {} expected", got.len(), brute.len()));
    }
    for (t, d) in got {
        let want = brute.get(t).ok_or_else(|| format!("`{t}` is not another member"))?;
        if (d - want).abs() > 1e-9 {
            return Err(format!("`{t}` at {d}, brute force {want}"));
        }
    }
    for w in got.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let tied = (a.1 - b.1).abs() < 1e-9;
        if (!tied && a.1 > b.1) || (tied && a.0 > b.0) {
            return Err(format!("`{}` ({}) ranked before `{}` ({})", a.0, a.1, b.0, b.1));
        }
    }
    Ok(())
}

// ---- deficits ----------------------------------------------------------------

/// Smallest `a` with `toxic / (total + a) <= target`, by counting up.
pub fn oracle_deficit(toxic: u64, total: u64, target: f64) -> u64 {
    let mut a = 0;
    while toxic as f64 / (total + a) as f64 > target {
        a += 1;
    }
    a
}

// ---- synthetic parsed corpus ---------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Context {
    /// Identity adjective on a person noun.
    Person,
    /// Term with a non-identity reading modifying an object.
    NonPersonAmbiguous,
    /// Identity adjective modifying a non-person noun.
    NonPersonIdentity,
    /// Plural identity noun as subject.
    Nominal,
    /// Identity surface embedded in a longer word.
    SubstringTrap,
    Neutral,
}

#[derive(Debug, Clone)]
pub struct Sentence {
    pub doc_id: String,
    pub text: String,
    pub conllu: String,
    pub gold: BTreeSet<IdentityGroup>,
    pub context: Context,
}

type Row = (&'static str, &'static str, usize, &'static str);

fn sentence(doc_id: String, rows: &[Row], gold: Option<IdentityGroup>, context: Context) -> Sentence {
    let forms: Vec<&str> = rows.iter().map(|r| r.0).collect();
    let text = forms.join(" ");
    let mut conllu = String::new();
    for (i, (form, upos, head, rel)) in rows.iter().enumerate() {
        conllu.push_str(&format!("{}\t{form}\t_\t{upos}\t_\t_\t{head}\t{rel}\t_\t_\n", i + 1));
    }
    Sentence {
        doc_id,
        text,
        conllu,
        gold: gold.into_iter().collect(),
        context,
    }
}

const PERSON_TERMS: &[(&str, IdentityGroup)] = &[
    ("black", IdentityGroup::Rne),
    ("white", IdentityGroup::Rne),
    ("asian", IdentityGroup::Rne),
    ("latino", IdentityGroup::Rne),
    ("arab", IdentityGroup::Rne),
    ("muslim", IdentityGroup::Religion),
    ("christian", IdentityGroup::Religion),
    ("jewish", IdentityGroup::Religion),
    ("hindu", IdentityGroup::Religion),
    ("gay", IdentityGroup::Sogiesc),
    ("lesbian", IdentityGroup::Sogiesc),
    ("transgender", IdentityGroup::Sogiesc),
    ("bisexual", IdentityGroup::Sogiesc),
];
const PERSON_NOUNS: &[&str] = &["man", "woman", "neighbor", "student", "teacher", "doctor", "family", "kid", "friend"];
const VERBS: &[&str] = &["spoke", "laughed", "arrived", "left", "waited"];
const AMBIGUOUS: &[(&str, &str)] = &[
    ("black", "car"),
    ("black", "coffee"),
    ("black", "cat"),
    ("white", "wine"),
    ("white", "house"),
    ("white", "paint"),
    ("straight", "line"),
    ("gay", "music"),
    ("queer", "food"),
];
const OBJECT_VERBS: &[&str] = &["sat", "appeared", "faded", "changed"];
const NON_PERSON_HEADS: &[&str] = &["community", "rights", "culture", "music", "flag"];
const GROWTH: &[&str] = &["grew", "changed", "spread", "mattered"];
const NOMINALS: &[(&str, IdentityGroup)] = &[
    ("Muslims", IdentityGroup::Religion),
    ("Christians", IdentityGroup::Religion),
    ("Jews", IdentityGroup::Religion),
    ("Hindus", IdentityGroup::Religion),
    ("Latinos", IdentityGroup::Rne),
    ("Asians", IdentityGroup::Rne),
    ("Arabs", IdentityGroup::Rne),
    ("Lesbians", IdentityGroup::Sogiesc),
    ("Gays", IdentityGroup::Sogiesc),
];
const TRAPS: &[&str] = &["blackboard", "blacksmith", "whiteboard", "jewelry", "Gaylord", "straightener"];
const NEUTRAL: &[(&str, &str)] = &[("weather", "nice"), ("train", "late"), ("soup", "cold"), ("game", "long")];

/// 200 one-sentence documents with parser output and planted gold groups:
/// 50 person contexts, 35 ambiguous non-person, 35 identity non-person,
/// 30 nominal, 30 substring traps, 20 neutral.
pub fn synthetic_corpus(rng: &mut impl Rng) -> Vec<Sentence> {
    let mut out = Vec::new();
    let mut id = 0;
    let mut next = || {
        id += 1;
        format!("s{id:03}")
    };
    for _ in 0..50 {
        let (term, group) = *PERSON_TERMS.choose(rng).unwrap();
        let noun = *PERSON_NOUNS.choose(rng).unwrap();
        let verb = *VERBS.choose(rng).unwrap();
        let rows = [("The", "DET", 3, "det"), (term, "ADJ", 3, "amod"), (noun, "NOUN", 4, "nsubj"), (verb, "VERB", 0, "root"), (".", "PUNCT", 4, "punct")];
        out.push(sentence(next(), &rows, Some(group), Context::Person));
    }
    for _ in 0..35 {
        let (term, noun) = *AMBIGUOUS.choose(rng).unwrap();
        let verb = *OBJECT_VERBS.choose(rng).unwrap();
        let rows = [("The", "DET", 3, "det"), (term, "ADJ", 3, "amod"), (noun, "NOUN", 4, "nsubj"), (verb, "VERB", 0, "root"), (".", "PUNCT", 4, "punct")];
        out.push(sentence(next(), &rows, None, Context::NonPersonAmbiguous));
    }
    for _ in 0..35 {
        let (term, group) = *PERSON_TERMS
            .iter()
            .filter(|(t, _)| !matches!(*t, "black" | "white" | "gay"))
            .collect::<Vec<_>>()
            .choose(rng)
            .unwrap();
        let noun = *NON_PERSON_HEADS.choose(rng).unwrap();
        let verb = *GROWTH.choose(rng).unwrap();
        let rows = [("The", "DET", 3, "det"), (term, "ADJ", 3, "amod"), (noun, "NOUN", 4, "nsubj"), (verb, "VERB", 0, "root"), (".", "PUNCT", 4, "punct")];
        out.push(sentence(next(), &rows, Some(*group), Context::NonPersonIdentity));
    }
    for _ in 0..30 {
        let (term, group) = *NOMINALS.choose(rng).unwrap();
        let verb = *VERBS.choose(rng).unwrap();
        let rows = [(term, "NOUN", 2, "nsubj"), (verb, "VERB", 0, "root"), (".", "PUNCT", 2, "punct")];
        out.push(sentence(next(), &rows, Some(group), Context::Nominal));
    }
    for _ in 0..30 {
        let trap = *TRAPS.choose(rng).unwrap();
        let rows = [("We", "PRON", 2, "nsubj"), ("saw", "VERB", 0, "root"), ("the", "DET", 4, "det"), (trap, "NOUN", 2, "obj"), (".", "PUNCT", 2, "punct")];
        out.push(sentence(next(), &rows, None, Context::SubstringTrap));
    }
    for _ in 0..20 {
        let (noun, adj) = *NEUTRAL.choose(rng).unwrap();
        let rows = [("The", "DET", 2, "det"), (noun, "NOUN", 4, "nsubj"), ("was", "AUX", 4, "cop"), (adj, "ADJ", 0, "root"), (".", "PUNCT", 4, "punct")];
        out.push(sentence(next(), &rows, None, Context::Neutral));
    }
    out
}

pub fn gold_map(corpus: &[Sentence]) -> BTreeMap<String, BTreeSet<IdentityGroup>> {
    corpus.iter().map(|s| (s.doc_id.clone(), s.gold.clone())).collect()
}
