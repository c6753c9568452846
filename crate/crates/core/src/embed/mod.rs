//! Static word embeddings and the group subspace geometry used to pick
//! counterfactual replacements.

mod subspace;

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::lexicon::normalize_seed_term;

pub use subspace::{build_subspace, least_similar, reflect, Subspace, SubspaceMember, TIE_RESOLUTION};

/// Term vectors of one fixed dimension, keyed by normalized term.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn from_rows<I, S>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: AsRef<str>,
    {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        let mut vectors = BTreeMap::new();
        for (i, (term, v)) in rows.into_iter().enumerate() {
            if v.len() != dim {
                return Err(Error::format(
                    i + 1,
                    format!("expected {dim} components, found {}", v.len()),
                ));
            }
            vectors.insert(normalize_seed_term(term.as_ref()), v);
        }
        Ok(EmbeddingTable { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> + '_ {
        self.vectors.keys().map(String::as_str)
    }

    pub fn get(&self, term: &str) -> Option<&[f64]> {
        self.vectors.get(term).map(Vec::as_slice)
    }

    /// Vector for a term; a multi-word term falls back to the mean of its
    /// words when every word is in vocabulary.
    pub fn term_vector(&self, term: &str) -> Option<Vec<f64>> {
        let key = normalize_seed_term(term);
        if let Some(v) = self.vectors.get(&key) {
            return Some(v.clone());
        }
        let words: Vec<&str> = key.split(' ').filter(|w| !w.is_empty()).collect();
        if words.len() < 2 {
            return None;
        }
        let mut sum = vec![0.0; self.dim];
        for w in &words {
            let v = self.vectors.get(*w)?;
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
        }
        let n = words.len() as f64;
        Some(sum.into_iter().map(|s| s / n).collect())
    }
}

/// Reads the whitespace-separated text format, with or without a leading
/// `<count> <dim>` line.
pub fn read_embeddings<R: Read>(reader: R) -> Result<EmbeddingTable> {
    let mut dim: Option<usize> = None;
    let mut vectors: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::format(lineno, e.to_string()))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if lineno == 1 && fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok()) {
            dim = Some(fields[1].parse().expect("checked above"));
            continue;
        }
        let values = fields[1..]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::format(lineno, format!("bad component: {e}")))?;
        let expected = *dim.get_or_insert(values.len());
        if values.len() != expected || expected == 0 {
            return Err(Error::format(
                lineno,
                format!("expected {expected} components, found {}", values.len()),
            ));
        }
        let term = normalize_seed_term(fields[0]);
        if vectors.insert(term.clone(), values).is_some() {
            warn!("line {lineno}: duplicate embedding for `{term}`, keeping the later row");
        }
    }
    let dim = dim.ok_or_else(|| Error::format(1, "no embedding rows"))?;
    Ok(EmbeddingTable { dim, vectors })
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_embeddings(file)
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_with_header() {
        let t = read_embeddings("3 2\ngay 1 0\nman 0 1\nthing 0.5 0.5\n".as_bytes()).unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn parse_without_header_infers_dim() {
        let t = read_embeddings("a 1 2 3\nb 4 5 6\n".as_bytes()).unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.get("b"), Some(&[4.0, 5.0, 6.0][..]));
    }

    #[test]
    fn short_row_reports_line() {
        match read_embeddings("2 2\na 1 0\nb 1\n".as_bytes()).unwrap_err() {
            Error::Format { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_keeps_last() {
        let t = read_embeddings("a 1 0\na 0 1\n".as_bytes()).unwrap();
        assert_eq!(t.get("a"), Some(&[0.0, 1.0][..]));
    }

    #[test]
    fn multiword_mean() {
        let t = read_embeddings("gay 1 3\nman 3 1\n".as_bytes()).unwrap();
        assert_eq!(t.term_vector("gay man"), Some(vec![2.0, 2.0]));
        assert_eq!(t.term_vector("Gay"), Some(vec![1.0, 3.0]));
        assert_eq!(t.term_vector("gay woman"), None);
        assert_eq!(t.term_vector("woman"), None);
    }

    #[test]
    fn cosine_values() {
        assert!((cosine(&[1.0, 0.0], &[0.0, 1.0])).abs() < 1e-12);
        assert!((cosine(&[2.0, 0.0], &[1.0, 0.0]) - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
    }
}
