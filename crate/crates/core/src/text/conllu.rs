//! CoNLL-U ingestion, for annotations produced by an external parser.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{AnnotationSource, CharIndex, Document, Token};
use crate::error::{Error, Result};

struct Row {
    line: usize,
    form: String,
    lemma: Option<String>,
    upos: Option<String>,
    feats: BTreeMap<String, String>,
    head: Option<usize>,
    deprel: Option<String>,
    ner: Option<String>,
}

fn field(value: &str) -> Option<String> {
    (value != "_" && !value.is_empty()).then(|| value.to_string())
}

fn parse_row(line_no: usize, line: &str) -> Result<Option<Row>> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(Error::format(
            line_no,
            format!("expected 10 tab-separated columns, found {}", cols.len()),
        ));
    }
    // multiword token ranges and empty nodes carry no surface alignment
    if cols[0].contains('-') || cols[0].contains('.') {
        return Ok(None);
    }
    cols[0]
        .parse::<usize>()
        .map_err(|_| Error::format(line_no, format!("bad token id `{}`", cols[0])))?;

    let head = match cols[6] {
        "_" => None,
        raw => Some(
            raw.parse::<usize>()
                .map_err(|_| Error::format(line_no, format!("bad HEAD `{raw}`")))?,
        ),
    };
    let mut feats = BTreeMap::new();
    if let Some(raw) = field(cols[5]) {
        for pair in raw.split('|') {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::format(line_no, format!("bad FEATS item `{pair}`")))?;
            feats.insert(k.to_string(), v.to_string());
        }
    }
    let ner = field(cols[9]).and_then(|misc| {
        misc.split('|')
            .find_map(|item| item.strip_prefix("NER=").map(str::to_string))
    });
    Ok(Some(Row {
        line: line_no,
        form: cols[1].to_string(),
        lemma: field(cols[2]),
        upos: field(cols[3]),
        feats,
        head,
        deprel: field(cols[7]),
        ner,
    }))
}

/// Aligns CoNLL-U rows against `text` and builds an ingested document.
///
/// HEAD indices are sentence-relative in the file and become document-level
/// token indices; HEAD 0 (root) becomes no head.
pub fn ingest_conllu(doc_id: &str, text: &str, conllu: &str) -> Result<Document> {
    let mut sentences: Vec<Vec<Row>> = vec![Vec::new()];
    for (i, raw) in conllu.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !sentences.last().expect("non-empty").is_empty() {
                sentences.push(Vec::new());
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        if let Some(row) = parse_row(line_no, line)? {
            sentences.last_mut().expect("non-empty").push(row);
        }
    }
    sentences.retain(|s| !s.is_empty());

    let index = CharIndex::new(text);
    let mut cursor_byte = 0;
    let mut tokens = Vec::new();
    let mut sentence_starts = Vec::new();
    for sentence in sentences {
        let base = tokens.len();
        sentence_starts.push(base);
        let sentence_len = sentence.len();
        for row in sentence {
            let found = text[cursor_byte..].find(&row.form).ok_or_else(|| Error::Alignment {
                line: row.line,
                message: format!("form `{}` not found at or after the cursor", row.form),
            })?;
            if row.form.is_empty() {
                return Err(Error::format(row.line, "empty FORM"));
            }
            let start_byte = cursor_byte + found;
            let end_byte = start_byte + row.form.len();
            cursor_byte = end_byte;

            let dep_head = match row.head {
                None | Some(0) => None,
                Some(h) if h <= sentence_len => Some(base + h - 1),
                Some(h) => {
                    return Err(Error::Integrity {
                        row: Some(row.line),
                        message: format!("HEAD {h} exceeds sentence length {sentence_len}"),
                    })
                }
            };
            tokens.push(Token {
                text: row.form,
                start: index.char_of_byte(start_byte),
                end: index.char_of_byte(end_byte),
                lemma: row.lemma,
                pos: row.upos,
                morph: row.feats,
                dep_head,
                dep_rel: row.deprel,
                ner_tag: row.ner,
            });
        }
    }

    Ok(Document {
        doc_id: doc_id.to_string(),
        text: text.to_string(),
        tokens,
        sentence_starts,
        annotation_source: AnnotationSource::Ingested,
    })
}

pub fn ingest_conllu_file(doc_id: &str, text: &str, path: impl AsRef<Path>) -> Result<Document> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ingest_conllu(doc_id, text, &raw)
}

/// Writes a document back out as CoNLL-U.
pub fn to_conllu(doc: &Document) -> String {
    let mut starts = doc.sentence_starts.clone();
    if starts.first() != Some(&0) {
        starts.insert(0, 0);
    }
    let mut out = String::new();
    for (s, &begin) in starts.iter().enumerate() {
        let end = starts.get(s + 1).copied().unwrap_or(doc.tokens.len());
        if begin >= end {
            continue;
        }
        for (i, tok) in doc.tokens[begin..end].iter().enumerate() {
            let head = match (tok.dep_head, &tok.dep_rel) {
                (Some(h), _) if h >= begin && h < end => (h - begin + 1).to_string(),
                (Some(_), _) => "_".to_string(),
                (None, Some(_)) => "0".to_string(),
                (None, None) => "_".to_string(),
            };
            let feats = if tok.morph.is_empty() {
                "_".to_string()
            } else {
                tok.morph
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join("|")
            };
            let misc = tok
                .ner_tag
                .as_ref()
                .map(|n| format!("NER={n}"))
                .unwrap_or_else(|| "_".to_string());
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t_\t{}\t{}\t{}\t_\t{}",
                i + 1,
                tok.text,
                tok.lemma.as_deref().unwrap_or("_"),
                tok.pos.as_deref().unwrap_or("_"),
                feats,
                head,
                tok.dep_rel.as_deref().unwrap_or("_"),
                misc
            );
        }
        out.push('\n');
    }
    out
}
