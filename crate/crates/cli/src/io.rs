use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use idlex_core::debias::{ingest_labeled_corpus, read_labeled_jsonl, ColumnMap, LabeledExample};
use idlex_core::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;

pub fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(BufReader::new(file))
}

/// Parses one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Format {
            line: i + 1,
            column: None,
            message: format!("{}: {e}", path.display()),
        })?;
        out.push(value);
    }
    Ok(out)
}

/// Labeled examples from `.csv` (through the column map) or JSONL.
pub fn read_examples(path: &Path, columns: &ColumnMap, agreement: f64) -> Result<Vec<LabeledExample>> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let examples = if is_csv {
        ingest_labeled_corpus(open(path)?, columns, agreement)?
    } else {
        read_labeled_jsonl(open(path)?)?
    };
    Ok(examples)
}

/// Writes to a file when a path is given, standard output otherwise.
pub struct Output {
    inner: Box<dyn Write>,
    path: Option<PathBuf>,
}

impl Output {
    pub fn create(path: Option<&Path>) -> Result<Self> {
        let inner: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Output {
            inner,
            path: path.map(Path::to_path_buf),
        })
    }

    pub fn line<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer(&mut self.inner, value)?;
        self.inner.write_all(b"\n")?;
        Ok(())
    }

    pub fn pretty<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer_pretty(&mut self.inner, value)?;
        self.inner.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().with_context(|| match &self.path {
            Some(p) => format!("writing {}", p.display()),
            None => "writing standard output".to_string(),
        })
    }
}

/// Writes a pretty JSON document to `path`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = Output::create(Some(path))?;
    out.pretty(value)?;
    out.finish()
}
