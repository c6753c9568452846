pub mod annotate;
pub mod counterfactual;
pub mod debias;
pub mod eval;
pub mod flips;
pub mod iar;
pub mod split;
pub mod stats;
pub mod templates;

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use idlex_core::annotate::{Annotator, AnnotatorConfig, PersonNounLexicon, Resources};
use idlex_core::embed::{load_embeddings, EmbeddingTable};
use idlex_core::lexicon::{load_lexicon, load_with_cache, Lexicon};
use idlex_core::text::{ingest_conllu, Document};
use log::info;
use rayon::prelude::*;
use serde::Deserialize;

use crate::config::{AnnotatorArgs, FileConfig, Settings};

pub struct Ctx {
    pub file: FileConfig,
    pub settings: Settings,
}

impl Ctx {
    pub fn lexicon(&self, flag: Option<&Path>, cache: bool) -> Result<Lexicon> {
        let path = flag
            .map(Path::to_path_buf)
            .or_else(|| self.file.lexicon.clone())
            .ok_or_else(|| anyhow!("no lexicon given (use --lexicon or `lexicon` in the config file)"))?;
        let lexicon = if cache {
            load_with_cache(&path)?
        } else {
            load_lexicon(&path)?
        };
        info!("lexicon {}: {} entries", path.display(), lexicon.len());
        Ok(lexicon)
    }

    pub fn embeddings(&self, flag: Option<&Path>) -> Result<Option<EmbeddingTable>> {
        match flag.map(Path::to_path_buf).or_else(|| self.file.embeddings.clone()) {
            Some(p) => Ok(Some(load_embeddings(&p)?)),
            None => Ok(None),
        }
    }

    pub fn threshold(&self, flag: Option<f64>) -> f64 {
        flag.or(self.file.threshold).unwrap_or(0.5)
    }

    /// Runs `f` on every item with the configured worker count, keeping
    /// input order in the output.
    pub fn par_map<T, U, F>(&self, items: &[T], f: F) -> Result<Vec<U>>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> Result<U> + Sync + Send,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.settings.workers)
            .build()?;
        pool.install(|| items.par_iter().map(&f).collect())
    }
}

/// Annotator plus the resources it borrows.
pub struct AnnotatorSetup {
    pub config: AnnotatorConfig,
    pub person_nouns: Option<PersonNounLexicon>,
    pub embeddings: Option<EmbeddingTable>,
}

impl AnnotatorSetup {
    pub fn new(ctx: &Ctx, args: &AnnotatorArgs, embeddings: Option<EmbeddingTable>) -> Result<Self> {
        let config = args.resolve(&ctx.file)?;
        let person_nouns = match args.person_nouns_path(&ctx.file) {
            Some(p) => Some(PersonNounLexicon::load(&p)?),
            None => None,
        };
        Ok(AnnotatorSetup {
            config,
            person_nouns,
            embeddings,
        })
    }

    pub fn annotator<'a>(&'a self, lexicon: &'a Lexicon) -> Result<Annotator<'a>> {
        Ok(Annotator::new(
            lexicon,
            self.config.clone(),
            Resources {
                person_nouns: self.person_nouns.as_ref(),
                embeddings: self.embeddings.as_ref(),
            },
        )?)
    }
}

/// A document to annotate, optionally with parser output in CoNLL-U.
#[derive(Debug, Deserialize)]
pub struct DocInput {
    pub doc_id: String,
    pub text: String,
    #[serde(default)]
    pub conllu: Option<String>,
}

impl DocInput {
    pub fn document(&self, annotator: &Annotator<'_>) -> Result<Document> {
        match &self.conllu {
            Some(c) => Ok(ingest_conllu(&self.doc_id, &self.text, c)?),
            None => Ok(annotator.prepare(&self.doc_id, &self.text)),
        }
    }
}

pub fn input_path(flag: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    flag.clone().ok_or_else(|| anyhow!("no {what} given (use --in)"))
}
