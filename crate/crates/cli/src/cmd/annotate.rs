use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Result;
use idlex_core::annotate::{Mention, Verdict};
use idlex_core::lexicon::IdentityGroup;
use log::info;
use serde::Serialize;

use super::{input_path, AnnotatorSetup, Ctx, DocInput};
use crate::config::AnnotatorArgs;
use crate::io::{read_jsonl, write_json, Output};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// JSONL documents: {doc_id, text, conllu?}
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the run summary JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Reuse or write a binary lexicon cache next to the lexicon file.
    #[arg(long)]
    pub cache: bool,
    #[command(flatten)]
    pub annotator: AnnotatorArgs,
}

#[derive(Debug, Default, Serialize)]
pub struct Summary {
    pub documents: usize,
    pub mentions: usize,
    pub kept: usize,
    pub kept_by_group: BTreeMap<IdentityGroup, usize>,
    pub verdicts: BTreeMap<Verdict, usize>,
}

impl Summary {
    pub fn of(per_doc: &[Vec<Mention>]) -> Self {
        let mut s = Summary {
            documents: per_doc.len(),
            kept_by_group: IdentityGroup::ALL.iter().map(|g| (*g, 0)).collect(),
            ..Summary::default()
        };
        for m in per_doc.iter().flatten() {
            s.mentions += 1;
            *s.verdicts.entry(m.disambiguation).or_default() += 1;
            if m.disambiguation.is_kept() {
                s.kept += 1;
                for g in m.groups() {
                    *s.kept_by_group.entry(g).or_default() += 1;
                }
            }
        }
        s
    }
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<()> {
    let lexicon = ctx.lexicon(args.lexicon.as_deref(), args.cache)?;
    let setup = AnnotatorSetup::new(ctx, &args.annotator, ctx.embeddings(args.embeddings.as_deref())?)?;
    let annotator = setup.annotator(&lexicon)?;
    let docs: Vec<DocInput> = read_jsonl(&input_path(&args.input, "documents")?)?;

    let per_doc = ctx.par_map(&docs, |d| Ok(annotator.annotate(&d.document(&annotator)?)?))?;

    let mut out = Output::create(args.out.as_deref())?;
    for m in per_doc.iter().flatten() {
        out.line(&m.to_record())?;
    }
    out.finish()?;

    let summary = Summary::of(&per_doc);
    info!(
        "{} documents, {} mentions ({} kept)",
        summary.documents, summary.mentions, summary.kept
    );
    if let Some(p) = &args.summary {
        write_json(p, &summary)?;
    }
    Ok(())
}
