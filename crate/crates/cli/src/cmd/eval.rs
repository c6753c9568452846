use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::{anyhow, Result};
use idlex_core::annotate::evaluate_annotations;
use idlex_core::lexicon::IdentityGroup;
use serde::Deserialize;

use super::{input_path, AnnotatorSetup, Ctx, DocInput};
use crate::config::AnnotatorArgs;
use crate::io::{read_jsonl, Output};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// JSONL documents: {doc_id, text, conllu?}
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// JSONL gold labels: {doc_id, groups: [...]}
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub annotator: AnnotatorArgs,
}

#[derive(Debug, Deserialize)]
struct GoldRow {
    doc_id: String,
    #[serde(default)]
    groups: BTreeSet<IdentityGroup>,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<()> {
    let lexicon = ctx.lexicon(args.lexicon.as_deref(), false)?;
    let setup = AnnotatorSetup::new(ctx, &args.annotator, ctx.embeddings(args.embeddings.as_deref())?)?;
    let annotator = setup.annotator(&lexicon)?;
    let docs: Vec<DocInput> = read_jsonl(&input_path(&args.input, "documents")?)?;
    let gold_path = args.gold.clone().ok_or_else(|| anyhow!("no gold labels given (use --gold)"))?;
    let gold: BTreeMap<String, BTreeSet<IdentityGroup>> = read_jsonl::<GoldRow>(&gold_path)?
        .into_iter()
        .map(|g| (g.doc_id, g.groups))
        .collect();

    let per_doc = ctx.par_map(&docs, |d| Ok(annotator.annotate(&d.document(&annotator)?)?))?;
    let predicted = docs.iter().map(|d| d.doc_id.clone()).zip(per_doc).collect();
    let report = evaluate_annotations(&predicted, &gold)?;

    let mut out = Output::create(args.out.as_deref())?;
    out.pretty(&report)?;
    out.finish()
}
