use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use idlex_core::counterfactual::{
    ablate_example, generate_replacements, AblationMode, CounterfactualExample, CounterfactualMaps,
    GuardConfig, KeywordList, SkipWhen,
};
use idlex_core::debias::LabeledExample;
use idlex_core::text::Document;
use log::info;

use super::{input_path, AnnotatorSetup, Ctx};
use crate::config::AnnotatorArgs;
use crate::io::{open, read_examples, Output};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodArg {
    AblationKeyword,
    AblationAnnotation,
    Replacement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SkipWhenArg {
    AtOrAbove,
    Below,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Labeled examples, JSONL or CSV.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "replacement")]
    pub method: MethodArg,
    /// Newline-separated keywords for keyword ablation.
    #[arg(long)]
    pub keywords: Option<PathBuf>,
    /// Variants per example for replacement.
    #[arg(short, long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub guard_threshold: Option<f64>,
    #[arg(long, value_enum)]
    pub guard_skip_when: Option<SkipWhenArg>,
    /// Never replace a term with one from the same subgroup.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub exclude_same_subgroup: Option<bool>,
    #[command(flatten)]
    pub annotator: AnnotatorArgs,
}

pub fn read_keywords(path: &Path) -> Result<KeywordList> {
    use std::io::BufRead;
    let mut words = Vec::new();
    for line in open(path)?.lines() {
        let line = line?;
        let line = line.trim();
        if !line.is_empty() && !line.starts_with('#') {
            words.push(line.to_string());
        }
    }
    Ok(KeywordList::new(words))
}

pub fn guard(ctx: &Ctx, threshold: Option<f64>, skip_when: Option<SkipWhenArg>) -> GuardConfig {
    let section = &ctx.file.counterfactual;
    GuardConfig {
        threshold: threshold.or(section.guard_threshold).unwrap_or(0.5),
        skip_when: match skip_when {
            Some(SkipWhenArg::AtOrAbove) => SkipWhen::AtOrAbove,
            Some(SkipWhenArg::Below) => SkipWhen::Below,
            None => section.guard_skip_when.unwrap_or_default(),
        },
    }
}

pub fn load_examples(ctx: &Ctx, path: &Path) -> Result<Vec<LabeledExample>> {
    let corpus = &ctx.file.corpus;
    read_examples(
        path,
        &corpus.columns.clone().unwrap_or_default(),
        corpus.agreement_threshold.unwrap_or(0.5),
    )
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<()> {
    let examples = load_examples(ctx, &input_path(&args.input, "examples")?)?;
    let variants: Vec<Vec<CounterfactualExample>> = match args.method {
        MethodArg::AblationKeyword => {
            let path = args
                .keywords
                .as_deref()
                .ok_or_else(|| anyhow!("keyword ablation needs --keywords"))?;
            let keywords = read_keywords(path)?;
            ctx.par_map(&examples, |ex| {
                let doc = Document::from_text(&ex.doc_id, &ex.text);
                Ok(vec![ablate_example(ex, &keywords.spans(&doc), AblationMode::Keyword)?])
            })?
        }
        MethodArg::AblationAnnotation => {
            let lexicon = ctx.lexicon(args.lexicon.as_deref(), false)?;
            let setup = AnnotatorSetup::new(ctx, &args.annotator, ctx.embeddings(args.embeddings.as_deref())?)?;
            let annotator = setup.annotator(&lexicon)?;
            ctx.par_map(&examples, |ex| {
                let spans: Vec<(usize, usize)> = annotator
                    .annotate_text(&ex.doc_id, &ex.text)?
                    .iter()
                    .filter(|m| m.disambiguation.is_kept())
                    .map(|m| (m.start, m.end))
                    .collect();
                Ok(vec![ablate_example(ex, &spans, AblationMode::Annotation)?])
            })?
        }
        MethodArg::Replacement => {
            let lexicon = ctx.lexicon(args.lexicon.as_deref(), false)?;
            let table = ctx
                .embeddings(args.embeddings.as_deref())?
                .ok_or_else(|| idlex_core::Error::Config("replacement needs --embeddings".into()))?;
            let section = &ctx.file.counterfactual;
            let k = args.k.or(section.k).unwrap_or(5);
            let exclude = args
                .exclude_same_subgroup
                .or(section.exclude_same_subgroup)
                .unwrap_or(false);
            let maps = CounterfactualMaps::build(&lexicon, &table, k, exclude);
            let setup = AnnotatorSetup::new(ctx, &args.annotator, Some(table))?;
            let annotator = setup.annotator(&lexicon)?;
            let guard = guard(ctx, args.guard_threshold, args.guard_skip_when);
            ctx.par_map(&examples, |ex| {
                if !guard.admits(ex.identity_attack) {
                    info!("{}: identity_attack {:?} fails the guard, no variants", ex.doc_id, ex.identity_attack);
                    return Ok(Vec::new());
                }
                let mentions = annotator.annotate_text(&ex.doc_id, &ex.text)?;
                Ok(generate_replacements(ex, &mentions, &lexicon, &maps, k, &guard)?)
            })?
        }
    };

    let mut out = Output::create(args.out.as_deref())?;
    let mut count = 0;
    for v in variants.iter().flatten() {
        out.line(v)?;
        count += 1;
    }
    out.finish()?;
    info!("{count} variants from {} examples", examples.len());
    Ok(())
}
