use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::{anyhow, Result};
use idlex_core::counterfactual::{generate_replacements, CounterfactualMaps};
use idlex_core::debias::{
    assemble_augmented, counterfactual_examples, gold_subgroups, source_balancing_examples,
    LabeledExample, Manifest, SourcingOptions,
};
use idlex_core::metrics::toxicity_rates;
use log::info;
use serde::Serialize;

use super::counterfactual::{guard, load_examples};
use super::{input_path, AnnotatorSetup, Ctx};
use crate::config::AnnotatorArgs;
use crate::io::{write_json, Output};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SliceBy {
    /// Subgroups of the annotator's kept mentions.
    Annotation,
    /// The `gold_subgroups` field of each example.
    Gold,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Training examples, JSONL or CSV.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Pool of extra examples to draw non-toxic balancing examples from.
    #[arg(long)]
    pub supplement: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "annotation")]
    pub slice_by: SliceBy,
    /// Toxic rate each subgroup is brought down to; the overall rate by default.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Treat unlabeled supplement examples as non-toxic.
    #[arg(long)]
    pub assume_nontoxic: bool,
    /// Replacement variants per training example; 0 disables them.
    #[arg(long, default_value_t = 0)]
    pub counterfactual_k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub annotator: AnnotatorArgs,
}

#[derive(Debug, Serialize)]
struct ManifestOut {
    target: Option<f64>,
    deficits: BTreeMap<String, u64>,
    shortfalls: BTreeMap<String, u64>,
    #[serde(flatten)]
    manifest: Manifest,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<()> {
    if args.out.is_none() && args.manifest.is_none() {
        return Err(anyhow!("--manifest is required when examples go to stdout"));
    }
    let threshold = ctx.threshold(args.threshold);
    let train = load_examples(ctx, &input_path(&args.input, "training examples")?)?;
    let supplement = match &args.supplement {
        Some(p) => load_examples(ctx, p)?,
        None => Vec::new(),
    };

    let needs_annotator = args.slice_by == SliceBy::Annotation || args.counterfactual_k > 0;
    let lexicon = if needs_annotator {
        Some(ctx.lexicon(args.lexicon.as_deref(), false)?)
    } else {
        None
    };
    let embeddings = ctx.embeddings(args.embeddings.as_deref())?;
    if args.counterfactual_k > 0 && embeddings.is_none() {
        return Err(idlex_core::Error::Config("--counterfactual-k needs --embeddings".into()).into());
    }
    let setup = AnnotatorSetup::new(ctx, &args.annotator, embeddings)?;
    let annotator = match &lexicon {
        Some(l) => Some(setup.annotator(l)?),
        None => None,
    };

    let variants = match (&annotator, &lexicon) {
        (Some(annotator), Some(lexicon)) if args.counterfactual_k > 0 => {
            let table = setup.embeddings.as_ref().expect("checked above");
            let k = args.counterfactual_k;
            let exclude = ctx.file.counterfactual.exclude_same_subgroup.unwrap_or(false);
            let maps = CounterfactualMaps::build(lexicon, table, k, exclude);
            let guard = guard(ctx, None, None);
            let per_example = ctx.par_map(&train, |ex| {
                let mentions = annotator.annotate_text(&ex.doc_id, &ex.text)?;
                Ok(generate_replacements(ex, &mentions, lexicon, &maps, k, &guard)?)
            })?;
            counterfactual_examples(&per_example.concat())
        }
        _ => Vec::new(),
    };

    // tags are keyed by text so renamed and generated examples resolve too
    let tags: BTreeMap<String, BTreeSet<String>> = match &annotator {
        Some(annotator) if args.slice_by == SliceBy::Annotation => {
            let texts: Vec<&LabeledExample> = train.iter().chain(&supplement).chain(&variants).collect();
            let tagged = ctx.par_map(&texts, |ex| {
                let subgroups = annotator
                    .annotate_text(&ex.doc_id, &ex.text)?
                    .iter()
                    .filter(|m| m.disambiguation.is_kept())
                    .flat_map(|m| m.subgroups())
                    .collect::<BTreeSet<String>>();
                Ok((ex.text.clone(), subgroups))
            })?;
            tagged.into_iter().collect()
        }
        _ => BTreeMap::new(),
    };
    let subgroup_of = |ex: &LabeledExample| match args.slice_by {
        SliceBy::Gold => gold_subgroups(ex),
        SliceBy::Annotation => tags.get(&ex.text).cloned().unwrap_or_default(),
    };

    let mut before = toxicity_rates(&train, subgroup_of, threshold);
    before.attach_deficits(args.target)?;
    let mut options = SourcingOptions {
        threshold,
        assume_nontoxic: args.assume_nontoxic,
        exclude_texts: train.iter().map(|e| e.text.clone()).collect(),
    };
    let mut deficits = BTreeMap::new();
    let mut shortfalls = BTreeMap::new();
    let mut sourced = BTreeMap::new();
    for (name, stats) in &before.subgroups {
        let deficit = stats.deficit.unwrap_or(0);
        deficits.insert(name.clone(), deficit);
        if deficit == 0 {
            continue;
        }
        let got = source_balancing_examples(&supplement, subgroup_of, name, deficit, &options);
        options.exclude_texts.extend(got.examples.iter().map(|e| e.text.clone()));
        if got.shortfall > 0 {
            shortfalls.insert(name.clone(), got.shortfall);
        }
        sourced.insert(name.clone(), got.examples);
    }

    let dataset = assemble_augmented(train, sourced, variants, subgroup_of, threshold);
    info!(
        "{} organic, {} sourced, {} counterfactual",
        dataset.manifest.organic, dataset.manifest.sourced, dataset.manifest.counterfactual
    );
    let mut out = Output::create(args.out.as_deref())?;
    for ex in &dataset.examples {
        out.line(ex)?;
    }
    out.finish()?;

    let manifest = ManifestOut {
        target: args.target.or(before.overall_rate),
        deficits,
        shortfalls,
        manifest: dataset.manifest,
    };
    match &args.manifest {
        Some(p) => write_json(p, &manifest),
        None => {
            let mut out = Output::create(None)?;
            out.pretty(&manifest)?;
            out.finish()
        }
    }
}
