use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::{anyhow, Result};
use idlex_core::counterfactual::{flip_report, read_predictions, Prediction};
use serde::Deserialize;

use super::Ctx;
use crate::io::{open, read_jsonl, Output};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Predictions of the untreated model, JSONL.
    #[arg(long)]
    pub base: PathBuf,
    /// A treated model's predictions as NAME=PATH; repeatable.
    #[arg(long, value_parser = parse_named)]
    pub treated: Vec<(String, PathBuf)>,
    /// JSONL of `{doc_id, subgroups}` for per-subgroup rates.
    #[arg(long)]
    pub subgroups: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_named(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => {
            Ok((name.to_string(), PathBuf::from(path)))
        }
        _ => Err(format!("expected NAME=PATH, got `{s}`")),
    }
}

#[derive(Debug, Deserialize)]
struct DocSubgroups {
    doc_id: String,
    subgroups: BTreeSet<String>,
}

fn load(path: &PathBuf) -> Result<Vec<Prediction>> {
    Ok(read_predictions(open(path)?)?)
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<()> {
    if args.treated.is_empty() {
        return Err(anyhow!("at least one --treated NAME=PATH is needed"));
    }
    let base = load(&args.base)?;
    let treated = args
        .treated
        .iter()
        .map(|(name, path)| Ok((name.clone(), load(path)?)))
        .collect::<Result<Vec<_>>>()?;
    let subgroups: BTreeMap<String, BTreeSet<String>> = match &args.subgroups {
        Some(p) => read_jsonl::<DocSubgroups>(p)?
            .into_iter()
            .map(|d| (d.doc_id, d.subgroups))
            .collect(),
        None => BTreeMap::new(),
    };
    let report = flip_report(&base, &treated, &subgroups, ctx.threshold(args.threshold))?;
    let mut out = Output::create(args.out.as_deref())?;
    out.pretty(&report)?;
    out.finish()
}
