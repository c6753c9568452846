use std::path::PathBuf;

use anyhow::{anyhow, Result};
use idlex_core::debias::split_corpus;
use log::info;

use super::counterfactual::load_examples;
use super::{input_path, Ctx};
use crate::io::Output;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Labeled examples, JSONL or CSV.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Train:test proportions.
    #[arg(long, default_value = "3:1", value_parser = parse_ratio)]
    pub ratio: (usize, usize),
    /// Training portion; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub test_out: PathBuf,
}

fn parse_ratio(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected TRAIN:TEST, got `{s}`"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<()> {
    let examples = load_examples(ctx, &input_path(&args.input, "examples")?)?;
    if examples.is_empty() {
        return Err(anyhow!("nothing to split"));
    }
    let (train, test) = split_corpus(examples, args.ratio, ctx.settings.seed)?;
    info!("{} train, {} test (seed {})", train.len(), test.len(), ctx.settings.seed);
    for (path, part) in [(args.out.as_deref(), &train), (Some(args.test_out.as_path()), &test)] {
        let mut out = Output::create(path)?;
        for ex in part {
            out.line(ex)?;
        }
        out.finish()?;
    }
    Ok(())
}
