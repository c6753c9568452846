use std::path::PathBuf;

use anyhow::Result;
use idlex_core::lexicon::{compare_to_published, Deviation, DistributionReport};
use serde::Serialize;

use super::Ctx;
use crate::io::Output;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub cache: bool,
}

#[derive(Serialize)]
struct StatsOutput {
    report: DistributionReport,
    published: Vec<Deviation>,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<()> {
    let lexicon = ctx.lexicon(args.lexicon.as_deref(), args.cache)?;
    let report = lexicon.stats();
    let published = compare_to_published(&report);
    let mut out = Output::create(args.out.as_deref())?;
    out.pretty(&StatsOutput { report, published })?;
    out.finish()
}
