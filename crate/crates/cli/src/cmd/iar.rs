use std::path::PathBuf;

use anyhow::Result;
use idlex_core::metrics::{iar_report, JudgmentMatrix};

use super::{input_path, Ctx};
use crate::io::{open, Output};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Long-format CSV: unit_id, rater_id, category
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full rating scale, comma-separated; defaults to the observed categories.
    #[arg(long, value_delimiter = ',')]
    pub categories: Option<Vec<String>>,
}

pub fn run(_ctx: &Ctx, args: &Args) -> Result<()> {
    let path = input_path(&args.input, "judgment CSV")?;
    let matrix = JudgmentMatrix::from_long_csv(open(&path)?, args.categories.as_deref())?;
    let mut out = Output::create(args.out.as_deref())?;
    out.pretty(&iar_report(&matrix))?;
    out.finish()
}
