use std::path::PathBuf;

use anyhow::Result;
use idlex_core::annotate::PersonNounLexicon;
use idlex_core::debias::{expand_templates, read_templates, ExpansionOptions};
use idlex_core::lexicon::IdentityGroup;
use log::info;

use super::{input_path, Ctx};
use crate::io::{open, Output};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Templates, one `{template_id, pattern}` JSON object per line.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Restrict terms to these groups, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub groups: Vec<IdentityGroup>,
    /// Fill in related forms as well as head terms.
    #[arg(long)]
    pub all_forms: bool,
    /// Person nouns for `{person_noun}` slots.
    #[arg(long)]
    pub person_nouns: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(ctx: &Ctx, args: &Args) -> Result<()> {
    let lexicon = ctx.lexicon(args.lexicon.as_deref(), false)?;
    let templates = read_templates(open(&input_path(&args.input, "templates")?)?)?;
    let person_nouns = match args.person_nouns.clone().or_else(|| ctx.file.person_nouns.clone()) {
        Some(p) => PersonNounLexicon::load(&p)?.iter().map(String::from).collect(),
        None => Vec::new(),
    };
    let options = ExpansionOptions {
        groups: args.groups.iter().copied().collect(),
        all_forms: args.all_forms,
        person_nouns,
    };
    let examples = expand_templates(&templates, &lexicon, &options);
    info!("{} templates expanded to {} examples", templates.len(), examples.len());
    let mut out = Output::create(args.out.as_deref())?;
    for ex in &examples {
        out.line(ex)?;
    }
    out.finish()
}
