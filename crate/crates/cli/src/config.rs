use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use idlex_core::annotate::{AnnotatorConfig, PersonFilter, Technique};
use idlex_core::counterfactual::SkipWhen;
use idlex_core::debias::ColumnMap;
use serde::Deserialize;

/// Settings read from the `--config` TOML file. Command-line flags win
/// over these, and these win over built-in defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub lexicon: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub person_nouns: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub threshold: Option<f64>,
    pub annotator: AnnotatorSection,
    pub counterfactual: CounterfactualSection,
    pub corpus: CorpusSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotatorSection {
    pub technique: Option<String>,
    pub person_filter: Option<String>,
    pub dependency_rule: Option<bool>,
    pub ner_rule: Option<bool>,
    pub similarity_threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CounterfactualSection {
    pub k: Option<usize>,
    pub guard_threshold: Option<f64>,
    pub guard_skip_when: Option<SkipWhen>,
    pub exclude_same_subgroup: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub agreement_threshold: Option<f64>,
    pub columns: Option<ColumnMap>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig = toml::from_str(&raw)
            .map_err(|e| idlex_core::Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.lexicon, &mut cfg.embeddings, &mut cfg.person_nouns]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Global settings after merging flags, file and defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub workers: usize,
}

/// Annotator flags shared by every subcommand that annotates text.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct AnnotatorArgs {
    /// substring, exact or lemma
    #[arg(long)]
    pub technique: Option<Technique>,
    /// none, lexicon or similarity
    #[arg(long)]
    pub person_filter: Option<PersonFilter>,
    /// Newline-separated person nouns.
    #[arg(long)]
    pub person_nouns: Option<PathBuf>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dependency_rule: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub ner_rule: Option<bool>,
    #[arg(long)]
    pub similarity_threshold: Option<f64>,
}

impl AnnotatorArgs {
    pub fn resolve(&self, file: &FileConfig) -> Result<AnnotatorConfig> {
        let section = &file.annotator;
        let parse_err = |e: String| idlex_core::Error::Config(e);
        let technique = match (self.technique, &section.technique) {
            (Some(t), _) => t,
            (None, Some(raw)) => raw.parse().map_err(parse_err)?,
            (None, None) => Technique::Exact,
        };
        let filter = match (self.person_filter, &section.person_filter) {
            (Some(f), _) => f,
            (None, Some(raw)) => raw.parse().map_err(parse_err)?,
            (None, None) => PersonFilter::None,
        };
        let mut cfg = AnnotatorConfig::new(technique).with_person_filter(filter);
        if let Some(v) = self.dependency_rule.or(section.dependency_rule) {
            cfg.use_dependency_rule = v;
        }
        if let Some(v) = self.ner_rule.or(section.ner_rule) {
            cfg.use_ner_rule = v;
        }
        if let Some(v) = self.similarity_threshold.or(section.similarity_threshold) {
            cfg.similarity_threshold = v;
        }
        Ok(cfg)
    }

    pub fn person_nouns_path(&self, file: &FileConfig) -> Option<PathBuf> {
        self.person_nouns.clone().or_else(|| file.person_nouns.clone())
    }
}
