//! Declarative pipeline configuration.
//!
//! A single JSON file describes every input and parameter of a run. Relative
//! paths resolve against the directory holding the configuration file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compose::{Strategy, DEFAULT_SIF_A};
use crate::error::{Error, Result, ResultExt};
use crate::retrofit::DegreeMode;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageInputs {
    /// Token vectors in word-vector text format.
    #[serde(default)]
    pub tokens: Option<PathBuf>,
    /// Typed edge list of the monolingual ontology.
    #[serde(default)]
    pub graph: Option<PathBuf>,
    /// Precomputed tag vectors keyed by raw tag label, used instead of
    /// composing from `tokens` (e.g. sentence-encoder outputs).
    #[serde(default)]
    pub tag_vectors: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PcFit {
    /// Remove one principal direction per language.
    #[default]
    PerLanguage,
    /// Remove a single direction fitted over all languages together.
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComposeConfig {
    pub strategy: Strategy,
    pub a: f64,
    pub pc_fit: PcFit,
    /// Read at most this many vectors from each token table.
    pub max_tokens: Option<usize>,
}

impl Default for ComposeConfig {
    fn default() -> Self {
        ComposeConfig { strategy: Strategy::Sif, a: DEFAULT_SIF_A, pc_fit: PcFit::PerLanguage, max_tokens: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    #[default]
    Embedding,
    Translation,
    Geodesic,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RetrofitMode {
    #[default]
    Off,
    /// Each language on its own ontology, starting from its own vectors.
    Monolingual,
    /// All ontologies merged through alignment edges; only the known
    /// languages contribute initial vectors.
    Aligned,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Jacobi,
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RetrofitConfig {
    pub mode: RetrofitMode,
    pub known_languages: Vec<String>,
    pub solver: SolverKind,
    pub tol: f64,
    pub max_iter: usize,
    pub degree: DegreeMode,
    /// Leave components without any known vector at zero instead of failing.
    pub skip_uncovered: bool,
}

impl Default for RetrofitConfig {
    fn default() -> Self {
        RetrofitConfig {
            mode: RetrofitMode::Off,
            known_languages: Vec::new(),
            solver: SolverKind::Jacobi,
            tol: 1e-6,
            max_iter: 1000,
            degree: DegreeMode::AllNeighbors,
            skip_uncovered: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub k: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { k: 3, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub languages: BTreeMap<String, LanguageInputs>,
    pub relation_classes: Option<PathBuf>,
    pub alignment: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub min_tag_freq: Option<usize>,
    pub source: String,
    pub target: String,
    pub compose: ComposeConfig,
    pub scorer: ScorerKind,
    pub translation_table: Option<PathBuf>,
    pub retrofit: RetrofitConfig,
    pub eval: EvalConfig,
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            languages: BTreeMap::new(),
            relation_classes: None,
            alignment: None,
            corpus: None,
            min_tag_freq: None,
            source: String::new(),
            target: String::new(),
            compose: ComposeConfig::default(),
            scorer: ScorerKind::Embedding,
            translation_table: None,
            retrofit: RetrofitConfig::default(),
            eval: EvalConfig::default(),
            output_dir: PathBuf::from("out"),
            base_dir: PathBuf::from("."),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::from).in_file(path)?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text).map_err(Error::from).in_file(path)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Resolves a configured path against the configuration directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn output(&self, rel: &str) -> PathBuf {
        self.resolve(&self.output_dir).join(rel)
    }

    pub fn tokens_path(&self, lang: &str) -> Option<PathBuf> {
        self.languages.get(lang)?.tokens.as_deref().map(|p| self.resolve(p))
    }

    pub fn tag_vectors_path(&self, lang: &str) -> Option<PathBuf> {
        self.languages.get(lang)?.tag_vectors.as_deref().map(|p| self.resolve(p))
    }

    fn has_vectors(&self, lang: &str) -> bool {
        self.tokens_path(lang).is_some() || self.tag_vectors_path(lang).is_some()
    }

    pub fn graph_path(&self, lang: &str) -> Option<PathBuf> {
        self.languages.get(lang)?.graph.as_deref().map(|p| self.resolve(p))
    }

    pub fn corpus_path(&self) -> Result<PathBuf> {
        self.corpus.as_deref().map(|p| self.resolve(p)).ok_or_else(|| Error::Config("`corpus` is required".into()))
    }

    /// Cross-field checks; returns the first violated rule.
    pub fn validate(&self) -> Result<()> {
        if self.source.is_empty() || self.target.is_empty() {
            return Err(Error::Config("`source` and `target` languages are required".into()));
        }
        if self.source == self.target {
            return Err(Error::Config("source and target languages must differ".into()));
        }
        if !(self.compose.a > 0.0) {
            return Err(Error::Config("`compose.a` must be positive".into()));
        }
        if !(self.retrofit.tol > 0.0) {
            return Err(Error::Config("`retrofit.tol` must be positive".into()));
        }
        if self.eval.k < 2 {
            return Err(Error::Config("`eval.k` must be at least 2".into()));
        }
        match self.retrofit.mode {
            RetrofitMode::Off => {}
            RetrofitMode::Monolingual => {
                if !self.languages.values().any(|l| l.graph.is_some()) {
                    return Err(Error::Config("monolingual retrofitting needs at least one `graph`".into()));
                }
            }
            RetrofitMode::Aligned => {
                if self.alignment.is_none() {
                    return Err(Error::Config("aligned retrofitting requires an `alignment` file".into()));
                }
                if self.retrofit.known_languages.is_empty() {
                    return Err(Error::Config("aligned retrofitting requires `retrofit.known_languages`".into()));
                }
                for l in &self.retrofit.known_languages {
                    if !self.has_vectors(l) {
                        return Err(Error::Config(format!(
                            "known language `{l}` has no `tokens` or `tag_vectors` file"
                        )));
                    }
                }
            }
        }
        match self.scorer {
            ScorerKind::Embedding => {
                if self.retrofit.mode != RetrofitMode::Aligned {
                    for l in [&self.source, &self.target] {
                        if !self.has_vectors(l) {
                            return Err(Error::Config(format!("language `{l}` has no `tokens` or `tag_vectors` file")));
                        }
                    }
                }
            }
            ScorerKind::Translation => {
                if self.translation_table.is_none() {
                    return Err(Error::Config("the translation scorer requires `translation_table`".into()));
                }
            }
            ScorerKind::Geodesic => {
                if self.alignment.is_none() {
                    return Err(Error::Config("the geodesic scorer requires an `alignment` file".into()));
                }
                for l in [&self.source, &self.target] {
                    if self.graph_path(l).is_none() {
                        return Err(Error::Config(format!("language `{l}` has no `graph` file")));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> PipelineConfig {
        let mut cfg = PipelineConfig { source: "en".into(), target: "fr".into(), ..Default::default() };
        for l in ["en", "fr"] {
            cfg.languages.insert(
                l.into(),
                LanguageInputs {
                    tokens: Some(format!("{l}.vec").into()),
                    graph: Some(format!("{l}.tsv").into()),
                    tag_vectors: None,
                },
            );
        }
        cfg
    }

    #[test]
    fn defaults_validate() {
        base().validate().unwrap();
    }

    #[test]
    fn aligned_mode_requirements() {
        let mut cfg = base();
        cfg.retrofit.mode = RetrofitMode::Aligned;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.alignment = Some("a.tsv".into());
        assert!(cfg.validate().is_err());
        cfg.retrofit.known_languages = vec!["en".into()];
        cfg.validate().unwrap();
    }

    #[test]
    fn translation_needs_table() {
        let mut cfg = base();
        cfg.scorer = ScorerKind::Translation;
        assert!(cfg.validate().is_err());
        cfg.translation_table = Some("t.tsv".into());
        cfg.validate().unwrap();
    }

    #[test]
    fn parses_minimal_json_and_rejects_unknown_keys() {
        let cfg: PipelineConfig = serde_json::from_str(
            r#"{"source":"en","target":"fr","compose":{"strategy":"avg"},"retrofit":{"mode":"monolingual","degree":"relatedness_only"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.compose.strategy, Strategy::Avg);
        assert_eq!(cfg.compose.a, DEFAULT_SIF_A);
        assert_eq!(cfg.retrofit.degree, DegreeMode::RelatednessOnly);
        assert_eq!(cfg.eval.k, 3);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"sourc":"en"}"#).is_err());
    }
}
