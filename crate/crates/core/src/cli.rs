//! Command-line front end. Every subcommand reads one configuration file and
//! may override individual keys with flags.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::compose::Strategy;
use crate::config::{PipelineConfig, RetrofitMode, ScorerKind, SolverKind};
use crate::error::{Error, Result, ResultExt};
use crate::io::corpus::corpus_stats;
use crate::io::vectors::{load_embeddings, save_embeddings};
use crate::io::{create, open};
use crate::ontology::{load_graph, RelationClasses};
use crate::pipeline;
use crate::retrofit::{direct_solve_with, jacobi_retrofit, DegreeMode, SolverParams};
use crate::synth::{generate, SynthParams};

// Output goes to a pipe as often as to a terminal; a closed reader is not an error.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Debug, Parser)]
#[command(name = "tagmap", version, about = "Cross-lingual tag annotation with retrofitted concept embeddings")]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Log more (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compose tag embeddings from token vectors.
    Compose(RunArgs),
    /// Retrofit composed embeddings onto ontologies, or solve a single graph.
    Retrofit(RetrofitArgs),
    /// Score every item against the target tag vocabulary.
    Annotate(RunArgs),
    /// Cross-validated macro AUC of the annotation scores.
    Evaluate(RunArgs),
    /// All stages in sequence.
    Pipeline(RunArgs),
    /// Corpus statistics of the source/target pair.
    Stats(RunArgs),
    /// Write a synthetic bilingual bundle with a ready-to-run config.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Flags that replace configuration keys.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    /// Source language code.
    #[arg(long)]
    pub source: Option<String>,
    /// Target language code.
    #[arg(long)]
    pub target: Option<String>,
    /// Token pooling for tag vectors.
    #[arg(long, value_enum)]
    pub strategy: Option<Strategy>,
    /// SIF smoothing constant.
    #[arg(long)]
    pub sif_a: Option<f64>,
    /// How target tags are scored.
    #[arg(long, value_enum)]
    pub scorer: Option<ScorerKind>,
    /// Retrofitting setting.
    #[arg(long = "retrofit", value_enum)]
    pub retrofit_mode: Option<RetrofitMode>,
    /// Retrofitting solver.
    #[arg(long = "mode", value_enum)]
    pub solver: Option<SolverKind>,
    /// Jacobi stopping threshold on the largest coordinate change.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Jacobi sweep limit.
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum)]
    pub degree: Option<DegreeMode>,
    /// Leave ontology components without any known vector at zero.
    #[arg(long)]
    pub skip_uncovered: bool,
    /// Cross-validation folds.
    #[arg(long)]
    pub k: Option<usize>,
    /// Fold assignment seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(v) = &self.source {
            cfg.source = v.clone();
        }
        if let Some(v) = &self.target {
            cfg.target = v.clone();
        }
        if let Some(v) = self.strategy {
            cfg.compose.strategy = v;
        }
        if let Some(v) = self.sif_a {
            cfg.compose.a = v;
        }
        if let Some(v) = self.scorer {
            cfg.scorer = v;
        }
        if let Some(v) = self.retrofit_mode {
            cfg.retrofit.mode = v;
        }
        if let Some(v) = self.solver {
            cfg.retrofit.solver = v;
        }
        if let Some(v) = self.tol {
            cfg.retrofit.tol = v;
        }
        if let Some(v) = self.max_iter {
            cfg.retrofit.max_iter = v;
        }
        if let Some(v) = self.degree {
            cfg.retrofit.degree = v;
        }
        if self.skip_uncovered {
            cfg.retrofit.skip_uncovered = true;
        }
        if let Some(v) = self.k {
            cfg.eval.k = v;
        }
        if let Some(v) = self.seed {
            cfg.eval.seed = v;
        }
        if let Some(v) = &self.out {
            // flags are relative to the working directory, not the config
            cfg.output_dir = std::path::absolute(v).unwrap_or_else(|_| v.clone());
        }
    }
}

#[derive(Debug, Args)]
pub struct RetrofitArgs {
    /// Run the retrofit stage of a configured pipeline.
    #[arg(long, conflicts_with_all = ["graph", "known"])]
    pub config: Option<PathBuf>,
    /// Edge list to retrofit onto (standalone mode).
    #[arg(long, requires = "known")]
    pub graph: Option<PathBuf>,
    /// Initial vectors keyed by concept identifier; nonzero rows are known.
    #[arg(long, requires = "graph")]
    pub known: Option<PathBuf>,
    /// `relation=class` file overriding the default relation classes.
    #[arg(long)]
    pub relations: Option<PathBuf>,
    /// Write the solver report as JSON here (standalone mode).
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory to write the bundle into.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub families: usize,
    #[arg(long, default_value_t = 5)]
    pub tags_per_family: usize,
    #[arg(long, default_value_t = 200)]
    pub items: usize,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long, default_value_t = 500)]
    pub vocab: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub aligned_fraction: f64,
    #[arg(long, default_value = "src")]
    pub source: String,
    #[arg(long, default_value = "tgt")]
    pub target: String,
    /// Keep the target table in its rotated frame.
    #[arg(long)]
    pub unaligned: bool,
}

fn load_config(path: &std::path::Path, overrides: &Overrides) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(path)?;
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn print_summary(s: &pipeline::EvalSummary) {
    say!(
        "{} -> {}: macro-AUC {:.4} ± {:.4} over {} folds ({} items, {} tags, {} degenerate tag-folds skipped)",
        s.source,
        s.target,
        s.mean_auc,
        s.std_auc,
        s.k,
        s.items,
        s.tags,
        s.skipped_tag_count
    );
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Error::Config("--jobs must be positive".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match cli.command {
        Command::Compose(a) => {
            let cfg = load_config(&a.config, &a.overrides)?;
            let (corpus, _) = pipeline::read_corpus(&cfg)?;
            let composed = pipeline::compose_stage(&cfg, &corpus)?;
            for (lang, c) in &composed {
                say!(
                    "{lang}: {} tags composed, {} empty, {} out of vocabulary",
                    c.report.tags,
                    c.report.empty_tags,
                    c.report.oov_tags
                );
            }
            let sets = composed.into_iter().map(|(l, c)| (l, c.embeddings)).collect();
            pipeline::write_composed(&cfg, &sets)?;
            pipeline::write_manifest(&cfg, "compose")?;
        }
        Command::Retrofit(a) => match &a.config {
            Some(path) => {
                let cfg = load_config(path, &a.overrides)?;
                if cfg.retrofit.mode == RetrofitMode::Off {
                    return Err(Error::Config("`retrofit.mode` is off; nothing to do".into()));
                }
                let composed = pipeline::read_composed(&cfg)?;
                let out = pipeline::retrofit_stage(&cfg, &composed)?;
                for run in &out.runs {
                    say!(
                        "{}: {} concepts, {} known, {} component(s) skipped",
                        run.languages.join("+"),
                        run.concepts,
                        run.known,
                        run.skipped_components
                    );
                }
                pipeline::write_retrofitted(&cfg, &out)?;
                pipeline::write_manifest(&cfg, "retrofit")?;
            }
            None => standalone_retrofit(&a)?,
        },
        Command::Annotate(a) => {
            let cfg = load_config(&a.config, &a.overrides)?;
            let (corpus, _) = pipeline::read_corpus(&cfg)?;
            let embeddings = if cfg.scorer == ScorerKind::Embedding {
                pipeline::read_scoring_embeddings(&cfg)?
            } else {
                Default::default()
            };
            let ann = pipeline::annotate_stage(&cfg, &corpus, &embeddings)?;
            say!("scored {} items against {} target tags", ann.scores.item_ids.len(), ann.scores.tags.len());
            pipeline::write_annotation(&cfg, &ann)?;
            pipeline::write_manifest(&cfg, "annotate")?;
        }
        Command::Evaluate(a) => {
            let cfg = load_config(&a.config, &a.overrides)?;
            let (scores, truth) = pipeline::read_annotation(&cfg)?;
            let e = pipeline::evaluate_stage(&cfg, &scores, &truth)?;
            print_summary(&pipeline::write_evaluation(&cfg, &scores, &e)?);
            pipeline::write_manifest(&cfg, "evaluate")?;
        }
        Command::Pipeline(a) => {
            let cfg = load_config(&a.config, &a.overrides)?;
            print_summary(&pipeline::run_all(&cfg)?);
        }
        Command::Stats(a) => {
            let cfg = load_config(&a.config, &a.overrides)?;
            let (corpus, _) = pipeline::read_corpus(&cfg)?;
            let stats = corpus_stats(&corpus, &cfg.source, &cfg.target)?;
            say!("{}", serde_json::to_string_pretty(&stats)?);
        }
        Command::Synth(a) => {
            let params = SynthParams {
                source: a.source,
                target: a.target,
                families: a.families,
                tags_per_family: a.tags_per_family,
                items: a.items,
                dim: a.dim,
                vocab: a.vocab,
                noise: a.noise,
                seed: a.seed,
                aligned_fraction: a.aligned_fraction,
                aligned: !a.unaligned,
                ..SynthParams::default()
            };
            let path = generate(&params)?.write(&a.out)?;
            say!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn standalone_retrofit(a: &RetrofitArgs) -> Result<()> {
    let (Some(graph), Some(known_path)) = (&a.graph, &a.known) else {
        return Err(Error::Config("retrofit needs either --config or both --graph and --known".into()));
    };
    let out = a.overrides.out.as_ref().ok_or_else(|| Error::Config("standalone retrofit needs --out".into()))?;
    let classes = match &a.relations {
        Some(p) => RelationClasses::parse(open(p)?).in_file(p)?,
        None => RelationClasses::default(),
    };
    let (g, _) = load_graph(open(graph)?, &classes).in_file(graph)?;
    let initial = load_embeddings(known_path)?;
    let known: BTreeSet<String> =
        initial.ids().iter().enumerate().filter(|&(i, _)| initial.known_at(i)).map(|(_, id)| id.clone()).collect();
    let g = g.with_concepts(known.iter().map(String::as_str));
    let ov = &a.overrides;
    let degree = ov.degree.unwrap_or_default();
    let q = match ov.solver.unwrap_or_default() {
        SolverKind::Jacobi => {
            let params = SolverParams {
                tol: ov.tol.unwrap_or(1e-6),
                max_iter: ov.max_iter.unwrap_or(1000),
                degree_mode: degree,
                ..SolverParams::default()
            };
            let (q, report) = jacobi_retrofit(&g, &initial, &known, &params)?;
            say!(
                "{} concepts, {} known: {} sweeps, max change {:.3e}{}",
                g.concept_count(),
                known.len(),
                report.iterations,
                report.max_delta,
                if report.converged { "" } else { " (not converged)" }
            );
            if let Some(p) = &a.report {
                let mut w = create(p)?;
                serde_json::to_writer_pretty(&mut w, &report).map_err(Error::from).in_file(p)?;
            }
            q
        }
        SolverKind::Direct => direct_solve_with(&g, &initial, &known, degree)?,
    };
    save_embeddings(&q, out)
}
