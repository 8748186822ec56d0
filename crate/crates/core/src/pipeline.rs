//! Stage orchestration: compose, retrofit, annotate, evaluate.
//!
//! Each stage is a plain function over in-memory values so that library users
//! and tests can run any prefix of the pipeline. The `write_*` helpers and
//! [`run_all`] lay the results out under the configured output directory:
//!
//! ```text
//! composed/{lang}.vec   retrofit/{lang}.vec   retrofit/report.json
//! scores.tsv  truth.tsv  annotate.json
//! eval/per_tag.tsv  eval/folds.tsv  eval/summary.json
//! manifest.json
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::compose::{
    build_tag_embeddings, compose_tags, preprocess_tag, remove_joint_component, ComposeReport, ComposedEmbeddings,
    Strategy,
};
use crate::config::{PcFit, PipelineConfig, RetrofitMode, ScorerKind, SolverKind};
use crate::embedding::{concept_id, split_concept_id, EmbeddingSet};
use crate::error::{Error, Result, ResultExt};
use crate::eval::{cross_validate, iterative_stratified_split, CrossValidationReport, FoldAssignment};
use crate::io::corpus::{load_corpus, AnnotationCorpus, CorpusLoadReport, CorpusOptions};
use crate::io::manifest::{sha256_file, RunManifest};
use crate::io::tables::{read_labels, read_scores, write_folds, write_labels, write_scores, write_tag_auc};
use crate::io::vectors::{load_embeddings, load_token_table, save_embeddings};
use crate::io::{create, open};
use crate::mapping::{
    annotate_corpus, AnnotateDiagnostics, LabelMatrix, ScoreMatrix, Scorer, TagVocabulary, TranslationTable,
};
use crate::ontology::{load_alignment, load_graph, merge_all, ConceptGraph, RelationClasses};
use crate::retrofit::{check_feasible, direct_solve_with, jacobi_retrofit, SolverParams, SolverReport};

pub fn read_corpus(cfg: &PipelineConfig) -> Result<(AnnotationCorpus, CorpusLoadReport)> {
    let path = cfg.corpus_path()?;
    load_corpus(open(&path)?, CorpusOptions { min_tag_freq: cfg.min_tag_freq }).in_file(&path)
}

pub fn read_relation_classes(cfg: &PipelineConfig) -> Result<RelationClasses> {
    match &cfg.relation_classes {
        Some(p) => {
            let path = cfg.resolve(p);
            RelationClasses::parse(open(&path)?).in_file(&path)
        }
        None => Ok(RelationClasses::default()),
    }
}

/// The monolingual ontology of `lang`, if one is configured.
pub fn read_graph(cfg: &PipelineConfig, lang: &str, classes: &RelationClasses) -> Result<Option<ConceptGraph>> {
    let Some(path) = cfg.graph_path(lang) else {
        return Ok(None);
    };
    let (g, report) = load_graph(open(&path)?, classes).in_file(&path)?;
    if report.dropped_self_loops > 0 || report.duplicate_edges > 0 {
        log::warn!(
            "{}: dropped {} self-loop(s) and {} duplicate edge(s)",
            path.display(),
            report.dropped_self_loops,
            report.duplicate_edges
        );
    }
    Ok(Some(g))
}

/// All configured ontologies merged through the alignment file.
pub fn read_aligned_graph(cfg: &PipelineConfig) -> Result<ConceptGraph> {
    let classes = read_relation_classes(cfg)?;
    let mut graphs = Vec::new();
    for lang in cfg.languages.keys() {
        if let Some(g) = read_graph(cfg, lang, &classes)? {
            graphs.push(g);
        }
    }
    let alignment = match &cfg.alignment {
        Some(p) => {
            let path = cfg.resolve(p);
            load_alignment(open(&path)?).in_file(&path)?
        }
        None => Vec::new(),
    };
    let refs: Vec<&ConceptGraph> = graphs.iter().collect();
    merge_all(&refs, &alignment)
}

fn labels_in_graph<'a>(g: &'a ConceptGraph, lang: &str) -> impl Iterator<Item = String> + 'a {
    let lang = lang.to_string();
    g.concepts()
        .iter()
        .filter_map(move |c| split_concept_id(c).filter(|(l, _)| *l == lang).map(|(_, label)| label.to_string()))
}

/// Languages whose token vectors the configured run needs.
pub fn composed_languages(cfg: &PipelineConfig) -> Vec<String> {
    if cfg.retrofit.mode == RetrofitMode::Aligned {
        cfg.retrofit.known_languages.clone()
    } else {
        vec![cfg.source.clone(), cfg.target.clone()]
    }
}

/// Composes an embedding for every corpus tag of each needed language, plus
/// every ontology label of that language when retrofitting is enabled.
pub fn compose_stage(cfg: &PipelineConfig, corpus: &AnnotationCorpus) -> Result<BTreeMap<String, ComposedEmbeddings>> {
    let classes = read_relation_classes(cfg)?;
    let mut labels_by_lang = BTreeMap::new();
    for lang in composed_languages(cfg) {
        let mut labels: BTreeSet<String> = corpus.tags_of(&lang);
        if cfg.retrofit.mode != RetrofitMode::Off {
            if let Some(g) = read_graph(cfg, &lang, &classes)? {
                labels.extend(labels_in_graph(&g, &lang));
            }
        }
        if labels.is_empty() {
            log::warn!("no tags to compose for `{lang}`");
            continue;
        }
        labels_by_lang.insert(lang, labels.into_iter().collect::<Vec<String>>());
    }

    let mut out = BTreeMap::new();
    let mut precomputed = BTreeSet::new();
    for (lang, labels) in &labels_by_lang {
        if let Some(path) = cfg.tag_vectors_path(lang) {
            out.insert(lang.clone(), precomputed_tags(&path, labels)?);
            precomputed.insert(lang.clone());
            continue;
        }
        let path =
            cfg.tokens_path(lang).ok_or_else(|| Error::Config(format!("language `{lang}` has no `tokens` file")))?;
        let keep: HashSet<String> = labels.iter().flat_map(|l| preprocess_tag(l)).collect();
        let table = load_token_table(&path, Some(&keep), cfg.compose.max_tokens)?;
        let composed = match cfg.compose.pc_fit {
            PcFit::PerLanguage => build_tag_embeddings(labels, &table, cfg.compose.strategy, cfg.compose.a)?,
            PcFit::Joint => compose_tags(labels, &table, cfg.compose.strategy, cfg.compose.a)?,
        };
        let r = &composed.report;
        log::info!("{lang}: composed {} tags ({} empty, {} out of vocabulary)", r.tags, r.empty_tags, r.oov_tags);
        out.insert(lang.clone(), composed);
    }
    if cfg.compose.pc_fit == PcFit::Joint && cfg.compose.strategy == Strategy::Sif {
        let mut sets: Vec<&mut ComposedEmbeddings> =
            out.iter_mut().filter(|(l, _)| !precomputed.contains(*l)).map(|(_, c)| c).collect();
        remove_joint_component(&mut sets)?;
    }
    Ok(out)
}

/// Loads externally computed tag vectors; zero rows and absent labels are
/// unknown.
fn precomputed_tags(path: &Path, labels: &[String]) -> Result<ComposedEmbeddings> {
    let mut embeddings = load_embeddings(path)?;
    let mut zero_mask = BTreeSet::new();
    for (i, id) in embeddings.ids().iter().enumerate() {
        if !embeddings.known_at(i) {
            zero_mask.insert(id.clone());
        }
    }
    let mut report = ComposeReport { tags: labels.len(), ..Default::default() };
    for l in labels {
        if !embeddings.contains(l) {
            embeddings.insert_with_flag(l.clone(), vec![0.0; embeddings.dim()], false)?;
            zero_mask.insert(l.clone());
            report.oov_tags += 1;
        }
    }
    Ok(ComposedEmbeddings { embeddings, zero_mask, principal: None, report })
}

#[derive(Debug, Clone, Serialize)]
pub struct RetrofitRun {
    /// Languages whose concepts took part in this solve.
    pub languages: Vec<String>,
    pub concepts: usize,
    pub known: usize,
    /// Components left at zero because they held no known vector.
    pub skipped_components: usize,
    /// Present for the iterative solver only.
    pub solver: Option<SolverReport>,
}

#[derive(Debug, Clone, Default)]
pub struct RetrofitOutput {
    /// Retrofitted vectors keyed by raw tag label, per language.
    pub embeddings: BTreeMap<String, EmbeddingSet>,
    pub runs: Vec<RetrofitRun>,
}

/// Retrofits composed vectors onto the configured ontologies.
///
/// `composed` is keyed by language, each set keyed by raw tag label with
/// known flags marking usable vectors. With mode `off` the input is returned
/// unchanged.
pub fn retrofit_stage(cfg: &PipelineConfig, composed: &BTreeMap<String, EmbeddingSet>) -> Result<RetrofitOutput> {
    let mut out = RetrofitOutput::default();
    match cfg.retrofit.mode {
        RetrofitMode::Off => out.embeddings = composed.clone(),
        RetrofitMode::Monolingual => {
            let classes = read_relation_classes(cfg)?;
            for (lang, set) in composed {
                match read_graph(cfg, lang, &classes)? {
                    Some(g) => {
                        let (mut result, run) = solve(cfg, &g, &[(lang.as_str(), set)])?;
                        out.embeddings.insert(lang.clone(), result.remove(lang).unwrap_or_else(|| set.clone()));
                        out.runs.push(run);
                    }
                    None => {
                        log::info!("`{lang}` has no ontology; keeping composed vectors");
                        out.embeddings.insert(lang.clone(), set.clone());
                    }
                }
            }
        }
        RetrofitMode::Aligned => {
            let g = read_aligned_graph(cfg)?;
            let known: Vec<(&str, &EmbeddingSet)> = cfg
                .retrofit
                .known_languages
                .iter()
                .map(|l| {
                    composed
                        .get(l)
                        .map(|s| (l.as_str(), s))
                        .ok_or_else(|| Error::Config(format!("no composed vectors for known language `{l}`")))
                })
                .collect::<Result<_>>()?;
            let (result, run) = solve(cfg, &g, &known)?;
            out.embeddings = result;
            out.runs.push(run);
        }
    }
    Ok(out)
}

/// One solve over `g` with initial vectors from `sets`. Known labels missing
/// from the graph join it as isolated concepts, which keep their vectors.
fn solve(
    cfg: &PipelineConfig,
    g: &ConceptGraph,
    sets: &[(&str, &EmbeddingSet)],
) -> Result<(BTreeMap<String, EmbeddingSet>, RetrofitRun)> {
    let dim = sets.first().map(|(_, s)| s.dim()).unwrap_or(0);
    let mut initial = EmbeddingSet::new(dim);
    let mut known = BTreeSet::new();
    for (lang, set) in sets {
        if set.dim() != dim {
            return Err(Error::Validation("known languages have different vector dimensions".into()));
        }
        for (i, label) in set.ids().iter().enumerate() {
            if set.known_at(i) {
                let id = concept_id(lang, label);
                initial.insert_with_flag(id.clone(), set.vector_at(i).to_vec(), true)?;
                known.insert(id);
            }
        }
    }
    let g = g.with_concepts(known.iter().map(String::as_str));

    let real_known = known.len();
    let mut skipped = 0;
    if cfg.retrofit.skip_uncovered {
        let report = check_feasible(&g, &known)?;
        for c in report.uncovered() {
            skipped += 1;
            for m in &c.members {
                initial.insert_with_flag(m.clone(), vec![0.0; dim], true)?;
                known.insert(m.clone());
            }
        }
        if skipped > 0 {
            log::warn!("{skipped} component(s) without a known vector stay at zero");
        }
    }

    let (q, solver) = match cfg.retrofit.solver {
        SolverKind::Jacobi => {
            let params = SolverParams {
                tol: cfg.retrofit.tol,
                max_iter: cfg.retrofit.max_iter,
                degree_mode: cfg.retrofit.degree,
                ..SolverParams::default()
            };
            let (q, report) = jacobi_retrofit(&g, &initial, &known, &params)?;
            (q, Some(report))
        }
        SolverKind::Direct => (direct_solve_with(&g, &initial, &known, cfg.retrofit.degree)?, None),
    };

    let mut by_lang: BTreeMap<String, EmbeddingSet> = BTreeMap::new();
    for (i, id) in q.ids().iter().enumerate() {
        let Some((lang, label)) = split_concept_id(id) else {
            continue;
        };
        by_lang.entry(lang.to_string()).or_insert_with(|| EmbeddingSet::new(dim)).insert_with_flag(
            label,
            q.vector_at(i).to_vec(),
            true,
        )?;
    }
    let run = RetrofitRun {
        languages: sets.iter().map(|(l, _)| l.to_string()).collect(),
        concepts: g.concept_count(),
        known: real_known,
        skipped_components: skipped,
        solver,
    };
    Ok((by_lang, run))
}

#[derive(Debug, Clone)]
pub struct Annotation {
    pub scores: ScoreMatrix,
    pub truth: LabelMatrix,
    pub diagnostics: AnnotationDiagnostics,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AnnotationDiagnostics {
    #[serde(flatten)]
    pub scoring: AnnotateDiagnostics,
    /// Tags scored with a zero vector because no embedding exists.
    pub missing_source_embeddings: usize,
    pub missing_target_embeddings: usize,
}

fn with_all_tags(set: Option<&EmbeddingSet>, tags: &BTreeSet<String>, dim: usize) -> Result<(EmbeddingSet, usize)> {
    let mut out = set.cloned().unwrap_or_else(|| EmbeddingSet::new(dim));
    let mut missing = 0;
    for t in tags {
        if !out.contains(t) {
            out.insert_with_flag(t.clone(), vec![0.0; out.dim()], false)?;
            missing += 1;
        }
    }
    Ok((out, missing))
}

/// Scores every item of the source/target pair view with the configured scorer.
///
/// `embeddings` is only consulted by the embedding scorer.
pub fn annotate_stage(
    cfg: &PipelineConfig,
    corpus: &AnnotationCorpus,
    embeddings: &BTreeMap<String, EmbeddingSet>,
) -> Result<Annotation> {
    let (src, tgt) = (cfg.source.as_str(), cfg.target.as_str());
    let view = corpus.restrict_pair(src, tgt);
    if view.is_empty() {
        return Err(Error::Validation(format!("no item is tagged in both `{src}` and `{tgt}`")));
    }
    let vocab = TagVocabulary::from_corpus(&view, tgt);
    let mut diagnostics = AnnotationDiagnostics::default();

    let (scores, truth, scoring) = match cfg.scorer {
        ScorerKind::Embedding => {
            let dim = embeddings
                .values()
                .next()
                .map(EmbeddingSet::dim)
                .ok_or_else(|| Error::Validation("no embeddings available for scoring".into()))?;
            let (s, ms) = with_all_tags(embeddings.get(src), &view.tags_of(src), dim)?;
            let (t, mt) = with_all_tags(embeddings.get(tgt), &view.tags_of(tgt), dim)?;
            if ms + mt > 0 {
                log::warn!("{ms} source and {mt} target tag(s) have no embedding and score 0");
            }
            diagnostics.missing_source_embeddings = ms;
            diagnostics.missing_target_embeddings = mt;
            annotate_corpus(&view, &Scorer::Embedding { source: &s, target: &t }, src, tgt, &vocab)?
        }
        ScorerKind::Translation => {
            let path = cfg.resolve(
                cfg.translation_table
                    .as_deref()
                    .ok_or_else(|| Error::Config("the translation scorer requires `translation_table`".into()))?,
            );
            let table = TranslationTable::parse(open(&path)?).in_file(&path)?;
            annotate_corpus(&view, &Scorer::Translation(&table), src, tgt, &vocab)?
        }
        ScorerKind::Geodesic => {
            let g = read_aligned_graph(cfg)?;
            annotate_corpus(&view, &Scorer::Geodesic(&g), src, tgt, &vocab)?
        }
    };
    diagnostics.scoring = scoring;
    Ok(Annotation { scores, truth, diagnostics })
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub folds: FoldAssignment,
    pub report: CrossValidationReport,
}

/// Stratified k-fold split of the items, then macro AUC per fold.
pub fn evaluate_stage(cfg: &PipelineConfig, scores: &ScoreMatrix, truth: &LabelMatrix) -> Result<Evaluation> {
    if scores.item_ids != truth.item_ids || scores.tags != truth.tags {
        return Err(Error::Validation("score and truth tables do not describe the same items and tags".into()));
    }
    let folds = iterative_stratified_split(&truth.rows, cfg.eval.k, cfg.eval.seed)?;
    let report = cross_validate(scores, truth, &folds)?;
    Ok(Evaluation { folds, report })
}

pub fn write_composed(cfg: &PipelineConfig, composed: &BTreeMap<String, EmbeddingSet>) -> Result<()> {
    for (lang, set) in composed {
        save_embeddings(set, &cfg.output(&format!("composed/{lang}.vec")))?;
    }
    Ok(())
}

/// Reads `composed/{lang}.vec` for every composed language; nonzero vectors
/// count as known.
pub fn read_composed(cfg: &PipelineConfig) -> Result<BTreeMap<String, EmbeddingSet>> {
    read_vector_dir(cfg, "composed", &composed_languages(cfg))
}

pub fn write_retrofitted(cfg: &PipelineConfig, out: &RetrofitOutput) -> Result<()> {
    for (lang, set) in &out.embeddings {
        save_embeddings(set, &cfg.output(&format!("retrofit/{lang}.vec")))?;
    }
    write_json(&cfg.output("retrofit/report.json"), &out.runs)
}

/// The vectors the embedding scorer should use given the retrofit mode.
pub fn read_scoring_embeddings(cfg: &PipelineConfig) -> Result<BTreeMap<String, EmbeddingSet>> {
    let langs = [cfg.source.clone(), cfg.target.clone()];
    match cfg.retrofit.mode {
        RetrofitMode::Off => read_vector_dir(cfg, "composed", &langs),
        _ => read_vector_dir(cfg, "retrofit", &langs),
    }
}

fn read_vector_dir(cfg: &PipelineConfig, dir: &str, langs: &[String]) -> Result<BTreeMap<String, EmbeddingSet>> {
    let mut out = BTreeMap::new();
    for lang in langs {
        let path = cfg.output(&format!("{dir}/{lang}.vec"));
        if path.exists() {
            out.insert(lang.clone(), load_embeddings(&path)?);
        }
    }
    if out.is_empty() {
        return Err(Error::Validation(format!(
            "no vectors found under {}; run the earlier stages first",
            cfg.output(dir).display()
        )));
    }
    Ok(out)
}

pub fn write_annotation(cfg: &PipelineConfig, a: &Annotation) -> Result<()> {
    let p = cfg.output("scores.tsv");
    write_scores(&a.scores, create(&p)?).in_file(&p)?;
    let p = cfg.output("truth.tsv");
    write_labels(&a.truth, create(&p)?).in_file(&p)?;
    write_json(&cfg.output("annotate.json"), &a.diagnostics)
}

pub fn read_annotation(cfg: &PipelineConfig) -> Result<(ScoreMatrix, LabelMatrix)> {
    let p = cfg.output("scores.tsv");
    let scores = read_scores(open(&p)?).in_file(&p)?;
    let p = cfg.output("truth.tsv");
    let truth = read_labels(open(&p)?).in_file(&p)?;
    Ok((scores, truth))
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalSummary {
    pub source: String,
    pub target: String,
    pub scorer: ScorerKind,
    pub strategy: Strategy,
    pub retrofit_mode: RetrofitMode,
    pub items: usize,
    pub tags: usize,
    pub k: usize,
    pub seed: u64,
    pub fold_sizes: Vec<usize>,
    pub fold_macro_auc: Vec<f64>,
    pub mean_auc: f64,
    pub std_auc: f64,
    pub skipped_tag_count: usize,
}

pub fn summarize(cfg: &PipelineConfig, scores: &ScoreMatrix, e: &Evaluation) -> EvalSummary {
    EvalSummary {
        source: cfg.source.clone(),
        target: cfg.target.clone(),
        scorer: cfg.scorer,
        strategy: cfg.compose.strategy,
        retrofit_mode: cfg.retrofit.mode,
        items: scores.item_ids.len(),
        tags: scores.tags.len(),
        k: cfg.eval.k,
        seed: cfg.eval.seed,
        fold_sizes: e.folds.sizes(),
        fold_macro_auc: e.report.fold_macro_auc.clone(),
        mean_auc: e.report.mean,
        std_auc: e.report.std,
        skipped_tag_count: e.report.skipped_tag_count,
    }
}

pub fn write_evaluation(cfg: &PipelineConfig, scores: &ScoreMatrix, e: &Evaluation) -> Result<EvalSummary> {
    let p = cfg.output("eval/per_tag.tsv");
    write_tag_auc(&e.report.per_tag_mean_auc, create(&p)?).in_file(&p)?;
    let p = cfg.output("eval/folds.tsv");
    write_folds(&scores.item_ids, &e.folds, create(&p)?).in_file(&p)?;
    let summary = summarize(cfg, scores, e);
    write_json(&cfg.output("eval/summary.json"), &summary)?;
    Ok(summary)
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(Error::from).in_file(path)?;
    std::io::Write::write_all(&mut w, b"\n").map_err(Error::from).in_file(path)?;
    std::io::Write::flush(&mut w).map_err(Error::from).in_file(path)
}

/// Digest of every configured input file, keyed by its role.
pub fn input_digests(cfg: &PipelineConfig) -> Result<BTreeMap<String, String>> {
    let mut files: Vec<(String, PathBuf)> = Vec::new();
    if let Some(p) = &cfg.corpus {
        files.push(("corpus".into(), cfg.resolve(p)));
    }
    for (lang, inputs) in &cfg.languages {
        if let Some(p) = &inputs.tokens {
            files.push((format!("tokens.{lang}"), cfg.resolve(p)));
        }
        if let Some(p) = &inputs.graph {
            files.push((format!("graph.{lang}"), cfg.resolve(p)));
        }
    }
    for (role, p) in [
        ("alignment", &cfg.alignment),
        ("relation_classes", &cfg.relation_classes),
        ("translation_table", &cfg.translation_table),
    ] {
        if let Some(p) = p {
            files.push((role.into(), cfg.resolve(p)));
        }
    }
    let mut out = BTreeMap::new();
    for (role, path) in files {
        if path.exists() {
            out.insert(role, sha256_file(&path)?);
        }
    }
    Ok(out)
}

pub fn write_manifest(cfg: &PipelineConfig, command: &str) -> Result<RunManifest> {
    let name = |v: serde_json::Value| v.as_str().unwrap_or_default().to_string();
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        inputs: input_digests(cfg)?,
        strategy: name(serde_json::to_value(cfg.compose.strategy)?),
        scorer: name(serde_json::to_value(cfg.scorer)?),
        retrofit_mode: name(serde_json::to_value(cfg.retrofit.mode)?),
        solver: serde_json::to_value(&cfg.retrofit)?,
        seed: cfg.eval.seed,
        config: serde_json::to_value(cfg)?,
    };
    write_json(&cfg.output("manifest.json"), &manifest)?;
    Ok(manifest)
}

fn known_sets(composed: &BTreeMap<String, ComposedEmbeddings>) -> BTreeMap<String, EmbeddingSet> {
    composed.iter().map(|(l, c)| (l.clone(), c.embeddings.clone())).collect()
}

/// Runs every stage and writes all artefacts. Returns the evaluation summary.
pub fn run_all(cfg: &PipelineConfig) -> Result<EvalSummary> {
    cfg.validate()?;
    let (corpus, corpus_report) = read_corpus(cfg)?;
    if corpus_report.merged_records > 0 || corpus_report.dropped_items > 0 {
        log::info!(
            "corpus: {} merged record(s), {} item(s) dropped by the frequency filter",
            corpus_report.merged_records,
            corpus_report.dropped_items
        );
    }
    let needs_vectors = cfg.scorer == ScorerKind::Embedding;
    let mut embeddings = BTreeMap::new();
    if needs_vectors {
        let composed = known_sets(&compose_stage(cfg, &corpus)?);
        write_composed(cfg, &composed)?;
        let retrofitted = retrofit_stage(cfg, &composed)?;
        if cfg.retrofit.mode != RetrofitMode::Off {
            write_retrofitted(cfg, &retrofitted)?;
        }
        embeddings = retrofitted.embeddings;
    }
    let annotation = annotate_stage(cfg, &corpus, &embeddings)?;
    write_annotation(cfg, &annotation)?;
    let evaluation = evaluate_stage(cfg, &annotation.scores, &annotation.truth)?;
    let summary = write_evaluation(cfg, &annotation.scores, &evaluation)?;
    write_manifest(cfg, "pipeline")?;
    Ok(summary)
}

/// Compose, retrofit, annotate and evaluate in memory, writing nothing.
pub fn evaluate_in_memory(cfg: &PipelineConfig) -> Result<(Evaluation, Annotation)> {
    cfg.validate()?;
    let (corpus, _) = read_corpus(cfg)?;
    let mut embeddings = BTreeMap::new();
    if cfg.scorer == ScorerKind::Embedding {
        let composed = known_sets(&compose_stage(cfg, &corpus)?);
        embeddings = retrofit_stage(cfg, &composed)?.embeddings;
    }
    let annotation = annotate_stage(cfg, &corpus, &embeddings)?;
    let evaluation = evaluate_stage(cfg, &annotation.scores, &annotation.truth)?;
    Ok((evaluation, annotation))
}
