//! Cross-lingual tag scoring.
//!
//! Every scorer turns the source-language tags of an item into one real
//! score per target-language tag. The embedding scorer averages cosine
//! similarities over the source tags; the translation scorer averages
//! one-hot translation vectors the same way; the geodesic scorer uses graph
//! distances in an aligned ontology.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use serde::Serialize;

use crate::embedding::{concept_id, dot, norm, EmbeddingSet};
use crate::error::{Error, Result};
use crate::io::corpus::AnnotationCorpus;
use crate::ontology::{geodesic_scores_cached, ConceptGraph};

/// `u.v / (|u| |v|)`, or 0 when either vector is zero.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Validation(format!("cosine of vectors with dimensions {} and {}", u.len(), v.len())));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Ordered tag list of one language; positions index score vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagVocabulary {
    language: String,
    tags: Vec<String>,
    index: HashMap<String, usize>,
}

impl TagVocabulary {
    pub fn new(language: impl Into<String>, tags: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tags.len());
        for (i, t) in tags.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate tag `{t}` in vocabulary")));
            }
        }
        Ok(TagVocabulary { language: language.into(), tags, index })
    }

    /// Sorted set of tags used for `lang` in the corpus.
    pub fn from_corpus(corpus: &AnnotationCorpus, lang: &str) -> Self {
        let tags: BTreeSet<&String> = corpus.items().iter().filter_map(|it| it.tags.get(lang)).flatten().collect();
        TagVocabulary::new(lang, tags.into_iter().cloned().collect()).expect("set has no duplicates")
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn position(&self, tag: &str) -> Option<usize> {
        self.index.get(tag).copied()
    }
}

/// Source tag to at most one target tag.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TranslationTable {
    entries: HashMap<String, Option<String>>,
}

impl TranslationTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a translation; a different target for the same source is an error.
    pub fn insert(&mut self, source: impl Into<String>, target: Option<String>) -> Result<()> {
        let source = source.into();
        match self.entries.get(&source) {
            Some(existing) if *existing != target => {
                Err(Error::Validation(format!("source tag `{source}` has more than one translation")))
            }
            _ => {
                self.entries.insert(source, target);
                Ok(())
            }
        }
    }

    pub fn get(&self, source: &str) -> Option<&str> {
        self.entries.get(source).and_then(|t| t.as_deref())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads `source<TAB>target` lines; an empty target means "no translation".
    pub fn parse(reader: impl BufRead) -> Result<Self> {
        let mut table = TranslationTable::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (s, t) = match line.split_once('\t') {
                Some((s, t)) if !t.contains('\t') => (s.trim(), t.trim()),
                Some(_) => return Err(Error::parse(n + 1, "expected `source<TAB>target`")),
                None => (line.trim(), ""),
            };
            if s.is_empty() {
                return Err(Error::parse(n + 1, "empty source tag"));
            }
            let target = (!t.is_empty()).then(|| t.to_string());
            table.insert(s, target).map_err(|e| Error::parse(n + 1, e.to_string()))?;
        }
        Ok(table)
    }
}

/// Mean cosine similarity between the source tags and each target tag.
///
/// Embedding sets are keyed by raw tag label, one set per language.
pub fn score_targets<S: AsRef<str>>(
    source_tags: &[S],
    src_emb: &EmbeddingSet,
    tgt_emb: &EmbeddingSet,
    vocab: &TagVocabulary,
) -> Result<Vec<f64>> {
    if source_tags.is_empty() {
        return Err(Error::Validation("at least one source tag is required".into()));
    }
    if src_emb.dim() != tgt_emb.dim() {
        return Err(Error::Validation(format!(
            "source and target embeddings have dimensions {} and {}",
            src_emb.dim(),
            tgt_emb.dim()
        )));
    }
    let sources: Vec<&[f64]> = source_tags.iter().map(|s| src_emb.require(s.as_ref())).collect::<Result<_>>()?;
    let k = sources.len() as f64;
    vocab
        .tags()
        .iter()
        .map(|t| {
            let tv = tgt_emb.require(t)?;
            let mut sum = 0.0;
            for s in &sources {
                sum += cosine(s, tv)?;
            }
            Ok(sum / k)
        })
        .collect()
}

/// Mean of the one-hot translation vectors of the source tags.
/// Returns the scores and the number of untranslatable source tags.
pub fn translation_scores<S: AsRef<str>>(
    source_tags: &[S],
    table: &TranslationTable,
    vocab: &TagVocabulary,
) -> (Vec<f64>, usize) {
    let mut scores = vec![0.0; vocab.len()];
    let mut missing = 0;
    for s in source_tags {
        match table.get(s.as_ref()).and_then(|t| vocab.position(t)) {
            Some(p) => scores[p] += 1.0,
            None => missing += 1,
        }
    }
    if !source_tags.is_empty() {
        let k = source_tags.len() as f64;
        scores.iter_mut().for_each(|x| *x /= k);
    }
    (scores, missing)
}

/// Items x target tags prediction scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub item_ids: Vec<String>,
    pub tags: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Items x target tags ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    pub item_ids: Vec<String>,
    pub tags: Vec<String>,
    pub rows: Vec<Vec<bool>>,
}

impl ScoreMatrix {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> ScoreMatrix {
        ScoreMatrix {
            item_ids: rows.iter().map(|&r| self.item_ids[r].clone()).collect(),
            tags: self.tags.clone(),
            rows: rows.iter().map(|&r| self.rows[r].clone()).collect(),
        }
    }
}

impl LabelMatrix {
    pub fn column(&self, j: usize) -> Vec<bool> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> LabelMatrix {
        LabelMatrix {
            item_ids: rows.iter().map(|&r| self.item_ids[r].clone()).collect(),
            tags: self.tags.clone(),
            rows: rows.iter().map(|&r| self.rows[r].clone()).collect(),
        }
    }
}

pub enum Scorer<'a> {
    Embedding {
        source: &'a EmbeddingSet,
        target: &'a EmbeddingSet,
    },
    Translation(&'a TranslationTable),
    /// Distances in an ontology whose concepts are `lang:tag` identifiers.
    Geodesic(&'a ConceptGraph),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AnnotateDiagnostics {
    pub items: usize,
    pub skipped_items: usize,
    pub untranslated_source_tags: usize,
    pub missing_graph_sources: usize,
    pub missing_graph_targets: usize,
}

/// Scores every item tagged in both languages against the target vocabulary.
pub fn annotate_corpus(
    corpus: &AnnotationCorpus,
    scorer: &Scorer<'_>,
    src_lang: &str,
    tgt_lang: &str,
    vocab: &TagVocabulary,
) -> Result<(ScoreMatrix, LabelMatrix, AnnotateDiagnostics)> {
    let mut scores = ScoreMatrix { item_ids: Vec::new(), tags: vocab.tags().to_vec(), rows: Vec::new() };
    let mut truth = LabelMatrix { item_ids: Vec::new(), tags: vocab.tags().to_vec(), rows: Vec::new() };
    let mut diag = AnnotateDiagnostics::default();
    let mut bfs_cache = HashMap::new();
    let target_ids: Vec<String> = vocab.tags().iter().map(|t| concept_id(tgt_lang, t)).collect();

    for item in corpus.items() {
        let (Some(src), Some(tgt)) = (item.tags.get(src_lang), item.tags.get(tgt_lang)) else {
            diag.skipped_items += 1;
            continue;
        };
        if src.is_empty() || tgt.is_empty() {
            diag.skipped_items += 1;
            continue;
        }
        let src: Vec<&String> = src.iter().collect();
        let row = match scorer {
            Scorer::Embedding { source, target } => score_targets(&src, source, target, vocab)?,
            Scorer::Translation(table) => {
                let (row, missing) = translation_scores(&src, table, vocab);
                diag.untranslated_source_tags += missing;
                row
            }
            Scorer::Geodesic(graph) => {
                let sources: Vec<String> = src.iter().map(|s| concept_id(src_lang, s)).collect();
                let (row, d) = geodesic_scores_cached(graph, &sources, &target_ids, &mut bfs_cache)?;
                diag.missing_graph_sources += d.missing_sources;
                diag.missing_graph_targets = d.missing_targets;
                row
            }
        };
        let mut labels = vec![false; vocab.len()];
        for t in tgt {
            let p = vocab.position(t).ok_or_else(|| Error::lookup("target tag", t.clone()))?;
            labels[p] = true;
        }
        scores.item_ids.push(item.id.clone());
        scores.rows.push(row);
        truth.item_ids.push(item.id.clone());
        truth.rows.push(labels);
        diag.items += 1;
    }
    if diag.skipped_items > 0 {
        log::info!("{} item(s) lack tags in {src_lang} or {tgt_lang}", diag.skipped_items);
    }
    Ok((scores, truth, diag))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(entries: &[(&str, &[f64])]) -> EmbeddingSet {
        let mut s = EmbeddingSet::new(entries[0].1.len());
        for (id, v) in entries {
            s.insert(*id, v.to_vec()).unwrap();
        }
        s
    }

    #[test]
    fn cosine_cases() {
        assert!((cosine(&[1.0, 2.0], &[1.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 3.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 3.0]).unwrap(), 0.0);
        assert!(cosine(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn vocabulary_rejects_duplicates() {
        assert!(TagVocabulary::new("fr", vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn embedding_scores() {
        let src = emb(&[("s1", &[1.0, 0.0]), ("s2", &[0.0, 1.0])]);
        let tgt = emb(&[("t", &[2.0, 0.0]), ("u", &[0.0, -1.0])]);
        let vocab = TagVocabulary::new("fr", vec!["t".into(), "u".into()]).unwrap();
        assert_eq!(score_targets(&["s1"], &src, &tgt, &vocab).unwrap(), vec![1.0, 0.0]);
        assert_eq!(score_targets(&["s1", "s2"], &src, &tgt, &vocab).unwrap(), vec![0.5, -0.5]);
        let err = score_targets(&["nope"], &src, &tgt, &vocab).unwrap_err();
        assert!(err.to_string().contains("nope"));
    }

    #[test]
    fn translation_cases() {
        let vocab = TagVocabulary::new("fr", ["t1", "t2", "t3", "t4"].map(String::from).to_vec()).unwrap();
        let mut table = TranslationTable::new();
        table.insert("a", Some("t3".into())).unwrap();
        table.insert("b", Some("t1".into())).unwrap();
        table.insert("c", Some("t1".into())).unwrap();
        table.insert("d", None).unwrap();
        assert_eq!(translation_scores(&["a"], &table, &vocab).0, vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(translation_scores(&["b", "c"], &table, &vocab).0[0], 1.0);
        let (row, missing) = translation_scores(&["a", "d"], &table, &vocab);
        assert_eq!(row, vec![0.0, 0.0, 0.5, 0.0]);
        assert_eq!(missing, 1);
        assert!(table.insert("a", Some("t2".into())).is_err());
    }

    #[test]
    fn translation_file_parsing() {
        let table = TranslationTable::parse("rock\trock\nhip hop\thip-hop\nlonely\t\n".as_bytes()).unwrap();
        assert_eq!(table.get("hip hop"), Some("hip-hop"));
        assert_eq!(table.get("lonely"), None);
        assert_eq!(table.len(), 3);
        assert!(matches!(TranslationTable::parse("a\tb\na\tc\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
    }
}
