//! Seeded synthetic bilingual bundles for demos and end-to-end tests.
//!
//! Target token vectors are a random rotation of the source vectors plus
//! Gaussian noise, with identical frequency ranks: target token `b0042` is the
//! image of source token `a0042`. Cross-lingual scoring needs both languages
//! in one space, so by default the target table is written after undoing the
//! known rotation, the way aligned multilingual vectors are distributed. With
//! `aligned: false` the raw rotated table is written instead.
//!
//! Tags come in families: a root tag made of one head token, and members
//! `head_specific`. Both languages get mirrored ontologies with an extra
//! out-of-vocabulary alias per root, linked by a redirect.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::{EvalConfig, LanguageInputs, PipelineConfig, RetrofitMode};
use crate::embedding::{concept_id, EmbeddingSet};
use crate::error::{Error, Result, ResultExt};
use crate::io::corpus::{save_corpus, AnnotationCorpus};
use crate::io::create;
use crate::io::vectors::save_embeddings;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub source: String,
    pub target: String,
    pub families: usize,
    pub tags_per_family: usize,
    pub items: usize,
    pub dim: usize,
    pub vocab: usize,
    /// Per-coordinate noise scale of the target token vectors, relative to
    /// unit-norm source vectors.
    pub noise: f64,
    pub seed: u64,
    /// Share of tags that receive a `sameAs` alignment edge.
    pub aligned_fraction: f64,
    pub max_tags_per_item: usize,
    /// Map the target table back into the source frame.
    pub aligned: bool,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            source: "src".into(),
            target: "tgt".into(),
            families: 10,
            tags_per_family: 5,
            items: 200,
            dim: 64,
            vocab: 500,
            noise: 0.05,
            seed: 7,
            aligned_fraction: 0.5,
            max_tags_per_item: 3,
            aligned: true,
        }
    }
}

impl SynthParams {
    pub fn tag_count(&self) -> usize {
        self.families * self.tags_per_family
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synth: {m}")));
        if self.source == self.target || self.source.is_empty() || self.target.is_empty() {
            return bad("source and target languages must be distinct and non-empty");
        }
        if self.families == 0 || self.tags_per_family == 0 || self.items == 0 || self.dim == 0 {
            return bad("families, tags per family, items and dim must be positive");
        }
        if self.max_tags_per_item == 0 || self.max_tags_per_item > self.tag_count() {
            return bad("max tags per item must lie in 1..=tag count");
        }
        // heads take the first band of ranks, specific tokens the rest
        let needed = self.families + self.families * (self.tags_per_family - 1);
        if self.vocab < 2 * needed + 10 {
            return bad("vocabulary is too small for the requested number of tags");
        }
        if !(self.noise >= 0.0) || !(0.0..=1.0).contains(&self.aligned_fraction) {
            return bad("noise must be non-negative and aligned fraction in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthBundle {
    pub params: SynthParams,
    /// Token vectors in rank order.
    pub source_tokens: Vec<(String, Vec<f64>)>,
    pub target_tokens: Vec<(String, Vec<f64>)>,
    pub source_edges: Vec<(String, String, String)>,
    pub target_edges: Vec<(String, String, String)>,
    pub alignment: Vec<(String, String)>,
    /// Source tag to its target tag, for every tag.
    pub translation: Vec<(String, String)>,
    pub corpus: AnnotationCorpus,
}

fn token(prefix: char, rank: usize) -> String {
    format!("{prefix}{rank:04}")
}

/// Builds a bundle; identical parameters give identical bundles.
pub fn generate(p: &SynthParams) -> Result<SynthBundle> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let d = p.dim;
    let scale = 1.0 / (d as f64).sqrt();

    let rotation = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng)).qr().q();
    let mut source_tokens = Vec::with_capacity(p.vocab);
    let mut target_tokens = Vec::with_capacity(p.vocab);
    for r in 1..=p.vocab {
        let x: Vec<f64> = (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
        let rx = &rotation * nalgebra::DVector::from_column_slice(&x);
        let mut y = rx.map(|v| v + p.noise * scale * rng.sample::<f64, _>(StandardNormal));
        if p.aligned {
            y = rotation.tr_mul(&y);
        }
        let y: Vec<f64> = y.iter().copied().collect();
        source_tokens.push((token('a', r), x));
        target_tokens.push((token('b', r), y));
    }

    // heads from a frequent band, specific tokens from the tail
    let mut head_ranks: Vec<usize> = (10..10 + 2 * p.families).collect();
    head_ranks.shuffle(&mut rng);
    head_ranks.truncate(p.families);
    let mut specific_ranks: Vec<usize> = (10 + 2 * p.families..=p.vocab).collect();
    specific_ranks.shuffle(&mut rng);

    // labels[f][j] as rank lists; j = 0 is the root
    let mut families: Vec<Vec<Vec<usize>>> = Vec::with_capacity(p.families);
    let mut specific = specific_ranks.into_iter();
    for &h in &head_ranks {
        let mut fam = vec![vec![h]];
        for _ in 1..p.tags_per_family {
            fam.push(vec![h, specific.next().expect("vocabulary size checked")]);
        }
        families.push(fam);
    }
    let label = |prefix: char, ranks: &[usize]| ranks.iter().map(|&r| token(prefix, r)).collect::<Vec<_>>().join("_");
    let alias = |prefix: char, f: usize| format!("{prefix}alias{f:03}");

    let edges_for = |prefix: char, lang: &str| {
        let c = |l: String| concept_id(lang, &l);
        let mut e = Vec::new();
        for (f, fam) in families.iter().enumerate() {
            let root = c(label(prefix, &fam[0]));
            for m in &fam[1..] {
                e.push((root.clone(), "musicSubgenre".to_string(), c(label(prefix, m))));
            }
            if fam.len() > 2 {
                e.push((c(label(prefix, &fam[1])), "derivative".into(), c(label(prefix, &fam[2]))));
            }
            if f + 1 < families.len() {
                e.push((root.clone(), "stylisticOrigin".into(), c(label(prefix, &families[f + 1][0]))));
            }
            if families.len() > 3 && fam.len() > 1 {
                let other = &families[(f + 3) % families.len()][0];
                e.push((c(label(prefix, fam.last().unwrap())), "musicFusionGenre".into(), c(label(prefix, other))));
            }
            e.push((c(alias(prefix, f)), "wikiPageRedirects".into(), root));
        }
        e
    };
    let source_edges = edges_for('a', &p.source);
    let target_edges = edges_for('b', &p.target);

    let all: Vec<&Vec<usize>> = families.iter().flatten().collect();
    let translation: Vec<(String, String)> = all.iter().map(|r| (label('a', r), label('b', r))).collect();

    let mut order: Vec<usize> = (0..all.len()).collect();
    order.shuffle(&mut rng);
    let n_aligned = (p.aligned_fraction * all.len() as f64).round() as usize;
    let mut aligned: Vec<usize> = order[..n_aligned].to_vec();
    aligned.sort_unstable();
    let alignment = aligned
        .iter()
        .map(|&i| (concept_id(&p.source, &translation[i].0), concept_id(&p.target, &translation[i].1)))
        .collect();

    let mut corpus = AnnotationCorpus::new();
    let indices: Vec<usize> = (0..all.len()).collect();
    for item in 0..p.items {
        let k = rng.random_range(1..=p.max_tags_per_item);
        // cycling the first tag guarantees every tag occurs
        let mut chosen = BTreeSet::from([item % all.len()]);
        while chosen.len() < k {
            chosen.insert(*indices.choose(&mut rng).expect("non-empty"));
        }
        let id = format!("item{item:05}");
        corpus.add(&id, &p.source, chosen.iter().map(|&i| translation[i].0.clone()));
        corpus.add(&id, &p.target, chosen.iter().map(|&i| translation[i].1.clone()));
    }

    Ok(SynthBundle {
        params: p.clone(),
        source_tokens,
        target_tokens,
        source_edges,
        target_edges,
        alignment,
        translation,
        corpus,
    })
}

impl SynthBundle {
    /// Configuration with paths relative to the bundle directory.
    pub fn config(&self, dir: &Path) -> PipelineConfig {
        let (s, t) = (&self.params.source, &self.params.target);
        let mut cfg = PipelineConfig {
            alignment: Some("graphs/alignment.tsv".into()),
            corpus: Some("corpus.tsv".into()),
            source: s.clone(),
            target: t.clone(),
            translation_table: Some("mapping.tsv".into()),
            eval: EvalConfig { k: 3, seed: self.params.seed },
            base_dir: dir.to_path_buf(),
            ..PipelineConfig::default()
        };
        for l in [s, t] {
            cfg.languages.insert(
                l.clone(),
                LanguageInputs {
                    tokens: Some(format!("tokens/{l}.vec").into()),
                    graph: Some(format!("graphs/{l}.tsv").into()),
                    tag_vectors: None,
                },
            );
        }
        cfg.retrofit.mode = RetrofitMode::Monolingual;
        cfg.retrofit.known_languages = vec![s.clone()];
        cfg
    }

    /// Writes every file of the bundle under `dir`; returns the config path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let (s, t) = (&self.params.source, &self.params.target);
        let dim = self.params.dim;
        for (lang, tokens) in [(s, &self.source_tokens), (t, &self.target_tokens)] {
            let mut set = EmbeddingSet::new(dim);
            for (tok, v) in tokens {
                set.insert_with_flag(tok.clone(), v.clone(), true)?;
            }
            save_embeddings(&set, &dir.join(format!("tokens/{lang}.vec")))?;
        }
        for (lang, edges) in [(s, &self.source_edges), (t, &self.target_edges)] {
            let lines = edges.iter().map(|(a, r, b)| format!("{a}\t{r}\t{b}"));
            write_lines(&dir.join(format!("graphs/{lang}.tsv")), lines)?;
        }
        write_lines(&dir.join("graphs/alignment.tsv"), self.alignment.iter().map(|(a, b)| format!("{a}\t{b}")))?;
        write_lines(&dir.join("mapping.tsv"), self.translation.iter().map(|(a, b)| format!("{a}\t{b}")))?;
        let p = dir.join("corpus.tsv");
        save_corpus(&self.corpus, create(&p)?).in_file(&p)?;

        let cfg_path = dir.join("config.json");
        let mut w = create(&cfg_path)?;
        serde_json::to_writer_pretty(&mut w, &self.config(dir)).map_err(Error::from).in_file(&cfg_path)?;
        std::io::Write::write_all(&mut w, b"\n").map_err(Error::from).in_file(&cfg_path)?;
        std::io::Write::flush(&mut w).map_err(Error::from).in_file(&cfg_path)?;
        Ok(cfg_path)
    }
}

fn write_lines(path: &Path, lines: impl Iterator<Item = String>) -> Result<()> {
    let mut w = create(path)?;
    for l in lines {
        std::io::Write::write_all(&mut w, l.as_bytes()).map_err(Error::from).in_file(path)?;
        std::io::Write::write_all(&mut w, b"\n").map_err(Error::from).in_file(path)?;
    }
    std::io::Write::flush(&mut w).map_err(Error::from).in_file(path)
}
