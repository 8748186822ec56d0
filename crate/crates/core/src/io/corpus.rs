//! Multi-label, multi-language annotation corpus.
//!
//! On disk: `item_id<TAB>lang<TAB>tag1|tag2|...`, one line per item and
//! language. Tags may contain spaces but not tabs or `|`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub id: String,
    pub tags: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationCorpus {
    items: Vec<Item>,
    index: HashMap<String, usize>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CorpusOptions {
    /// Drop tags seen on fewer items than this, per language.
    pub min_tag_freq: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusLoadReport {
    pub merged_records: usize,
    pub dropped_tags: BTreeMap<String, Vec<String>>,
    pub dropped_items: usize,
}

impl AnnotationCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds tags for an item, merging with any tags already present.
    /// Returns `true` when the (item, language) pair already existed.
    pub fn add<S: Into<String>>(&mut self, item: &str, lang: &str, tags: impl IntoIterator<Item = S>) -> bool {
        let i = match self.index.get(item) {
            Some(&i) => i,
            None => {
                self.index.insert(item.to_string(), self.items.len());
                self.items.push(Item { id: item.to_string(), tags: BTreeMap::new() });
                self.items.len() - 1
            }
        };
        let existed = self.items[i].tags.contains_key(lang);
        let set = self.items[i].tags.entry(lang.to_string()).or_default();
        set.extend(tags.into_iter().map(Into::into));
        existed
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Item> {
        self.index.get(id).map(|&i| &self.items[i])
    }

    pub fn languages(&self) -> BTreeSet<String> {
        self.items.iter().flat_map(|it| it.tags.keys().cloned()).collect()
    }

    /// Tags of `lang` across all items, sorted.
    pub fn tags_of(&self, lang: &str) -> BTreeSet<String> {
        self.items.iter().filter_map(|it| it.tags.get(lang)).flatten().cloned().collect()
    }

    /// Items tagged in both languages, restricted to those two languages.
    pub fn restrict_pair(&self, source: &str, target: &str) -> AnnotationCorpus {
        let mut out = AnnotationCorpus::new();
        for it in &self.items {
            if let (Some(s), Some(t)) = (it.tags.get(source), it.tags.get(target)) {
                out.add(&it.id, source, s.iter().cloned());
                out.add(&it.id, target, t.iter().cloned());
            }
        }
        out
    }

    fn retain_tags(&mut self, keep: impl Fn(&str, &str) -> bool) -> usize {
        for it in &mut self.items {
            for (lang, tags) in it.tags.iter_mut() {
                tags.retain(|t| keep(lang, t));
            }
            it.tags.retain(|_, tags| !tags.is_empty());
        }
        let before = self.items.len();
        self.items.retain(|it| !it.tags.is_empty());
        self.index = self.items.iter().enumerate().map(|(i, it)| (it.id.clone(), i)).collect();
        before - self.items.len()
    }
}

pub fn load_corpus(reader: impl BufRead, options: CorpusOptions) -> Result<(AnnotationCorpus, CorpusLoadReport)> {
    let mut corpus = AnnotationCorpus::new();
    let mut report = CorpusLoadReport::default();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(n + 1, format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let (id, lang) = (fields[0].trim(), fields[1].trim());
        if id.is_empty() || lang.is_empty() {
            return Err(Error::parse(n + 1, "empty item id or language"));
        }
        let tags: Vec<&str> = fields[2].split('|').map(str::trim).filter(|t| !t.is_empty()).collect();
        if tags.is_empty() {
            return Err(Error::parse(n + 1, "record has no tags"));
        }
        if corpus.add(id, lang, tags) {
            report.merged_records += 1;
            log::warn!("line {}: merged repeated record for item `{id}` in `{lang}`", n + 1);
        }
    }

    if let Some(min) = options.min_tag_freq {
        let mut counts: HashMap<(String, String), usize> = HashMap::new();
        for it in corpus.items() {
            for (lang, tags) in &it.tags {
                for t in tags {
                    *counts.entry((lang.clone(), t.clone())).or_default() += 1;
                }
            }
        }
        for ((lang, tag), c) in &counts {
            if *c < min {
                report.dropped_tags.entry(lang.clone()).or_default().push(tag.clone());
            }
        }
        for tags in report.dropped_tags.values_mut() {
            tags.sort();
        }
        report.dropped_items = corpus.retain_tags(|lang, tag| counts[&(lang.to_string(), tag.to_string())] >= min);
    }
    Ok((corpus, report))
}

/// Writes one line per (item, language) with tags in sorted order.
pub fn save_corpus(corpus: &AnnotationCorpus, mut writer: impl Write) -> Result<()> {
    for it in corpus.items() {
        for (lang, tags) in &it.tags {
            for t in tags {
                if t.contains(['\t', '|', '\n']) {
                    return Err(Error::Validation(format!("tag `{t}` contains a reserved character")));
                }
            }
            let joined: Vec<&str> = tags.iter().map(String::as_str).collect();
            writeln!(writer, "{}\t{}\t{}", it.id, lang, joined.join("|"))?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanguageStats {
    pub language: String,
    pub unique_tags: usize,
    pub tag_occurrences: usize,
    pub mean_tags_per_item: f64,
    /// Population standard deviation of tags per item.
    pub std_tags_per_item: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairStats {
    pub items: usize,
    pub source: LanguageStats,
    pub target: LanguageStats,
}

/// Item count and per-language tag statistics of the pair view.
pub fn corpus_stats(corpus: &AnnotationCorpus, source: &str, target: &str) -> Result<PairStats> {
    let langs = corpus.languages();
    for l in [source, target] {
        if !langs.contains(l) {
            return Err(Error::Validation(format!("language `{l}` does not occur in the corpus")));
        }
    }
    let view = corpus.restrict_pair(source, target);
    let stats = |lang: &str| {
        let sizes: Vec<f64> = view.items().iter().map(|it| it.tags[lang].len() as f64).collect();
        let n = sizes.len() as f64;
        let (mean, std) = if sizes.is_empty() {
            (0.0, 0.0)
        } else {
            let mean = sizes.iter().sum::<f64>() / n;
            (mean, (sizes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n).sqrt())
        };
        LanguageStats {
            language: lang.to_string(),
            unique_tags: view.tags_of(lang).len(),
            tag_occurrences: sizes.iter().sum::<f64>() as usize,
            mean_tags_per_item: mean,
            std_tags_per_item: std,
        }
    };
    Ok(PairStats { items: view.len(), source: stats(source), target: stats(target) })
}
