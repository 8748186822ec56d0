//! Ranking evaluation: ROC-AUC, macro averaging and stratified folds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mapping::{LabelMatrix, ScoreMatrix};

/// Probability that a random positive outscores a random negative, ties
/// counting one half. `None` when all labels are equal.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<Option<f64>> {
    if scores.len() != labels.len() {
        return Err(Error::Validation(format!("{} scores but {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Validation("scores contain NaN".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count() as u64;
    let negatives = labels.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Ok(None);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Doubled mid-ranks keep the Mann-Whitney statistic an exact integer.
    let mut doubled_rank_sum: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let doubled_mid = (start + 1 + end) as u64;
        let pos_in_group = order[start..end].iter().filter(|&&i| labels[i]).count() as u64;
        doubled_rank_sum += doubled_mid * pos_in_group;
        start = end;
    }
    let doubled_u = doubled_rank_sum - positives * (positives + 1);
    Ok(Some(doubled_u as f64 / (2 * positives * negatives) as f64))
}

/// Per-tag AUCs of one score/label pair and their unweighted mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_tag_auc: Vec<(String, Option<f64>)>,
    pub macro_auc: f64,
    pub skipped_tags: Vec<String>,
}

pub fn macro_auc(scores: &ScoreMatrix, truth: &LabelMatrix) -> Result<EvalReport> {
    if scores.tags != truth.tags || scores.rows.len() != truth.rows.len() {
        return Err(Error::Validation("score and truth matrices differ in shape".into()));
    }
    if scores.rows.iter().any(|r| r.len() != scores.tags.len())
        || truth.rows.iter().any(|r| r.len() != truth.tags.len())
    {
        return Err(Error::Validation("ragged score or truth matrix".into()));
    }
    let mut per_tag_auc = Vec::with_capacity(scores.tags.len());
    let mut skipped_tags = Vec::new();
    let mut sum = 0.0;
    let mut defined = 0usize;
    for (j, tag) in scores.tags.iter().enumerate() {
        let auc = roc_auc(&scores.column(j), &truth.column(j))?;
        match auc {
            Some(a) => {
                sum += a;
                defined += 1;
            }
            None => skipped_tags.push(tag.clone()),
        }
        per_tag_auc.push((tag.clone(), auc));
    }
    if defined == 0 {
        return Err(Error::Eval("no tag has both positive and negative items".into()));
    }
    Ok(EvalReport { per_tag_auc, macro_auc: sum / defined as f64, skipped_tags })
}

/// Fold index of every item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn members(&self, fold: usize) -> Vec<usize> {
        self.fold_of.iter().enumerate().filter(|(_, &f)| f == fold).map(|(i, _)| i).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Multi-label iterative stratification into `k` folds of roughly equal size.
///
/// Labels are processed rarest first; each item carrying the current label
/// goes to the fold that still wants the most examples of that label, ties
/// broken by the fold's overall remaining capacity and then at random.
/// Label balance takes priority, so fold sizes can drift by more than one.
pub fn iterative_stratified_split(labels: &[Vec<bool>], k: usize, seed: u64) -> Result<FoldAssignment> {
    let n = labels.len();
    if k < 2 {
        return Err(Error::Validation(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::Validation(format!("{k} folds requested for {n} items")));
    }
    let n_labels = labels.first().map_or(0, Vec::len);
    if labels.iter().any(|r| r.len() != n_labels) {
        return Err(Error::Validation("ragged label matrix".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let share = 1.0 / k as f64;
    let mut capacity = vec![n as f64 * share; k];
    let mut remaining_per_label: Vec<usize> = (0..n_labels).map(|l| labels.iter().filter(|r| r[l]).count()).collect();
    let mut demand: Vec<Vec<f64>> = remaining_per_label.iter().map(|&c| vec![c as f64 * share; k]).collect();
    let mut fold_of = vec![usize::MAX; n];
    let mut unassigned = n;

    while let Some(label) =
        (0..n_labels).filter(|&l| remaining_per_label[l] > 0).min_by_key(|&l| (remaining_per_label[l], l))
    {
        for item in 0..n {
            if fold_of[item] != usize::MAX || !labels[item][label] {
                continue;
            }
            let tied = argmax_all((0..k).collect(), |f| demand[label][f]);
            let tied = argmax_all(tied, |f| capacity[f]);
            let fold = choose(&tied, &mut rng);

            fold_of[item] = fold;
            unassigned -= 1;
            capacity[fold] -= 1.0;
            for (l, &has) in labels[item].iter().enumerate() {
                if has {
                    demand[l][fold] -= 1.0;
                    remaining_per_label[l] -= 1;
                }
            }
        }
    }

    // Items without any positive label fill the emptiest folds.
    if unassigned > 0 {
        for slot in fold_of.iter_mut().filter(|f| **f == usize::MAX) {
            let fold = choose(&argmax_all((0..k).collect(), |f| capacity[f]), &mut rng);
            *slot = fold;
            capacity[fold] -= 1.0;
        }
    }
    Ok(FoldAssignment { k, fold_of })
}

fn argmax_all(candidates: Vec<usize>, key: impl Fn(usize) -> f64) -> Vec<usize> {
    let best = candidates.iter().map(|&f| key(f)).fold(f64::NEG_INFINITY, f64::max);
    candidates.into_iter().filter(|&f| key(f) == best).collect()
}

fn choose(tied: &[usize], rng: &mut ChaCha8Rng) -> usize {
    if tied.len() == 1 {
        tied[0]
    } else {
        tied[rng.random_range(0..tied.len())]
    }
}

/// Macro-AUC per fold plus mean and sample standard deviation across folds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidationReport {
    pub folds: Vec<EvalReport>,
    pub fold_macro_auc: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Mean AUC of each tag over the folds where it was defined.
    pub per_tag_mean_auc: Vec<(String, Option<f64>)>,
    pub skipped_tag_count: usize,
}

/// Mean and sample (n - 1) standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    if values.iter().all(|&v| v == values[0]) {
        return (values[0], 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Evaluates each fold of a precomputed score matrix separately.
pub fn cross_validate(
    scores: &ScoreMatrix,
    truth: &LabelMatrix,
    folds: &FoldAssignment,
) -> Result<CrossValidationReport> {
    if folds.fold_of.len() != scores.rows.len() {
        return Err(Error::Validation("fold assignment does not cover the score matrix".into()));
    }
    let mut reports = Vec::with_capacity(folds.k);
    for f in 0..folds.k {
        let rows = folds.members(f);
        let report = macro_auc(&scores.select_rows(&rows), &truth.select_rows(&rows))
            .map_err(|e| Error::Eval(format!("fold {f}: {e}")))?;
        reports.push(report);
    }
    let fold_macro_auc: Vec<f64> = reports.iter().map(|r| r.macro_auc).collect();
    let (mean, std) = mean_std(&fold_macro_auc);
    let per_tag_mean_auc = scores
        .tags
        .iter()
        .enumerate()
        .map(|(j, tag)| {
            let defined: Vec<f64> = reports.iter().filter_map(|r| r.per_tag_auc[j].1).collect();
            let mean = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
            (tag.clone(), mean)
        })
        .collect();
    let skipped_tag_count = reports.iter().map(|r| r.skipped_tags.len()).sum();
    Ok(CrossValidationReport { folds: reports, fold_macro_auc, mean, std, per_tag_mean_auc, skipped_tag_count })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrices(scores: Vec<Vec<f64>>, labels: Vec<Vec<bool>>, tags: &[&str]) -> (ScoreMatrix, LabelMatrix) {
        let ids: Vec<String> = (0..scores.len()).map(|i| format!("i{i}")).collect();
        let tags: Vec<String> = tags.iter().map(|s| s.to_string()).collect();
        (
            ScoreMatrix { item_ids: ids.clone(), tags: tags.clone(), rows: scores },
            LabelMatrix { item_ids: ids, tags, rows: labels },
        )
    }

    #[test]
    fn hand_computed_auc() {
        let auc = roc_auc(&[0.9, 0.8, 0.3, 0.2], &[true, false, true, false]).unwrap();
        assert_eq!(auc, Some(0.75));
        assert_eq!(roc_auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap(), Some(1.0));
        assert_eq!(roc_auc(&[0.4; 5], &[true, false, true, false, false]).unwrap(), Some(0.5));
    }

    #[test]
    fn degenerate_labels_are_undefined() {
        assert_eq!(roc_auc(&[0.1, 0.2], &[true, true]).unwrap(), None);
        assert_eq!(roc_auc(&[0.1, 0.2], &[false, false]).unwrap(), None);
        assert_eq!(roc_auc(&[], &[]).unwrap(), None);
        assert!(roc_auc(&[0.1], &[true, false]).is_err());
        assert!(roc_auc(&[f64::NAN, 0.0], &[true, false]).is_err());
    }

    #[test]
    fn macro_average_and_skips() {
        let (s, t) =
            matrices(vec![vec![0.9, 0.5], vec![0.1, 0.5]], vec![vec![true, true], vec![false, false]], &["a", "b"]);
        let r = macro_auc(&s, &t).unwrap();
        assert_eq!(r.macro_auc, 0.75);
        assert!(r.skipped_tags.is_empty());

        let (s, t) =
            matrices(vec![vec![0.9, 0.5], vec![0.1, 0.5]], vec![vec![true, true], vec![false, true]], &["a", "b"]);
        let r = macro_auc(&s, &t).unwrap();
        assert_eq!(r.macro_auc, 1.0);
        assert_eq!(r.skipped_tags, ["b"]);

        let (s, t) = matrices(vec![vec![0.9]], vec![vec![true]], &["a"]);
        assert!(matches!(macro_auc(&s, &t), Err(Error::Eval(_))));
    }

    #[test]
    fn uniform_single_label_split() {
        let labels = vec![vec![true]; 6];
        let f = iterative_stratified_split(&labels, 3, 1).unwrap();
        assert_eq!(f.sizes(), vec![2, 2, 2]);
    }

    #[test]
    fn label_with_k_positives_lands_once_per_fold() {
        let mut labels = vec![vec![false, true]; 9];
        for i in [1, 4, 7] {
            labels[i][0] = true;
        }
        let f = iterative_stratified_split(&labels, 3, 99).unwrap();
        let mut per_fold = vec![0; 3];
        for i in [1, 4, 7] {
            per_fold[f.fold_of[i]] += 1;
        }
        assert_eq!(per_fold, vec![1, 1, 1]);
    }

    #[test]
    fn split_validation() {
        assert!(iterative_stratified_split(&vec![vec![true]; 2], 3, 0).is_err());
        assert!(iterative_stratified_split(&vec![vec![true]; 4], 1, 0).is_err());
    }

    #[test]
    fn split_is_deterministic() {
        let labels: Vec<Vec<bool>> = (0..30).map(|i| vec![i % 2 == 0, i % 3 == 0, i % 5 != 0]).collect();
        let a = iterative_stratified_split(&labels, 3, 42).unwrap();
        let b = iterative_stratified_split(&labels, 3, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fold_statistics() {
        assert_eq!(mean_std(&[0.7, 0.7, 0.7]), (0.7, 0.0));
        let (m, s) = mean_std(&[0.8, 0.9, 1.0]);
        assert!((m - 0.9).abs() < 1e-15);
        assert!((s - 0.1).abs() < 1e-15);
    }
}
