//! Concept-indexed vector sets.
//!
//! An [`EmbeddingSet`] keeps insertion order, which is also the order used
//! when the set is written to disk.

use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dim: usize,
    ids: Vec<String>,
    vectors: Vec<Vec<f64>>,
    known: Vec<bool>,
    index: HashMap<String, usize>,
}

impl EmbeddingSet {
    pub fn new(dim: usize) -> Self {
        EmbeddingSet { dim, ids: Vec::new(), vectors: Vec::new(), known: Vec::new(), index: HashMap::new() }
    }

    /// Inserts a vector, marking it known unless it is all zeros.
    pub fn insert(&mut self, id: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let known = vector.iter().any(|&x| x != 0.0);
        self.insert_with_flag(id, vector, known)
    }

    pub fn insert_with_flag(&mut self, id: impl Into<String>, vector: Vec<f64>, known: bool) -> Result<()> {
        let id = id.into();
        if vector.len() != self.dim {
            return Err(Error::Validation(format!(
                "vector for `{id}` has dimension {}, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if let Some(&i) = self.index.get(&id) {
            self.vectors[i] = vector;
            self.known[i] = known;
            return Ok(());
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.vectors.push(vector);
        self.known.push(known);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.index.get(id).map(|&i| self.vectors[i].as_slice())
    }

    /// Like [`get`](Self::get) but reports a lookup error naming the id.
    pub fn require(&self, id: &str) -> Result<&[f64]> {
        self.get(id).ok_or_else(|| Error::lookup("embedding", id))
    }

    pub fn is_known(&self, id: &str) -> bool {
        self.index.get(id).is_some_and(|&i| self.known[i])
    }

    pub fn vector_at(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    pub fn known_at(&self, i: usize) -> bool {
        self.known[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.ids.iter().zip(&self.vectors).map(|(id, v)| (id.as_str(), v.as_slice()))
    }

    /// Multiplies every vector by `factor`.
    pub fn scaled(&self, factor: f64) -> EmbeddingSet {
        let mut out = self.clone();
        for v in &mut out.vectors {
            v.iter_mut().for_each(|x| *x *= factor);
        }
        out
    }
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

pub(crate) fn is_zero(u: &[f64]) -> bool {
    u.iter().all(|&x| x == 0.0)
}

pub(crate) fn squared_distance(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Concept identifier for a tag label in a given language, e.g. `en:hip hop`.
pub fn concept_id(lang: &str, label: &str) -> String {
    format!("{lang}:{label}")
}

/// Splits `lang:label` into its parts.
pub fn split_concept_id(id: &str) -> Option<(&str, &str)> {
    id.split_once(':')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_vectors_are_unknown() {
        let mut set = EmbeddingSet::new(2);
        set.insert("a", vec![0.0, 0.0]).unwrap();
        set.insert("b", vec![0.0, 1.0]).unwrap();
        assert!(!set.is_known("a"));
        assert!(set.is_known("b"));
        assert!(!set.is_known("c"));
    }

    #[test]
    fn dimension_is_enforced() {
        let mut set = EmbeddingSet::new(3);
        assert!(matches!(set.insert("a", vec![1.0]), Err(Error::Validation(_))));
    }

    #[test]
    fn reinsert_keeps_order() {
        let mut set = EmbeddingSet::new(1);
        set.insert("a", vec![1.0]).unwrap();
        set.insert("b", vec![2.0]).unwrap();
        set.insert("a", vec![3.0]).unwrap();
        assert_eq!(set.ids(), ["a", "b"]);
        assert_eq!(set.get("a"), Some(&[3.0][..]));
    }

    #[test]
    fn concept_ids_split_on_first_colon() {
        assert_eq!(split_concept_id("en:a:b"), Some(("en", "a:b")));
        assert_eq!(concept_id("fr", "rock"), "fr:rock");
    }
}
