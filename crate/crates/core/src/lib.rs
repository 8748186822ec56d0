//! Cross-lingual music-genre tag annotation.
//!
//! Tags are embedded by composing token vectors ([`compose`]), refined on a
//! typed multilingual ontology by retrofitting ([`retrofit`]), and mapped
//! across languages by cosine similarity ([`mapping`]). [`eval`] measures the
//! result with stratified cross-validated macro AUC.

// `!(x > 0.0)` is how NaN gets rejected alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod compose;
pub mod config;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod io;
pub mod mapping;
pub mod ontology;
pub mod pipeline;
pub mod retrofit;
pub mod synth;

pub use compose::{build_tag_embeddings, compose_avg, preprocess_tag, sif_weighted_mean, Strategy, TokenTable};
pub use config::PipelineConfig;
pub use embedding::{concept_id, EmbeddingSet};
pub use error::{Error, Result};
pub use eval::{cross_validate, iterative_stratified_split, macro_auc, roc_auc};
pub use mapping::{cosine, score_targets, ScoreMatrix, TagVocabulary};
pub use ontology::{ConceptGraph, GraphBuilder, RelationClass, RelationClasses};
pub use retrofit::{check_feasible, direct_solve, jacobi_retrofit, SolverParams};
