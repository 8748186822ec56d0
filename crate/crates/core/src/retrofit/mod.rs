//! Retrofitting concept vectors to a typed ontology.
//!
//! The learned matrix `Q` minimises
//!
//! ```text
//! Phi(Q) = sum_i alpha_i |q_i - qhat_i|^2 + sum_{(i,j) in E} beta_ij |q_i - q_j|^2
//! ```
//!
//! where `alpha_i` is 1 for concepts with a known initial vector and 0
//! otherwise, and `beta_ij` is 1 on equivalence edges and `1/degree(i)` on
//! relatedness edges. Setting the gradient to zero gives, per concept,
//!
//! ```text
//! q_i = (sum_j (beta_ij + beta_ji) q_j + alpha_i qhat_i) / (sum_j (beta_ij + beta_ji) + alpha_i)
//! ```
//!
//! which [`jacobi_retrofit`] iterates. The minimum is unique when every
//! connected component holds at least one known concept; [`check_feasible`]
//! verifies that before any solve.

mod system;

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{squared_distance, EmbeddingSet};
use crate::error::{Error, Result};
use crate::ontology::{connected_components, ConceptGraph, RelationClass};

pub use system::{direct_solve, direct_solve_with, objective_value, SystemMatrices};

/// Which neighbours count towards `degree(i)` in relatedness weights.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum DegreeMode {
    /// Every distinct undirected neighbour.
    #[default]
    AllNeighbors,
    /// Only neighbours linked through a relatedness edge.
    RelatednessOnly,
}

/// Per-concept `alpha` and per-directed-edge `beta` weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrofitWeights {
    alpha: Vec<f64>,
    beta: BTreeMap<(usize, usize), f64>,
    equivalence: BTreeSet<(usize, usize)>,
}

impl RetrofitWeights {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.alpha[i]
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alpha
    }

    /// `beta_ij`; zero when `(i, j)` is not an edge.
    pub fn beta(&self, i: usize, j: usize) -> f64 {
        self.beta.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// Directed edges with non-zero weight.
    pub fn directed(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.beta.iter().map(|(&(i, j), &b)| (i, j, b))
    }

    pub fn equivalence_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.equivalence
    }

    /// Undirected adjacency with weights `beta_ij + beta_ji`.
    pub fn coupling(&self) -> Vec<Vec<(usize, f64)>> {
        let mut sym: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (&(i, j), &b) in &self.beta {
            let key = if i < j { (i, j) } else { (j, i) };
            *sym.entry(key).or_default() += b;
        }
        let mut adj = vec![Vec::new(); self.alpha.len()];
        for ((i, j), w) in sym {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        adj
    }
}

/// Builds retrofitting weights over `g`; `known` holds concept indices.
///
/// Equivalence edges stored in both directions are kept once, in the
/// direction first seen. A pair linked by both an equivalence and a
/// relatedness relation is weighted as an equivalence.
pub fn build_weights(g: &ConceptGraph, known: &[bool], mode: DegreeMode) -> RetrofitWeights {
    let n = g.concept_count();
    assert_eq!(known.len(), n, "known mask must cover every concept");
    let alpha = known.iter().map(|&k| if k { 1.0 } else { 0.0 }).collect();

    let degree: Vec<usize> = match mode {
        DegreeMode::AllNeighbors => (0..n).map(|i| g.neighbors(i).len()).collect(),
        DegreeMode::RelatednessOnly => {
            let mut nb = vec![BTreeSet::new(); n];
            for e in g.edges().iter().filter(|e| e.class == RelationClass::Relatedness) {
                nb[e.source].insert(e.target);
                nb[e.target].insert(e.source);
            }
            nb.iter().map(BTreeSet::len).collect()
        }
    };

    let mut equivalence = BTreeSet::new();
    for e in g.edges().iter().filter(|e| e.class == RelationClass::Equivalence) {
        if !equivalence.contains(&(e.target, e.source)) {
            equivalence.insert((e.source, e.target));
        }
    }
    let mut beta = BTreeMap::new();
    for &(i, j) in &equivalence {
        beta.insert((i, j), 1.0);
    }
    for e in g.edges().iter().filter(|e| e.class == RelationClass::Relatedness) {
        let (i, j) = (e.source, e.target);
        if equivalence.contains(&(i, j)) || equivalence.contains(&(j, i)) {
            continue;
        }
        beta.insert((i, j), 1.0 / degree[i] as f64);
    }
    RetrofitWeights { alpha, beta, equivalence }
}

/// Whether each connected component holds at least one known concept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeasibilityReport {
    pub components: Vec<ComponentVerdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentVerdict {
    pub id: usize,
    pub members: Vec<String>,
    pub known: usize,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.components.iter().all(|c| c.known > 0)
    }

    pub fn uncovered(&self) -> Vec<&ComponentVerdict> {
        self.components.iter().filter(|c| c.known == 0).collect()
    }

    pub fn into_error(self) -> Error {
        Error::Infeasible {
            uncovered: self.components.into_iter().filter(|c| c.known == 0).map(|c| c.members).collect(),
        }
    }
}

/// Checks the uniqueness precondition component by component.
pub fn check_feasible(g: &ConceptGraph, known: &BTreeSet<String>) -> Result<FeasibilityReport> {
    let mask = known_mask(g, known)?;
    Ok(feasibility(g, &mask))
}

fn feasibility(g: &ConceptGraph, known: &[bool]) -> FeasibilityReport {
    let comps = connected_components(g);
    let components = comps
        .members()
        .into_iter()
        .enumerate()
        .map(|(id, members)| ComponentVerdict {
            id,
            known: members.iter().filter(|&&i| known[i]).count(),
            members: members.iter().map(|&i| g.name(i).to_string()).collect(),
        })
        .collect();
    FeasibilityReport { components }
}

pub(crate) fn known_mask(g: &ConceptGraph, known: &BTreeSet<String>) -> Result<Vec<bool>> {
    let mut mask = vec![false; g.concept_count()];
    for k in known {
        let i = g.index_of(k).ok_or_else(|| Error::Validation(format!("known concept `{k}` is not in the graph")))?;
        mask[i] = true;
    }
    Ok(mask)
}

/// Initial vectors of known concepts, zero rows for the rest.
pub(crate) fn initial_rows(g: &ConceptGraph, initial: &EmbeddingSet, known: &[bool]) -> Result<Vec<Vec<f64>>> {
    (0..g.concept_count())
        .map(|i| {
            if known[i] {
                initial
                    .get(g.name(i))
                    .map(<[f64]>::to_vec)
                    .ok_or_else(|| Error::Validation(format!("known concept `{}` has no initial vector", g.name(i))))
            } else {
                Ok(vec![0.0; initial.dim()])
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UpdateOrder {
    /// Jacobi sweeps: every concept is updated from the previous sweep.
    Synchronous,
    /// Gauss-Seidel sweeps in the given order of concept indices.
    Asynchronous(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// Unknown concepts start at the zero vector.
    Zero,
    /// Unknown concepts start at seeded standard-normal vectors.
    Random(u64),
}

#[derive(Debug, Clone)]
pub struct SolverParams {
    pub tol: f64,
    pub max_iter: usize,
    pub order: UpdateOrder,
    pub init: Init,
    pub degree_mode: DegreeMode,
    /// Record `Phi` after every sweep in the report.
    pub track_objective: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            tol: 1e-6,
            max_iter: 1000,
            order: UpdateOrder::Synchronous,
            init: Init::Zero,
            degree_mode: DegreeMode::AllNeighbors,
            track_objective: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    /// Sweeps run by the slowest component.
    pub iterations: usize,
    /// Largest coordinate change in the final sweep of any component.
    pub max_delta: f64,
    pub objective_initial: f64,
    pub objective_final: f64,
    pub converged: bool,
    pub components: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_trace: Vec<f64>,
}

/// Iterates the per-concept update until the largest coordinate change
/// drops below `params.tol`.
///
/// `known` names the concepts whose vectors in `initial` are trusted
/// (`alpha = 1`); every other concept is learned from its neighbours.
/// Returns one vector per graph concept, in graph order.
pub fn jacobi_retrofit(
    g: &ConceptGraph,
    initial: &EmbeddingSet,
    known: &BTreeSet<String>,
    params: &SolverParams,
) -> Result<(EmbeddingSet, SolverReport)> {
    if !(params.tol > 0.0) {
        return Err(Error::Validation(format!("tolerance must be positive, got {}", params.tol)));
    }
    let mask = known_mask(g, known)?;
    let report = feasibility(g, &mask);
    if !report.is_feasible() {
        return Err(report.into_error());
    }
    if let UpdateOrder::Asynchronous(order) = &params.order {
        let mut seen = vec![false; g.concept_count()];
        for &i in order {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Validation("update order must be a permutation of concept indices".into()));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Validation("update order must visit every concept".into()));
        }
    }

    let weights = build_weights(g, &mask, params.degree_mode);
    let coupling = weights.coupling();
    let targets = initial_rows(g, initial, &mask)?;
    let dim = initial.dim();

    let mut start = targets.clone();
    if let Init::Random(seed) = params.init {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (row, &k) in start.iter_mut().zip(&mask) {
            if !k {
                row.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
            }
        }
    }

    let mut components = connected_components(g).members();
    let position: Vec<usize> = match &params.order {
        UpdateOrder::Synchronous => Vec::new(),
        UpdateOrder::Asynchronous(order) => {
            let mut pos = vec![0; order.len()];
            for (p, &i) in order.iter().enumerate() {
                pos[i] = p;
            }
            pos
        }
    };

    if !position.is_empty() {
        for members in &mut components {
            members.sort_by_key(|&i| position[i]);
        }
    }

    let problem = Problem { alpha: weights.alphas(), coupling: &coupling, targets: &targets, dim };
    let solved: Vec<ComponentRun> =
        components.par_iter().map(|members| problem.solve_component(members, &start, params)).collect();

    let mut q = vec![Vec::new(); g.concept_count()];
    let mut report = SolverReport {
        iterations: 0,
        max_delta: 0.0,
        objective_initial: 0.0,
        objective_final: 0.0,
        converged: true,
        components: components.len(),
        objective_trace: Vec::new(),
    };
    let longest = solved.iter().map(|r| r.trace.len()).max().unwrap_or(0);
    if params.track_objective {
        report.objective_trace = vec![0.0; longest];
    }
    for (members, run) in components.iter().zip(solved) {
        report.iterations = report.iterations.max(run.iterations);
        report.max_delta = report.max_delta.max(run.max_delta);
        report.objective_initial += run.objective_initial;
        report.objective_final += run.objective_final;
        report.converged &= run.converged;
        for (t, slot) in report.objective_trace.iter_mut().enumerate() {
            *slot += run.trace.get(t).or(run.trace.last()).copied().unwrap_or(run.objective_final);
        }
        for (&i, row) in members.iter().zip(run.rows) {
            q[i] = row;
        }
    }
    if !report.converged {
        log::warn!(
            "retrofitting stopped after {} sweeps with max change {:.3e} (tol {:.1e})",
            report.iterations,
            report.max_delta,
            params.tol
        );
    }

    let mut out = EmbeddingSet::new(dim);
    for (i, row) in q.into_iter().enumerate() {
        out.insert_with_flag(g.name(i), row, mask[i])?;
    }
    Ok((out, report))
}

struct Problem<'a> {
    alpha: &'a [f64],
    coupling: &'a [Vec<(usize, f64)>],
    targets: &'a [Vec<f64>],
    dim: usize,
}

struct ComponentRun {
    rows: Vec<Vec<f64>>,
    iterations: usize,
    max_delta: f64,
    objective_initial: f64,
    objective_final: f64,
    converged: bool,
    trace: Vec<f64>,
}

impl Problem<'_> {
    /// `members` are global indices, already in update order.
    fn solve_component(&self, members: &[usize], start: &[Vec<f64>], params: &SolverParams) -> ComponentRun {
        let n = members.len();
        let mut local = std::collections::HashMap::with_capacity(n);
        for (l, &g) in members.iter().enumerate() {
            local.insert(g, l);
        }
        let adj: Vec<Vec<(usize, f64)>> =
            members.iter().map(|&g| self.coupling[g].iter().map(|&(j, w)| (local[&j], w)).collect()).collect();
        let alpha: Vec<f64> = members.iter().map(|&g| self.alpha[g]).collect();
        let target: Vec<&[f64]> = members.iter().map(|&g| self.targets[g].as_slice()).collect();
        let denom: Vec<f64> = (0..n).map(|l| alpha[l] + adj[l].iter().map(|&(_, w)| w).sum::<f64>()).collect();
        debug_assert!(denom.iter().all(|&d| d > 0.0), "feasibility guarantees positive denominators");

        let objective = |q: &[Vec<f64>]| -> f64 {
            let mut phi = 0.0;
            for l in 0..n {
                if alpha[l] != 0.0 {
                    phi += alpha[l] * squared_distance(&q[l], target[l]);
                }
                for &(j, w) in &adj[l] {
                    if j > l {
                        phi += w * squared_distance(&q[l], &q[j]);
                    }
                }
            }
            phi
        };

        let mut q: Vec<Vec<f64>> = members.iter().map(|&g| start[g].clone()).collect();
        let objective_initial = objective(&q);
        let check = params.track_objective || cfg!(debug_assertions);
        let mut trace = Vec::new();
        let mut last = objective_initial;
        let synchronous = matches!(params.order, UpdateOrder::Synchronous);
        let mut next = q.clone();
        let mut iterations = 0;
        let mut max_delta = f64::INFINITY;
        let mut row = vec![0.0; self.dim];

        while iterations < params.max_iter {
            iterations += 1;
            max_delta = 0.0;
            for l in 0..n {
                row.iter_mut().zip(target[l]).for_each(|(r, t)| *r = alpha[l] * t);
                for &(j, w) in &adj[l] {
                    let src = if synchronous { &q[j] } else { &next[j] };
                    row.iter_mut().zip(src).for_each(|(r, x)| *r += w * x);
                }
                let out = &mut next[l];
                for (o, r) in out.iter_mut().zip(&row) {
                    let v = r / denom[l];
                    max_delta = f64::max(max_delta, (v - *o).abs());
                    *o = v;
                }
            }
            // In both modes `next` held the previous sweep before being overwritten.
            if synchronous {
                std::mem::swap(&mut q, &mut next);
                next.clone_from(&q);
            } else {
                q.clone_from(&next);
            }
            if check {
                let phi = objective(&q);
                debug_assert!(phi <= last + 1e-9 * last.abs().max(1.0), "objective increased from {last} to {phi}");
                last = phi;
                if params.track_objective {
                    trace.push(phi);
                }
            }
            if max_delta < params.tol {
                break;
            }
        }
        let objective_final = objective(&q);
        ComponentRun {
            rows: q,
            iterations,
            max_delta,
            objective_initial,
            objective_final,
            converged: max_delta < params.tol,
            trace,
        }
    }
}
