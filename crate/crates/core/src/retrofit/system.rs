//! Dense matrix view of the retrofitting objective and an exact solver.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use super::{build_weights, feasibility, initial_rows, known_mask, DegreeMode, RetrofitWeights};
use crate::embedding::{squared_distance, EmbeddingSet};
use crate::error::{Error, Result};
use crate::ontology::{connected_components, ConceptGraph};

/// `A = diag(alpha)` and the symmetric edge matrix `B` with
/// `B_ij = -(beta_ij + beta_ji) / 2` off the diagonal and
/// `B_ii = sum_{j != i} |B_ij|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl SystemMatrices {
    pub fn from_weights(w: &RetrofitWeights) -> Self {
        let n = w.len();
        let a = DMatrix::from_diagonal(&DVector::from_column_slice(w.alphas()));
        let mut b = DMatrix::<f64>::zeros(n, n);
        for (i, j, beta) in w.directed() {
            b[(i, j)] -= 0.5 * beta;
            b[(j, i)] -= 0.5 * beta;
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| b[(i, j)].abs()).sum();
            b[(i, i)] = off;
        }
        SystemMatrices { a, b }
    }

    /// Hessian of `Phi` up to a factor 2: `A + 2B`. Its solution of
    /// `(A + 2B) Q = A Qhat` is the fixed point of the per-concept update.
    pub fn normal_matrix(&self) -> DMatrix<f64> {
        &self.a + &self.b * 2.0
    }

    pub fn b_is_symmetric(&self) -> bool {
        self.b == self.b.transpose()
    }

    /// `B_ii - sum_{j != i} |B_ij|` for each row.
    pub fn b_row_excess(&self) -> Vec<f64> {
        row_excess(&self.b)
    }

    /// Diagonal excess of `A + B` per row; non-negative for a weakly
    /// diagonally dominant matrix.
    pub fn a_plus_b_row_excess(&self) -> Vec<f64> {
        row_excess(&(&self.a + &self.b))
    }
}

fn row_excess(m: &DMatrix<f64>) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| {
            let off: f64 = (0..m.ncols()).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
            m[(i, i)].abs() - off
        })
        .collect()
}

/// `Phi(Q)` for row-major `q` and `q_hat`, summing edge terms over directed edges.
pub fn objective_value(q: &[Vec<f64>], q_hat: &[Vec<f64>], w: &RetrofitWeights) -> Result<f64> {
    if q.len() != w.len() || q_hat.len() != w.len() {
        return Err(Error::Validation(format!(
            "objective needs {} rows, got {} and {}",
            w.len(),
            q.len(),
            q_hat.len()
        )));
    }
    let dim = q.first().map_or(0, Vec::len);
    if q.iter().chain(q_hat).any(|r| r.len() != dim) {
        return Err(Error::Validation("rows of Q and Qhat must share one dimension".into()));
    }
    let mut phi = 0.0;
    for (i, (qi, hi)) in q.iter().zip(q_hat).enumerate() {
        let a = w.alpha(i);
        if a != 0.0 {
            phi += a * squared_distance(qi, hi);
        }
    }
    for (i, j, b) in w.directed() {
        phi += b * squared_distance(&q[i], &q[j]);
    }
    Ok(phi)
}

/// Exact minimiser of `Phi` via a dense Cholesky factorisation per component.
pub fn direct_solve(g: &ConceptGraph, initial: &EmbeddingSet, known: &BTreeSet<String>) -> Result<EmbeddingSet> {
    direct_solve_with(g, initial, known, DegreeMode::AllNeighbors)
}

pub fn direct_solve_with(
    g: &ConceptGraph,
    initial: &EmbeddingSet,
    known: &BTreeSet<String>,
    mode: DegreeMode,
) -> Result<EmbeddingSet> {
    let mask = known_mask(g, known)?;
    let report = feasibility(g, &mask);
    if !report.is_feasible() {
        return Err(report.into_error());
    }
    let weights = build_weights(g, &mask, mode);
    let coupling = weights.coupling();
    let targets = initial_rows(g, initial, &mask)?;
    let dim = initial.dim();

    let mut q = vec![vec![0.0; dim]; g.concept_count()];
    for members in connected_components(g).members() {
        let n = members.len();
        let local: std::collections::HashMap<usize, usize> =
            members.iter().enumerate().map(|(l, &gi)| (gi, l)).collect();
        let mut m = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DMatrix::<f64>::zeros(n, dim);
        for (l, &gi) in members.iter().enumerate() {
            let alpha = weights.alpha(gi);
            m[(l, l)] += alpha;
            for (k, t) in targets[gi].iter().enumerate() {
                rhs[(l, k)] = alpha * t;
            }
            for &(j, w) in &coupling[gi] {
                m[(l, l)] += w;
                m[(l, local[&j])] -= w;
            }
        }
        let chol = m.cholesky().ok_or_else(|| {
            Error::Singular(format!(
                "component containing `{}` is not positive definite although it holds a known concept",
                g.name(members[0])
            ))
        })?;
        let sol = chol.solve(&rhs);
        for (l, &gi) in members.iter().enumerate() {
            q[gi] = sol.row(l).iter().copied().collect();
        }
    }

    let mut out = EmbeddingSet::new(dim);
    for (i, row) in q.into_iter().enumerate() {
        out.insert_with_flag(g.name(i), row, mask[i])?;
    }
    Ok(out)
}
