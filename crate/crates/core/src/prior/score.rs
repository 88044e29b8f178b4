use crate::error::{Error, Result};
use crate::model::{EdgeSet, MatrixRows, RankedRow, SymmetricMatrix};
use crate::prior::PenaltySchedule;

/// `Σ_u magnitudes[u] * weights[u] + offset`.
pub fn lovasz_node_score(row: &RankedRow, weights: &[f64], offset: f64) -> f64 {
    row.weighted_sum(weights) + offset
}

/// Score of every node: its ranked row weighted by `weights`, plus `offsets[v]`.
pub fn node_scores<M: MatrixRows>(x: &M, weights: &[f64], offsets: &[f64]) -> Vec<f64> {
    (0..x.order())
        .map(|v| {
            let row = RankedRow::from_slice(&x.row_values(v), v).expect("index in range");
            lovasz_node_score(&row, weights, offsets[v])
        })
        .collect()
}

/// Vertices ordered by descending score; equal scores keep ascending vertex order.
pub fn ranking_from_scores(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Permutation listing vertices from highest to lowest score.
pub fn node_ranking<M: MatrixRows>(x: &M, weights: &[f64], offsets: &[f64]) -> Result<Vec<usize>> {
    let p = x.order();
    if weights.len() + 1 != p || offsets.len() != p {
        return Err(Error::Dimension(format!(
            "ranking a {p}-node matrix needs {} weights and {p} offsets, got {} and {}",
            p - 1,
            weights.len(),
            offsets.len()
        )));
    }
    Ok(ranking_from_scores(&node_scores(x, weights, offsets)))
}

/// Inverse permutation: `positions(r)[v]` is the rank position of vertex `v`.
pub fn positions(ranking: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; ranking.len()];
    for (k, &v) in ranking.iter().enumerate() {
        pos[v] = k;
    }
    pos
}

/// The dynamic node-specific prior: every node is penalized by `g` at its
/// position in the Lovász ranking of `x`, times its `H`-weighted ranked row.
pub fn dynamic_prior(x: &SymmetricMatrix, sched: &PenaltySchedule) -> Result<f64> {
    let p = x.order();
    if sched.order() != p {
        return Err(Error::Dimension(format!(
            "schedule for {} nodes applied to a {p}-node matrix",
            sched.order()
        )));
    }
    let ranking = node_ranking(x, sched.lovasz_weights(), &vec![0.0; p])?;
    let g = sched.node_penalties();
    Ok(ranking
        .iter()
        .enumerate()
        .map(|(pos, &v)| {
            let row = RankedRow::from_slice(x.row(v), v).expect("index in range");
            g[pos] * row.weighted_sum(sched.rank_weights())
        })
        .sum())
}

/// The static node-specific prior `Σ_u (H ∘ X_u) / H_{d_u}` for fixed degrees.
pub fn static_prior(x: &SymmetricMatrix, degrees: &[usize], rank_weights: &[f64]) -> Result<f64> {
    let p = x.order();
    if degrees.len() != p || rank_weights.len() + 1 != p {
        return Err(Error::Dimension(
            "degrees and weights must match the matrix order".into(),
        ));
    }
    if let Some(d) = degrees.iter().find(|&&d| d < 1 || d > p - 1) {
        return Err(Error::InvalidArgument(format!(
            "reference degree {d} outside [1, {}]",
            p - 1
        )));
    }
    Ok((0..p)
        .map(|u| {
            let row = RankedRow::from_slice(x.row(u), u).expect("index in range");
            row.weighted_sum(rank_weights) / rank_weights[degrees[u] - 1]
        })
        .sum())
}

/// `Σ_v ln(d_v + 1)`.
pub fn log_degree_score(edges: &EdgeSet) -> f64 {
    edges
        .degree_sequence()
        .iter()
        .map(|&d| ((d + 1) as f64).ln())
        .sum()
}

/// An edge move `(x, from) → (x, to)` between two vertices of equal degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Rewiring {
    pub edges: EdgeSet,
    pub from: usize,
    pub to: usize,
    pub pivot: usize,
    /// Shared degree of `from` and `to` before the move.
    pub degree: usize,
}

impl Rewiring {
    /// `2 ln(a + 1) - ln a - ln(a + 2)`, the strict drop in the log-degree score.
    pub fn expected_drop(&self) -> f64 {
        let a = self.degree as f64;
        2.0 * (a + 1.0).ln() - a.ln() - (a + 2.0).ln()
    }
}

/// Moves edge `(pivot, from)` to `(pivot, to)`. Requires `deg(from) == deg(to) >= 1`,
/// `pivot` adjacent to `from` but not to `to`, and `pivot != to`.
pub fn rewire_at(edges: &EdgeSet, from: usize, to: usize, pivot: usize) -> Result<Rewiring> {
    let p = edges.order();
    if from >= p || to >= p || pivot >= p || from == to || pivot == to || pivot == from {
        return Err(Error::NoRewiring);
    }
    let deg = edges.degree_sequence();
    if deg[from] != deg[to] || deg[from] == 0 {
        return Err(Error::NoRewiring);
    }
    if !edges.contains(pivot, from) || edges.contains(pivot, to) {
        return Err(Error::NoRewiring);
    }
    Ok(Rewiring {
        edges: edges.swapped((pivot, from), (pivot, to))?,
        from,
        to,
        pivot,
        degree: deg[from],
    })
}

/// First available equal-degree rewiring in lexicographic `(from, to, pivot)` order.
pub fn rewire_equal_degree(edges: &EdgeSet) -> Result<Rewiring> {
    let deg = edges.degree_sequence();
    let adj = edges.neighbors();
    let p = edges.order();
    for from in 0..p {
        if deg[from] == 0 {
            continue;
        }
        for to in (0..p).filter(|&t| t != from && deg[t] == deg[from]) {
            if let Some(&pivot) = adj[from]
                .iter()
                .find(|&&x| x != to && adj[to].binary_search(&x).is_err())
            {
                return rewire_at(edges, from, to, pivot);
            }
        }
    }
    Err(Error::NoRewiring)
}
