use crate::error::{Error, Result};
use crate::model::SymmetricMatrix;

/// An undirected simple graph on vertices `0..p`, stored as sorted `(u, v)` pairs with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    order: usize,
    edges: Vec<(usize, usize)>,
}

impl EdgeSet {
    /// Validates and normalizes the pairs. Orientation of each pair is free on input.
    pub fn new(order: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges = Vec::new();
        for (a, b) in pairs {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {a}")));
            }
            if a >= order || b >= order {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) out of range for {order} vertices"
                )));
            }
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Self { order, edges })
    }

    pub fn empty(order: usize) -> Self {
        Self {
            order,
            edges: Vec::new(),
        }
    }

    pub fn complete(order: usize) -> Self {
        let edges = (0..order)
            .flat_map(|u| ((u + 1)..order).map(move |v| (u, v)))
            .collect();
        Self { order, edges }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    /// Number of incident edges per vertex.
    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut deg = vec![0; self.order];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.order];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// 0/1 adjacency matrix with a zero diagonal.
    pub fn adjacency_matrix(&self) -> SymmetricMatrix {
        let mut m = nalgebra::DMatrix::zeros(self.order, self.order);
        for &(u, v) in &self.edges {
            m[(u, v)] = 1.0;
            m[(v, u)] = 1.0;
        }
        SymmetricMatrix::new(m).expect("adjacency is symmetric and finite")
    }

    /// Replaces edge `old` by `new`, keeping the set sorted.
    pub(crate) fn swapped(&self, old: (usize, usize), new: (usize, usize)) -> Result<Self> {
        let pairs = self
            .edges
            .iter()
            .copied()
            .filter(|&e| e != (old.0.min(old.1), old.0.max(old.1)))
            .chain(std::iter::once(new));
        Self::new(self.order, pairs)
    }
}

/// Pairs `(u, v)`, `u < v`, whose entry magnitude strictly exceeds `threshold`.
pub fn edges_from_matrix(x: &SymmetricMatrix, threshold: f64) -> Result<EdgeSet> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be >= 0, got {threshold}"
        )));
    }
    let mut edges: Vec<(usize, usize)> = x
        .upper_entries()
        .filter(|&(_, _, v)| v.abs() > threshold)
        .map(|(i, j, _)| (i, j))
        .collect();
    edges.sort_unstable();
    Ok(EdgeSet {
        order: x.order(),
        edges,
    })
}

/// Default magnitude above which an estimated entry counts as an edge.
pub const DEFAULT_EDGE_THRESHOLD: f64 = 1e-6;
