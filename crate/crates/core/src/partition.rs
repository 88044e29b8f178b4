//! Exact proximal step for one row under rank-dependent weights.
//!
//! After ranking a row by magnitude, the subproblem becomes
//!
//! ```text
//! minimize  ½ Σ_k (y_k - b_k)² + Σ_k g_k y_k   over  y_1 ≥ y_2 ≥ … ≥ y_m ≥ 0
//! ```
//!
//! with `b` the sorted magnitudes. Its solution is a partition of `1..m` into
//! consecutive blocks, each holding the clamped mean of `b - g` over the block.
//! [`ordered_partition`] builds that partition left to right: element `t`
//! enters as its own block, then the suffix of blocks that violate the strict
//! decrease of block means is located by binary search and pooled into one
//! block. Means are compared unclamped; clamping at zero happens only when the
//! values are read out, so every raw-negative suffix block reports zero.

use crate::error::{Error, Result};
use crate::model::RankedRow;

/// A run of consecutive ranked positions sharing one value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub start: usize,
    pub count: usize,
    /// Unclamped mean of `b - g` over the block.
    pub raw_mean: f64,
}

impl Block {
    pub fn end(&self) -> usize {
        self.start + self.count
    }

    pub fn value(&self) -> f64 {
        self.raw_mean.max(0.0)
    }
}

/// Block structure of an ordered solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPartition {
    pub blocks: Vec<Block>,
    /// `prefix_sums[t] = Σ_{k<t} (b_k - g_k)`, length `m + 1`.
    pub prefix_sums: Vec<f64>,
}

impl ClusterPartition {
    /// Number of processed elements.
    pub fn len(&self) -> usize {
        self.prefix_sums.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mean of `b - g` over positions `start..end`.
    pub fn range_mean(&self, start: usize, end: usize) -> f64 {
        (self.prefix_sums[end] - self.prefix_sums[start]) / (end - start) as f64
    }

    /// The clamped solution, one value per ranked position.
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for block in &self.blocks {
            out.extend(std::iter::repeat_n(block.value(), block.count));
        }
        out
    }
}

fn validate(b: &[f64], g: &[f64]) -> Result<()> {
    if b.len() != g.len() {
        return Err(Error::Dimension(format!(
            "{} magnitudes but {} penalties",
            b.len(),
            g.len()
        )));
    }
    for (k, (&bk, &gk)) in b.iter().zip(g).enumerate() {
        if !bk.is_finite() || bk < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "magnitude {bk} at {k} is not finite and >= 0"
            )));
        }
        if !gk.is_finite() || gk < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "penalty {gk} at {k} is not finite and >= 0"
            )));
        }
        if k > 0 && bk > b[k - 1] {
            return Err(Error::NotMonotone(k));
        }
    }
    Ok(())
}

fn prefix_sums(b: &[f64], g: &[f64]) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(b.len() + 1);
    let mut acc = 0.0;
    prefix.push(acc);
    for (bk, gk) in b.iter().zip(g) {
        acc += bk - gk;
        prefix.push(acc);
    }
    prefix
}

/// Mean of `b - g` over `start..=t`; a singleton is read directly.
#[inline]
fn suffix_mean(prefix: &[f64], b: &[f64], g: &[f64], start: usize, t: usize) -> f64 {
    if start == t {
        b[t] - g[t]
    } else {
        (prefix[t + 1] - prefix[start]) / (t + 1 - start) as f64
    }
}

/// Optimal partition of the ranked row, built with a binary search per element.
pub fn ordered_partition(b: &[f64], g: &[f64]) -> Result<ClusterPartition> {
    validate(b, g)?;
    let prefix = prefix_sums(b, g);
    let mut blocks: Vec<Block> = Vec::new();
    for t in 0..b.len() {
        let n = blocks.len();
        let start_of = |k: usize| if k < n { blocks[k].start } else { t };
        // keep(k): block k-1 stays strictly above the pool of blocks k.. plus t.
        // keep(0) holds vacuously and keep is downward closed, so the largest
        // k with keep(k) is found by bisection.
        let keep = |k: usize| {
            k == 0 || blocks[k - 1].raw_mean > suffix_mean(&prefix, b, g, start_of(k), t)
        };
        let (mut lo, mut hi) = (0usize, n);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if keep(mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let start = start_of(lo);
        let raw_mean = suffix_mean(&prefix, b, g, start, t);
        blocks.truncate(lo);
        blocks.push(Block {
            start,
            count: t + 1 - start,
            raw_mean,
        });
    }
    Ok(ClusterPartition {
        blocks,
        prefix_sums: prefix,
    })
}

/// Same partition built by sequential pool-adjacent-violators merging.
pub fn ordered_partition_sequential(b: &[f64], g: &[f64]) -> Result<ClusterPartition> {
    validate(b, g)?;
    let prefix = prefix_sums(b, g);
    let mut blocks: Vec<Block> = Vec::new();
    for t in 0..b.len() {
        let mut start = t;
        let mut mean = suffix_mean(&prefix, b, g, t, t);
        while let Some(last) = blocks.last() {
            if last.raw_mean > mean {
                break;
            }
            start = last.start;
            blocks.pop();
            mean = suffix_mean(&prefix, b, g, start, t);
        }
        blocks.push(Block {
            start,
            count: t + 1 - start,
            raw_mean: mean,
        });
    }
    Ok(ClusterPartition {
        blocks,
        prefix_sums: prefix,
    })
}

/// Minimizer of `½‖y - b‖² + Σ g_k y_k` over non-increasing non-negative `y`.
pub fn solve_ordered(b: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    Ok(ordered_partition(b, g)?.values())
}

/// `½ Σ (y_k - b_k)² + Σ g_k y_k` for ranked vectors.
pub fn ordered_objective(y: &[f64], b: &[f64], g: &[f64]) -> f64 {
    y.iter()
        .zip(b)
        .zip(g)
        .map(|((yk, bk), gk)| 0.5 * (yk - bk) * (yk - bk) + gk * yk)
        .sum()
}

/// Solution of one row subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSolution {
    /// Full row in column order; the diagonal is copied from the input.
    pub values: Vec<f64>,
    pub clusters: ClusterPartition,
    /// `½‖y - b‖² + Σ_k |y|_(k) penalty_k` over the off-diagonal entries.
    pub objective: f64,
}

/// Solves `min ½‖y - row‖² + Σ_k |y|_(k) penalties_k` over the off-diagonal
/// entries of `row`, where `|y|_(k)` is the `k`-th largest magnitude.
pub fn solve_row(row: &[f64], diag: usize, penalties: &[f64]) -> Result<RowSolution> {
    if row.len() != penalties.len() + 1 {
        return Err(Error::Dimension(format!(
            "row of length {} needs {} penalties, got {}",
            row.len(),
            row.len().saturating_sub(1),
            penalties.len()
        )));
    }
    let ranked = RankedRow::from_slice(row, diag)?;
    let clusters = ordered_partition(&ranked.magnitudes, penalties)?;
    let y = clusters.values();
    let objective = ordered_objective(&y, &ranked.magnitudes, penalties);
    let values = ranked.scatter(&y, row[diag]);
    Ok(RowSolution {
        values,
        clusters,
        objective,
    })
}

/// Default tolerance for [`is_stable`].
pub const STABILITY_TOL: f64 = 1e-9;

/// Whether ranked `y` is a stable solution for data `b` and penalties `g`:
/// `y` is non-increasing and non-negative, every maximal run of equal
/// positive values equals the mean of `b - g` over the run, and the run of
/// zeros has a non-positive mean.
pub fn is_stable(y: &[f64], b: &[f64], g: &[f64]) -> bool {
    is_stable_with_tol(y, b, g, STABILITY_TOL)
}

pub fn is_stable_with_tol(y: &[f64], b: &[f64], g: &[f64], tol: f64) -> bool {
    if y.len() != b.len() || y.len() != g.len() {
        return false;
    }
    if y.iter().any(|&v| v < 0.0) || y.windows(2).any(|w| w[1] > w[0]) {
        return false;
    }
    let mut start = 0;
    while start < y.len() {
        let value = y[start];
        let mut end = start + 1;
        while end < y.len() && y[end] == value {
            end += 1;
        }
        let mean = (start..end).map(|k| b[k] - g[k]).sum::<f64>() / (end - start) as f64;
        let ok = if value == 0.0 {
            mean <= tol * (1.0 + mean.abs())
        } else {
            (value - mean).abs() <= tol * (1.0 + mean.abs())
        };
        if !ok {
            return false;
        }
        start = end;
    }
    true
}

/// `|objective - ½(Σb² - Σy²)|`; zero for any stable solution.
pub fn lemma2_identity(objective: f64, y: &[f64], b: &[f64]) -> f64 {
    let sb: f64 = b.iter().map(|v| v * v).sum();
    let sy: f64 = y.iter().map(|v| v * v).sum();
    (objective - 0.5 * (sb - sy)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_element_examples() {
        assert_eq!(
            solve_ordered(&[3.0, 1.0], &[1.0, 1.0]).unwrap(),
            vec![2.0, 0.0]
        );
        let y = solve_ordered(&[2.0, 1.0], &[1.5, 0.1]).unwrap();
        assert!((y[0] - 0.7).abs() < 1e-15 && (y[1] - 0.7).abs() < 1e-15);
        assert_eq!(solve_ordered(&[1.0], &[2.5]).unwrap(), vec![0.0]);
    }

    #[test]
    fn zero_penalty_returns_input() {
        let b = [4.0, 2.5, 2.5, 1.0, 0.0];
        assert_eq!(solve_ordered(&b, &[0.0; 5]).unwrap(), b.to_vec());
    }

    #[test]
    fn increasing_input_rejected() {
        assert!(matches!(
            solve_ordered(&[1.0, 2.0], &[0.0, 0.0]),
            Err(Error::NotMonotone(1))
        ));
        assert!(solve_ordered(&[1.0], &[0.0, 0.0]).is_err());
        assert!(solve_ordered(&[1.0], &[-1.0]).is_err());
    }

    #[test]
    fn empty_input() {
        assert!(solve_ordered(&[], &[]).unwrap().is_empty());
    }

    #[test]
    fn stability_examples() {
        assert!(is_stable(&[2.0, 0.0], &[3.0, 1.0], &[1.0, 1.0]));
        assert!(!is_stable(&[3.0, 1.0], &[3.0, 1.0], &[1.0, 1.0]));
    }

    #[test]
    fn lemma2_by_hand() {
        let obj = ordered_objective(&[2.0, 0.0], &[3.0, 1.0], &[1.0, 1.0]);
        assert_eq!(obj, 3.0);
        assert_eq!(lemma2_identity(obj, &[2.0, 0.0], &[3.0, 1.0]), 0.0);
        assert_eq!(lemma2_identity(0.0, &[0.0; 3], &[0.0; 3]), 0.0);
    }

    #[test]
    fn uniform_penalty_is_soft_threshold() {
        let sol = solve_row(&[5.0, 0.3, -0.3], 0, &[0.1, 0.1]).unwrap();
        assert_eq!(sol.values[0], 5.0);
        assert!((sol.values[1] - 0.2).abs() < 1e-15);
        assert!((sol.values[2] + 0.2).abs() < 1e-15);
        let zero = solve_row(&[0.0, 0.0, 1.0, 0.0], 2, &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(zero.values, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn negative_blocks_form_one_zero_cluster() {
        // raw means 2, -0.5, -1 stay separate blocks but read out as zeros
        let b = [3.0, 1.0, 1.0];
        let g = [1.0, 1.5, 2.0];
        let part = ordered_partition(&b, &g).unwrap();
        assert_eq!(part.blocks.len(), 3);
        assert_eq!(part.values(), vec![2.0, 0.0, 0.0]);
        assert!(is_stable(&part.values(), &b, &g));
    }

    #[test]
    fn row_dimension_mismatch() {
        assert!(solve_row(&[1.0, 2.0, 3.0], 0, &[1.0]).is_err());
    }
}
