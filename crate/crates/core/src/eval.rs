//! Scoring of estimated networks against a known graph.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::model::{EdgeSet, SymmetricMatrix};

/// Off-diagonal pairs with `|x| > threshold`, largest magnitude first and
/// `(u, v)` ascending among ties.
pub fn ranked_edges(x: &SymmetricMatrix, threshold: f64) -> Vec<(usize, usize)> {
    let mut scored: Vec<(usize, usize, f64)> = x
        .upper_entries()
        .filter(|&(_, _, v)| v.abs() > threshold)
        .map(|(u, v, w)| (u, v, w.abs()))
        .collect();
    scored.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    scored.into_iter().map(|(u, v, _)| (u, v)).collect()
}

/// For each `k`, how many of the first `k` predictions are edges of `truth`.
/// A `k` beyond the prediction count is clipped to it.
pub fn evaluate_predictions(
    predicted: &[(usize, usize)],
    truth: &EdgeSet,
    ks: &[usize],
) -> Result<Vec<(usize, usize)>> {
    if ks.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("ks must be sorted".into()));
    }
    let mut hits = Vec::with_capacity(predicted.len() + 1);
    hits.push(0);
    for &(u, v) in predicted {
        let last = *hits.last().unwrap();
        hits.push(last + usize::from(truth.contains(u, v)));
    }
    let mut warned = false;
    Ok(ks
        .iter()
        .map(|&k| {
            if k > predicted.len() && !warned {
                log::warn!(
                    "k = {k} exceeds the {} predictions; clipping",
                    predicted.len()
                );
                warned = true;
            }
            let k = k.min(predicted.len());
            (k, hits[k])
        })
        .collect())
}

/// Edges shared by the two graphs.
pub fn correct_edges(predicted: &EdgeSet, truth: &EdgeSet) -> usize {
    let t: HashSet<&(usize, usize)> = truth.edges().iter().collect();
    predicted.edges().iter().filter(|e| t.contains(e)).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeHistogram {
    /// `(ln d, ln #{v : d_v = d})` for each occurring degree `d >= 1`, by `d`.
    pub pairs: Vec<(f64, f64)>,
    pub zero_degree: usize,
}

pub fn degree_histogram(edges: &EdgeSet) -> DegreeHistogram {
    let degrees = edges.degree_sequence();
    let max = degrees.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0usize; max + 1];
    for d in degrees {
        counts[d] += 1;
    }
    let pairs = counts
        .iter()
        .enumerate()
        .skip(1)
        .filter(|&(_, &c)| c > 0)
        .map(|(d, &c)| ((d as f64).ln(), (c as f64).ln()))
        .collect();
    DegreeHistogram {
        pairs,
        zero_degree: counts.first().copied().unwrap_or(0),
    }
}

/// Least-squares slope of `y` on `x`; `None` with fewer than two distinct `x`.
pub fn regression_slope(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return None;
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn max_degree(edges: &EdgeSet) -> usize {
    edges.degree_sequence().into_iter().max().unwrap_or(0)
}
