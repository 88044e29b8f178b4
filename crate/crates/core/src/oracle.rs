//! Exhaustive references for small instances. They enumerate instead of
//! optimizing and refuse inputs beyond a fixed size.

use crate::error::{Error, Result};
use crate::model::{EdgeSet, SymmetricMatrix};
use crate::partition::{ordered_objective, ClusterPartition};
use crate::prior::{dynamic_prior, static_prior, PenaltySchedule};
use crate::ystep::{
    fixed_point_check, penalties_for_ranking, solve_symmetric, SymmetrySolverState,
};

pub const MAX_PARTITION_LEN: usize = 10;
pub const MAX_PRIOR_ORDER: usize = 5;
pub const MAX_RANKING_ORDER: usize = 4;

/// Best consecutive-block partition of `1..m` for the ranked row problem.
///
/// Every partition gets block values `max(0, mean(b - g))`; those with
/// non-increasing values are the candidates. The winner maximizes `Σ y²`,
/// and must also minimize the direct objective, else `OracleMismatch`.
pub fn brute_partition(b: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    let m = b.len();
    if g.len() != m {
        return Err(Error::Dimension(format!(
            "{m} magnitudes but {} penalties",
            g.len()
        )));
    }
    if m > MAX_PARTITION_LEN {
        return Err(Error::TooLarge(format!(
            "{m} elements, at most {MAX_PARTITION_LEN}"
        )));
    }
    if let Some(k) = (1..m).find(|&k| b[k] > b[k - 1]) {
        return Err(Error::NotMonotone(k));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let mut best_sq: Option<(f64, Vec<f64>)> = None;
    let mut best_obj: Option<(f64, Vec<f64>)> = None;
    let mut y = vec![0.0; m];
    // bit k of `cuts` set means a block boundary after position k
    for cuts in 0u32..(1 << (m - 1)) {
        let mut start = 0;
        for k in 0..m {
            if k == m - 1 || cuts & (1 << k) != 0 {
                let mut sum = 0.0;
                for t in start..=k {
                    sum += b[t] - g[t];
                }
                let v = (sum / (k + 1 - start) as f64).max(0.0);
                y[start..=k].fill(v);
                start = k + 1;
            }
        }
        if y.windows(2).any(|w| w[1] > w[0]) {
            continue;
        }
        let sq: f64 = y.iter().map(|v| v * v).sum();
        let obj = ordered_objective(&y, b, g);
        if best_sq.as_ref().is_none_or(|(s, _)| sq > *s) {
            best_sq = Some((sq, y.clone()));
        }
        if best_obj.as_ref().is_none_or(|(o, _)| obj < *o) {
            best_obj = Some((obj, y.clone()));
        }
    }
    // the all-singletons partition is feasible whenever b - g is ordered,
    // and the single block always is, so both winners exist
    let (_, y_sq) = best_sq.expect("single block is always feasible");
    let (obj_min, _) = best_obj.expect("single block is always feasible");
    let obj_sq = ordered_objective(&y_sq, b, g);
    if obj_sq > obj_min + 1e-12 * (1.0 + obj_min.abs()) {
        return Err(Error::OracleMismatch(format!(
            "largest Σy² has objective {obj_sq}, smallest objective is {obj_min}"
        )));
    }
    Ok(y_sq)
}

/// `Σ_{i≤s} (x_i + δ_i)² + Σ_{i>s} (x_i - δ_i)² - Σ x_i²` with `s` counted
/// from 1. Requires `x` non-negative and non-increasing, `δ` non-negative and
/// `Σ_{i≤s} δ_i >= Σ_{i>s} δ_i > 0`.
pub fn lemma3_gap(x: &[f64], delta: &[f64], s: usize) -> Result<f64> {
    let n = x.len();
    if delta.len() != n || s == 0 || s >= n {
        return Err(Error::Dimension(format!(
            "need 1 <= s < n = {n} and equal lengths"
        )));
    }
    if x.iter().any(|&v| v < 0.0) || x.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument(
            "x must be non-negative and non-increasing".into(),
        ));
    }
    let head: f64 = delta[..s].iter().sum();
    let tail: f64 = delta[s..].iter().sum();
    if delta.iter().any(|&d| d < 0.0) || !(tail > 0.0) || head < tail {
        return Err(Error::InvalidArgument(
            "shifts violate the head/tail balance".into(),
        ));
    }
    let mut gap = 0.0;
    for i in 0..n {
        let shifted = if i < s {
            x[i] + delta[i]
        } else {
            x[i] - delta[i]
        };
        gap += shifted * shifted - x[i] * x[i];
    }
    Ok(gap)
}

/// Largest violation of the two block properties of an ordered partition,
/// each relative to `1 + |mean|`:
///
/// 1. inside a block, every prefix mean is at most the matching suffix mean;
/// 2. every block mean exceeds the mean of any run starting right after it.
pub fn partition_property_violations(part: &ClusterPartition) -> (f64, f64) {
    let m = part.len();
    let mut p1: f64 = f64::NEG_INFINITY;
    for block in &part.blocks {
        for s in (block.start + 1)..block.end() {
            let head = part.range_mean(block.start, s);
            let tail = part.range_mean(s, block.end());
            p1 = p1.max((head - tail) / (1.0 + tail.abs()));
        }
    }

    // Property 2 asks for the largest slope from (e, P[e]) to any later
    // prefix-sum point, answered on the upper hull of the points right of e.
    let prefix = &part.prefix_sums;
    let slope = |a: usize, b: usize| (prefix[b] - prefix[a]) / (b - a) as f64;
    let mut is_end = vec![false; m + 1];
    let mut mean_ending = vec![0.0; m + 1];
    for block in &part.blocks {
        is_end[block.end()] = true;
        mean_ending[block.end()] = block.raw_mean;
    }
    let mut p2: f64 = f64::NEG_INFINITY;
    // hull[0] is the rightmost point, the last entry the leftmost
    let mut hull: Vec<usize> = Vec::new();
    for e in (0..m).rev() {
        let q = e + 1;
        while hull.len() >= 2 {
            let a = hull[hull.len() - 1];
            let b = hull[hull.len() - 2];
            if slope(q, a) <= slope(a, b) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(q);
        if e == 0 || !is_end[e] {
            continue;
        }
        // walk the hull left to right: slopes from e rise then fall
        let n = hull.len();
        let at = |i: usize| hull[n - 1 - i];
        let (mut lo, mut hi) = (0, n - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if slope(at(mid), at(mid + 1)) > slope(e, at(mid)) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let best = slope(e, at(lo));
        let own = mean_ending[e];
        p2 = p2.max((best - own) / (1.0 + own.abs()));
    }
    (p1, p2)
}

/// Summary of [`brute_degree_prior`].
#[derive(Debug, Clone, PartialEq)]
pub struct DegreePriorReport {
    pub matching_sets: usize,
    pub other_sets: usize,
    pub matching_min: f64,
    pub matching_max: f64,
    /// `None` when every edge set of the size matches.
    pub other_min: Option<f64>,
    pub other_max: Option<f64>,
}

fn pairs(p: usize) -> Vec<(usize, usize)> {
    (0..p)
        .flat_map(|u| ((u + 1)..p).map(move |v| (u, v)))
        .collect()
}

/// Every edge set with `edge_count` edges on `p` nodes.
pub fn edge_sets_of_size(p: usize, edge_count: usize) -> Result<Vec<EdgeSet>> {
    if p > MAX_PRIOR_ORDER {
        return Err(Error::TooLarge(format!(
            "{p} nodes, at most {MAX_PRIOR_ORDER}"
        )));
    }
    let all = pairs(p);
    let mut out = Vec::new();
    for mask in 0u32..(1 << all.len()) {
        if mask.count_ones() as usize == edge_count {
            let chosen = all.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0);
            out.push(EdgeSet::new(p, chosen.map(|(_, &e)| e))?);
        }
    }
    Ok(out)
}

/// Scores every edge set of the given size with the static prior and checks
/// that sets with exactly the reference degrees never score above the rest.
pub fn brute_degree_prior(
    p: usize,
    edge_count: usize,
    reference_degrees: &[usize],
    rank_weights: &[f64],
) -> Result<DegreePriorReport> {
    if reference_degrees.len() != p {
        return Err(Error::Dimension(format!(
            "{} reference degrees for {p} nodes",
            reference_degrees.len()
        )));
    }
    let mut matching: Vec<f64> = Vec::new();
    let mut other: Vec<f64> = Vec::new();
    for set in edge_sets_of_size(p, edge_count)? {
        let score = static_prior(&set.adjacency_matrix(), reference_degrees, rank_weights)?;
        if set.degree_sequence() == reference_degrees {
            matching.push(score);
        } else {
            other.push(score);
        }
    }
    if matching.is_empty() {
        return Err(Error::NoMatchingEdgeSet);
    }
    let lo = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let report = DegreePriorReport {
        matching_sets: matching.len(),
        other_sets: other.len(),
        matching_min: lo(&matching),
        matching_max: hi(&matching),
        other_min: (!other.is_empty()).then(|| lo(&other)),
        other_max: (!other.is_empty()).then(|| hi(&other)),
    };
    if let Some(om) = report.other_min {
        if report.matching_max > om + 1e-12 * (1.0 + om.abs()) {
            return Err(Error::OracleMismatch(format!(
                "a matching set scores {} above a non-matching set at {om}",
                report.matching_max
            )));
        }
    }
    Ok(report)
}

/// Degree sequences of `edge_count`-edge graphs on `p` nodes in which every
/// node has at least one edge, deduplicated and sorted.
pub fn realizable_degree_sequences(p: usize, edge_count: usize) -> Result<Vec<Vec<usize>>> {
    let mut seqs: Vec<Vec<usize>> = edge_sets_of_size(p, edge_count)?
        .iter()
        .map(EdgeSet::degree_sequence)
        .filter(|d| d.iter().all(|&x| x >= 1))
        .collect();
    seqs.sort();
    seqs.dedup();
    Ok(seqs)
}

/// Fixed-ranking solution for one node permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingCandidate {
    pub ranking: Vec<usize>,
    pub y: SymmetricMatrix,
    /// Whether `y` reproduces itself under its own Lovász ranking.
    pub is_fixed_point: bool,
    /// `½‖Y - A‖²_F + λ Ω(Y)` with the dynamic prior.
    pub objective: f64,
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n)
            .rev()
            .find(|&j| cur[j] > cur[i - 1])
            .expect("pivot has a successor");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// Solves the symmetric problem under every node ranking and reports which
/// solutions are fixed points of their own Lovász ranking.
pub fn brute_ranking_fixed_points(
    a: &SymmetricMatrix,
    lambda: f64,
    sched: &PenaltySchedule,
) -> Result<Vec<RankingCandidate>> {
    let p = a.order();
    if p > MAX_RANKING_ORDER {
        return Err(Error::TooLarge(format!(
            "{p} nodes, at most {MAX_RANKING_ORDER}"
        )));
    }
    if sched.order() != p {
        return Err(Error::Dimension(
            "schedule and matrix differ in order".into(),
        ));
    }
    let mut out = Vec::new();
    for ranking in permutations(p) {
        let pen = penalties_for_ranking(sched, lambda, &ranking);
        let y = solve_symmetric(a, &pen, &mut SymmetrySolverState::new(p))?.y;
        let objective = 0.5 * (y.as_matrix() - a.as_matrix()).norm_squared()
            + lambda * dynamic_prior(&y, sched)?;
        let is_fixed_point = fixed_point_check(&y, a, lambda, sched)?;
        out.push(RankingCandidate {
            ranking,
            y,
            is_fixed_point,
            objective,
        });
    }
    Ok(out)
}
