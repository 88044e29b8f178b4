use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::EdgeSet;
use crate::synth::Rng;

/// Barabási-Albert preferential attachment. Starts from a clique on
/// `attach + 1` nodes; every later node links to `attach` distinct earlier
/// nodes drawn with probability proportional to their current degree.
pub fn ba_generate(p: usize, attach: usize, seed: u64) -> Result<EdgeSet> {
    if attach < 1 || attach >= p {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= attach < p, got {attach} and {p}"
        )));
    }
    let mut rng = Rng::new(seed);
    let mut edges = Vec::with_capacity(attach * p);
    // every endpoint of every edge, so a uniform pick is degree-proportional
    let mut endpoints = Vec::with_capacity(2 * attach * p);
    for v in 0..=attach {
        for u in 0..v {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    let mut chosen = Vec::with_capacity(attach);
    for t in (attach + 1)..p {
        chosen.clear();
        while chosen.len() < attach {
            let u = endpoints[rng.below(endpoints.len())];
            if !chosen.contains(&u) {
                chosen.push(u);
            }
        }
        for &u in &chosen {
            edges.push((u, t));
            endpoints.extend([u, t]);
        }
    }
    EdgeSet::new(p, edges)
}

/// `n_hubs` random centers joined to `hub_degree` random other nodes each,
/// plus `noise_edges` extra random pairs.
pub fn hub_generate(
    p: usize,
    n_hubs: usize,
    hub_degree: usize,
    noise_edges: usize,
    seed: u64,
) -> Result<EdgeSet> {
    let max_edges = p * p.saturating_sub(1) / 2;
    if n_hubs > p || hub_degree >= p.max(1) || n_hubs * hub_degree + noise_edges > max_edges {
        return Err(Error::InvalidArgument(format!(
            "{n_hubs} hubs of degree {hub_degree} plus {noise_edges} edges do not fit {p} nodes"
        )));
    }
    let mut rng = Rng::new(seed);
    let nodes: Vec<usize> = (0..p).collect();
    let mut set = BTreeSet::new();
    for c in rng.choose_distinct(&nodes, n_hubs) {
        let free: Vec<usize> = (0..p)
            .filter(|&u| u != c && !set.contains(&(u.min(c), u.max(c))))
            .collect();
        for u in rng.choose_distinct(&free, hub_degree) {
            set.insert((u.min(c), u.max(c)));
        }
    }
    let target = (set.len() + noise_edges).min(max_edges);
    while set.len() < target {
        let u = rng.below(p);
        let v = rng.below(p);
        if u != v {
            set.insert((u.min(v), u.max(v)));
        }
    }
    EdgeSet::new(p, set)
}
