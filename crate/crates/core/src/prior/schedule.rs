use crate::error::{Error, Result};

/// Inputs of [`PenaltySchedule::build_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleParams {
    /// Power-law exponent of the assumed degree distribution.
    pub gamma: f64,
    /// Exponent in `H_v = ln(v + 1)^alpha`.
    pub alpha: f64,
    /// Desired number of edges in the estimate.
    pub target_edges: usize,
    /// Total expected degree is `degree_scale * target_edges`.
    pub degree_scale: f64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        Self {
            gamma: 2.5,
            alpha: 1.0,
            target_edges: 1,
            degree_scale: 2.0,
        }
    }
}

/// Penalty sequences for a graph on `p` vertices.
///
/// Index conventions are zero-based: `rank_weights[k]` is the weight of the
/// `(k+1)`-th largest entry of a row, `expected_degrees[i]` and
/// `node_penalties[i]` belong to the node at ranked position `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySchedule {
    p: usize,
    alpha: f64,
    gamma: Option<f64>,
    rank_weights: Vec<f64>,
    lovasz_weights: Vec<f64>,
    expected_degrees: Vec<usize>,
    node_penalties: Vec<f64>,
}

/// `ln(v + 1)^alpha` for `v = 1..=m`.
pub fn rank_weight_sequence(m: usize, alpha: f64) -> Vec<f64> {
    (1..=m).map(|v| ((v + 1) as f64).ln().powf(alpha)).collect()
}

/// `ln(u + 1) - ln(u)` for `u = 1..=m`, the increments of `ln(d + 1)`.
pub fn lovasz_weight_sequence(m: usize) -> Vec<f64> {
    (1..=m).map(|u| (1.0 / u as f64).ln_1p()).collect()
}

/// Degrees of `p` ranked nodes read off the descending quantiles of
/// `P(d) ∝ d^-gamma` on `d = 1..p-1`. Node `i` receives the smallest `d`
/// whose upper tail `P(D > d)` is at most `(i + 1/2) / p`.
pub fn power_law_quantiles(p: usize, gamma: f64) -> Vec<usize> {
    let dmax = p - 1;
    let weights: Vec<f64> = (1..=dmax).map(|d| (d as f64).powf(-gamma)).collect();
    let total: f64 = weights.iter().sum();
    // tail[d] = P(D > d), d = 0..=dmax
    let mut tail = vec![0.0; dmax + 1];
    let mut acc = 0.0;
    for d in (1..=dmax).rev() {
        tail[d] = acc / total;
        acc += weights[d - 1];
    }
    tail[0] = 1.0;

    let mut d = dmax;
    (0..p)
        .map(|i| {
            let q = (i as f64 + 0.5) / p as f64;
            while d > 1 && tail[d - 1] <= q {
                d -= 1;
            }
            d
        })
        .collect()
}

/// Rounds `quotas` to integers summing to `round(Σ quotas)` by the largest
/// remainder rule; equal remainders favor the lower index.
fn apportion(quotas: &[f64]) -> Vec<usize> {
    let total = quotas.iter().sum::<f64>().round() as usize;
    let mut out: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra)
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        out[i] += 1;
    }
    out
}

impl PenaltySchedule {
    /// Schedule with the default degree scale of two endpoints per edge.
    pub fn build(p: usize, gamma: f64, alpha: f64, target_edges: usize) -> Result<Self> {
        Self::build_with(
            p,
            &ScheduleParams {
                gamma,
                alpha,
                target_edges,
                ..Default::default()
            },
        )
    }

    pub fn build_with(p: usize, params: &ScheduleParams) -> Result<Self> {
        if p < 3 {
            return Err(Error::InvalidArgument(format!(
                "schedule needs p >= 3, got {p}"
            )));
        }
        if !(params.gamma > 1.0) || !params.gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "gamma must be finite and > 1, got {}",
                params.gamma
            )));
        }
        let max_edges = p * (p - 1) / 2;
        if params.target_edges < 1 || params.target_edges > max_edges {
            return Err(Error::InvalidArgument(format!(
                "target edge count {} outside [1, {max_edges}]",
                params.target_edges
            )));
        }
        if !(params.degree_scale > 0.0) {
            return Err(Error::InvalidArgument(
                "degree scale must be positive".into(),
            ));
        }
        let shape = power_law_quantiles(p, params.gamma);
        let shape_total: usize = shape.iter().sum();
        let total = params.degree_scale * params.target_edges as f64;
        let quotas: Vec<f64> = shape
            .iter()
            .map(|&s| total * s as f64 / shape_total as f64)
            .collect();
        let tau = apportion(&quotas)
            .into_iter()
            .map(|t| t.clamp(1, p - 1))
            .collect();
        let mut sched = Self::from_expected_degrees(tau, params.alpha)?;
        sched.gamma = Some(params.gamma);
        Ok(sched)
    }

    /// Schedule from explicit per-position expected degrees.
    pub fn from_expected_degrees(tau: Vec<usize>, alpha: f64) -> Result<Self> {
        let p = tau.len();
        if p < 2 {
            return Err(Error::InvalidArgument(
                "schedule needs at least two nodes".into(),
            ));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if let Some(bad) = tau.iter().find(|&&t| t < 1 || t > p - 1) {
            return Err(Error::InvalidArgument(format!(
                "expected degree {bad} outside [1, {}]",
                p - 1
            )));
        }
        if tau.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument(
                "expected degrees must be non-increasing".into(),
            ));
        }
        let rank_weights = rank_weight_sequence(p - 1, alpha);
        let lovasz_weights = lovasz_weight_sequence(p - 1);
        let node_penalties = tau.iter().map(|&t| 1.0 / rank_weights[t - 1]).collect();
        Ok(Self {
            p,
            alpha,
            gamma: None,
            rank_weights,
            lovasz_weights,
            expected_degrees: tau,
            node_penalties,
        })
    }

    /// Schedule whose row weights and node penalties are all one. The induced
    /// penalty is a plain ℓ1 norm on the off-diagonal entries.
    pub fn uniform(p: usize) -> Self {
        Self {
            p,
            alpha: 0.0,
            gamma: None,
            rank_weights: vec![1.0; p - 1],
            lovasz_weights: lovasz_weight_sequence(p - 1),
            expected_degrees: vec![1; p],
            node_penalties: vec![1.0; p],
        }
    }

    pub fn order(&self) -> usize {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    /// `H`, non-decreasing.
    pub fn rank_weights(&self) -> &[f64] {
        &self.rank_weights
    }

    /// `h`, strictly decreasing.
    pub fn lovasz_weights(&self) -> &[f64] {
        &self.lovasz_weights
    }

    /// `τ`, non-increasing.
    pub fn expected_degrees(&self) -> &[usize] {
        &self.expected_degrees
    }

    /// `g`, non-decreasing in ranked position.
    pub fn node_penalties(&self) -> &[f64] {
        &self.node_penalties
    }

    /// Smallest positive difference between consecutive node penalties, if any.
    pub fn min_penalty_gap(&self) -> Option<f64> {
        self.node_penalties
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&d| d > 0.0)
            .min_by(f64::total_cmp)
    }

    /// Number of leading positions before the node penalty becomes constant.
    /// Positions past this index all carry the same penalty.
    pub fn active_positions(&self) -> usize {
        let last = *self.node_penalties.last().expect("non-empty");
        self.node_penalties
            .iter()
            .rposition(|&g| g != last)
            .map_or(0, |i| i + 1)
    }

    /// Row penalty vector `scale * g(position) * H`.
    pub fn row_penalties(&self, position: usize, scale: f64) -> Vec<f64> {
        let c = scale * self.node_penalties[position];
        self.rank_weights.iter().map(|h| c * h).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_weights_closed_form() {
        let h = rank_weight_sequence(3, 1.0);
        assert!((h[0] - 2f64.ln()).abs() < 1e-15);
        assert!((h[1] - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn steep_power_law_puts_everything_at_degree_one() {
        // quantile enumeration: all shapes are 1, quotas 18/10 = 1.8 each,
        // floors sum to 10, the 8 leftover units go to the first 8 positions.
        assert_eq!(power_law_quantiles(10, 50.0), vec![1; 10]);
        let s = PenaltySchedule::build(10, 50.0, 1.0, 9).unwrap();
        assert_eq!(s.expected_degrees(), &[2, 2, 2, 2, 2, 2, 2, 2, 1, 1]);
    }

    #[test]
    fn quantiles_by_hand_for_small_p() {
        // p = 4, gamma = 2: weights 1, 1/4, 1/9 → total 49/36,
        // P(D>1) = 13/49 ≈ 0.265, P(D>2) = 4/49 ≈ 0.082.
        // q = 0.125, 0.375, 0.625, 0.875 → d = 2, 1, 1, 1.
        assert_eq!(power_law_quantiles(4, 2.0), vec![2, 1, 1, 1]);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(PenaltySchedule::build(10, 1.0, 1.0, 5).is_err());
        assert!(PenaltySchedule::build(10, 2.5, 1.0, 0).is_err());
        assert!(PenaltySchedule::build(10, 2.5, 1.0, 46).is_err());
        assert!(PenaltySchedule::build(2, 2.5, 1.0, 1).is_err());
        assert!(PenaltySchedule::build(10, 2.5, 0.0, 5).is_err());
    }

    #[test]
    fn node_penalty_is_inverse_rank_weight() {
        let s = PenaltySchedule::build(50, 2.5, 1.0, 60).unwrap();
        for (g, &t) in s.node_penalties().iter().zip(s.expected_degrees()) {
            assert_eq!(*g, 1.0 / s.rank_weights()[t - 1]);
        }
        assert!(s.node_penalties().windows(2).all(|w| w[0] <= w[1]));
        assert!(s.expected_degrees().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn degree_total_tracks_target() {
        let s = PenaltySchedule::build(100, 2.5, 1.0, 197).unwrap();
        let total: usize = s.expected_degrees().iter().sum();
        assert_eq!(total, 394);
    }

    #[test]
    fn active_positions_marks_constant_tail() {
        let s = PenaltySchedule::from_expected_degrees(vec![3, 2, 1, 1], 1.0).unwrap();
        assert_eq!(s.active_positions(), 2);
        let flat = PenaltySchedule::from_expected_degrees(vec![1, 1, 1], 1.0).unwrap();
        assert_eq!(flat.active_positions(), 0);
    }
}
