use crate::error::{Error, Result};
use crate::model::{RankedRow, SymmetricMatrix};
use crate::prior::{node_ranking, node_scores, positions, ranking_from_scores, PenaltySchedule};
use crate::ystep::symmetric::{solve_symmetric, SymmetrySolverState};

/// Relative Frobenius tolerance of [`fixed_point_check`].
pub const FIXED_POINT_TOL: f64 = 1e-7;

const MAX_DOUBLINGS: usize = 64;

/// Node-ranking dual and the warm-start data carried between Y-steps.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingSolverState {
    pub delta: Vec<f64>,
    pub mu_delta: f64,
    pub max_rounds: usize,
    /// Ranking used by the last round.
    pub ranking: Vec<usize>,
    /// When set, only the top `k` nodes are re-sorted each round. `k` is raised
    /// to the start of the constant-penalty tail.
    pub top_k: Option<usize>,
    /// Keep the symmetry multiplier between solves instead of restarting at 0.
    pub warm_sigma: bool,
    pub symmetry: SymmetrySolverState,
    last: Option<SymmetricMatrix>,
}

impl RankingSolverState {
    /// Defaults: `mu_delta` is half the smallest positive gap of `g`.
    pub fn new(sched: &PenaltySchedule) -> Self {
        let p = sched.order();
        Self {
            delta: vec![0.0; p],
            mu_delta: 0.5 * sched.min_penalty_gap().unwrap_or(0.0),
            max_rounds: 50,
            ranking: (0..p).collect(),
            top_k: None,
            warm_sigma: false,
            symmetry: SymmetrySolverState::new(p),
            last: None,
        }
    }

    /// Output of the previous call, used as the starting iterate of the next.
    pub fn last_output(&self) -> Option<&SymmetricMatrix> {
        self.last.as_ref()
    }
}

/// One round of [`solve_node_ranking`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub round: usize,
    /// `‖Y - Yᵀ‖_F` reached by the symmetric solve.
    pub asymmetry: f64,
    /// Sweeps of the symmetric solve; 0 when the penalties were unchanged.
    pub sweeps: usize,
    /// Last offset step taken after this round.
    pub step: f64,
    /// Nodes whose penalty differs between the round's ranking and the next.
    pub ranking_changes: usize,
    /// Nodes whose penalty differs between the offset ranking and the Lovász ranking.
    pub disagreements: usize,
    /// Fixed-ranking objective of the new iterate.
    pub objective: f64,
    /// Same objective at the iterate the round started from.
    pub previous_objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingOutcome {
    pub y: SymmetricMatrix,
    pub rounds: usize,
    /// False when `max_rounds` ran out; `y` is then the last iterate.
    pub converged: bool,
    /// False when any symmetric solve hit its sweep cap.
    pub symmetric_converged: bool,
    pub trace: Vec<RoundTrace>,
}

/// Row penalties `lambda * g(position of v) * H` for a node ranking.
pub fn penalties_for_ranking(
    sched: &PenaltySchedule,
    lambda: f64,
    ranking: &[usize],
) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); ranking.len()];
    for (pos, &v) in ranking.iter().enumerate() {
        out[v] = sched.row_penalties(pos, lambda);
    }
    out
}

/// `½‖Y - A‖²_F + lambda Σ_v g(position of v) (Y_v ∘ H)` for a fixed ranking.
pub fn ranking_objective(
    y: &SymmetricMatrix,
    a: &SymmetricMatrix,
    lambda: f64,
    sched: &PenaltySchedule,
    ranking: &[usize],
) -> f64 {
    let g = sched.node_penalties();
    let fit = 0.5 * (y.as_matrix() - a.as_matrix()).norm_squared();
    let prior: f64 = ranking
        .iter()
        .enumerate()
        .map(|(pos, &v)| {
            let row = RankedRow::from_slice(y.row(v), v).expect("index in range");
            g[pos] * row.weighted_sum(sched.rank_weights())
        })
        .sum();
    fit + lambda * prior
}

/// Ranking that sorts only the `k` best-scoring nodes; the rest keep their
/// relative order from `previous`. The head agrees with `ranking_from_scores`.
pub fn topk_ranking(scores: &[f64], k: usize, previous: &[usize]) -> Vec<usize> {
    let p = scores.len();
    let k = k.clamp(1, p);
    let cmp = |a: &usize, b: &usize| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b));
    let mut order: Vec<usize> = (0..p).collect();
    if k < p {
        order.select_nth_unstable_by(k - 1, cmp);
    }
    let mut head = order[..k].to_vec();
    head.sort_unstable_by(cmp);
    if k == p {
        return head;
    }
    let mut taken = vec![false; p];
    for &v in &head {
        taken[v] = true;
    }
    head.extend(previous.iter().copied().filter(|&v| !taken[v]));
    head
}

/// First position from which every remaining node gets the same penalty.
fn penalty_plateau(sched: &PenaltySchedule) -> usize {
    let g = sched.node_penalties();
    let last = g[g.len() - 1];
    g.iter().rposition(|&x| x != last).map_or(0, |i| i + 1)
}

fn lovasz_ranking(y: &SymmetricMatrix, sched: &PenaltySchedule) -> Vec<usize> {
    node_ranking(y, sched.lovasz_weights(), &vec![0.0; y.order()]).expect("dimensions checked")
}

/// Node penalty assigned to every vertex by a ranking.
fn assigned_penalties(sched: &PenaltySchedule, ranking: &[usize]) -> Vec<f64> {
    let g = sched.node_penalties();
    positions(ranking).into_iter().map(|k| g[k]).collect()
}

fn check_inputs(a: &SymmetricMatrix, lambda: f64, sched: &PenaltySchedule) -> Result<()> {
    if sched.order() != a.order() {
        return Err(Error::Dimension(format!(
            "schedule for {} nodes applied to a {}-node matrix",
            sched.order(),
            a.order()
        )));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    Ok(())
}

/// Solves the Y-subproblem under the dynamic prior by alternating a fixed
/// node ranking with a symmetric solve, moving the offsets `δ` until the
/// ranking by `(H, δ)` agrees with the Lovász ranking of the iterate.
///
/// Rankings are compared through the penalty each node receives, so
/// reorderings among nodes of equal penalty do not count as changes.
pub fn solve_node_ranking(
    a: &SymmetricMatrix,
    lambda: f64,
    sched: &PenaltySchedule,
    state: &mut RankingSolverState,
) -> Result<RankingOutcome> {
    check_inputs(a, lambda, sched)?;
    let p = a.order();
    if state.delta.len() != p || state.delta.iter().any(|d| !d.is_finite()) {
        state.delta = vec![0.0; p];
    }
    if state.ranking.len() != p {
        state.ranking = (0..p).collect();
    }
    let h_weights = sched.rank_weights();
    // positions past the plateau share one penalty, so their order is irrelevant
    let top_k = state.top_k.map(|k| k.max(penalty_plateau(sched)));
    let rank_h = |y: &SymmetricMatrix, delta: &[f64], previous: &[usize]| {
        let scores = node_scores(y, h_weights, delta);
        match top_k {
            Some(k) => topk_ranking(&scores, k, previous),
            None => ranking_from_scores(&scores),
        }
    };

    let mut y = match state.last.take() {
        Some(prev) if prev.order() == p => prev,
        _ => a.clone(),
    };
    let mut ranking = rank_h(&y, &state.delta, &state.ranking);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut symmetric_converged = true;
    let mut rounds = 0;
    let mut solved: Option<(Vec<f64>, f64)> = None;

    for round in 1..=state.max_rounds.max(1) {
        rounds = round;
        let g_now = assigned_penalties(sched, &ranking);
        let previous_objective = ranking_objective(&y, a, lambda, sched, &ranking);
        let (asymmetry, sweeps) = match &solved {
            Some((g_prev, asym)) if *g_prev == g_now => (*asym, 0),
            _ => {
                let pen = penalties_for_ranking(sched, lambda, &ranking);
                if !state.warm_sigma {
                    state.symmetry.reset();
                }
                let solve = solve_symmetric(a, &pen, &mut state.symmetry)?;
                symmetric_converged &= solve.converged;
                y = solve.y;
                solved = Some((g_now.clone(), solve.asymmetry));
                (solve.asymmetry, solve.iterations)
            }
        };

        let mut by_h = rank_h(&y, &state.delta, &ranking);
        let by_lovasz = lovasz_ranking(&y, sched);
        let g_l = assigned_penalties(sched, &by_lovasz);
        let mut g_h = assigned_penalties(sched, &by_h);
        let changes = g_now.iter().zip(&g_h).filter(|(x, y)| x != y).count();
        let disagreements = g_h.iter().zip(&g_l).filter(|(x, y)| x != y).count();
        let agree = changes == 0 && disagreements == 0;
        let mut step = state.mu_delta;
        if !agree {
            // offsets that fail to move any penalty are too small: double the
            // step and repeat the update until one moves
            for _ in 0..MAX_DOUBLINGS {
                for u in 0..p {
                    state.delta[u] += step * (g_h[u] - g_l[u]);
                }
                by_h = rank_h(&y, &state.delta, &by_h);
                g_h = assigned_penalties(sched, &by_h);
                if g_h != g_now || step == 0.0 {
                    break;
                }
                step *= 2.0;
            }
        }
        trace.push(RoundTrace {
            round,
            asymmetry,
            sweeps,
            step,
            ranking_changes: changes,
            disagreements,
            objective: ranking_objective(&y, a, lambda, sched, &ranking),
            previous_objective,
        });
        log::debug!("ranking round {round}: {changes} changes, {disagreements} disagreements");

        if agree {
            converged = true;
            break;
        }
        ranking = by_h;
    }

    if !converged {
        log::warn!("node ranking did not settle within {rounds} rounds");
    }
    state.ranking = ranking;
    state.last = Some(y.clone());
    Ok(RankingOutcome {
        y,
        rounds,
        converged,
        symmetric_converged,
        trace,
    })
}

/// Relative Frobenius distance between `y` and the symmetric solve under
/// the penalties induced by `y`'s own Lovász ranking. The solve starts cold
/// with the step, tolerance and sweep cap of `solver`.
pub fn fixed_point_residual_with(
    y: &SymmetricMatrix,
    a: &SymmetricMatrix,
    lambda: f64,
    sched: &PenaltySchedule,
    solver: &SymmetrySolverState,
) -> Result<f64> {
    check_inputs(a, lambda, sched)?;
    if y.order() != a.order() {
        return Err(Error::Dimension("Y and A differ in order".into()));
    }
    let pen = penalties_for_ranking(sched, lambda, &lovasz_ranking(y, sched));
    let mut state = solver.clone();
    state.reset();
    let again = solve_symmetric(a, &pen, &mut state)?.y;
    let diff = (again.as_matrix() - y.as_matrix()).norm();
    Ok(diff / y.frobenius().max(f64::MIN_POSITIVE))
}

/// [`fixed_point_residual_with`] under the default solver settings.
pub fn fixed_point_residual(
    y: &SymmetricMatrix,
    a: &SymmetricMatrix,
    lambda: f64,
    sched: &PenaltySchedule,
) -> Result<f64> {
    fixed_point_residual_with(y, a, lambda, sched, &SymmetrySolverState::new(a.order()))
}

/// True when `y` reproduces itself under its own Lovász ranking to
/// [`FIXED_POINT_TOL`], using the default solver settings.
pub fn fixed_point_check(
    y: &SymmetricMatrix,
    a: &SymmetricMatrix,
    lambda: f64,
    sched: &PenaltySchedule,
) -> Result<bool> {
    Ok(fixed_point_residual(y, a, lambda, sched)? <= FIXED_POINT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_a() -> SymmetricMatrix {
        SymmetricMatrix::from_rows(
            4,
            &[
                1.0, 0.9, -0.4, 0.3, 0.9, 1.0, 0.7, -0.2, -0.4, 0.7, 1.0, 0.5, 0.3, -0.2, 0.5, 1.0,
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_input_settles_in_one_round() {
        let sched = PenaltySchedule::build(5, 2.5, 1.0, 4).unwrap();
        let mut state = RankingSolverState::new(&sched);
        let out = solve_node_ranking(&SymmetricMatrix::zeros(5), 0.3, &sched, &mut state).unwrap();
        assert!(out.converged);
        assert_eq!(out.rounds, 1);
        assert_eq!(out.y, SymmetricMatrix::zeros(5));
    }

    #[test]
    fn dominant_row_output_is_a_fixed_point() {
        let a =
            SymmetricMatrix::from_rows(3, &[1.0, 0.8, 0.6, 0.8, 1.0, 0.1, 0.6, 0.1, 1.0]).unwrap();
        let sched = PenaltySchedule::from_expected_degrees(vec![2, 1, 1], 1.0).unwrap();
        let mut state = RankingSolverState::new(&sched);
        let out = solve_node_ranking(&a, 0.1, &sched, &mut state).unwrap();
        assert!(out.converged);
        assert!(fixed_point_check(&out.y, &a, 0.1, &sched).unwrap());
    }

    #[test]
    fn vanishing_penalty_keeps_input() {
        let a = sample_a();
        let sched = PenaltySchedule::build(4, 2.5, 1.0, 3).unwrap();
        assert!(fixed_point_check(&a, &a, 1e-12, &sched).unwrap());
        assert!(!fixed_point_check(&a, &a, 1.0, &sched).unwrap());
    }

    #[test]
    fn objective_does_not_increase_within_a_round() {
        let a = sample_a();
        let sched = PenaltySchedule::build(4, 2.5, 1.0, 3).unwrap();
        let mut state = RankingSolverState::new(&sched);
        let out = solve_node_ranking(&a, 0.2, &sched, &mut state).unwrap();
        assert!(out.converged);
        for t in &out.trace {
            assert!(t.objective <= t.previous_objective + 1e-9, "{t:?}");
        }
        assert!(fixed_point_check(&out.y, &a, 0.2, &sched).unwrap());
    }

    #[test]
    fn topk_keeps_previous_order_for_the_rest() {
        let scores = [0.1, 0.9, 0.5, 0.3];
        assert_eq!(topk_ranking(&scores, 4, &[0, 1, 2, 3]), vec![1, 2, 3, 0]);
        assert_eq!(topk_ranking(&scores, 1, &[3, 2, 1, 0]), vec![1, 3, 2, 0]);
    }
}
