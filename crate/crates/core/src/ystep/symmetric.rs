use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::SymmetricMatrix;
use crate::partition::solve_row;

/// Multiplier and step controls for the symmetry constraint `Y = Yᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrySolverState {
    /// Dual matrix of the constraint; kept between calls as a warm start.
    pub sigma: DMatrix<f64>,
    pub mu_sigma: f64,
    /// Stop once `‖Y - Yᵀ‖_F <= asym_tol * p`.
    pub asym_tol: f64,
    pub max_iters: usize,
    /// Symmetrized solution of the last call, the proximal anchor of the next.
    pub anchor: Option<DMatrix<f64>>,
}

impl SymmetrySolverState {
    pub fn new(p: usize) -> Self {
        Self {
            sigma: DMatrix::zeros(p, p),
            mu_sigma: 1.0,
            asym_tol: 1e-8,
            max_iters: 200,
            anchor: None,
        }
    }

    pub fn reset(&mut self) {
        self.sigma.fill(0.0);
        self.anchor = None;
    }
}

/// Result of [`solve_symmetric`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSolve {
    pub y: SymmetricMatrix,
    pub iterations: usize,
    /// `‖Y - Yᵀ‖_F` of the returned iterate before symmetrization.
    pub asymmetry: f64,
    pub converged: bool,
}

/// Solves `min Σ_v ½‖Y_v - A_v‖² + Σ_k |Y_v|_(k) penalties[v][k]` subject to
/// `Y = Yᵀ` by decomposing over rows. The rows see `B = A + σᵀ - σ` and, from
/// the second sweep on, a proximal pull of weight `η = 4 mu_sigma` towards the
/// previous symmetrized iterate `Z`:
///
/// `Y_v = argmin ½(1 + η)‖Y_v - (B_v + η Z_v)/(1 + η)‖² + penalty`,
///
/// followed by `σ += mu_sigma (Y - Yᵀ)`. Each row is nonconvex in its
/// ordering, so the pull is what stops the multiplier from cycling between
/// two row orderings. Fixed points are those of the plain decomposition.
///
/// A stored anchor from the previous call replaces the plain first sweep.
///
/// Stops when both `‖Y - Yᵀ‖_F` and the change of `Z` are within
/// `asym_tol * p`. On hitting `max_iters` the least asymmetric iterate is
/// returned with `converged = false`. The returned matrix is `(Y + Yᵀ) / 2`.
pub fn solve_symmetric(
    a: &SymmetricMatrix,
    row_penalties: &[Vec<f64>],
    state: &mut SymmetrySolverState,
) -> Result<SymmetricSolve> {
    let p = a.order();
    if row_penalties.len() != p || row_penalties.iter().any(|r| r.len() + 1 != p) {
        return Err(Error::Dimension(format!(
            "need {p} penalty rows of length {}",
            p - 1
        )));
    }
    if let Some(v) = row_penalties
        .iter()
        .position(|r| r.windows(2).any(|w| w[1] < w[0]))
    {
        return Err(Error::InvalidArgument(format!(
            "penalties of row {v} decrease"
        )));
    }
    if !(state.mu_sigma > 0.0) || !(state.asym_tol > 0.0) {
        return Err(Error::InvalidArgument(
            "step and tolerance must be positive".into(),
        ));
    }
    if state.sigma.nrows() != p || state.sigma.ncols() != p {
        state.sigma = DMatrix::zeros(p, p);
    }

    let tol = state.asym_tol * p as f64;
    let eta = 4.0 * state.mu_sigma;
    let mut b_row = vec![0.0; p];
    let mut scaled = vec![Vec::new(); p];
    // column v of `rows` holds row v of Y
    let mut rows = DMatrix::zeros(p, p);
    let mut z = state
        .anchor
        .take()
        .filter(|m| m.nrows() == p && m.ncols() == p);
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    let mut iterations = 0;
    let mut converged = false;

    for iter in 1..=state.max_iters.max(1) {
        iterations = iter;
        for v in 0..p {
            let a_row = a.row(v);
            for u in 0..p {
                b_row[u] = a_row[u] + state.sigma[(u, v)] - state.sigma[(v, u)];
            }
            let sol = match &z {
                None => solve_row(&b_row, v, &row_penalties[v])?,
                Some(z) => {
                    for u in 0..p {
                        b_row[u] = (b_row[u] + eta * z[(u, v)]) / (1.0 + eta);
                    }
                    if scaled[v].is_empty() {
                        scaled[v] = row_penalties[v].iter().map(|c| c / (1.0 + eta)).collect();
                    }
                    solve_row(&b_row, v, &scaled[v])?
                }
            };
            rows.column_mut(v).copy_from_slice(&sol.values);
        }
        // rows[(u, v)] = Y[v][u], so Y - Yᵀ at (v, u) is rows[(u, v)] - rows[(v, u)]
        let mut asym2 = 0.0;
        for v in 0..p {
            for u in 0..p {
                let d = rows[(u, v)] - rows[(v, u)];
                asym2 += d * d;
            }
        }
        let asym = asym2.sqrt();
        if best.as_ref().is_none_or(|(b, _)| asym < *b) {
            best = Some((asym, rows.clone()));
        }
        let next_z = (&rows + rows.transpose()) * 0.5;
        let moved = z.as_ref().map_or(0.0, |z| (z - &next_z).norm());
        if asym <= tol && moved <= tol {
            converged = true;
            best = Some((asym, rows.clone()));
            break;
        }
        z = Some(next_z);
        for v in 0..p {
            for u in 0..p {
                state.sigma[(v, u)] += state.mu_sigma * (rows[(u, v)] - rows[(v, u)]);
            }
        }
    }

    let (asymmetry, best_rows) = best.expect("at least one sweep");
    state.anchor = Some((&best_rows + best_rows.transpose()) * 0.5);
    if !converged {
        log::warn!(
            "symmetric decomposition stopped after {iterations} sweeps with asymmetry {asymmetry:.3e}"
        );
    }
    // best_rows is Yᵀ; the symmetrization is the same either way
    Ok(SymmetricSolve {
        y: SymmetricMatrix::symmetrize(&best_rows),
        iterations,
        asymmetry,
        converged,
    })
}
