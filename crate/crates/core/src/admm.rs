//! Outer ADMM for `tr(XS) - log det X + β Ω(X)` and the β search that hits
//! a target edge count.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::{edges_from_matrix, SymmetricMatrix, DEFAULT_EDGE_THRESHOLD};
use crate::prior::{PenaltySchedule, ScheduleParams};
use crate::ystep::{solve_node_ranking, RankingSolverState, RoundTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Dynamic node-specific degree prior.
    Dns,
    /// Plain ℓ1 penalty on the off-diagonal entries.
    L1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmConfig {
    pub rho: f64,
    pub beta: f64,
    pub gamma: f64,
    pub alpha: f64,
    /// Edge count the degree schedule is sized for; `None` means `p`.
    pub target_edges: Option<usize>,
    pub degree_scale: f64,
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub max_outer: usize,
    pub method: Method,
    pub mu_sigma: f64,
    pub asym_tol: f64,
    pub max_sweeps: usize,
    /// `None` means half the smallest gap of the node penalties.
    pub mu_delta: Option<f64>,
    pub max_rounds: usize,
    pub top_k: Option<usize>,
    /// Keep one record per outer iteration.
    pub trace: bool,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            beta: 0.1,
            gamma: 2.5,
            alpha: 1.0,
            target_edges: None,
            degree_scale: 2.0,
            primal_tol: 1e-4,
            dual_tol: 1e-4,
            max_outer: 500,
            method: Method::Dns,
            mu_sigma: 1.0,
            asym_tol: 1e-8,
            max_sweeps: 200,
            mu_delta: None,
            max_rounds: 50,
            top_k: None,
            trace: false,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho", self.rho),
            ("primal_tol", self.primal_tol),
            ("dual_tol", self.dual_tol),
            ("mu_sigma", self.mu_sigma),
            ("asym_tol", self.asym_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beta must be >= 0, got {}",
                self.beta
            )));
        }
        if self.max_outer == 0 {
            return Err(Error::InvalidArgument(
                "max_outer must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Degree schedule for a `p`-node problem.
    pub fn schedule(&self, p: usize) -> Result<PenaltySchedule> {
        let max_edges = p * (p - 1) / 2;
        let target = self.target_edges.unwrap_or(p).clamp(1, max_edges.max(1));
        PenaltySchedule::build_with(
            p,
            &ScheduleParams {
                gamma: self.gamma,
                alpha: self.alpha,
                target_edges: target,
                degree_scale: self.degree_scale,
            },
        )
    }
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub ranking_rounds: usize,
    pub ranking_converged: bool,
    /// Rounds of the ranking loop; empty for the ℓ1 step.
    pub rounds: Vec<RoundTrace>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmResult {
    /// Positive definite iterate of the likelihood step.
    pub x: SymmetricMatrix,
    /// Sparse iterate of the prior step; edges are read from here.
    pub y: SymmetricMatrix,
    pub u: SymmetricMatrix,
    pub iterations: usize,
    /// `‖X - Y‖_F / p`.
    pub primal_residual: f64,
    /// `ρ ‖Yˡ⁺¹ - Yˡ‖_F / p`.
    pub dual_residual: f64,
    pub converged: bool,
    /// Outer iterations whose ranking loop hit its round cap.
    pub ranking_unconverged: usize,
    pub trace: Vec<IterationRecord>,
}

impl AdmmResult {
    pub fn edge_count(&self) -> usize {
        edges_from_matrix(&self.y, DEFAULT_EDGE_THRESHOLD).map_or(0, |e| e.len())
    }
}

fn eigen(m: &SymmetricMatrix) -> SymmetricEigen<f64, nalgebra::Dyn> {
    SymmetricEigen::new(m.as_matrix().clone())
}

fn spectral(q: &DMatrix<f64>, values: impl Iterator<Item = f64>) -> SymmetricMatrix {
    let scaled = DMatrix::from_fn(q.nrows(), q.ncols(), {
        let d: Vec<f64> = values.collect();
        move |i, j| q[(i, j)] * d[j]
    });
    SymmetricMatrix::symmetrize(&(scaled * q.transpose()))
}

/// Positive root of `ρx² - λx - 1 = 0`, written to avoid cancellation.
fn x_root(lambda: f64, rho: f64) -> f64 {
    let r = (lambda * lambda + 4.0 * rho).sqrt();
    if lambda >= 0.0 {
        (lambda + r) / (2.0 * rho)
    } else {
        2.0 / (r - lambda)
    }
}

/// `argmin tr(XS) - log det X + ρ/2 ‖X - Y + U‖²_F`, from the eigenvectors of
/// `ρ(Y - U) - S`.
pub fn x_update(
    s: &SymmetricMatrix,
    y: &SymmetricMatrix,
    u: &SymmetricMatrix,
    rho: f64,
) -> Result<SymmetricMatrix> {
    let p = s.order();
    if y.order() != p || u.order() != p {
        return Err(Error::Dimension("S, Y and U must share their order".into()));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rho must be positive, got {rho}"
        )));
    }
    let m = y.sub(u).scale(rho).sub(s);
    let eig = eigen(&m);
    Ok(spectral(
        &eig.eigenvectors,
        eig.eigenvalues.iter().map(|&l| x_root(l, rho)),
    ))
}

/// `‖S - X⁻¹ + ρ(X - Y + U)‖_F`, the gradient of the X-step objective.
pub fn stationarity_residual(
    s: &SymmetricMatrix,
    x: &SymmetricMatrix,
    y: &SymmetricMatrix,
    u: &SymmetricMatrix,
    rho: f64,
) -> Result<f64> {
    let inv = x
        .as_matrix()
        .clone()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite)?;
    let r = s.as_matrix() - inv + (x.as_matrix() - y.as_matrix() + u.as_matrix()) * rho;
    Ok(r.norm())
}

fn soft_threshold_offdiag(a: &SymmetricMatrix, lambda: f64) -> SymmetricMatrix {
    SymmetricMatrix::from_upper_fn(a.order(), |i, j| {
        let v = a.get(i, j);
        if i == j {
            v
        } else {
            v.signum() * (v.abs() - lambda).max(0.0)
        }
    })
}

/// Starting point for [`admm_solve_from`].
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub y: SymmetricMatrix,
    pub u: SymmetricMatrix,
}

pub fn admm_solve(s: &SymmetricMatrix, config: &AdmmConfig) -> Result<AdmmResult> {
    admm_solve_from(s, config, None)
}

/// Alternates the likelihood step, the prior step on `A = X + U` with
/// `λ = β/ρ`, and `U += X - Y`.
pub fn admm_solve_from(
    s: &SymmetricMatrix,
    config: &AdmmConfig,
    warm: Option<&WarmStart>,
) -> Result<AdmmResult> {
    config.validate()?;
    let p = s.order();
    if p < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 variables, got {p}"
        )));
    }
    let mut s = s.clone();
    if eigen(&s).eigenvalues.max() <= 0.0 {
        log::warn!("covariance has no positive eigenvalue; adding a 1e-8 ridge");
        s = s.add(&SymmetricMatrix::identity(p).scale(1e-8));
    }
    let sched = match config.method {
        Method::Dns => Some(config.schedule(p)?),
        Method::L1 => None,
    };
    let mut ranking = sched.as_ref().map(|sc| {
        let mut st = RankingSolverState::new(sc);
        st.symmetry.mu_sigma = config.mu_sigma;
        st.symmetry.asym_tol = config.asym_tol;
        st.symmetry.max_iters = config.max_sweeps;
        st.max_rounds = config.max_rounds;
        st.top_k = config.top_k;
        if let Some(mu) = config.mu_delta {
            st.mu_delta = mu;
        }
        st
    });

    let lambda = config.beta / config.rho;
    let (mut y, mut u) = match warm {
        Some(w) if w.y.order() == p && w.u.order() == p => (w.y.clone(), w.u.clone()),
        _ => (SymmetricMatrix::zeros(p), SymmetricMatrix::zeros(p)),
    };
    let mut x = y.clone();
    let pf = p as f64;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut converged = false;
    let mut ranking_unconverged = 0;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut window: Vec<f64> = Vec::new();

    for it in 1..=config.max_outer {
        iterations = it;
        x = x_update(&s, &y, &u, config.rho)?;
        if it % 10 == 0 {
            let r = stationarity_residual(&s, &x, &y, &u, config.rho)?;
            if r > 1e-6 {
                log::warn!("likelihood step stationarity residual {r:.3e} at iteration {it}");
            }
        }
        let a = x.add(&u);
        let (next, rounds, rank_ok, round_trace) = match (&sched, ranking.as_mut()) {
            (Some(sc), Some(st)) => {
                let out = solve_node_ranking(&a, lambda, sc, st)?;
                (out.y, out.rounds, out.converged, out.trace)
            }
            _ => (soft_threshold_offdiag(&a, lambda), 0, true, Vec::new()),
        };
        if !rank_ok {
            ranking_unconverged += 1;
        }
        dual = config.rho * (next.as_matrix() - y.as_matrix()).norm() / pf;
        y = next;
        let gap = x.sub(&y);
        primal = gap.frobenius() / pf;
        u = u.add(&gap);
        if config.trace {
            trace.push(IterationRecord {
                iteration: it,
                primal_residual: primal,
                dual_residual: dual,
                ranking_rounds: rounds,
                ranking_converged: rank_ok,
                rounds: round_trace,
            });
        }
        window.push(primal);
        if window.len() == 20 {
            if window[19] > window[0] {
                log::warn!("primal residual rose over iterations {}..={it}", it - 19);
            }
            window.clear();
        }
        if primal <= config.primal_tol && dual <= config.dual_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "ADMM stopped after {iterations} iterations, residuals {primal:.3e} / {dual:.3e}"
        );
    }
    Ok(AdmmResult {
        x,
        y,
        u,
        iterations,
        primal_residual: primal,
        dual_residual: dual,
        converged,
        ranking_unconverged,
        trace,
    })
}

/// Bounds and step budget of [`beta_search`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSearch {
    pub beta_min: f64,
    pub beta_max: f64,
    pub max_bisections: usize,
}

impl Default for BetaSearch {
    fn default() -> Self {
        Self {
            beta_min: 1e-6,
            beta_max: 1e3,
            max_bisections: 30,
        }
    }
}

/// Finds `β` whose estimate has `target_edges ± tolerance_edges` edges by
/// bisection on `log β`, starting from `config.beta` and expanding by factors
/// of 4 until the target is bracketed. For DNS the degree schedule is sized
/// for `target_edges`.
pub fn beta_search(
    s: &SymmetricMatrix,
    config: &AdmmConfig,
    target_edges: usize,
    tolerance_edges: usize,
    bounds: &BetaSearch,
) -> Result<(f64, AdmmResult)> {
    if !(bounds.beta_min > 0.0) || !(bounds.beta_max > bounds.beta_min) {
        return Err(Error::InvalidArgument(
            "need 0 < beta_min < beta_max".into(),
        ));
    }
    let mut cfg = config.clone();
    if target_edges > 0 {
        cfg.target_edges = Some(target_edges);
    }
    let within = |e: usize| e.abs_diff(target_edges) <= tolerance_edges;
    let mut warm: Option<WarmStart> = None;
    let mut run = |beta: f64, warm: &mut Option<WarmStart>| -> Result<(usize, AdmmResult)> {
        cfg.beta = beta;
        let res = admm_solve_from(s, &cfg, warm.as_ref())?;
        *warm = Some(WarmStart {
            y: res.y.clone(),
            u: res.u.clone(),
        });
        let e = res.edge_count();
        log::info!("beta {beta:.6e}: {e} edges");
        Ok((e, res))
    };

    let mut beta = config.beta.clamp(bounds.beta_min, bounds.beta_max);
    let (mut edges, mut res) = run(beta, &mut warm)?;
    if within(edges) {
        return Ok((beta, res));
    }
    // lo gives too many edges, hi too few
    let (mut lo, mut hi);
    if edges > target_edges {
        lo = beta;
        loop {
            if beta >= bounds.beta_max {
                return Err(Error::Bracket {
                    target: target_edges,
                    reason: format!("{edges} edges remain at the largest beta {beta:e}"),
                });
            }
            beta = (beta * 4.0).min(bounds.beta_max);
            (edges, res) = run(beta, &mut warm)?;
            if within(edges) {
                return Ok((beta, res));
            }
            if edges < target_edges {
                hi = beta;
                break;
            }
            lo = beta;
        }
    } else {
        hi = beta;
        loop {
            if beta <= bounds.beta_min {
                return Err(Error::Bracket {
                    target: target_edges,
                    reason: format!("only {edges} edges at the smallest beta {beta:e}"),
                });
            }
            beta = (beta / 4.0).max(bounds.beta_min);
            (edges, res) = run(beta, &mut warm)?;
            if within(edges) {
                return Ok((beta, res));
            }
            if edges > target_edges {
                lo = beta;
                break;
            }
            hi = beta;
        }
    }
    for _ in 0..bounds.max_bisections {
        beta = (lo * hi).sqrt();
        (edges, res) = run(beta, &mut warm)?;
        if within(edges) {
            break;
        }
        if edges > target_edges {
            lo = beta;
        } else {
            hi = beta;
        }
    }
    if !within(edges) {
        log::warn!("beta search ended at {edges} edges for target {target_edges}");
    }
    Ok((beta, res))
}
