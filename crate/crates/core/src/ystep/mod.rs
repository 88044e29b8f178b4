//! The Y-subproblem: symmetric row decomposition and the node-ranking loop.

mod node_rank;
mod symmetric;

pub use node_rank::{
    fixed_point_check, fixed_point_residual, fixed_point_residual_with, penalties_for_ranking,
    ranking_objective, solve_node_ranking, topk_ranking, RankingOutcome, RankingSolverState,
    RoundTrace, FIXED_POINT_TOL,
};
pub use symmetric::{solve_symmetric, SymmetricSolve, SymmetrySolverState};
