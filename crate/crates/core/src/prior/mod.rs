//! Degree priors: penalty schedules and the scores they induce.

mod schedule;
mod score;

pub use schedule::{
    lovasz_weight_sequence, power_law_quantiles, rank_weight_sequence, PenaltySchedule,
    ScheduleParams,
};
pub use score::{
    dynamic_prior, log_degree_score, lovasz_node_score, node_ranking, node_scores, positions,
    ranking_from_scores, rewire_at, rewire_equal_degree, static_prior, Rewiring,
};
