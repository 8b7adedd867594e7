//! Learnability scores, ranks, correlations and histograms computed from
//! prediction histories. Everything here is a pure function of its inputs.

mod correlation;
mod histogram;
mod history;
mod learnability;
mod rank;

pub use correlation::{
    check_alignment, correlation_matrix, pearson, rank_correlation, CorrelationMatrix,
    CorrelationMode,
};
pub use histogram::{histogram2d, Histogram2D};
pub(crate) use history::check_unique_ids;
pub use history::PredictionHistory;
pub use learnability::{compute_learnability, LearnabilityVector};
pub use rank::{compute_ranks, rank_scores, RankVector};
