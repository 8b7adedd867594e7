//! Sample-wise learnability: how easily each training sample is learned.
//!
//! A model is trained for `T` epochs, `R` times with different seeds. After
//! every epoch the probability assigned to each sample's true label is
//! recorded into a [`PredictionHistory`]. Averaging those cells gives a
//! per-sample learnability score in `[0, 1]`; ranking the scores (1 =
//! easiest, ties share the largest rank of their group) gives a rank vector.
//! Score and rank vectors from different architectures or optimizers are
//! then compared with Pearson correlation and 2D histograms.
//!
//! ```
//! use lblab_core::{compute_learnability, compute_ranks, PredictionHistory};
//!
//! let ids = vec!["a".to_string(), "b".to_string()];
//! // one run, two epochs, two samples
//! let history = PredictionHistory::new(ids, 2, 1, vec![0.9, 0.2, 1.0, 0.4]).unwrap();
//! let scores = compute_learnability(&history);
//! assert_eq!(compute_ranks(&scores).unwrap().ranks(), &[1, 2]);
//! ```

pub mod data;
pub mod error;
pub mod metrics;
pub mod numeric;
pub mod trainer;

pub use data::{make_blobs, BlobParams, CsvSchema, Dataset, DifficultyTag};
pub use error::{Error, Result};
pub use metrics::{
    compute_learnability, compute_ranks, correlation_matrix, histogram2d, pearson,
    rank_correlation, CorrelationMatrix, CorrelationMode, Histogram2D, LearnabilityVector,
    PredictionHistory, RankVector,
};
pub use trainer::{
    train_and_record, Activation, InitScheme, Mlp, ModelSpec, OptimizerSpec, RunConfig,
    TrainReport,
};
