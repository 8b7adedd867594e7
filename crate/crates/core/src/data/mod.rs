//! Datasets: synthetic Gaussian blobs with known hard samples, and CSV files.

mod blobs;
mod csv;
mod dataset;

pub use self::csv::{load_csv, parse_csv, write_csv, CsvSchema};
pub use blobs::{make_blobs, simplex_means, BlobParams, MEAN_SEPARATION};
pub use dataset::{Dataset, DifficultyTag};
