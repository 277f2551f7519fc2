//! Monte Carlo experiment engine for the dual-divergence estimators:
//! contaminated samplers, bias/MSE studies, empirical test-level curves,
//! leave-one-out escort selection, and CSV/JSON reporting.  The `dualdiv`
//! binary in this crate exposes the same operations on the command line.

pub mod adaptive;
pub mod cli;
pub mod contamination;
pub mod level;
pub mod mc;
pub mod report;

pub use adaptive::{adaptive_alpha, AdaptiveReport, AdaptiveRow};
pub use contamination::{draw_contaminated, ContaminationSpec};
pub use level::{level_curve, LevelPoint};
pub use mc::{derive_seed, run_mc, EstimatorSpec, McConfig, McSummary};
pub use report::{rows_from_summaries, write_csv, write_json, ReportRow};

/// Any failure in the harness layer: invalid configuration, a propagated
/// numerical error from the estimation core, or an I/O problem while
/// reading samples or writing reports.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] dualdiv_core::Error),
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
