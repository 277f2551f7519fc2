//! Flat result rows and their CSV/JSON serialisation.  The CSV schema is
//! fixed: `estimator,gamma,alpha,beta,n,n_s,contamination,bias,mse,se`.

use std::io;

use serde::{Deserialize, Serialize};

use crate::contamination::ContaminationSpec;
use crate::mc::{McConfig, McSummary};
use crate::Result;

/// The fixed CSV column order.
pub const CSV_COLUMNS: [&str; 10] = [
    "estimator",
    "gamma",
    "alpha",
    "beta",
    "n",
    "n_s",
    "contamination",
    "bias",
    "mse",
    "se",
];

/// One estimator's results in the flat reporting schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub estimator: String,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub n: usize,
    pub n_s: usize,
    pub contamination: String,
    pub bias: f64,
    pub mse: f64,
    pub se: f64,
}

/// A short, stable description of the contamination scheme.
pub fn contamination_label(spec: Option<&ContaminationSpec>) -> String {
    match spec {
        None => "none".to_string(),
        Some(ContaminationSpec::FixedCount { count, point }) => {
            format!("fixed(count={count},point={point})")
        }
        Some(ContaminationSpec::Mixture {
            epsilon,
            point,
            drift,
        }) => format!("mixture(epsilon={epsilon},point={point},drift={drift})"),
    }
}

/// Flattens run summaries against their configuration.
pub fn rows_from_summaries(cfg: &McConfig, summaries: &[McSummary]) -> Vec<ReportRow> {
    let contamination = contamination_label(cfg.contamination.as_ref());
    summaries
        .iter()
        .map(|s| ReportRow {
            estimator: s.label.clone(),
            gamma: s.gamma,
            alpha: s.alpha,
            beta: s.beta,
            n: cfg.n,
            n_s: cfg.n_s,
            contamination: contamination.clone(),
            bias: s.bias_hat,
            mse: s.mse_hat,
            se: s.mc_standard_error,
        })
        .collect()
}

/// Writes the rows as CSV with the fixed header (header-only when empty).
pub fn write_csv<W: io::Write>(rows: &[ReportRow], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the rows as a JSON array mirroring the CSV schema.
pub fn write_json<W: io::Write>(rows: &[ReportRow], writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, rows)?;
    Ok(())
}

/// Reads back a JSON report written by [`write_json`].
pub fn read_json<R: io::Read>(reader: R) -> Result<Vec<ReportRow>> {
    Ok(serde_json::from_reader(reader)?)
}
