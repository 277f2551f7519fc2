//! Escort selection by leave-one-out stability: for each candidate escort
//! the maximal displacement of the estimate under deletion of a single
//! observation is computed, and the most stable escort wins.

use dualdiv_core::estimators::dphi_estimate;
use dualdiv_core::{CressieRead, DualCriterion, Model, SearchBox};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Stability record for one candidate escort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveRow {
    pub alpha: f64,
    /// Max over observations of |full-sample estimate - leave-one-out estimate|.
    pub b_n: f64,
    /// The full-sample estimate at this escort.
    pub estimate: f64,
}

/// Escorts that could not be evaluated, with the failure message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedAlpha {
    pub alpha: f64,
    pub reason: String,
}

/// Outcome of the leave-one-out escort scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveReport {
    pub rows: Vec<AdaptiveRow>,
    pub excluded: Vec<ExcludedAlpha>,
    pub alpha_star: f64,
    pub estimate_at_star: f64,
}

/// Scans `alpha_grid`, computing the full-sample estimator and all `n`
/// leave-one-out estimators per escort, and selects the escort minimising
/// the maximal single-deletion displacement.  Ties go to the escort closest
/// to its own full-sample estimate, then to the smallest escort.  Escorts
/// whose estimations fail are excluded and reported.
pub fn adaptive_alpha(
    divergence: &CressieRead,
    model: &Model,
    sample: &[f64],
    alpha_grid: &[f64],
    box_: Option<&SearchBox>,
) -> Result<AdaptiveReport> {
    let n = sample.len();
    if n < 3 {
        return Err(Error::Config(format!(
            "leave-one-out scan needs at least 3 observations, got {n}"
        )));
    }
    if alpha_grid.is_empty() {
        return Err(Error::Config("empty escort grid".into()));
    }

    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for &alpha in alpha_grid {
        match scan_one(divergence, model, sample, alpha, box_) {
            Ok(row) => rows.push(row),
            Err(e) => excluded.push(ExcludedAlpha {
                alpha,
                reason: e.to_string(),
            }),
        }
    }
    if rows.is_empty() {
        return Err(Error::Config(
            "every escort in the grid failed to estimate".into(),
        ));
    }

    let min_b = rows.iter().map(|r| r.b_n).fold(f64::INFINITY, f64::min);
    let winner = rows
        .iter()
        .filter(|r| r.b_n == min_b)
        .min_by(|a, b| {
            let da = (a.alpha - a.estimate).abs();
            let db = (b.alpha - b.estimate).abs();
            da.total_cmp(&db).then(a.alpha.total_cmp(&b.alpha))
        })
        .copied()
        .expect("rows is non-empty");

    Ok(AdaptiveReport {
        rows,
        excluded,
        alpha_star: winner.alpha,
        estimate_at_star: winner.estimate,
    })
}

fn scan_one(
    divergence: &CressieRead,
    model: &Model,
    sample: &[f64],
    alpha: f64,
    box_: Option<&SearchBox>,
) -> Result<AdaptiveRow> {
    let criterion = DualCriterion::new(*divergence, model.clone(), alpha)?;
    let full = dphi_estimate(&criterion, sample, box_)?;
    let mut b_n: f64 = 0.0;
    let mut held_out = Vec::with_capacity(sample.len() - 1);
    for i in 0..sample.len() {
        held_out.clear();
        held_out.extend_from_slice(&sample[..i]);
        held_out.extend_from_slice(&sample[i + 1..]);
        let loo = dphi_estimate(&criterion, &held_out, box_)?;
        b_n = b_n.max((full.estimate - loo.estimate).abs());
    }
    Ok(AdaptiveRow {
        alpha,
        b_n,
        estimate: full.estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_identical_sample_gives_zero_displacement() {
        // n copies of one value and n-1 copies have the same empirical
        // distribution, so every leave-one-out estimate matches the full one
        let model = Model::normal_location(1.0).unwrap();
        let sample = vec![0.5; 6];
        let cr = CressieRead::new(0.5).unwrap();
        let bx = SearchBox::new(-3.0, 3.0).unwrap();
        let grid = [0.2, 0.5, 0.9];
        let report = adaptive_alpha(&cr, &model, &sample, &grid, Some(&bx)).unwrap();
        assert!(report.excluded.is_empty());
        assert_eq!(report.rows.len(), grid.len());
        for row in &report.rows {
            assert!(row.b_n.abs() < 1e-7, "B_n = {} at {}", row.b_n, row.alpha);
        }
        // recompute the two-stage selection rule independently
        let min_b = report.rows.iter().map(|r| r.b_n).fold(f64::INFINITY, f64::min);
        let expect = report
            .rows
            .iter()
            .filter(|r| r.b_n == min_b)
            .min_by(|a, b| {
                (a.alpha - a.estimate)
                    .abs()
                    .total_cmp(&(b.alpha - b.estimate).abs())
                    .then(a.alpha.total_cmp(&b.alpha))
            })
            .unwrap();
        assert_eq!(report.alpha_star, expect.alpha);
        assert_eq!(report.estimate_at_star, expect.estimate);
    }

    #[test]
    fn outlier_inflates_the_displacement_of_fragile_escorts() {
        let model = Model::normal_scale(0.0).unwrap();
        let mut sample: Vec<f64> = (0..20)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        sample.push(10.0);
        let cr = CressieRead::new(-0.5).unwrap();
        let bx = SearchBox::new(0.4, 2.4).unwrap().with_grid_points(80).unwrap();
        let grid = [1.2, 1.5, 1.9];
        let report = adaptive_alpha(&cr, &model, &sample, &grid, Some(&bx)).unwrap();
        assert!(report.excluded.is_empty());
        assert_eq!(report.rows.len(), 3);
        for row in &report.rows {
            assert!(row.b_n.is_finite() && row.b_n > 0.0);
        }
        // brute-force recomputation of the winner
        let best = report
            .rows
            .iter()
            .min_by(|a, b| a.b_n.total_cmp(&b.b_n))
            .unwrap();
        assert_eq!(report.alpha_star, best.alpha);
        // determinism
        let again = adaptive_alpha(&cr, &model, &sample, &grid, Some(&bx)).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn tiny_samples_are_rejected() {
        let model = Model::normal_scale(0.0).unwrap();
        let cr = CressieRead::new(0.5).unwrap();
        assert!(adaptive_alpha(&cr, &model, &[1.0, 2.0], &[1.0], None).is_err());
    }
}
