//! Empirical test calibration: replicated samples are run through the
//! divergence test once each, and the rejection frequency is read off
//! against a whole grid of nominal levels.

use dualdiv_core::estimators::dphi_estimate;
use dualdiv_core::num::special::normal_quantile;
use dualdiv_core::robustness::InfluenceProfile;
use dualdiv_core::testing::TestConfig;
use dualdiv_core::IfTarget;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contamination::draw_contaminated;
use crate::mc::{derive_seed, thread_pool, McConfig};
use crate::{Error, Result};

/// Empirical rejection rate at one nominal level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelPoint {
    pub alpha0: f64,
    pub actual: f64,
    pub relative_error: f64,
}

/// The empirical level of the divergence test at each nominal level in
/// `nominal_levels`, over `cfg.n_s` replications drawn per `cfg`.
///
/// The statistic does not depend on the nominal level, so each replication
/// is estimated once and compared against every level's critical value.
/// `cfg` controls the sampling law (including contamination and the search
/// box); `test` fixes the null hypothesis and the divergence.  More than 1%
/// failed replications invalidates the whole curve.
pub fn level_curve(
    cfg: &McConfig,
    test: &TestConfig,
    nominal_levels: &[f64],
) -> Result<Vec<LevelPoint>> {
    cfg.validate()?;
    if cfg.n != test.sample_size() {
        return Err(Error::Config(format!(
            "sample sizes disagree: config draws {}, test expects {}",
            cfg.n,
            test.sample_size()
        )));
    }
    if cfg.model != *test.criterion().model() {
        return Err(Error::Config(
            "the sampling model and the test's model must agree".into(),
        ));
    }
    if nominal_levels.is_empty() {
        return Err(Error::Config("no nominal levels given".into()));
    }
    for &a0 in nominal_levels {
        if !(a0.is_finite() && a0 > 0.0 && a0 < 1.0) {
            return Err(Error::Config(format!(
                "nominal levels must lie in (0, 1), got {a0}"
            )));
        }
    }

    // null constants are replication-free: compute them once
    let criterion = test.criterion();
    let profile = InfluenceProfile::new(criterion, IfTarget::Divergence, test.theta0())?;
    let phi0 = profile.population_divergence();
    let s = profile.asymptotic_variance().sqrt();
    if !(s.is_finite() && s > 1e-12) {
        return Err(Error::Config(format!(
            "degenerate null dispersion {s}: the test statistic is not defined"
        )));
    }
    let root_n = (cfg.n as f64).sqrt();

    let pool = thread_pool()?;
    let stats: Vec<Option<f64>> = pool.install(|| {
        (0..cfg.n_s as u64)
            .into_par_iter()
            .map(|r| {
                let seed = derive_seed(cfg.base_seed, r);
                let sample = draw_contaminated(
                    &cfg.model,
                    cfg.theta0,
                    cfg.contamination.as_ref(),
                    cfg.n,
                    seed,
                )
                .ok()?;
                let est = dphi_estimate(criterion, &sample, cfg.search_box.as_ref()).ok()?;
                Some(root_n * (est.criterion_value - phi0) / s)
            })
            .collect()
    });

    let kept: Vec<f64> = stats.iter().flatten().copied().collect();
    let failures = cfg.n_s - kept.len();
    if (failures as f64) > 0.01 * cfg.n_s as f64 {
        return Err(Error::Config(format!(
            "{failures} of {} replications failed; the curve would be biased",
            cfg.n_s
        )));
    }

    nominal_levels
        .iter()
        .map(|&alpha0| {
            let q = normal_quantile(1.0 - alpha0 / 2.0)?;
            let rejections = kept.iter().filter(|t| t.abs() >= q).count();
            let actual = rejections as f64 / kept.len() as f64;
            Ok(LevelPoint {
                alpha0,
                actual,
                relative_error: (actual - alpha0) / alpha0,
            })
        })
        .collect()
}
