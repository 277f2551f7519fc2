//! The replication engine: paired Monte Carlo runs of several estimators
//! over deterministic per-replication seeds, reduced to bias/MSE summaries.

use dualdiv_core::estimators::{dphi_estimate, mdpde, mle};
use dualdiv_core::{CressieRead, DualCriterion, Model, SearchBox};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contamination::{draw_contaminated, ContaminationSpec};
use crate::{Error, Result};

/// One estimator entry in a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EstimatorSpec {
    /// Dual divergence estimator with a fixed escort.
    Dphi { gamma: f64, alpha: f64 },
    /// Minimum density power divergence estimator.
    Mdpde { beta: f64 },
    /// Maximum likelihood.
    Mle,
}

impl EstimatorSpec {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorSpec::Dphi { .. } => "dphi",
            EstimatorSpec::Mdpde { .. } => "mdpde",
            EstimatorSpec::Mle => "mle",
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            EstimatorSpec::Dphi { gamma, .. } => Some(*gamma),
            _ => None,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            EstimatorSpec::Dphi { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self {
            EstimatorSpec::Mdpde { beta } => Some(*beta),
            _ => None,
        }
    }
}

/// A complete Monte Carlo experiment description.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub model: Model,
    pub theta0: f64,
    /// Sample size per replication.
    pub n: usize,
    /// Number of replications.
    pub n_s: usize,
    /// Root of the per-replication seed derivation.
    pub base_seed: u64,
    pub estimators: Vec<EstimatorSpec>,
    pub contamination: Option<ContaminationSpec>,
    /// Search region handed to every box-based estimator (model default
    /// around each estimator's own anchor when absent).
    pub search_box: Option<SearchBox>,
}

impl McConfig {
    /// Validates everything except the estimator list (level curves run
    /// without one).
    pub fn validate(&self) -> Result<()> {
        self.model.validate_param(self.theta0)?;
        if self.n < 2 {
            return Err(Error::Config(format!(
                "sample size must be at least 2, got {}",
                self.n
            )));
        }
        if self.n_s < 1 {
            return Err(Error::Config("replication count must be at least 1".into()));
        }
        if let Some(spec) = &self.contamination {
            spec.validate(&self.model, self.theta0, self.n)?;
        }
        Ok(())
    }
}

/// Bias/MSE summary for one estimator over the replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub label: String,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub mean_estimate: f64,
    pub bias_hat: f64,
    pub mse_hat: f64,
    /// Standard error of `mean_estimate`: sd of the estimates over root
    /// replication count.
    pub mc_standard_error: f64,
    /// Replications whose estimation failed (excluded from the statistics).
    pub failures: usize,
    /// False when more than 1% of replications failed.
    pub valid: bool,
}

/// Seed for replication `replication` of a run rooted at `base_seed`
/// (splitmix-style mixing, so seeds are decorrelated and scheduling-free).
pub fn derive_seed(base_seed: u64, replication: u64) -> u64 {
    let mut z = base_seed.wrapping_add(replication.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A worker pool sized from `DUALDIV_THREADS` (0 or unset: one per core).
pub(crate) fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var("DUALDIV_THREADS") {
        Err(_) => 0,
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            Error::Config(format!("DUALDIV_THREADS must be a non-negative integer, got {v:?}"))
        })?,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

enum Runner {
    Dphi(DualCriterion),
    Mdpde(f64),
    Mle,
}

impl Runner {
    fn build(spec: &EstimatorSpec, model: &Model) -> Result<Self> {
        Ok(match *spec {
            EstimatorSpec::Dphi { gamma, alpha } => Runner::Dphi(DualCriterion::new(
                CressieRead::new(gamma)?,
                model.clone(),
                alpha,
            )?),
            EstimatorSpec::Mdpde { beta } => {
                if !(beta.is_finite() && beta > 0.0) {
                    return Err(Error::Config(format!(
                        "density power tuning must be positive, got {beta}"
                    )));
                }
                Runner::Mdpde(beta)
            }
            EstimatorSpec::Mle => Runner::Mle,
        })
    }

    fn estimate(&self, model: &Model, sample: &[f64], bx: Option<&SearchBox>) -> Option<f64> {
        let r = match self {
            Runner::Dphi(criterion) => dphi_estimate(criterion, sample, bx),
            Runner::Mdpde(beta) => mdpde(model, sample, *beta, bx),
            Runner::Mle => mle(model, sample, bx),
        };
        r.ok().map(|e| e.estimate)
    }
}

/// Runs the experiment: every estimator sees the same sample in each
/// replication, replications run concurrently, and the reduction order is
/// fixed by replication index, so results depend only on the configuration.
pub fn run_mc(cfg: &McConfig) -> Result<Vec<McSummary>> {
    cfg.validate()?;
    if cfg.estimators.is_empty() {
        return Err(Error::Config("no estimators configured".into()));
    }
    let runners = cfg
        .estimators
        .iter()
        .map(|s| Runner::build(s, &cfg.model))
        .collect::<Result<Vec<_>>>()?;

    let pool = thread_pool()?;
    let per_rep: Vec<Vec<Option<f64>>> = pool.install(|| {
        (0..cfg.n_s as u64)
            .into_par_iter()
            .map(|r| {
                let seed = derive_seed(cfg.base_seed, r);
                match draw_contaminated(
                    &cfg.model,
                    cfg.theta0,
                    cfg.contamination.as_ref(),
                    cfg.n,
                    seed,
                ) {
                    Err(_) => vec![None; runners.len()],
                    Ok(sample) => runners
                        .iter()
                        .map(|rn| rn.estimate(&cfg.model, &sample, cfg.search_box.as_ref()))
                        .collect(),
                }
            })
            .collect()
    });

    cfg.estimators
        .iter()
        .enumerate()
        .map(|(j, spec)| {
            let estimates: Vec<f64> = per_rep.iter().filter_map(|row| row[j]).collect();
            summarize(spec, cfg, &estimates)
        })
        .collect()
}

fn summarize(spec: &EstimatorSpec, cfg: &McConfig, estimates: &[f64]) -> Result<McSummary> {
    let k = estimates.len();
    if k == 0 {
        return Err(Error::Config(format!(
            "estimator {} failed in every replication",
            spec.label()
        )));
    }
    let failures = cfg.n_s - k;
    let kf = k as f64;
    let mean = estimates.iter().sum::<f64>() / kf;
    let bias = mean - cfg.theta0;
    let mse = estimates.iter().map(|e| (e - cfg.theta0).powi(2)).sum::<f64>() / kf;
    let sd = if k > 1 {
        (estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (kf - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(McSummary {
        label: spec.label().to_string(),
        gamma: spec.gamma(),
        alpha: spec.alpha(),
        beta: spec.beta(),
        mean_estimate: mean,
        bias_hat: bias,
        mse_hat: mse,
        mc_standard_error: sd / kf.sqrt(),
        failures,
        valid: (failures as f64) <= 0.01 * cfg.n_s as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> McConfig {
        McConfig {
            model: Model::normal_scale(0.0).unwrap(),
            theta0: 1.0,
            n: 40,
            n_s: 24,
            base_seed: 7,
            estimators: vec![
                EstimatorSpec::Mle,
                EstimatorSpec::Dphi {
                    gamma: -0.5,
                    alpha: 1.5,
                },
            ],
            contamination: None,
            search_box: Some(SearchBox::new(0.3, 3.0).unwrap()),
        }
    }

    #[test]
    fn summaries_are_deterministic_and_coherent() {
        let cfg = small_cfg();
        let a = run_mc(&cfg).unwrap();
        let b = run_mc(&cfg).unwrap();
        assert_eq!(a, b);
        for s in &a {
            assert!(s.valid && s.failures == 0);
            assert!(s.mean_estimate.is_finite());
            assert!(s.mse_hat >= s.bias_hat * s.bias_hat - 1e-12);
            assert!(s.mc_standard_error > 0.0);
            assert!((s.mean_estimate - 1.0).abs() < 0.2);
        }
        assert_eq!(a[0].label, "mle");
        assert_eq!(a[1].label, "dphi");
        assert_eq!(a[1].gamma, Some(-0.5));
        assert_eq!(a[1].alpha, Some(1.5));
        assert_eq!(a[1].beta, None);
    }

    #[test]
    fn seed_derivation_decorrelates_replications() {
        let s: Vec<u64> = (0..4).map(|r| derive_seed(42, r)).collect();
        for i in 0..s.len() {
            for j in 0..i {
                assert_ne!(s[i], s[j]);
            }
        }
        assert_eq!(derive_seed(42, 1), derive_seed(42, 1));
        assert_ne!(derive_seed(42, 1), derive_seed(43, 1));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = small_cfg();
        cfg.n = 1;
        assert!(run_mc(&cfg).is_err());
        let mut cfg = small_cfg();
        cfg.estimators.clear();
        assert!(run_mc(&cfg).is_err());
        let mut cfg = small_cfg();
        cfg.contamination = Some(ContaminationSpec::FixedCount {
            count: 40,
            point: 10.0,
        });
        assert!(run_mc(&cfg).is_err());
    }
}
