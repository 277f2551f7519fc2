//! Contaminated sampling schemes: a fixed number of planted outliers, or a
//! per-observation mixture with a root-n contamination rate and a root-n
//! parameter drift.

use dualdiv_core::{Model, Rng};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How a replication sample departs from the clean model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ContaminationSpec {
    /// `n - count` model draws followed by `count` copies of `point`.
    FixedCount { count: usize, point: f64 },
    /// Each observation is `point` with probability `epsilon / sqrt(n)` and
    /// otherwise a draw from the model at `theta0 + drift / sqrt(n)`.
    Mixture { epsilon: f64, point: f64, drift: f64 },
}

impl ContaminationSpec {
    /// Checks the scheme against a sample size and a base parameter.
    pub fn validate(&self, model: &Model, theta0: f64, n: usize) -> Result<()> {
        match *self {
            ContaminationSpec::FixedCount { count, point } => {
                if count >= n {
                    return Err(Error::Config(format!(
                        "fixed-count contamination needs count < n, got {count} of {n}"
                    )));
                }
                if !point.is_finite() {
                    return Err(Error::Config(format!(
                        "contamination point must be finite, got {point}"
                    )));
                }
            }
            ContaminationSpec::Mixture {
                epsilon,
                point,
                drift,
            } => {
                if !point.is_finite() || !drift.is_finite() {
                    return Err(Error::Config(format!(
                        "mixture point and drift must be finite, got {point} and {drift}"
                    )));
                }
                let rate = epsilon / (n as f64).sqrt();
                if !(epsilon.is_finite() && epsilon >= 0.0 && rate < 1.0) {
                    return Err(Error::Config(format!(
                        "mixture rate epsilon/sqrt(n) must lie in [0, 1), got {rate}"
                    )));
                }
                model.validate_param(theta0 + drift / (n as f64).sqrt())?;
            }
        }
        Ok(())
    }
}

/// A deterministic sample of size `n`, contaminated per `spec` (`None` means
/// a clean sample from `P_theta0`).
pub fn draw_contaminated(
    model: &Model,
    theta0: f64,
    spec: Option<&ContaminationSpec>,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let spec = match spec {
        None => return Ok(model.sample(theta0, n, seed)?),
        Some(s) => s,
    };
    spec.validate(model, theta0, n)?;
    let mut rng = Rng::from_seed(seed);
    match *spec {
        ContaminationSpec::FixedCount { count, point } => {
            let mut sample = Vec::with_capacity(n);
            for _ in 0..n - count {
                sample.push(model.draw(theta0, &mut rng)?);
            }
            sample.extend(std::iter::repeat(point).take(count));
            Ok(sample)
        }
        ContaminationSpec::Mixture {
            epsilon,
            point,
            drift,
        } => {
            let root_n = (n as f64).sqrt();
            let rate = epsilon / root_n;
            let theta_n = theta0 + drift / root_n;
            (0..n)
                .map(|_| {
                    if rng.next_uniform() < rate {
                        Ok(point)
                    } else {
                        Ok(model.draw(theta_n, &mut rng)?)
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_count_zero_is_the_clean_sample() {
        let model = Model::normal_scale(0.0).unwrap();
        let spec = ContaminationSpec::FixedCount {
            count: 0,
            point: 10.0,
        };
        let clean = model.sample(1.0, 50, 7).unwrap();
        let drawn = draw_contaminated(&model, 1.0, Some(&spec), 50, 7).unwrap();
        assert_eq!(clean, drawn);
    }

    #[test]
    fn fixed_count_appends_exact_copies() {
        let model = Model::normal_scale(0.0).unwrap();
        let spec = ContaminationSpec::FixedCount {
            count: 2,
            point: 10.0,
        };
        let drawn = draw_contaminated(&model, 1.0, Some(&spec), 100, 11).unwrap();
        assert_eq!(drawn.len(), 100);
        assert_eq!(&drawn[98..], &[10.0, 10.0]);
        assert!(drawn[..98].iter().all(|&x| x != 10.0));
    }

    #[test]
    fn fixed_count_requires_room_for_model_draws() {
        let model = Model::normal_scale(0.0).unwrap();
        let spec = ContaminationSpec::FixedCount {
            count: 10,
            point: 10.0,
        };
        assert!(draw_contaminated(&model, 1.0, Some(&spec), 10, 1).is_err());
    }

    #[test]
    fn mixture_rate_matches_binomial_expectation() {
        // pool 10 batches of n = 10^4: the outlier fraction sits within
        // three binomial standard errors of epsilon / sqrt(n)
        let model = Model::normal_scale(0.0).unwrap();
        let n = 10_000;
        let eps = 2.0;
        let spec = ContaminationSpec::Mixture {
            epsilon: eps,
            point: 10.0,
            drift: 0.0,
        };
        let mut hits = 0usize;
        let mut total = 0usize;
        for seed in 0..10 {
            let s = draw_contaminated(&model, 1.0, Some(&spec), n, 1000 + seed).unwrap();
            hits += s.iter().filter(|&&x| x == 10.0).count();
            total += n;
        }
        let rate = eps / (n as f64).sqrt();
        let se = (rate * (1.0 - rate) / total as f64).sqrt();
        let observed = hits as f64 / total as f64;
        assert!(
            (observed - rate).abs() < 3.0 * se,
            "observed {observed}, expected {rate} +- {}",
            3.0 * se
        );
    }

    #[test]
    fn mixture_rate_must_stay_below_one() {
        let model = Model::normal_scale(0.0).unwrap();
        let spec = ContaminationSpec::Mixture {
            epsilon: 4.0,
            point: 10.0,
            drift: 0.0,
        };
        // n = 9: rate = 4/3 >= 1
        assert!(draw_contaminated(&model, 1.0, Some(&spec), 9, 1).is_err());
    }

    #[test]
    fn deterministic_in_the_seed() {
        let model = Model::cauchy();
        let spec = ContaminationSpec::Mixture {
            epsilon: 1.0,
            point: -3.0,
            drift: 0.5,
        };
        let a = draw_contaminated(&model, 0.0, Some(&spec), 200, 99).unwrap();
        let b = draw_contaminated(&model, 0.0, Some(&spec), 200, 99).unwrap();
        assert_eq!(a, b);
    }
}
