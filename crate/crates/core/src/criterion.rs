//! The dual payoff of a Cressie-Read divergence and the criteria built on it.
//!
//! For a model family `p_theta`, an anchor parameter `alpha` (the "escort")
//! and generator index `gamma`, the payoff is
//!
//! ```text
//! m(theta, alpha, x) = J1(theta) - h(log p_alpha(x) - log p_theta(x))
//! ```
//!
//! where `h(d) = (exp(gamma * d) - 1) / gamma` (with the obvious limits at
//! `gamma = 0` and `gamma = 1`) and `J1` collects the x-free integral term.
//! Averaging `m` over a sample and maximising over `theta` estimates the
//! divergence from `p_alpha` to the data-generating law; the maximiser
//! estimates the parameter itself.  This module evaluates the payoff, its
//! first two `theta`-derivatives, the empirical criterion (sample mean of the
//! payoff), and the population counterparts used by the identity and
//! robustness checks.
//!
//! Numerical conventions:
//!
//! * all integrands are assembled in log space and exponentiated once, so
//!   ratios of far-tail densities never produce `inf * 0`;
//! * x-free integrals are cached per `theta` (exact bit-pattern key) behind a
//!   shared lock, so clones of a criterion — e.g. one per worker thread —
//!   reuse each other's quadrature work;
//! * a `theta` whose defining integral diverges is reported as an extended
//!   value, not an error: the pointwise payoff is `+inf` while the empirical
//!   and population criteria report `-inf` so maximisers skip that `theta`.
//!   Derivatives have no meaningful extended value there and return
//!   [`Error::Divergent`].

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::divergence::CressieRead;
use crate::error::{Error, Result};
use crate::models::Model;
use crate::num::quadrature::{integrate_real_line, QuadratureSettings};

/// Caches for the x-free integral terms, keyed by the bit pattern of `theta`.
///
/// `j1` stores `+inf` as the divergence marker; `c` and `m2` are only ever
/// populated for convergent `theta` (their integrals diverge exactly when
/// `j1`'s does).
#[derive(Default)]
struct Caches {
    j1: HashMap<u64, f64>,
    c: HashMap<u64, f64>,
    m2: HashMap<u64, f64>,
}

/// Evaluator for the dual payoff `m(theta, alpha, x)` of a fixed generator,
/// model family and escort parameter `alpha`.
///
/// Cloning is cheap and clones share the per-`theta` integral caches, so a
/// single instance can be cloned into worker threads.
#[derive(Clone)]
pub struct DualCriterion {
    divergence: CressieRead,
    model: Model,
    alpha: f64,
    settings: QuadratureSettings,
    caches: Arc<RwLock<Caches>>,
}

impl DualCriterion {
    /// Builds a criterion for the given generator, model family and escort
    /// parameter.  `alpha` must lie in the model's parameter space.
    pub fn new(divergence: CressieRead, model: Model, alpha: f64) -> Result<Self> {
        model.validate_param(alpha).map_err(|_| {
            Error::Domain(format!(
                "escort parameter alpha = {alpha} lies outside the parameter space of {}",
                model.name()
            ))
        })?;
        Ok(Self {
            divergence,
            model,
            alpha,
            settings: QuadratureSettings::default(),
            caches: Arc::new(RwLock::new(Caches::default())),
        })
    }

    /// Replaces the quadrature settings (fresh caches, since cached values
    /// depend on the tolerances they were computed with).
    pub fn with_settings(mut self, settings: QuadratureSettings) -> Self {
        self.settings = settings;
        self.caches = Arc::new(RwLock::new(Caches::default()));
        self
    }

    /// The generator this criterion evaluates.
    pub fn divergence(&self) -> &CressieRead {
        &self.divergence
    }

    /// The model family.
    pub fn model(&self) -> &Model {
        &self.model
    }

    /// The escort parameter `alpha`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub(crate) fn settings(&self) -> &QuadratureSettings {
        &self.settings
    }

    /// `log p_alpha(x) - log p_theta(x)`; inputs are assumed validated.
    pub(crate) fn log_ratio(&self, theta: f64, x: f64) -> f64 {
        self.model.log_density_raw(self.alpha, x) - self.model.log_density_raw(theta, x)
    }

    /// `h(d) = (exp(gamma * d) - 1) / gamma`, with exact limit branches.
    pub(crate) fn h(&self, d: f64) -> f64 {
        let g = self.divergence.effective_gamma();
        if g == 0.0 {
            d
        } else if g == 1.0 {
            d.exp_m1()
        } else {
            (g * d).exp_m1() / g
        }
    }

    /// The density-ratio weight `(p_alpha(x) / p_theta(x))^gamma`.
    pub(crate) fn weight(&self, theta: f64, x: f64) -> f64 {
        let g = self.divergence.effective_gamma();
        if g == 0.0 {
            1.0
        } else {
            (g * self.log_ratio(theta, x)).exp()
        }
    }

    fn cached(
        &self,
        pick: impl Fn(&Caches) -> &HashMap<u64, f64>,
        pick_mut: impl Fn(&mut Caches) -> &mut HashMap<u64, f64>,
        theta: f64,
        compute: impl FnOnce() -> Result<f64>,
    ) -> Result<f64> {
        let key = theta.to_bits();
        if let Some(v) = pick(&self.caches.read().expect("cache lock")).get(&key) {
            return Ok(*v);
        }
        let v = compute()?;
        pick_mut(&mut self.caches.write().expect("cache lock")).insert(key, v);
        Ok(v)
    }

    /// The x-free payoff term `J1(theta)`; `+inf` marks a divergent integral.
    pub(crate) fn j1_constant(&self, theta: f64) -> Result<f64> {
        self.cached(|c| &c.j1, |c| &mut c.j1, theta, || self.compute_j1(theta))
    }

    fn compute_j1(&self, theta: f64) -> Result<f64> {
        let g = self.divergence.effective_gamma();
        if g == 0.0 {
            return Ok(0.0);
        }
        let model = &self.model;
        let alpha = self.alpha;
        let raw = if g == 1.0 {
            // integral of log(p_alpha / p_theta) against p_alpha
            integrate_real_line(
                |y| {
                    let la = model.log_density_raw(alpha, y);
                    (la - model.log_density_raw(theta, y)) * la.exp()
                },
                &self.settings,
            )
        } else {
            // (integral of (p_alpha / p_theta)^(gamma - 1) against p_alpha - 1) / (gamma - 1)
            integrate_real_line(
                |y| {
                    let la = model.log_density_raw(alpha, y);
                    let d = la - model.log_density_raw(theta, y);
                    ((g - 1.0) * d + la).exp()
                },
                &self.settings,
            )
            .map(|i| (i - 1.0) / (g - 1.0))
        };
        match raw {
            Ok(v) => Ok(v),
            Err(Error::Divergent(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    }

    fn divergent_theta_error(&self, theta: f64) -> Error {
        Error::Divergent(format!(
            "criterion integral diverges at theta = {theta} (alpha = {}, gamma = {})",
            self.alpha,
            self.divergence.gamma()
        ))
    }

    /// The x-free derivative term `C(theta)`, the integral of
    /// `(p_alpha/p_theta)^gamma` against `d p_theta / d theta`.
    pub(crate) fn c_constant(&self, theta: f64) -> Result<f64> {
        if self.j1_constant(theta)?.is_infinite() {
            return Err(self.divergent_theta_error(theta));
        }
        self.cached(
            |c| &c.c,
            |c| &mut c.c,
            theta,
            || {
                let g = self.divergence.effective_gamma();
                if g == 0.0 {
                    // integral of d p_theta / d theta over the line: identically zero
                    return Ok(0.0);
                }
                let model = &self.model;
                let alpha = self.alpha;
                integrate_real_line(
                    |y| {
                        let lt = model.log_density_raw(theta, y);
                        let d = model.log_density_raw(alpha, y) - lt;
                        (g * d + lt).exp() * model.score_raw(theta, y)
                    },
                    &self.settings,
                )
            },
        )
    }

    /// The x-free curvature term `M2(theta)`, the integral of
    /// `(p_alpha/p_theta)^gamma (s' + (1 - gamma) s^2)` against `p_theta`.
    pub(crate) fn m2_constant(&self, theta: f64) -> Result<f64> {
        if self.j1_constant(theta)?.is_infinite() {
            return Err(self.divergent_theta_error(theta));
        }
        self.cached(
            |c| &c.m2,
            |c| &mut c.m2,
            theta,
            || {
                let g = self.divergence.effective_gamma();
                if g == 0.0 {
                    // integral of (s' + s^2) p_theta: the derivative of the
                    // score's zero mean, identically zero
                    return Ok(0.0);
                }
                let model = &self.model;
                let alpha = self.alpha;
                integrate_real_line(
                    |y| {
                        let lt = model.log_density_raw(theta, y);
                        let d = model.log_density_raw(alpha, y) - lt;
                        let s = model.score_raw(theta, y);
                        let sd = model.score_dtheta_raw(theta, y);
                        (g * d + lt).exp() * (sd + (1.0 - g) * s * s)
                    },
                    &self.settings,
                )
            },
        )
    }

    fn check_point(x: f64) -> Result<()> {
        if x.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "observation must be finite, got {x}"
            )))
        }
    }

    fn check_sample(sample: &[f64]) -> Result<()> {
        if sample.is_empty() {
            return Err(Error::Domain("sample must be nonempty".into()));
        }
        for &x in sample {
            Self::check_point(x)?;
        }
        Ok(())
    }

    /// The dual payoff `m(theta, alpha, x)`.  Reports `+inf` when the
    /// defining integral diverges at this `theta`.
    pub fn dual_payoff(&self, theta: f64, x: f64) -> Result<f64> {
        self.model.validate_param(theta)?;
        Self::check_point(x)?;
        let j1 = self.j1_constant(theta)?;
        if j1.is_infinite() {
            return Ok(f64::INFINITY);
        }
        Ok(j1 - self.h(self.log_ratio(theta, x)))
    }

    /// First `theta`-derivative of the payoff:
    /// `(p_alpha/p_theta)^gamma(x) s(theta, x) - C(theta)`.
    pub fn dual_payoff_dtheta(&self, theta: f64, x: f64) -> Result<f64> {
        self.model.validate_param(theta)?;
        Self::check_point(x)?;
        let c = self.c_constant(theta)?;
        Ok(self.weight(theta, x) * self.model.score_raw(theta, x) - c)
    }

    /// Second `theta`-derivative of the payoff:
    /// `(p_alpha/p_theta)^gamma(x) (s'(theta, x) - gamma s(theta, x)^2) - M2(theta)`.
    pub fn dual_payoff_d2theta(&self, theta: f64, x: f64) -> Result<f64> {
        self.model.validate_param(theta)?;
        Self::check_point(x)?;
        let m2 = self.m2_constant(theta)?;
        let g = self.divergence.effective_gamma();
        let s = self.model.score_raw(theta, x);
        let sd = self.model.score_dtheta_raw(theta, x);
        Ok(self.weight(theta, x) * (sd - g * s * s) - m2)
    }

    /// Sample mean of the payoff.  Reports `-inf` (so maximisers skip this
    /// `theta`) when the defining integral diverges.
    pub fn empirical_criterion(&self, theta: f64, sample: &[f64]) -> Result<f64> {
        Self::check_sample(sample)?;
        self.empirical_criterion_prechecked(theta, sample)
    }

    /// [`Self::empirical_criterion`] without the per-observation finiteness
    /// scan, for callers that validated the sample once up front.
    pub(crate) fn empirical_criterion_prechecked(&self, theta: f64, sample: &[f64]) -> Result<f64> {
        self.model.validate_param(theta)?;
        let j1 = self.j1_constant(theta)?;
        if j1.is_infinite() {
            return Ok(f64::NEG_INFINITY);
        }
        let mut acc = 0.0;
        for &x in sample {
            acc += self.h(self.log_ratio(theta, x));
        }
        Ok(j1 - acc / sample.len() as f64)
    }

    /// Sample mean of the payoff's first derivative — the estimating-equation
    /// residual whose root is the criterion's interior maximiser.
    pub fn estimating_residual(&self, theta: f64, sample: &[f64]) -> Result<f64> {
        Self::check_sample(sample)?;
        self.estimating_residual_prechecked(theta, sample)
    }

    pub(crate) fn estimating_residual_prechecked(&self, theta: f64, sample: &[f64]) -> Result<f64> {
        self.model.validate_param(theta)?;
        let c = self.c_constant(theta)?;
        let mut acc = 0.0;
        for &x in sample {
            acc += self.weight(theta, x) * self.model.score_raw(theta, x);
        }
        Ok(acc / sample.len() as f64 - c)
    }

    /// Sample mean of the payoff's second derivative (the residual's slope).
    pub fn estimating_residual_dtheta(&self, theta: f64, sample: &[f64]) -> Result<f64> {
        Self::check_sample(sample)?;
        self.estimating_residual_dtheta_prechecked(theta, sample)
    }

    pub(crate) fn estimating_residual_dtheta_prechecked(
        &self,
        theta: f64,
        sample: &[f64],
    ) -> Result<f64> {
        self.model.validate_param(theta)?;
        let m2 = self.m2_constant(theta)?;
        let g = self.divergence.effective_gamma();
        let mut acc = 0.0;
        for &x in sample {
            let s = self.model.score_raw(theta, x);
            let sd = self.model.score_dtheta_raw(theta, x);
            acc += self.weight(theta, x) * (sd - g * s * s);
        }
        Ok(acc / sample.len() as f64 - m2)
    }

    /// Expectation of the payoff under `p_theta0` — the population criterion
    /// whose unique maximiser over `theta` is `theta0` itself, with maximum
    /// equal to the divergence from `p_alpha` to `p_theta0`.  Reports `-inf`
    /// at `theta` where the x-free integral diverges or the payoff fails to
    /// be integrable under `p_theta0`: either way the variational lower
    /// bound is invalid there and a maximiser must skip the point.
    pub fn population_criterion(&self, theta: f64, theta0: f64) -> Result<f64> {
        self.model.validate_param(theta)?;
        self.model.validate_param(theta0)?;
        let j1 = self.j1_constant(theta)?;
        if j1.is_infinite() {
            return Ok(f64::NEG_INFINITY);
        }
        let g = self.divergence.effective_gamma();
        let model = &self.model;
        let alpha = self.alpha;
        // expectation of h(log p_alpha - log p_theta) under p_theta0
        let mean_h = if g == 0.0 {
            integrate_real_line(
                |y| {
                    let l0 = model.log_density_raw(theta0, y);
                    (model.log_density_raw(alpha, y) - model.log_density_raw(theta, y)) * l0.exp()
                },
                &self.settings,
            )
        } else if g == 1.0 {
            // expm1(d) p_theta0 integrates to (p_alpha/p_theta) p_theta0 - p_theta0
            integrate_real_line(
                |y| {
                    let l0 = model.log_density_raw(theta0, y);
                    let d = model.log_density_raw(alpha, y) - model.log_density_raw(theta, y);
                    (d + l0).exp() - l0.exp()
                },
                &self.settings,
            )
        } else {
            integrate_real_line(
                |y| {
                    let l0 = model.log_density_raw(theta0, y);
                    let d = model.log_density_raw(alpha, y) - model.log_density_raw(theta, y);
                    (g * d + l0).exp()
                },
                &self.settings,
            )
            .map(|grand| (grand - 1.0) / g)
        };
        match mean_h {
            Ok(v) => Ok(j1 - v),
            Err(Error::Divergent(_)) => Ok(f64::NEG_INFINITY),
            Err(other) => Err(other),
        }
    }

    /// Expectation of the payoff's first derivative under `p_theta0`; its
    /// root in `theta` is `theta0`.
    pub fn population_residual(&self, theta: f64, theta0: f64) -> Result<f64> {
        self.model.validate_param(theta)?;
        self.model.validate_param(theta0)?;
        let c = self.c_constant(theta)?;
        let g = self.divergence.effective_gamma();
        let model = &self.model;
        let alpha = self.alpha;
        let weighted_score = integrate_real_line(
            |y| {
                let l0 = model.log_density_raw(theta0, y);
                let wexp = if g == 0.0 {
                    l0
                } else {
                    g * (model.log_density_raw(alpha, y) - model.log_density_raw(theta, y)) + l0
                };
                wexp.exp() * model.score_raw(theta, y)
            },
            &self.settings,
        )?;
        Ok(weighted_score - c)
    }

    /// The divergence from `p_alpha` to `p_theta0`, computed directly as the
    /// integral of `phi(p_alpha / p_theta0) p_theta0`.  Reports `+inf` when
    /// the integral diverges.
    pub fn population_divergence(&self, theta0: f64) -> Result<f64> {
        self.model.validate_param(theta0)?;
        let g = self.divergence.effective_gamma();
        let model = &self.model;
        let alpha = self.alpha;
        let raw = if g == 0.0 {
            // (-d + r - 1) p0 = -d p0 + p_alpha - p0
            integrate_real_line(
                |y| {
                    let l0 = model.log_density_raw(theta0, y);
                    let la = model.log_density_raw(alpha, y);
                    (l0 - la) * l0.exp() + la.exp() - l0.exp()
                },
                &self.settings,
            )
        } else if g == 1.0 {
            // (r d - r + 1) p0 = d p_alpha - p_alpha + p0
            integrate_real_line(
                |y| {
                    let l0 = model.log_density_raw(theta0, y);
                    let la = model.log_density_raw(alpha, y);
                    (la - l0 - 1.0) * la.exp() + l0.exp()
                },
                &self.settings,
            )
        } else {
            // (r^g - g r + g - 1) p0 / (g (g - 1))
            integrate_real_line(
                |y| {
                    let l0 = model.log_density_raw(theta0, y);
                    let la = model.log_density_raw(alpha, y);
                    let d = la - l0;
                    ((g * d + l0).exp() - g * la.exp() + (g - 1.0) * l0.exp()) / (g * (g - 1.0))
                },
                &self.settings,
            )
        };
        match raw {
            Ok(v) => Ok(v),
            Err(Error::Divergent(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    }
}
