//! Two-sided hypothesis tests built on the plug-in divergence estimate.
//!
//! For a simple null `theta = theta0`, the statistic is
//! `sqrt(n) (phi_hat - phi0) / s`, where `phi_hat` is the maximised empirical
//! criterion, `phi0` the population divergence from the escort to `p_theta0`,
//! and `s^2` the asymptotic variance of the divergence functional (the second
//! moment of its influence function under the null).  The null law is
//! standard normal, so the test rejects when `|statistic|` reaches the
//! `1 - alpha0/2` normal quantile.
//!
//! Local power and contaminated level are reported through their first-order
//! asymptotic formulas: under a parameter drift `delta / sqrt(n)` and a
//! contamination mass `eps / sqrt(n)` at a point `x`, the statistic's mean
//! shifts by `(delta c + eps IF(x)) / s` and the approximations below push
//! that shift through one tail of the normal.  These are asymptotic
//! expansions evaluated literally: they are accurate for small shifts and are
//! not clipped to `[0, 1]`.

use crate::criterion::DualCriterion;
use crate::error::{Error, Result};
use crate::estimators::{dphi_estimate, SearchBox};
use crate::num::quadrature::integrate_real_line;
use crate::num::special::{normal_cdf, normal_pdf, normal_quantile};
use crate::robustness::{IfTarget, InfluenceProfile};

/// A configured divergence test of `theta = theta0` at nominal level
/// `alpha0` for samples of size `sample_size_n`.
pub struct TestConfig {
    criterion: DualCriterion,
    theta0: f64,
    alpha0: f64,
    sample_size_n: usize,
}

/// Everything the decision depends on.
#[derive(Debug, Clone)]
pub struct TestOutcome {
    /// `sqrt(n) (phi_hat - phi0) / s`.
    pub statistic: f64,
    /// The two-sided normal critical value for the nominal level.
    pub critical_value: f64,
    /// The upper rejection threshold on the divergence scale:
    /// `phi0 + s q / sqrt(n)`.
    pub threshold_k_n: f64,
    /// True when `|statistic| >= critical_value` (closed rejection region).
    pub reject: bool,
    /// The maximised empirical criterion `phi_hat`.
    pub divergence_estimate: f64,
    /// The maximising parameter.
    pub theta_hat: f64,
}

/// First-order local power, with the constants that produced it.
#[derive(Debug, Clone, Copy)]
pub struct PowerValue {
    pub value: f64,
    /// The drift constant: covariance of the payoff and the score at the null.
    pub c: f64,
    /// The dispersion of the divergence functional.
    pub s: f64,
}

/// Contaminated level: the one-tail-shift value and its linearisation.
#[derive(Debug, Clone, Copy)]
pub struct LevelValue {
    pub exact: f64,
    pub first_order: f64,
}

impl TestConfig {
    /// Validates and stores a test configuration.  The escort must differ
    /// from the null parameter: at `alpha = theta0` the divergence functional
    /// degenerates (zero dispersion) and no test exists.
    pub fn new(
        criterion: DualCriterion,
        theta0: f64,
        alpha0: f64,
        sample_size_n: usize,
    ) -> Result<Self> {
        criterion.model().validate_param(theta0)?;
        if criterion.alpha() == theta0 {
            return Err(Error::Domain(format!(
                "degenerate escort: alpha = theta0 = {theta0} gives a test statistic with zero dispersion"
            )));
        }
        if !(alpha0.is_finite() && alpha0 > 0.0 && alpha0 < 1.0) {
            return Err(Error::Domain(format!(
                "nominal level must lie in (0, 1), got {alpha0}"
            )));
        }
        if sample_size_n == 0 {
            return Err(Error::Domain("sample size must be at least 1".into()));
        }
        Ok(Self {
            criterion,
            theta0,
            alpha0,
            sample_size_n,
        })
    }

    pub fn criterion(&self) -> &DualCriterion {
        &self.criterion
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size_n
    }

    /// The two-sided normal critical value `q` at the nominal level.
    pub fn critical_value(&self) -> Result<f64> {
        normal_quantile(1.0 - 0.5 * self.alpha0)
    }

    /// Null divergence `phi0` and dispersion `s` of the divergence functional.
    fn null_constants(&self) -> Result<(f64, f64)> {
        let profile = InfluenceProfile::new(&self.criterion, IfTarget::Divergence, self.theta0)?;
        let phi0 = profile.population_divergence();
        let var = profile.asymptotic_variance();
        if !(phi0.is_finite() && var.is_finite()) {
            return Err(Error::Divergent(format!(
                "divergence functional is not asymptotically normal at theta0 = {} (alpha = {})",
                self.theta0,
                self.criterion.alpha()
            )));
        }
        let s = var.sqrt();
        if s <= 1e-12 {
            return Err(Error::Numerical(format!(
                "degenerate test: dispersion {s} vanishes at theta0 = {}",
                self.theta0
            )));
        }
        Ok((phi0, s))
    }

    /// Influence of an observation at `x` on the divergence functional.
    fn divergence_influence(&self, x: f64) -> Result<f64> {
        Ok(self.criterion.dual_payoff(self.theta0, x)? - self.criterion.population_divergence(self.theta0)?)
    }

    /// The drift constant `c`: the null covariance of payoff and score.
    fn drift_constant(&self) -> Result<f64> {
        let model = self.criterion.model().clone();
        let theta0 = self.theta0;
        let j1 = self.criterion.j1_constant(theta0)?;
        if !j1.is_finite() {
            return Err(Error::Divergent(format!(
                "criterion diverges at the null theta0 = {theta0}"
            )));
        }
        let c = self.criterion.clone();
        integrate_real_line(
            |y| {
                let m = j1 - c.h(c.log_ratio(theta0, y));
                m * model.score_raw(theta0, y) * model.log_density_raw(theta0, y).exp()
            },
            self.criterion.settings(),
        )
    }
}

/// Closed rejection region: reject when the magnitude reaches the critical value.
pub(crate) fn rejects(statistic: f64, critical_value: f64) -> bool {
    statistic.abs() >= critical_value
}

/// Runs the divergence test on a sample, maximising over the model-default
/// search box centred on the escort.
pub fn test_statistic(config: &TestConfig, sample: &[f64]) -> Result<TestOutcome> {
    test_statistic_with_box(config, sample, None)
}

/// [`test_statistic`] with an explicit search box for the inner maximisation.
pub fn test_statistic_with_box(
    config: &TestConfig,
    sample: &[f64],
    box_: Option<&SearchBox>,
) -> Result<TestOutcome> {
    if sample.len() != config.sample_size_n {
        return Err(Error::Domain(format!(
            "configured for n = {}, got a sample of {}",
            config.sample_size_n,
            sample.len()
        )));
    }
    let (phi0, s) = config.null_constants()?;
    let q = config.critical_value()?;
    let est = dphi_estimate(&config.criterion, sample, box_)?;
    let n = config.sample_size_n as f64;
    let statistic = n.sqrt() * (est.criterion_value - phi0) / s;
    Ok(TestOutcome {
        statistic,
        critical_value: q,
        threshold_k_n: phi0 + s * q / n.sqrt(),
        reject: rejects(statistic, q),
        divergence_estimate: est.criterion_value,
        theta_hat: est.estimate,
    })
}

/// The finite-`n` rejection threshold on the divergence scale.
pub fn k_n(config: &TestConfig) -> Result<f64> {
    let (phi0, s) = config.null_constants()?;
    let q = config.critical_value()?;
    Ok(phi0 + s * q / (config.sample_size_n as f64).sqrt())
}

/// First-order power under a local drift `delta / sqrt(n)` combined with
/// contamination `eps / sqrt(n)` at `x`.  `eps = 0` gives pure-drift power;
/// `delta = 0` recovers the contaminated level.
pub fn asymptotic_power(config: &TestConfig, delta: f64, eps: f64, x: f64) -> Result<PowerValue> {
    if !delta.is_finite() {
        return Err(Error::Domain(format!("drift must be finite, got {delta}")));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::Domain(format!(
            "contamination mass must be finite and nonnegative, got {eps}"
        )));
    }
    if eps > 0.0 && !x.is_finite() {
        return Err(Error::Domain(format!(
            "contamination point must be finite, got {x}"
        )));
    }
    let (_, s) = config.null_constants()?;
    let c = config.drift_constant()?;
    let q = config.critical_value()?;
    let shift = if eps > 0.0 {
        (delta * c + eps * config.divergence_influence(x)?) / s
    } else {
        delta * c / s
    };
    let value = 2.0 - 2.0 * normal_cdf(q - shift);
    Ok(PowerValue { value, c, s })
}

/// Actual level under contamination `eps / sqrt(n)` at `x`: the one-tail
/// shift evaluation and its linearisation in `eps` around the nominal level.
pub fn asymptotic_level(config: &TestConfig, eps: f64, x: f64) -> Result<LevelValue> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::Domain(format!(
            "contamination mass must be finite and nonnegative, got {eps}"
        )));
    }
    if eps > 0.0 && !x.is_finite() {
        return Err(Error::Domain(format!(
            "contamination point must be finite, got {x}"
        )));
    }
    let (_, s) = config.null_constants()?;
    let q = config.critical_value()?;
    let influence_ratio = if eps > 0.0 {
        config.divergence_influence(x)? / s
    } else {
        0.0
    };
    let exact = 2.0 - 2.0 * normal_cdf(q - eps * influence_ratio);
    let first_order = config.alpha0 + 2.0 * eps * normal_pdf(q) * influence_ratio;
    Ok(LevelValue { exact, first_order })
}
