//! Influence functions, gross-error sensitivity, and asymptotic efficiency
//! for the dual-criterion functionals.
//!
//! Three functionals are profiled at a reference parameter `theta0`:
//!
//! * the parameter estimator (argmax of the criterion), with influence
//!   function `S^-1 ((p_alpha/p_theta0)^gamma(x) s(theta0, x) - B)`;
//! * the plug-in divergence estimate, with influence function
//!   `m(theta0, alpha, x) - phi(alpha, theta0)`;
//! * the escort minimiser, whose influence function reduces to the maximum
//!   likelihood one, `s(theta0, x) / I(theta0)`.
//!
//! Gross-error sensitivity is reported with an operational boundedness
//! verdict: the x-dependent tail term is probed at radii `1e3..1e6` and
//! classified by growth ratios, so "bounded" means the numbers stop growing,
//! not that an algebraic limit was taken.  Asymptotic variances use the
//! sandwich form `(Q - B^2) / S^2`; efficiency is reported relative to the
//! Cramer-Rao bound `1/I` and never exceeds one.

use crate::criterion::DualCriterion;
use crate::error::{Error, Result};
use crate::models::Model;
use crate::num::quadrature::{integrate_real_line, QuadratureSettings};

/// Which functional an influence profile describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IfTarget {
    /// The criterion's maximiser (the parameter estimator).
    Estimator,
    /// The criterion's maximum (the divergence estimate).
    Divergence,
    /// The escort-parameter minimiser.
    Minimizer,
}

/// Operational boundedness verdict for an influence function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundedness {
    Bounded,
    Unbounded,
    Inconclusive,
}

/// Gross-error sensitivity: the boundedness verdict, the supremum of the
/// influence magnitude over the probe grid (`inf` when unbounded), and the
/// probe point attaining it.
#[derive(Debug, Clone)]
pub struct GesReport {
    pub verdict: Boundedness,
    pub value: f64,
    pub witness_x: f64,
}

const PROBE_RADII: [f64; 4] = [1e3, 1e4, 1e5, 1e6];
const GROWTH_FACTOR: f64 = 2.0;
const FLAT_TOL: f64 = 1e-6;

/// One functional's influence analysis at a fixed `(gamma, alpha, theta0)`.
///
/// Construction performs all quadratures once; evaluation afterwards is pure
/// arithmetic.  Integrals that diverge are carried as `inf` markers — the
/// boundedness verdict never needs them, but variance and efficiency are then
/// undefined and reported as `inf` / `None`.
pub struct InfluenceProfile {
    criterion: DualCriterion,
    target: IfTarget,
    theta0: f64,
    denominator_s: f64,
    numerator_const: f64,
    fisher: f64,
    population_divergence: f64,
    asymptotic_variance: f64,
    are: Option<f64>,
    ges: GesReport,
}

/// Integral of `(p_alpha/p_theta0)^(ratio_power * gamma) s(theta0, .)^score_power`
/// against `p_theta0`; `Ok(None)` when it diverges.
fn weighted_score_moment(
    criterion: &DualCriterion,
    theta0: f64,
    ratio_power: f64,
    score_power: u32,
    settings: &QuadratureSettings,
) -> Result<Option<f64>> {
    let model = criterion.model().clone();
    let alpha = criterion.alpha();
    let g = criterion.divergence().effective_gamma();
    let raw = integrate_real_line(
        |y| {
            let l0 = model.log_density_raw(theta0, y);
            let e = if g == 0.0 {
                l0
            } else {
                ratio_power * g * (model.log_density_raw(alpha, y) - l0) + l0
            };
            e.exp() * model.score_raw(theta0, y).powi(score_power as i32)
        },
        settings,
    );
    match raw {
        Ok(v) => Ok(Some(v)),
        Err(Error::Divergent(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

impl InfluenceProfile {
    /// Profiles `target` at `theta0` for the given criterion.
    pub fn new(criterion: &DualCriterion, target: IfTarget, theta0: f64) -> Result<Self> {
        criterion.model().validate_param(theta0)?;
        let criterion = criterion.clone();
        let settings = *criterion.settings();
        let fisher = criterion.model().fisher_information(theta0)?;
        let population_divergence = criterion.population_divergence(theta0)?;

        let (denominator_s, numerator_const, asymptotic_variance, are) = match target {
            IfTarget::Estimator => {
                let s = weighted_score_moment(&criterion, theta0, 1.0, 2, &settings)?;
                let b = weighted_score_moment(&criterion, theta0, 1.0, 1, &settings)?;
                let q = weighted_score_moment(&criterion, theta0, 2.0, 2, &settings)?;
                match (s, b, q) {
                    (Some(s), Some(b), Some(q)) if s > 0.0 => {
                        let var = (q - b * b) / (s * s);
                        (s, b, var, Some(1.0 / (fisher * var)))
                    }
                    _ => (
                        s.unwrap_or(f64::INFINITY),
                        b.unwrap_or(f64::INFINITY),
                        f64::INFINITY,
                        None,
                    ),
                }
            }
            IfTarget::Divergence => {
                let var = if population_divergence.is_finite() {
                    let model = criterion.model().clone();
                    let c = criterion.clone();
                    let raw = integrate_real_line(
                        |y| {
                            let dev = c.dual_payoff(theta0, y).unwrap_or(f64::NAN)
                                - population_divergence;
                            dev * dev * model.log_density_raw(theta0, y).exp()
                        },
                        &settings,
                    );
                    match raw {
                        Ok(v) => v,
                        Err(Error::Divergent(_)) => f64::INFINITY,
                        Err(e) => return Err(e),
                    }
                } else {
                    f64::INFINITY
                };
                (1.0, population_divergence, var, None)
            }
            IfTarget::Minimizer => (fisher, 0.0, 1.0 / fisher, Some(1.0)),
        };

        let mut profile = Self {
            criterion,
            target,
            theta0,
            denominator_s,
            numerator_const,
            fisher,
            population_divergence,
            asymptotic_variance,
            are,
            ges: GesReport {
                verdict: Boundedness::Inconclusive,
                value: f64::NAN,
                witness_x: f64::NAN,
            },
        };
        profile.ges = profile.probe_ges();
        Ok(profile)
    }

    pub fn target(&self) -> IfTarget {
        self.target
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// The scaling denominator: `S` for the estimator, `I` for the escort
    /// minimiser, `1` for the divergence functional.
    pub fn denominator_s(&self) -> f64 {
        self.denominator_s
    }

    /// The centring constant: `B` for the estimator, `phi(alpha, theta0)` for
    /// the divergence functional, `0` for the escort minimiser.
    pub fn numerator_const(&self) -> f64 {
        self.numerator_const
    }

    pub fn fisher_information(&self) -> f64 {
        self.fisher
    }

    /// The divergence from `p_alpha` to `p_theta0` (`inf` if it diverges).
    pub fn population_divergence(&self) -> f64 {
        self.population_divergence
    }

    /// Sandwich variance of the functional's asymptotic law (`inf` when a
    /// defining integral diverges).
    pub fn asymptotic_variance(&self) -> f64 {
        self.asymptotic_variance
    }

    /// Efficiency relative to the Cramer-Rao bound; `None` for the divergence
    /// functional (it estimates a scalar, not the parameter) and for profiles
    /// with divergent integrals.
    pub fn are(&self) -> Option<f64> {
        self.are
    }

    pub fn ges(&self) -> &GesReport {
        &self.ges
    }

    /// The influence function at `x`.  Meaningful whenever the profile's
    /// constants are finite; otherwise the value may be `NaN`.
    pub fn if_value(&self, x: f64) -> f64 {
        match self.target {
            IfTarget::Estimator => {
                let w = self.criterion.weight(self.theta0, x);
                let s = self.criterion.model().score_raw(self.theta0, x);
                (w * s - self.numerator_const) / self.denominator_s
            }
            IfTarget::Divergence => {
                self.criterion.dual_payoff(self.theta0, x).unwrap_or(f64::NAN)
                    - self.numerator_const
            }
            IfTarget::Minimizer => self.criterion.model().score_raw(self.theta0, x) / self.fisher,
        }
    }

    /// The x-dependent tail term whose growth decides boundedness (the
    /// affine constants cannot change the verdict).
    fn tail_term(&self, x: f64) -> f64 {
        match self.target {
            IfTarget::Estimator => {
                self.criterion.weight(self.theta0, x)
                    * self.criterion.model().score_raw(self.theta0, x)
            }
            IfTarget::Divergence => self.criterion.h(self.criterion.log_ratio(self.theta0, x)),
            IfTarget::Minimizer => self.criterion.model().score_raw(self.theta0, x),
        }
    }

    fn probe_ges(&self) -> GesReport {
        let mut magnitudes = [0.0f64; PROBE_RADII.len()];
        for (k, &r) in PROBE_RADII.iter().enumerate() {
            let v = self.tail_term(r).abs().max(self.tail_term(-r).abs());
            if !v.is_finite() {
                return GesReport {
                    verdict: Boundedness::Unbounded,
                    value: f64::INFINITY,
                    witness_x: r,
                };
            }
            magnitudes[k] = v;
        }
        let ratios: Vec<f64> = magnitudes
            .windows(2)
            .map(|w| {
                if w[0] == 0.0 && w[1] == 0.0 {
                    1.0
                } else {
                    w[1] / w[0]
                }
            })
            .collect();
        let verdict = if ratios.iter().all(|&r| r >= GROWTH_FACTOR) {
            Boundedness::Unbounded
        } else if ratios.iter().all(|&r| r <= 1.0 + FLAT_TOL) {
            Boundedness::Bounded
        } else {
            Boundedness::Inconclusive
        };
        if verdict == Boundedness::Unbounded {
            return GesReport {
                verdict,
                value: f64::INFINITY,
                witness_x: PROBE_RADII[PROBE_RADII.len() - 1],
            };
        }
        // supremum of |IF| over a probe grid: a dense interior sweep plus the radii
        let mut best = (f64::NEG_INFINITY, f64::NAN);
        let mut consider = |x: f64| {
            let v = self.if_value(x).abs();
            if v > best.0 {
                best = (v, x);
            }
        };
        let mut x = -50.0;
        while x <= 50.0 {
            consider(x);
            x += 0.25;
        }
        for &r in &PROBE_RADII {
            consider(r);
            consider(-r);
        }
        GesReport {
            verdict,
            value: best.0,
            witness_x: best.1,
        }
    }
}

/// Influence function of the parameter estimator at `x`.
/// For repeated evaluation build an [`InfluenceProfile`] once instead.
pub fn if_estimator(criterion: &DualCriterion, theta0: f64, x: f64) -> Result<f64> {
    Ok(InfluenceProfile::new(criterion, IfTarget::Estimator, theta0)?.if_value(x))
}

/// Influence function of the plug-in divergence estimate at `x`.
pub fn if_divergence(criterion: &DualCriterion, theta0: f64, x: f64) -> Result<f64> {
    Ok(InfluenceProfile::new(criterion, IfTarget::Divergence, theta0)?.if_value(x))
}

/// Influence function of the escort-parameter minimiser at `x`.
pub fn if_minimizer(criterion: &DualCriterion, theta0: f64, x: f64) -> Result<f64> {
    Ok(InfluenceProfile::new(criterion, IfTarget::Minimizer, theta0)?.if_value(x))
}

/// Gross-error sensitivity of a functional at `theta0`.
pub fn gross_error_sensitivity(
    criterion: &DualCriterion,
    target: IfTarget,
    theta0: f64,
) -> Result<GesReport> {
    Ok(InfluenceProfile::new(criterion, target, theta0)?.ges().clone())
}

/// Sandwich variance and relative efficiency of the parameter estimator.
pub fn asymptotic_variance_and_are(criterion: &DualCriterion, theta0: f64) -> Result<(f64, f64)> {
    let p = InfluenceProfile::new(criterion, IfTarget::Estimator, theta0)?;
    match p.are() {
        Some(are) => Ok((p.asymptotic_variance(), are)),
        None => Err(Error::Divergent(format!(
            "asymptotic variance integrals diverge at theta0 = {theta0} (alpha = {}, gamma = {})",
            criterion.alpha(),
            criterion.divergence().gamma()
        ))),
    }
}

/// Convenience: profile a fresh criterion for `(gamma, model, alpha)`.
pub fn profile_for(
    gamma: f64,
    model: &Model,
    alpha: f64,
    target: IfTarget,
    theta0: f64,
) -> Result<InfluenceProfile> {
    let criterion = DualCriterion::new(
        crate::divergence::CressieRead::new(gamma)?,
        model.clone(),
        alpha,
    )?;
    InfluenceProfile::new(&criterion, target, theta0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::CressieRead;

    fn crit(gamma: f64, model: Model, alpha: f64) -> DualCriterion {
        DualCriterion::new(CressieRead::new(gamma).unwrap(), model, alpha).unwrap()
    }

    fn scale_profile(gamma: f64, alpha: f64, target: IfTarget) -> InfluenceProfile {
        let c = crit(gamma, Model::normal_scale(0.0).unwrap(), alpha);
        InfluenceProfile::new(&c, target, 1.0).unwrap()
    }

    #[test]
    fn near_escort_efficiency_frozen_values() {
        // scale family, theta0 = 1, escort just below: efficiency decays in gamma
        let expected = [
            (0.5, 0.999697),
            (1.0, 0.998813),
            (2.0, 0.995443),
            (3.0, 0.990165),
        ];
        let mut last = 1.0;
        for (gamma, want) in expected {
            let p = scale_profile(gamma, 0.99, IfTarget::Estimator);
            let are = p.are().unwrap();
            assert!(
                (are - want).abs() < 5e-6,
                "gamma {gamma}: are {are} vs {want}"
            );
            assert!(are < last, "efficiency must decay in gamma");
            last = are;
        }
    }

    #[test]
    fn cauchy_efficiency_frozen_values() {
        let expected = [(1.0, 0.977956), (2.0, 0.921180), (3.0, 0.851197)];
        for (gamma, want) in expected {
            let c = crit(gamma, Model::cauchy(), 0.8);
            let p = InfluenceProfile::new(&c, IfTarget::Estimator, 0.5).unwrap();
            let are = p.are().unwrap();
            assert!(
                (are - want).abs() < 5e-6,
                "gamma {gamma}: are {are} vs {want}"
            );
        }
    }

    #[test]
    fn efficiency_never_exceeds_the_bound() {
        let cells: [(Model, f64, &[f64]); 3] = [
            (Model::normal_scale(0.0).unwrap(), 1.9, &[-2.0, -1.0, -0.5, 0.5]),
            (Model::cauchy(), 0.3, &[-1.0, 0.5, 1.0, 2.0, 3.0]),
            (Model::logistic(), 0.4, &[-1.0, 0.5, 1.0, 2.0]),
        ];
        for (model, alpha, gammas) in cells {
            for &g in gammas {
                let c = crit(g, model.clone(), alpha);
                let theta0 = if model.is_scale_family() { 1.0 } else { 0.0 };
                let p = InfluenceProfile::new(&c, IfTarget::Estimator, theta0).unwrap();
                if let Some(are) = p.are() {
                    assert!(
                        are <= 1.0 + 1e-9,
                        "{} gamma {g}: are {are}",
                        model.name()
                    );
                    assert!(are > 0.0);
                }
            }
        }
    }

    #[test]
    fn escort_at_truth_reduces_to_maximum_likelihood() {
        // alpha = theta0 makes B = 0 and S = I, so IF(x) = s(x) / I
        let c = crit(-0.5, Model::normal_scale(0.0).unwrap(), 1.0);
        let v = if_estimator(&c, 1.0, 2.0).unwrap();
        assert!((v - 1.5).abs() < 1e-8, "IF(2) = {v}");
        let p = InfluenceProfile::new(&c, IfTarget::Estimator, 1.0).unwrap();
        assert!(p.numerator_const().abs() < 1e-9);
        assert!((p.denominator_s() - 2.0).abs() < 1e-8);
        assert!((p.are().unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn divergence_influence_frozen_value() {
        let c = crit(2.0, Model::normal_scale(0.0).unwrap(), 1.0);
        let v = if_divergence(&c, std::f64::consts::SQRT_2, 0.0).unwrap();
        assert!((v - (-0.4226497308103743)).abs() < 1e-8, "IF_U(0) = {v}");
    }

    #[test]
    fn minimizer_influence_is_scaled_score() {
        let c = crit(1.0, Model::cauchy(), 0.8);
        let v = if_minimizer(&c, 0.0, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "IF_V(1) = {v}");
        let p = InfluenceProfile::new(&c, IfTarget::Minimizer, 0.0).unwrap();
        assert!((p.are().unwrap() - 1.0).abs() == 0.0);
        assert!((p.asymptotic_variance() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn influence_functions_are_mean_zero() {
        use crate::num::quadrature::{integrate_real_line, QuadratureSettings};
        let settings = QuadratureSettings::default();
        let model = Model::normal_scale(0.0).unwrap();
        for target in [IfTarget::Estimator, IfTarget::Divergence, IfTarget::Minimizer] {
            let c = crit(-1.0, model.clone(), 1.9);
            let p = InfluenceProfile::new(&c, target, 1.0).unwrap();
            let mean = integrate_real_line(
                |y| p.if_value(y) * model.log_density_raw(1.0, y).exp(),
                &settings,
            )
            .unwrap();
            assert!(mean.abs() < 1e-7, "{target:?}: mean {mean}");
        }
    }

    #[test]
    fn redescending_tail_is_flat_and_bounded() {
        let p = scale_profile(-1.0, 1.9, IfTarget::Estimator);
        assert_eq!(p.ges().verdict, Boundedness::Bounded);
        let far = p.if_value(100.0);
        let farther = p.if_value(200.0);
        assert!((far - farther).abs() < 1e-12);
        // the tail limit is -B/S, which is *not* zero
        let limit = -p.numerator_const() / p.denominator_s();
        assert!((far - limit).abs() < 1e-10);
        assert!(limit.abs() > 0.4, "tail limit should be visibly nonzero: {limit}");
        assert!(p.ges().value.is_finite());
        assert!(p.ges().value >= far.abs());
    }

    #[test]
    fn boundedness_matrix_spot_checks() {
        // scale family: bounded exactly when the weight redescends
        assert_eq!(
            scale_profile(2.0, 0.99, IfTarget::Estimator).ges().verdict,
            Boundedness::Bounded
        );
        assert_eq!(
            scale_profile(2.0, 1.9, IfTarget::Estimator).ges().verdict,
            Boundedness::Unbounded
        );
        assert_eq!(
            scale_profile(-1.0, 0.99, IfTarget::Estimator).ges().verdict,
            Boundedness::Unbounded
        );
        assert_eq!(
            scale_profile(0.0, 1.9, IfTarget::Estimator).ges().verdict,
            Boundedness::Unbounded
        );
        // normal location: never bounded
        let c = crit(1.0, Model::normal_location(1.0).unwrap(), 0.5);
        let p = InfluenceProfile::new(&c, IfTarget::Estimator, 0.0).unwrap();
        assert_eq!(p.ges().verdict, Boundedness::Unbounded);
        assert_eq!(p.ges().value, f64::INFINITY);
        // heavy-tailed locations: bounded for the whole index range
        for g in [-1.0, 0.0, 1.0, 2.0, 3.0] {
            let c = crit(g, Model::cauchy(), 0.8);
            let p = InfluenceProfile::new(&c, IfTarget::Estimator, 0.5).unwrap();
            assert_eq!(p.ges().verdict, Boundedness::Bounded, "cauchy gamma {g}");
            let c = crit(g, Model::logistic(), 0.8);
            let p = InfluenceProfile::new(&c, IfTarget::Estimator, 0.5).unwrap();
            assert_eq!(p.ges().verdict, Boundedness::Bounded, "logistic gamma {g}");
        }
        // divergence functional on heavy tails: bounded too
        let c = crit(2.0, Model::cauchy(), 0.8);
        let p = InfluenceProfile::new(&c, IfTarget::Divergence, 0.5).unwrap();
        assert_eq!(p.ges().verdict, Boundedness::Bounded);
    }

    #[test]
    fn divergent_cells_degrade_gracefully() {
        // gamma = 3 with a wide escort: variance integrals diverge, but the
        // profile still classifies and reports extended values
        let p = scale_profile(3.0, 1.9, IfTarget::Estimator);
        assert_eq!(p.ges().verdict, Boundedness::Unbounded);
        assert!(p.asymptotic_variance().is_infinite());
        assert!(p.are().is_none());
        let c = crit(3.0, Model::normal_scale(0.0).unwrap(), 1.9);
        assert!(matches!(
            asymptotic_variance_and_are(&c, 1.0),
            Err(Error::Divergent(_))
        ));
    }
}
