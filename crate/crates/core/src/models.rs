//! One-parameter location/scale families: scale-normal (known mean),
//! location-normal (known scale), Cauchy location, and logistic location.
//!
//! Every family exposes log-density, density, CDF, the parameter score
//! `s(theta, x) = d/dtheta log p_theta(x)`, its parameter derivative, the
//! Fisher information (by quadrature), and deterministic sampling from a
//! seeded counter-based generator.

use crate::error::{Error, Result};
use crate::num::quadrature::{integrate_real_line, QuadratureSettings};
use crate::num::special;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Deterministic random generator used across the crate.
///
/// Wraps ChaCha8 and converts 64-bit words to doubles strictly inside
/// `(0, 1)`, so inverse-CDF transforms never hit a boundary.
#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl Rng {
    /// Create a generator from a 64-bit seed.
    pub fn from_seed(seed: u64) -> Self {
        Rng {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// Uniform draw strictly inside `(0, 1)`.
    pub fn next_uniform(&mut self) -> f64 {
        // 53 significant bits, offset by half a step: never 0.0 or 1.0.
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal draw (Box–Muller with a cached spare).
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// Open interval of admissible parameter values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpace {
    /// Exclusive lower bound (`0` for scale families, `-inf` for location).
    pub lower: f64,
    /// Exclusive upper bound (always `+inf` here).
    pub upper: f64,
}

impl ParamSpace {
    /// True when `theta` is a finite interior point of the space.
    pub fn contains(&self, theta: f64) -> bool {
        theta.is_finite() && theta > self.lower && theta < self.upper
    }
}

/// A one-parameter model family with full support on the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// Normal with known mean; the parameter is the scale.
    NormalScale { mean: f64 },
    /// Normal with known scale; the parameter is the mean.
    NormalLocation { sigma: f64 },
    /// Cauchy with unit scale; the parameter is the location.
    CauchyLocation,
    /// Logistic with unit scale; the parameter is the location.
    LogisticLocation,
}

impl Model {
    /// Scale-normal family with the given (finite) known mean.
    pub fn normal_scale(mean: f64) -> Result<Model> {
        if !mean.is_finite() {
            return Err(Error::Domain(format!(
                "known mean must be finite, got {mean}"
            )));
        }
        Ok(Model::NormalScale { mean })
    }

    /// Location-normal family with the given (positive, finite) known scale.
    pub fn normal_location(sigma: f64) -> Result<Model> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Domain(format!(
                "known scale must be positive and finite, got {sigma}"
            )));
        }
        Ok(Model::NormalLocation { sigma })
    }

    /// Cauchy location family (unit scale).
    pub fn cauchy() -> Model {
        Model::CauchyLocation
    }

    /// Logistic location family (unit scale).
    pub fn logistic() -> Model {
        Model::LogisticLocation
    }

    /// Resolve a model by CLI-style name. `known` is the fixed nuisance
    /// value: the mean for `normal-scale`, the scale for `normal-location`;
    /// ignored by the location families with no nuisance.
    pub fn from_name(name: &str, known: f64) -> Result<Model> {
        match name {
            "normal-scale" => Model::normal_scale(known),
            "normal-location" => Model::normal_location(known),
            "cauchy" | "cauchy-location" => Ok(Model::cauchy()),
            "logistic" | "logistic-location" => Ok(Model::logistic()),
            other => Err(Error::Domain(format!(
                "unknown model '{other}' (expected normal-scale, normal-location, cauchy or logistic)"
            ))),
        }
    }

    /// Short stable name (inverse of [`Model::from_name`]).
    pub fn name(&self) -> &'static str {
        match self {
            Model::NormalScale { .. } => "normal-scale",
            Model::NormalLocation { .. } => "normal-location",
            Model::CauchyLocation => "cauchy",
            Model::LogisticLocation => "logistic",
        }
    }

    /// The open parameter space of the family.
    pub fn param_space(&self) -> ParamSpace {
        match self {
            Model::NormalScale { .. } => ParamSpace {
                lower: 0.0,
                upper: f64::INFINITY,
            },
            _ => ParamSpace {
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
            },
        }
    }

    /// True for families whose parameter is a scale.
    pub fn is_scale_family(&self) -> bool {
        matches!(self, Model::NormalScale { .. })
    }

    /// Check that `theta` lies in the parameter space.
    pub fn validate_param(&self, theta: f64) -> Result<()> {
        if self.param_space().contains(theta) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "parameter {theta} outside the parameter space of {}",
                self.name()
            )))
        }
    }

    /// Log-density without the parameter-space check (hot path; callers
    /// validate `theta` once).
    #[inline]
    pub(crate) fn log_density_raw(&self, theta: f64, x: f64) -> f64 {
        match *self {
            Model::NormalScale { mean } => {
                let u = (x - mean) / theta;
                -0.5 * u * u - theta.ln() - LN_SQRT_2PI
            }
            Model::NormalLocation { sigma } => {
                let u = (x - theta) / sigma;
                -0.5 * u * u - sigma.ln() - LN_SQRT_2PI
            }
            Model::CauchyLocation => {
                let u = x - theta;
                -(1.0 + u * u).ln() - std::f64::consts::PI.ln()
            }
            Model::LogisticLocation => {
                // Symmetric in u; the |u| form avoids overflow of exp(-u).
                let u = (x - theta).abs();
                -u - 2.0 * (-u).exp().ln_1p()
            }
        }
    }

    #[inline]
    pub(crate) fn score_raw(&self, theta: f64, x: f64) -> f64 {
        match *self {
            Model::NormalScale { mean } => {
                let u = (x - mean) / theta;
                (u * u - 1.0) / theta
            }
            Model::NormalLocation { sigma } => (x - theta) / (sigma * sigma),
            Model::CauchyLocation => {
                let u = x - theta;
                2.0 * u / (1.0 + u * u)
            }
            Model::LogisticLocation => ((x - theta) * 0.5).tanh(),
        }
    }

    #[inline]
    pub(crate) fn score_dtheta_raw(&self, theta: f64, x: f64) -> f64 {
        match *self {
            Model::NormalScale { mean } => {
                let u = (x - mean) / theta;
                (1.0 - 3.0 * u * u) / (theta * theta)
            }
            Model::NormalLocation { sigma } => -1.0 / (sigma * sigma),
            Model::CauchyLocation => {
                let u = x - theta;
                let d = 1.0 + u * u;
                (2.0 * u * u - 2.0) / (d * d)
            }
            Model::LogisticLocation => {
                let t = ((x - theta) * 0.5).tanh();
                -0.5 * (1.0 - t * t)
            }
        }
    }

    /// Log-density `ln p_theta(x)`.
    pub fn log_density(&self, theta: f64, x: f64) -> Result<f64> {
        self.validate_param(theta)?;
        Ok(self.log_density_raw(theta, x))
    }

    /// Density `p_theta(x)`.
    pub fn density(&self, theta: f64, x: f64) -> Result<f64> {
        Ok(self.log_density(theta, x)?.exp())
    }

    /// Parameter score `s(theta, x) = d/dtheta ln p_theta(x)`.
    pub fn score(&self, theta: f64, x: f64) -> Result<f64> {
        self.validate_param(theta)?;
        Ok(self.score_raw(theta, x))
    }

    /// Parameter derivative of the score, `d/dtheta s(theta, x)`.
    pub fn score_dtheta(&self, theta: f64, x: f64) -> Result<f64> {
        self.validate_param(theta)?;
        Ok(self.score_dtheta_raw(theta, x))
    }

    /// Cumulative distribution function of `P_theta`.
    pub fn cdf(&self, theta: f64, x: f64) -> Result<f64> {
        self.validate_param(theta)?;
        Ok(match *self {
            Model::NormalScale { mean } => special::normal_cdf((x - mean) / theta),
            Model::NormalLocation { sigma } => special::normal_cdf((x - theta) / sigma),
            Model::CauchyLocation => 0.5 + (x - theta).atan() / std::f64::consts::PI,
            Model::LogisticLocation => {
                let u = x - theta;
                if u >= 0.0 {
                    1.0 / (1.0 + (-u).exp())
                } else {
                    let e = u.exp();
                    e / (1.0 + e)
                }
            }
        })
    }

    /// Fisher information `I(theta) = Int s(theta, x)^2 p_theta(x) dx`,
    /// evaluated by quadrature.
    pub fn fisher_information(&self, theta: f64) -> Result<f64> {
        self.validate_param(theta)?;
        let settings = QuadratureSettings::default();
        integrate_real_line(
            |x| {
                let s = self.score_raw(theta, x);
                s * s * self.log_density_raw(theta, x).exp()
            },
            &settings,
        )
    }

    /// One draw from `P_theta`.
    pub fn draw(&self, theta: f64, rng: &mut Rng) -> Result<f64> {
        self.validate_param(theta)?;
        Ok(self.draw_raw(theta, rng))
    }

    #[inline]
    pub(crate) fn draw_raw(&self, theta: f64, rng: &mut Rng) -> f64 {
        match *self {
            Model::NormalScale { mean } => mean + theta * rng.next_normal(),
            Model::NormalLocation { sigma } => theta + sigma * rng.next_normal(),
            Model::CauchyLocation => {
                let u = rng.next_uniform();
                theta + (std::f64::consts::PI * (u - 0.5)).tan()
            }
            Model::LogisticLocation => {
                let u = rng.next_uniform();
                theta + (u / (1.0 - u)).ln()
            }
        }
    }

    /// A deterministic i.i.d. sample of size `n` from `P_theta`.
    pub fn sample(&self, theta: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
        self.validate_param(theta)?;
        let mut rng = Rng::from_seed(seed);
        Ok((0..n).map(|_| self.draw_raw(theta, &mut rng)).collect())
    }
}
