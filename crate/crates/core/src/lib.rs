//! Dual representations of Cressie-Read divergences between a parametric
//! model and data, the estimators built on them, and the influence-function
//! machinery used to study their robustness.
//!
//! The crate is organised as a pipeline:
//!
//! * [`divergence`] — the Cressie-Read convex generator family `phi_gamma`;
//! * [`models`] — the univariate location/scale families the experiments use,
//!   with exact samplers and closed-form scores;
//! * [`criterion`] — the dual payoff `m(theta, alpha, x)` whose sample mean is
//!   maximised, plus its population counterparts;
//! * [`estimators`] — grid-plus-refinement maximisers (and the classical
//!   competitors MLE / MDPDE);
//! * [`robustness`] — influence functions, gross-error sensitivity and
//!   asymptotic relative efficiency;
//! * [`testing`] — divergence-based two-sided tests with contamination-aware
//!   level and power approximations;
//! * [`num`] — the small numerical kernel (adaptive Gauss-Kronrod quadrature,
//!   Brent optimisation/root finding, normal special functions).

pub mod divergence;
pub mod error;
pub mod models;
pub mod num;

pub mod criterion;
pub mod estimators;
pub mod robustness;
pub mod testing;

pub use crate::criterion::DualCriterion;
pub use crate::divergence::CressieRead;
pub use crate::error::{Error, Result};
pub use crate::estimators::{EstimateResult, SearchBox};
pub use crate::models::{Model, Rng};
pub use crate::robustness::{Boundedness, GesReport, IfTarget, InfluenceProfile};
pub use crate::testing::{LevelValue, PowerValue, TestConfig, TestOutcome};
