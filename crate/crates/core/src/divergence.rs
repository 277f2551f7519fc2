//! The power-divergence convex generator family.
//!
//! For index `gamma` outside {0, 1} the generator is
//! `phi(t) = (t^gamma - gamma*t + gamma - 1) / (gamma*(gamma - 1))`,
//! with the continuous limits
//! `phi_0(t) = -ln t + t - 1` and `phi_1(t) = t ln t - t + 1`.
//! Each member is nonnegative, strictly convex on `(0, inf)`, and vanishes
//! only at `t = 1`. Indices within `1e-9` of 0 or 1 are routed to the limit
//! branches so the family is continuous in `gamma` for callers that sweep it.
//!
//! Powers are evaluated as `exp(gamma * ln t)` throughout, and the
//! `gamma`-generic numerator uses `expm1` to tame cancellation near `t = 1`.

use crate::error::{Error, Result};

/// Width of the window around the special indices 0 and 1 that is routed
/// to the closed-form limit branches.
const LIMIT_WINDOW: f64 = 1e-9;

/// Which analytic branch a given `gamma` resolves to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    /// `phi_0(t) = -ln t + t - 1` (likelihood disparity).
    LogLimit,
    /// `phi_1(t) = t ln t - t + 1` (Kullback–Leibler).
    XLogX,
    /// The generic power form.
    Power,
}

/// One member of the power-divergence generator family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CressieRead {
    gamma: f64,
}

impl CressieRead {
    /// Construct the generator with the given index. The index must be
    /// finite; values within `1e-9` of 0 or 1 use the limit branches.
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::Domain(format!(
                "divergence index must be finite, got {gamma}"
            )));
        }
        Ok(CressieRead { gamma })
    }

    /// The index this generator was built with.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn branch(&self) -> Branch {
        if self.gamma.abs() <= LIMIT_WINDOW {
            Branch::LogLimit
        } else if (self.gamma - 1.0).abs() <= LIMIT_WINDOW {
            Branch::XLogX
        } else {
            Branch::Power
        }
    }

    /// True when this generator resolves to the `gamma = 0` limit branch.
    pub fn is_log_limit(&self) -> bool {
        self.branch() == Branch::LogLimit
    }

    /// The index after limit routing: exactly `0.0` or `1.0` on the limit
    /// branches, the raw index otherwise.  Downstream formulas use this so
    /// that an index within the routing window of a limit point evaluates
    /// *identically* to the limit case.
    pub fn effective_gamma(&self) -> f64 {
        match self.branch() {
            Branch::LogLimit => 0.0,
            Branch::XLogX => 1.0,
            Branch::Power => self.gamma,
        }
    }

    /// True when this generator resolves to the `gamma = 1` limit branch.
    pub fn is_xlogx(&self) -> bool {
        self.branch() == Branch::XLogX
    }

    fn check_t(t: f64) -> Result<()> {
        if t.is_nan() || t == f64::INFINITY {
            return Err(Error::Domain(format!(
                "generator argument must be a finite nonnegative real, got {t}"
            )));
        }
        if t < 0.0 {
            return Err(Error::Domain(format!(
                "generator argument must be nonnegative, got {t}"
            )));
        }
        Ok(())
    }

    /// Evaluate the generator at `t >= 0`.
    ///
    /// At `t = 0` the value is `1/gamma` for `gamma > 0` and `+inf`
    /// otherwise (returned as `f64::INFINITY`, not an error).
    pub fn phi(&self, t: f64) -> Result<f64> {
        Self::check_t(t)?;
        let g = self.gamma;
        Ok(match self.branch() {
            Branch::LogLimit => {
                if t == 0.0 {
                    f64::INFINITY
                } else {
                    -t.ln() + t - 1.0
                }
            }
            Branch::XLogX => {
                if t == 0.0 {
                    1.0
                } else {
                    t * t.ln() - t + 1.0
                }
            }
            Branch::Power => {
                if t == 0.0 {
                    if g > 0.0 {
                        1.0 / g
                    } else {
                        f64::INFINITY
                    }
                } else {
                    // (t^g - 1) - g (t - 1), grouped to keep phi(1) exactly 0.
                    ((g * t.ln()).exp_m1() - g * (t - 1.0)) / (g * (g - 1.0))
                }
            }
        })
    }

    /// Evaluate the `order`-th derivative (`order` in {1, 2, 3}) of the
    /// generator at `t >= 0`. Errors when the requested one-sided limit at
    /// `t = 0` diverges.
    pub fn phi_deriv(&self, t: f64, order: u32) -> Result<f64> {
        Self::check_t(t)?;
        let g = self.gamma;
        let diverges = |what: &str| {
            Err(Error::Domain(format!(
                "{what} of the generator diverges at t = 0 for gamma = {g}"
            )))
        };
        match order {
            1 => Ok(match self.branch() {
                Branch::XLogX => {
                    if t == 0.0 {
                        return diverges("first derivative");
                    }
                    t.ln()
                }
                _ => {
                    // (t^(g-1) - 1) / (g - 1); covers the gamma = 0 branch too.
                    if t == 0.0 {
                        if g > 1.0 {
                            -1.0 / (g - 1.0)
                        } else {
                            return diverges("first derivative");
                        }
                    } else {
                        ((g - 1.0) * t.ln()).exp_m1() / (g - 1.0)
                    }
                }
            }),
            2 => {
                // t^(g-2)
                if t == 0.0 {
                    if g > 2.0 {
                        Ok(0.0)
                    } else if g == 2.0 {
                        Ok(1.0)
                    } else {
                        diverges("second derivative")
                    }
                } else {
                    Ok(((g - 2.0) * t.ln()).exp())
                }
            }
            3 => {
                // (g-2) t^(g-3)
                if t == 0.0 {
                    if g > 3.0 {
                        Ok(0.0)
                    } else if g == 3.0 {
                        Ok(1.0)
                    } else {
                        diverges("third derivative")
                    }
                } else {
                    Ok((g - 2.0) * ((g - 3.0) * t.ln()).exp())
                }
            }
            _ => Err(Error::Domain(format!(
                "derivative order must be 1, 2 or 3, got {order}"
            ))),
        }
    }
}
