//! Parameter and divergence estimators.
//!
//! The dual estimator maximises the empirical criterion over a user-supplied
//! (or model-default) search interval with a three-stage scheme: an even grid
//! scan locates every local maximum, Brent refinement narrows each candidate,
//! and a safeguarded Newton polish on the estimating-equation residual
//! sharpens the winner to near machine precision.  All near-optimal local
//! maxima are reported so callers can see multi-modality instead of having it
//! silently resolved; exact value ties go to the smallest parameter.
//!
//! The escort-parameter estimator repeats this inside an outer minimisation
//! over `alpha`, and classical competitors (maximum likelihood, minimum
//! density power divergence) are provided for the comparison experiments.

use crate::criterion::DualCriterion;
use crate::divergence::CressieRead;
use crate::error::{Error, Result};
use crate::models::Model;
use crate::num::brent;
use crate::num::quadrature::{integrate_real_line, QuadratureSettings};

/// Residual magnitude below which a stationary point is declared converged.
const STATIONARITY_TOL: f64 = 1e-6;
/// Local maxima within this of the global maximum are reported.
const NEAR_OPTIMUM_WINDOW: f64 = 1e-6;
/// Criterion values this close (relative) are treated as tied.
const VALUE_TIE_TOL: f64 = 1e-12;
/// Candidates closer than this in the parameter are duplicates of one optimum.
const DEDUP_XTOL: f64 = 1e-7;
/// Outer grid size for the escort-parameter search.
const OUTER_GRID_POINTS: usize = 100;
const NEWTON_MAX_STEPS: usize = 16;
const NEWTON_STEP_REL: f64 = 1e-12;
const REFINE_MAX_ITER: usize = 200;

/// Search interval and resolution for the grid-plus-refinement maximisers.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    pub lo: f64,
    pub hi: f64,
    pub grid_points: usize,
    pub refine_tol: f64,
}

impl SearchBox {
    /// A box over `(lo, hi)` with the default resolution (200 grid points,
    /// refinement tolerance `1e-8`).
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!(
                "search box needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            lo,
            hi,
            grid_points: 200,
            refine_tol: 1e-8,
        })
    }

    /// Overrides the scan resolution (at least 3 points).
    pub fn with_grid_points(mut self, grid_points: usize) -> Result<Self> {
        if grid_points < 3 {
            return Err(Error::Domain(format!(
                "search grid needs at least 3 points, got {grid_points}"
            )));
        }
        self.grid_points = grid_points;
        Ok(self)
    }

    /// Overrides the refinement tolerance (positive, finite).
    pub fn with_refine_tol(mut self, refine_tol: f64) -> Result<Self> {
        if !(refine_tol.is_finite() && refine_tol > 0.0) {
            return Err(Error::Domain(format!(
                "refine tolerance must be positive and finite, got {refine_tol}"
            )));
        }
        self.refine_tol = refine_tol;
        Ok(self)
    }

    /// The default search region around an anchor parameter: for a scale
    /// family `(0.05, 20) * anchor`, for location families `anchor +- 20`.
    pub fn default_for(model: &Model, anchor: f64) -> Result<Self> {
        model.validate_param(anchor)?;
        if model.is_scale_family() {
            Self::new(0.05 * anchor, 20.0 * anchor)
        } else {
            Self::new(anchor - 20.0, anchor + 20.0)
        }
    }

    fn validate_for(&self, model: &Model) -> Result<()> {
        let space = model.param_space();
        if !(space.contains(self.lo) && space.contains(self.hi)) {
            return Err(Error::Domain(format!(
                "search box [{}, {}] leaves the parameter space of {}",
                self.lo,
                self.hi,
                model.name()
            )));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.grid_points - 1) as f64
    }

    fn is_interior(&self, t: f64) -> bool {
        t - self.lo > 2.0 * self.refine_tol && self.hi - t > 2.0 * self.refine_tol
    }
}

/// Outcome of a scalar estimation.
#[derive(Debug, Clone)]
pub struct EstimateResult {
    /// The selected optimiser.
    pub estimate: f64,
    /// Objective value at the estimate.  For the density-power estimator this
    /// is the negated objective, so that "larger is better" holds uniformly.
    pub criterion_value: f64,
    /// The estimating-equation residual at the estimate.
    pub stationarity_residual: f64,
    /// Refinement plus polish iterations spent (grid evaluations excluded).
    pub iterations: usize,
    /// True when the residual is below tolerance and the estimate is interior
    /// to the search box.
    pub converged: bool,
    /// Every local optimum within `1e-6` of the best value, as
    /// `(parameter, value)` pairs sorted by parameter.
    pub local_optima: Vec<(f64, f64)>,
}

fn validate_sample(sample: &[f64]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::Domain("sample must be nonempty".into()));
    }
    if let Some(bad) = sample.iter().find(|x| !x.is_finite()) {
        return Err(Error::Domain(format!(
            "sample must contain only finite values, got {bad}"
        )));
    }
    Ok(())
}

/// A scalar maximisation problem: an objective (extended-real: `-inf` marks
/// parameters the optimiser must skip), its derivative residual, and the
/// residual's slope for Newton polish.
struct Objective<'a> {
    value: Box<dyn Fn(f64) -> Result<f64> + 'a>,
    residual: Box<dyn Fn(f64) -> Result<f64> + 'a>,
    residual_slope: Box<dyn Fn(f64) -> Result<f64> + 'a>,
}

impl Objective<'_> {
    fn value_or_neg_inf(&self, t: f64) -> f64 {
        match (self.value)(t) {
            Ok(v) if !v.is_nan() => v,
            _ => f64::NEG_INFINITY,
        }
    }
}

fn newton_polish(obj: &Objective, bx: &SearchBox, start: f64, iterations: &mut usize) -> f64 {
    let mut t = start;
    for _ in 0..NEWTON_MAX_STEPS {
        let (r, slope) = match ((obj.residual)(t), (obj.residual_slope)(t)) {
            (Ok(r), Ok(s)) => (r, s),
            _ => break,
        };
        // only step while the curvature says we are in a concave basin
        if !r.is_finite() || !slope.is_finite() || slope >= 0.0 {
            break;
        }
        let step = r / slope;
        let next = t - step;
        if !next.is_finite() || next <= bx.lo || next >= bx.hi {
            break;
        }
        *iterations += 1;
        t = next;
        if step.abs() <= NEWTON_STEP_REL * t.abs().max(1.0) {
            break;
        }
    }
    t
}

/// Grid scan, per-candidate Brent refinement, Newton polish, tie-breaking.
fn maximize_over_box(obj: &Objective, bx: &SearchBox) -> Result<EstimateResult> {
    let grid = bx.grid();
    let mut values = Vec::with_capacity(grid.len());
    for &t in &grid {
        values.push(match (obj.value)(t) {
            Ok(v) => v,
            Err(Error::Divergent(_)) => f64::NEG_INFINITY,
            Err(e) => return Err(e),
        });
    }
    if !values.iter().any(|v| v.is_finite()) {
        return Err(Error::Numerical(
            "criterion is not finite anywhere on the search grid".into(),
        ));
    }

    // candidate basins: interior (or edge) grid points no lower than their neighbours
    let last = grid.len() - 1;
    let mut candidates = Vec::new();
    for i in 0..=last {
        if !values[i].is_finite() {
            continue;
        }
        let left_ok = i == 0 || values[i] >= values[i - 1];
        let right_ok = i == last || values[i] >= values[i + 1];
        if left_ok && right_ok {
            candidates.push(i);
        }
    }

    let mut iterations = 0usize;
    let mut refined: Vec<(f64, f64)> = Vec::new();
    for i in candidates {
        let a = if i == 0 { bx.lo } else { grid[i - 1] };
        let b = if i == last { bx.hi } else { grid[i + 1] };
        let opt = brent::maximize(
            |t| obj.value_or_neg_inf(t),
            a,
            b,
            bx.refine_tol,
            REFINE_MAX_ITER,
        )?;
        iterations += opt.iterations;
        let polished = newton_polish(obj, bx, opt.x, &mut iterations);
        let (mut t_star, mut v_star) = (opt.x, opt.fx);
        let v_polished = obj.value_or_neg_inf(polished);
        if v_polished + 1e-12 >= v_star {
            t_star = polished;
            v_star = v_polished;
        }
        if v_star.is_finite() {
            refined.push((t_star, v_star));
        }
    }
    if refined.is_empty() {
        return Err(Error::Numerical(
            "no finite local maximum found in the search box".into(),
        ));
    }

    // merge duplicates of the same optimum, keep the better value
    refined.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (t, v) in refined {
        match merged.last_mut() {
            Some((pt, pv)) if (t - *pt).abs() <= DEDUP_XTOL * t.abs().max(1.0) => {
                if v > *pv {
                    *pt = t;
                    *pv = v;
                }
            }
            _ => merged.push((t, v)),
        }
    }

    // global winner: best value, ties to the smallest parameter
    let mut best = merged[0];
    for &(t, v) in &merged[1..] {
        let tie = (v - best.1).abs() <= VALUE_TIE_TOL * best.1.abs().max(1.0);
        if (tie && t < best.0) || (!tie && v > best.1) {
            best = (t, v);
        }
    }
    let near: Vec<(f64, f64)> = merged
        .iter()
        .copied()
        .filter(|&(_, v)| v >= best.1 - NEAR_OPTIMUM_WINDOW)
        .collect();

    let residual = match (obj.residual)(best.0) {
        Ok(r) => r,
        Err(Error::Divergent(_)) => f64::NAN,
        Err(e) => return Err(e),
    };
    let converged =
        residual.is_finite() && residual.abs() <= STATIONARITY_TOL && bx.is_interior(best.0);
    Ok(EstimateResult {
        estimate: best.0,
        criterion_value: best.1,
        stationarity_residual: residual,
        iterations,
        converged,
        local_optima: near,
    })
}

fn resolve_box(
    model: &Model,
    box_: Option<&SearchBox>,
    default_anchor: f64,
) -> Result<SearchBox> {
    let bx = match box_ {
        Some(b) => b.clone(),
        None => SearchBox::default_for(model, default_anchor)?,
    };
    bx.validate_for(model)?;
    Ok(bx)
}

/// The dual estimator: the global maximiser of the empirical criterion over
/// the search box (model default around `alpha` when `box_` is `None`).
pub fn dphi_estimate(
    criterion: &DualCriterion,
    sample: &[f64],
    box_: Option<&SearchBox>,
) -> Result<EstimateResult> {
    validate_sample(sample)?;
    let bx = resolve_box(criterion.model(), box_, criterion.alpha())?;
    let obj = Objective {
        value: Box::new(|t| criterion.empirical_criterion_prechecked(t, sample)),
        residual: Box::new(|t| criterion.estimating_residual_prechecked(t, sample)),
        residual_slope: Box::new(|t| criterion.estimating_residual_dtheta_prechecked(t, sample)),
    };
    maximize_over_box(&obj, &bx)
}

/// The plug-in divergence estimate: the maximum of the empirical criterion.
pub fn divergence_estimate(
    criterion: &DualCriterion,
    sample: &[f64],
    box_: Option<&SearchBox>,
) -> Result<f64> {
    Ok(dphi_estimate(criterion, sample, box_)?.criterion_value)
}

/// Warm-started inner solve for the escort search: refine around a previous
/// inner maximiser, then confirm against a coarse scan; `None` means the warm
/// solve missed the global basin and the caller should fall back.
#[allow(clippy::type_complexity)]
fn warm_inner_solve(
    criterion: &DualCriterion,
    sample: &[f64],
    bx: &SearchBox,
    prev: f64,
) -> Result<Option<EstimateResult>> {
    let obj = Objective {
        value: Box::new(|t| criterion.empirical_criterion_prechecked(t, sample)),
        residual: Box::new(|t| criterion.estimating_residual_prechecked(t, sample)),
        residual_slope: Box::new(|t| criterion.estimating_residual_dtheta_prechecked(t, sample)),
    };
    let w = 5.0 * bx.spacing();
    let a = (prev - w).max(bx.lo);
    let b = (prev + w).min(bx.hi);
    if a >= b {
        return Ok(None);
    }
    let opt = brent::maximize(|t| obj.value_or_neg_inf(t), a, b, bx.refine_tol, REFINE_MAX_ITER)?;
    let mut iterations = opt.iterations;
    let polished = newton_polish(&obj, bx, opt.x, &mut iterations);
    let (mut t_star, mut v_star) = (opt.x, opt.fx);
    let vp = obj.value_or_neg_inf(polished);
    if vp + 1e-12 >= v_star {
        t_star = polished;
        v_star = vp;
    }
    if !v_star.is_finite() {
        return Ok(None);
    }
    // coarse cross-check: every 5th grid point must not beat the warm value
    let grid = bx.grid();
    for (i, &t) in grid.iter().enumerate() {
        if i % 5 != 0 && i != grid.len() - 1 {
            continue;
        }
        if obj.value_or_neg_inf(t) > v_star + 1e-9 {
            return Ok(None);
        }
    }
    let residual = match (obj.residual)(t_star) {
        Ok(r) => r,
        Err(Error::Divergent(_)) => f64::NAN,
        Err(e) => return Err(e),
    };
    let converged =
        residual.is_finite() && residual.abs() <= STATIONARITY_TOL && bx.is_interior(t_star);
    Ok(Some(EstimateResult {
        estimate: t_star,
        criterion_value: v_star,
        stationarity_residual: residual,
        iterations,
        converged,
        local_optima: vec![(t_star, v_star)],
    }))
}

fn inner_solve(
    divergence: &CressieRead,
    model: &Model,
    sample: &[f64],
    bx: &SearchBox,
    alpha: f64,
    warm_from: Option<f64>,
) -> Result<EstimateResult> {
    let criterion = DualCriterion::new(*divergence, model.clone(), alpha)?;
    if let Some(prev) = warm_from {
        if let Some(res) = warm_inner_solve(&criterion, sample, bx, prev)? {
            return Ok(res);
        }
    }
    dphi_estimate(&criterion, sample, Some(bx))
}

/// The escort-parameter estimator: minimises the estimated divergence
/// `alpha -> sup_theta` criterion over `alpha` in the same search box.
///
/// A single-observation sample is degenerate for the outer minimisation and
/// is reported with `converged = false`.
pub fn mdphi_estimate(
    divergence: &CressieRead,
    model: &Model,
    sample: &[f64],
    box_: Option<&SearchBox>,
) -> Result<EstimateResult> {
    validate_sample(sample)?;
    let anchor = default_anchor(model, sample);
    let bx = resolve_box(model, box_, anchor)?;

    // outer grid over alpha; inner solves are warm-started left to right
    let n_outer = OUTER_GRID_POINTS;
    let alphas: Vec<f64> = (0..n_outer)
        .map(|i| bx.lo + (bx.hi - bx.lo) * i as f64 / (n_outer - 1) as f64)
        .collect();
    let mut iterations = 0usize;
    let mut inner: Vec<EstimateResult> = Vec::with_capacity(n_outer);
    let mut prev_theta: Option<f64> = None;
    for &a in &alphas {
        let res = inner_solve(divergence, model, sample, &bx, a, prev_theta)?;
        prev_theta = Some(res.estimate);
        iterations += res.iterations;
        inner.push(res);
    }
    let values: Vec<f64> = inner.iter().map(|r| r.criterion_value).collect();

    // local minima of the outer profile
    let last = n_outer - 1;
    let mut candidates = Vec::new();
    for i in 0..=last {
        if !values[i].is_finite() {
            continue;
        }
        let left_ok = i == 0 || values[i] <= values[i - 1];
        let right_ok = i == last || values[i] <= values[i + 1];
        if left_ok && right_ok {
            candidates.push(i);
        }
    }
    if candidates.is_empty() {
        return Err(Error::Numerical(
            "no finite outer minimum in the escort search".into(),
        ));
    }

    let mut refined: Vec<(f64, f64, EstimateResult)> = Vec::new();
    for i in candidates {
        let a = if i == 0 { bx.lo } else { alphas[i - 1] };
        let b = if i == last { bx.hi } else { alphas[i + 1] };
        let warm = inner[i].estimate;
        let profile = |al: f64| -> f64 {
            match inner_solve(divergence, model, sample, &bx, al, Some(warm)) {
                Ok(r) => r.criterion_value,
                Err(_) => f64::INFINITY,
            }
        };
        let opt = brent::minimize(profile, a, b, bx.refine_tol, REFINE_MAX_ITER)?;
        iterations += opt.iterations;
        let at_min = inner_solve(divergence, model, sample, &bx, opt.x, Some(warm))?;
        iterations += at_min.iterations;
        refined.push((opt.x, at_min.criterion_value, at_min));
    }

    refined.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best_idx = 0usize;
    for i in 1..refined.len() {
        let (cur, best) = (refined[i].1, refined[best_idx].1);
        let tie = (cur - best).abs() <= VALUE_TIE_TOL * best.abs().max(1.0);
        if !tie && cur < best {
            best_idx = i;
        }
    }
    let near: Vec<(f64, f64)> = refined
        .iter()
        .filter(|r| r.1 <= refined[best_idx].1 + NEAR_OPTIMUM_WINDOW)
        .map(|r| (r.0, r.1))
        .collect();
    let (alpha_star, value_star, inner_star) = {
        let r = &refined[best_idx];
        (r.0, r.1, r.2.clone())
    };
    let converged = sample.len() >= 2
        && inner_star.converged
        && bx.is_interior(alpha_star)
        && value_star.is_finite();
    Ok(EstimateResult {
        estimate: alpha_star,
        criterion_value: value_star,
        stationarity_residual: inner_star.stationarity_residual,
        iterations,
        converged,
        local_optima: near,
    })
}

fn default_anchor(model: &Model, sample: &[f64]) -> f64 {
    if model.is_scale_family() {
        let m = match *model {
            Model::NormalScale { mean } => mean,
            _ => 0.0,
        };
        let ms = sample.iter().map(|x| (x - m).powi(2)).sum::<f64>() / sample.len() as f64;
        ms.sqrt().max(f64::MIN_POSITIVE.sqrt())
    } else {
        sample_median(sample)
    }
}

fn sample_median(sample: &[f64]) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Maximum likelihood.  Normal families use their closed forms; the heavy-
/// tailed location families run the same grid-plus-refinement engine on the
/// log likelihood (default box: sample median `+- 20`).
pub fn mle(model: &Model, sample: &[f64], box_: Option<&SearchBox>) -> Result<EstimateResult> {
    validate_sample(sample)?;
    match *model {
        Model::NormalScale { mean } => {
            let ms = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / sample.len() as f64;
            if ms <= 0.0 {
                return Err(Error::Numerical(
                    "degenerate sample: zero empirical variance".into(),
                ));
            }
            let est = ms.sqrt();
            closed_form_result(model, sample, est)
        }
        Model::NormalLocation { .. } => {
            let est = sample.iter().sum::<f64>() / sample.len() as f64;
            closed_form_result(model, sample, est)
        }
        Model::CauchyLocation | Model::LogisticLocation => {
            let bx = resolve_box(model, box_, sample_median(sample))?;
            let n = sample.len() as f64;
            let obj = Objective {
                value: Box::new(|t| {
                    Ok(sample.iter().map(|&x| model.log_density_raw(t, x)).sum::<f64>() / n)
                }),
                residual: Box::new(|t| {
                    Ok(sample.iter().map(|&x| model.score_raw(t, x)).sum::<f64>() / n)
                }),
                residual_slope: Box::new(|t| {
                    Ok(sample.iter().map(|&x| model.score_dtheta_raw(t, x)).sum::<f64>() / n)
                }),
            };
            maximize_over_box(&obj, &bx)
        }
    }
}

fn closed_form_result(model: &Model, sample: &[f64], est: f64) -> Result<EstimateResult> {
    model.validate_param(est)?;
    let n = sample.len() as f64;
    let value = sample.iter().map(|&x| model.log_density_raw(est, x)).sum::<f64>() / n;
    let residual = sample.iter().map(|&x| model.score_raw(est, x)).sum::<f64>() / n;
    Ok(EstimateResult {
        estimate: est,
        criterion_value: value,
        stationarity_residual: residual,
        iterations: 0,
        converged: residual.abs() <= STATIONARITY_TOL,
        local_optima: vec![(est, value)],
    })
}

/// The x-free term of the density-power estimating equation: the integral of
/// `s p_theta^(1 + beta)`.  Zero for symmetric location families; the scale
/// family has a closed form, cross-checked against quadrature in tests.
fn dpd_score_integral(model: &Model, theta: f64, beta: f64) -> f64 {
    match *model {
        Model::NormalScale { .. } => {
            let two_pi = 2.0 * std::f64::consts::PI;
            -(two_pi * theta * theta).powf(-0.5 * (1.0 + beta)) * two_pi.sqrt() * beta
                / (1.0 + beta).powf(1.5)
        }
        _ => 0.0,
    }
}

#[cfg(test)]
fn dpd_score_integral_quadrature(
    model: &Model,
    theta: f64,
    beta: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    integrate_real_line(
        |y| {
            let l = model.log_density_raw(theta, y);
            ((1.0 + beta) * l).exp() * model.score_raw(theta, y)
        },
        settings,
    )
}

/// The integral of `p_theta^(1 + beta)` (constant in `theta` for location
/// families by translation invariance).
fn dpd_density_integral(
    model: &Model,
    theta: f64,
    beta: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    match *model {
        Model::NormalScale { .. } | Model::NormalLocation { .. } => {
            let var = match *model {
                Model::NormalScale { .. } => theta * theta,
                Model::NormalLocation { sigma } => sigma * sigma,
                _ => unreachable!(),
            };
            Ok((2.0 * std::f64::consts::PI * var).powf(-0.5 * beta) / (1.0 + beta).sqrt())
        }
        _ => integrate_real_line(
            |y| ((1.0 + beta) * model.log_density_raw(theta, y)).exp(),
            settings,
        ),
    }
}

/// The minimum density power divergence estimator with tuning `beta > 0`:
/// the root of the power estimating equation, selecting among multiple roots
/// by the density-power objective.
pub fn mdpde(
    model: &Model,
    sample: &[f64],
    beta: f64,
    box_: Option<&SearchBox>,
) -> Result<EstimateResult> {
    validate_sample(sample)?;
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Domain(format!(
            "density power tuning must be positive and finite, got {beta}"
        )));
    }
    let anchor = default_anchor(model, sample);
    let bx = resolve_box(model, box_, anchor)?;
    let n = sample.len() as f64;

    let residual = |t: f64| -> f64 {
        let data = sample
            .iter()
            .map(|&x| {
                let l = model.log_density_raw(t, x);
                (beta * l).exp() * model.score_raw(t, x)
            })
            .sum::<f64>()
            / n;
        data - dpd_score_integral(model, t, beta)
    };
    let settings = QuadratureSettings::default();
    // negated density-power objective, so larger is better
    let objective = |t: f64| -> Result<f64> {
        let dens = dpd_density_integral(model, t, beta, &settings)?;
        let data = sample
            .iter()
            .map(|&x| (beta * model.log_density_raw(t, x)).exp())
            .sum::<f64>()
            / n;
        Ok(-(dens - (1.0 + 1.0 / beta) * data))
    };

    // locate roots by sign changes of the residual on the grid
    let grid = bx.grid();
    let g: Vec<f64> = grid.iter().map(|&t| residual(t)).collect();
    let mut roots = Vec::new();
    let mut iterations = 0usize;
    for i in 0..grid.len() - 1 {
        if !(g[i].is_finite() && g[i + 1].is_finite()) {
            continue;
        }
        if g[i] == 0.0 {
            roots.push(grid[i]);
            continue;
        }
        if g[i] * g[i + 1] < 0.0 {
            let r = brent::root(residual, grid[i], grid[i + 1], bx.refine_tol, REFINE_MAX_ITER)?;
            iterations += 1;
            roots.push(r);
        }
    }
    if g.last().copied() == Some(0.0) {
        roots.push(*grid.last().unwrap());
    }
    if roots.is_empty() {
        return Err(Error::Numerical(
            "density power estimating equation has no root in the search box".into(),
        ));
    }

    let mut scored: Vec<(f64, f64)> = Vec::new();
    for r in roots {
        scored.push((r, objective(r)?));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = scored[0];
    for &(t, v) in &scored[1..] {
        let tie = (v - best.1).abs() <= VALUE_TIE_TOL * best.1.abs().max(1.0);
        if (tie && t < best.0) || (!tie && v > best.1) {
            best = (t, v);
        }
    }
    let near: Vec<(f64, f64)> = scored
        .iter()
        .copied()
        .filter(|&(_, v)| v >= best.1 - NEAR_OPTIMUM_WINDOW)
        .collect();
    let res = residual(best.0);
    let converged = res.is_finite() && res.abs() <= STATIONARITY_TOL && bx.is_interior(best.0);
    Ok(EstimateResult {
        estimate: best.0,
        criterion_value: best.1,
        stationarity_residual: res,
        iterations,
        converged,
        local_optima: near,
    })
}
