//! Expected demand curves computed without simulation.
//!
//! A charging session draws constant power `a` from its start time `t0`
//! until `t0 + T`, where `t0` and `T` are independent random variables.
//! The expected drawn power at absolute time `t` is
//!
//! ```text
//! E[x(t)] = a * ( F_t0(t) - integral F_t0(t - T') f_T(T') dT' )
//! ```
//!
//! with `F_t0` the arrival CDF and `f_T` the duration density. Two
//! evaluation routes exist: an adaptive-quadrature route valid for any
//! duration law, and a closed form for Gaussian arrivals with uniform
//! durations. [`fold_to_day`] wraps the curve onto a 24 h clock by
//! summing day-shifted copies.

use std::error::Error;
use std::fmt;

use crate::dist::{DistError, Distribution, Family};
use crate::profile::{
    bins_for_resolution, DemandPath, DemandProfile, ProfileError, ProfileMeta, Provenance,
    DAY_HOURS,
};
use crate::quad;
use crate::specfun::{q_function, std_normal_pdf};

/// Target absolute quadrature tolerance, as a fraction of the session power.
pub const QUAD_TOL_FRACTION: f64 = 1e-10;

/// Quadrature error (as a fraction of power) above which evaluation is
/// reported as failed instead of silently degraded.
pub const QUAD_FAIL_FRACTION: f64 = 1e-8;

/// Tail probability clipped off each end of the duration law when choosing
/// integration limits.
const QUANTILE_CLIP: f64 = 1e-10;

/// Largest truncation mass a fold window may ignore.
pub const MAX_TRUNCATION_MASS: f64 = 1e-6;

/// Errors from expected-demand evaluation.
#[derive(Debug)]
pub enum AnalyticError {
    InvalidModel(String),
    /// Adaptive quadrature could not reach the required accuracy.
    QuadratureFailure { error_estimate: f64, tolerance: f64, t: f64 },
    /// The fold window ignores more probability mass than allowed.
    WindowTooSmall { window_days: u32, tail_mass: f64, limit: f64 },
    Distribution(DistError),
    Profile(ProfileError),
}

impl fmt::Display for AnalyticError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticError::InvalidModel(msg) => write!(f, "invalid model: {msg}"),
            AnalyticError::QuadratureFailure { error_estimate, tolerance, t } => write!(
                f,
                "quadrature failed at t={t}: error estimate {error_estimate:e} \
                 exceeds tolerance {tolerance:e}"
            ),
            AnalyticError::WindowTooSmall { window_days, tail_mass, limit } => write!(
                f,
                "fold window of {window_days} day(s) ignores probability mass \
                 {tail_mass:e} (limit {limit:e}); widen the window"
            ),
            AnalyticError::Distribution(e) => write!(f, "distribution error: {e}"),
            AnalyticError::Profile(e) => write!(f, "profile error: {e}"),
        }
    }
}

impl Error for AnalyticError {
    fn source(&self) -> Option<&(dyn Error + 'static)> {
        match self {
            AnalyticError::Distribution(e) => Some(e),
            AnalyticError::Profile(e) => Some(e),
            _ => None,
        }
    }
}

impl From<DistError> for AnalyticError {
    fn from(e: DistError) -> Self {
        AnalyticError::Distribution(e)
    }
}

impl From<ProfileError> for AnalyticError {
    fn from(e: ProfileError) -> Self {
        AnalyticError::Profile(e)
    }
}

/// One vehicle's charging behavior: when it plugs in, for how long, and at
/// what constant power.
#[derive(Debug, Clone)]
pub struct SessionModel {
    arrival: Distribution,
    charge_time: Distribution,
    power_kw: f64,
}

impl SessionModel {
    /// # Errors
    ///
    /// `InvalidModel` when the power is not positive and finite, or the
    /// duration law admits negative durations.
    pub fn new(
        arrival: Distribution,
        charge_time: Distribution,
        power_kw: f64,
    ) -> Result<Self, AnalyticError> {
        if !(power_kw.is_finite() && power_kw > 0.0) {
            return Err(AnalyticError::InvalidModel(format!(
                "power must be positive and finite, got {power_kw} kW"
            )));
        }
        if charge_time.support().low < 0.0 {
            return Err(AnalyticError::InvalidModel(format!(
                "charge duration law {} admits negative durations",
                charge_time.describe()
            )));
        }
        Ok(SessionModel { arrival, charge_time, power_kw })
    }

    pub fn arrival(&self) -> &Distribution {
        &self.arrival
    }

    pub fn charge_time(&self) -> &Distribution {
        &self.charge_time
    }

    pub fn power_kw(&self) -> f64 {
        self.power_kw
    }

    /// True when the closed form applies: Gaussian arrival, uniform duration.
    pub fn closed_form_applies(&self) -> bool {
        self.arrival.family() == Family::Gaussian && self.charge_time.family() == Family::Uniform
    }
}

/// Closed form for the unwrapped expected demand with arrival
/// `N(gauss_mu, gauss_sigma^2)` and duration `U[c, d]`, evaluated at
/// absolute time `t` and scaled by `power_kw`.
pub fn expected_demand_uniform_closed(
    gauss_mu: f64,
    gauss_sigma: f64,
    c: f64,
    d: f64,
    power_kw: f64,
    t: f64,
) -> f64 {
    let theta = (t - gauss_mu) / gauss_sigma;
    let cp = (t - c - gauss_mu) / gauss_sigma;
    let dp = (t - d - gauss_mu) / gauss_sigma;
    let bracket = cp * q_function(cp) - dp * q_function(dp) + std_normal_pdf(dp)
        - std_normal_pdf(cp)
        + dp
        - cp;
    let value = power_kw * (1.0 - q_function(theta) + gauss_sigma / (d - c) * bracket);
    // the exact expression lies in [0, a]; rounding can leak just outside
    value.clamp(0.0, power_kw)
}

/// Reusable quadrature evaluator; hoists the duration quantile range so a
/// fold does not recompute it per bin.
struct UnwrappedDemand<'a> {
    model: &'a SessionModel,
    dur_lo: f64,
    dur_hi: f64,
}

impl<'a> UnwrappedDemand<'a> {
    fn new(model: &'a SessionModel) -> Result<Self, AnalyticError> {
        let (dur_lo, dur_hi) = model.charge_time.quantile_range(QUANTILE_CLIP)?;
        Ok(UnwrappedDemand { model, dur_lo, dur_hi })
    }

    fn at(&self, t: f64) -> Result<f64, AnalyticError> {
        let arrival = &self.model.arrival;
        let charge = &self.model.charge_time;
        let averaged = quad::integrate(
            |dur| arrival.cdf(t - dur) * charge.pdf(dur),
            self.dur_lo,
            self.dur_hi,
            QUAD_TOL_FRACTION,
            quad::DEFAULT_MAX_SEGMENTS,
        );
        if averaged.error_estimate > QUAD_FAIL_FRACTION {
            return Err(AnalyticError::QuadratureFailure {
                error_estimate: averaged.error_estimate,
                tolerance: QUAD_FAIL_FRACTION,
                t,
            });
        }
        let a = self.model.power_kw;
        Ok((a * (arrival.cdf(t) - averaged.value)).clamp(0.0, a))
    }
}

/// Unwrapped expected demand at absolute time `t`, by adaptive quadrature
/// over the duration law. Works for every supported duration family.
pub fn expected_demand_unwrapped(model: &SessionModel, t: f64) -> Result<f64, AnalyticError> {
    UnwrappedDemand::new(model)?.at(t)
}

/// Unwrapped expected demand at `t`, dispatching to the closed form when it
/// applies and to quadrature otherwise.
pub fn expected_demand(model: &SessionModel, t: f64) -> Result<f64, AnalyticError> {
    if let (Some((mu, sigma)), Some((c, d))) =
        (model.arrival.as_gaussian(), model.charge_time.as_uniform())
    {
        Ok(expected_demand_uniform_closed(mu, sigma, c, d, model.power_kw, t))
    } else {
        expected_demand_unwrapped(model, t)
    }
}

/// Upper bound on the probability mass the fold ignores outside
/// `[-24*window, 24*(window+1))`.
///
/// Below the window only arrivals before `-24*window` matter, so the
/// arrival CDF bounds that side. Above it, `P(t0 + T >= u)` is split at a
/// high arrival quantile `s`: either the arrival exceeds `s` or the
/// duration exceeds `u - s`. Each side is doubled to cover the geometric
/// tail of later day shifts.
pub fn estimate_truncation_mass(
    model: &SessionModel,
    window_days: u32,
) -> Result<f64, AnalyticError> {
    let w = window_days as f64;
    let below = model.arrival.cdf(-DAY_HOURS * w).max(0.0);
    let s = model.arrival.quantile(1.0 - 1e-12)?;
    let arrival_tail = 1e-12;
    let duration_tail = (1.0 - model.charge_time.cdf(DAY_HOURS * (w + 1.0) - s)).max(0.0);
    Ok((2.0 * (below + arrival_tail + duration_tail)).min(1.0))
}

/// Folds the unwrapped curve onto one 24 h day: bin `i` holds
/// `sum_k E[x(center_i + 24 k)]` for `k` in `-window..=window`, evaluated
/// at bin centers. Picks the closed form when the model allows it.
///
/// # Errors
///
/// [`AnalyticError::WindowTooSmall`] when the ignored mass exceeds
/// [`MAX_TRUNCATION_MASS`]; grid and model errors pass through.
pub fn fold_to_day(
    model: &SessionModel,
    resolution_h: f64,
    window_days: u32,
) -> Result<DemandProfile, AnalyticError> {
    let path = if model.closed_form_applies() {
        DemandPath::ClosedForm
    } else {
        DemandPath::Quadrature
    };
    fold_to_day_with_path(model, resolution_h, window_days, path)
}

/// [`fold_to_day`] with the evaluation route forced. Forcing the closed
/// form onto a model it does not fit is an `InvalidModel` error.
pub fn fold_to_day_with_path(
    model: &SessionModel,
    resolution_h: f64,
    window_days: u32,
    path: DemandPath,
) -> Result<DemandProfile, AnalyticError> {
    if window_days == 0 {
        return Err(AnalyticError::InvalidModel("fold window must be at least one day".into()));
    }
    let n = bins_for_resolution(resolution_h)?;
    let tail_mass = estimate_truncation_mass(model, window_days)?;
    if tail_mass > MAX_TRUNCATION_MASS {
        return Err(AnalyticError::WindowTooSmall {
            window_days,
            tail_mass,
            limit: MAX_TRUNCATION_MASS,
        });
    }
    let shifts: Vec<f64> =
        (-(window_days as i64)..=window_days as i64).map(|k| k as f64 * DAY_HOURS).collect();
    let mut values = vec![0.0_f64; n];
    match path {
        DemandPath::ClosedForm => {
            let (mu, sigma) = model.arrival.as_gaussian().ok_or_else(|| {
                AnalyticError::InvalidModel(format!(
                    "closed form needs a Gaussian arrival, got {}",
                    model.arrival.describe()
                ))
            })?;
            let (c, d) = model.charge_time.as_uniform().ok_or_else(|| {
                AnalyticError::InvalidModel(format!(
                    "closed form needs a uniform duration, got {}",
                    model.charge_time.describe()
                ))
            })?;
            for (i, v) in values.iter_mut().enumerate() {
                let center = (i as f64 + 0.5) * resolution_h;
                for &shift in &shifts {
                    *v += expected_demand_uniform_closed(
                        mu,
                        sigma,
                        c,
                        d,
                        model.power_kw,
                        center + shift,
                    );
                }
            }
        }
        DemandPath::Quadrature => {
            let eval = UnwrappedDemand::new(model)?;
            for (i, v) in values.iter_mut().enumerate() {
                let center = (i as f64 + 0.5) * resolution_h;
                for &shift in &shifts {
                    *v += eval.at(center + shift)?;
                }
            }
        }
    }
    let mut meta = ProfileMeta::new(Provenance::Analytic { path });
    meta.truncation_mass = Some(tail_mass);
    Ok(DemandProfile::new(resolution_h, values, None, meta)?)
}

/// A finite discrete law, e.g. arrivals on a 15-minute lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteLaw {
    /// Builds a law from `(value, probability)` atoms. Atoms are kept
    /// sorted by value.
    ///
    /// # Errors
    ///
    /// `InvalidModel` when empty, a value is non-finite, a probability is
    /// negative, or the probabilities do not sum to 1 within 1e-12.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self, AnalyticError> {
        if atoms.is_empty() {
            return Err(AnalyticError::InvalidModel("discrete law needs at least one atom".into()));
        }
        for &(v, p) in &atoms {
            if !v.is_finite() {
                return Err(AnalyticError::InvalidModel(format!("non-finite atom value {v}")));
            }
            if !(p.is_finite() && p >= 0.0) {
                return Err(AnalyticError::InvalidModel(format!(
                    "atom probability must be nonnegative, got {p}"
                )));
            }
        }
        let total: f64 = atoms.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(AnalyticError::InvalidModel(format!(
                "atom probabilities sum to {total}, expected 1"
            )));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(DiscreteLaw { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// P(X <= x).
    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms.iter().take_while(|&&(v, _)| v <= x).map(|&(_, p)| p).sum()
    }
}

/// Expected demand at `t` when both arrival and duration are finite
/// discrete laws: the duration average becomes an exact sum, so no
/// quadrature is involved.
pub fn expected_demand_discrete(
    arrival: &DiscreteLaw,
    charge_time: &DiscreteLaw,
    power_kw: f64,
    t: f64,
) -> f64 {
    let averaged: f64 =
        charge_time.atoms().iter().map(|&(dur, p)| p * arrival.cdf(t - dur)).sum();
    power_kw * (arrival.cdf(t) - averaged)
}
