//! Probability laws for plug-in times and charge durations.
//!
//! Five families are supported:
//!
//! | family               | parameters            | support   |
//! |----------------------|-----------------------|-----------|
//! | Gaussian             | mu, sigma2            | all reals |
//! | Uniform              | c, d                  | [c, d)    |
//! | Exponential          | mean                  | [0, inf)  |
//! | TruncatedGaussian    | mu, sigma2 (parent)   | [0, inf)  |
//! | Rician               | nu, sigma             | [0, inf)  |
//!
//! The truncated Gaussian is the parent Gaussian conditioned on being
//! nonnegative (normalizer 1/Q(-mu/sigma)); the Rician is the norm of a
//! 2-D Gaussian with mean amplitude nu and per-axis deviation sigma.
//! Every family carries closed-form moments and [`match_moments`] solves
//! the inverse problem: find parameters hitting a target mean and
//! variance, so different duration laws can be compared like for like.
//! Sampling is inversion (uniform, exponential), direct transformation
//! (Gaussian, Rician), or accept-reject with the parent Gaussian as the
//! proposal (truncated Gaussian).

use std::error::Error;
use std::fmt;

use crate::quad;
use crate::rng::RandomStream;
use crate::specfun::{
    bessel_i0_scaled, bessel_i1_scaled, q_function, std_normal_cdf, std_normal_pdf,
};

/// Accept-reject parameterizations with acceptance below this are
/// rejected at construction; the expected number of proposals per sample
/// would exceed 1000.
pub const MIN_ACCEPTANCE: f64 = 1e-3;

/// Moment matching is feasible for the Rician family only when
/// mean^2/variance exceeds this bound (the Rayleigh limit, pi/(4-pi)).
pub const RICIAN_FEASIBILITY_BOUND: f64 = 3.6597923663254877;

/// Errors from construction, evaluation, or moment matching.
#[derive(Debug, Clone, PartialEq)]
pub enum DistError {
    /// Parameters violate a family's constraints.
    InvalidParameters(String),
    /// Moment matching has no solution in the requested family.
    NoSolution(String),
}

impl fmt::Display for DistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistError::InvalidParameters(msg) => write!(f, "invalid parameters: {msg}"),
            DistError::NoSolution(msg) => write!(f, "no solution: {msg}"),
        }
    }
}

impl Error for DistError {}

/// Family tag, used to pick a moment-matching target and in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Gaussian,
    Uniform,
    Exponential,
    TruncatedGaussian,
    Rician,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::Gaussian => "gaussian",
            Family::Uniform => "uniform",
            Family::Exponential => "exponential",
            Family::TruncatedGaussian => "truncated-gaussian",
            Family::Rician => "rician",
        };
        f.write_str(name)
    }
}

/// Closed support interval of a law; either bound may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    // sigma caches sqrt(sigma2); sigma2 is the canonical parameter
    Gaussian { mu: f64, sigma2: f64, sigma: f64 },
    Uniform { c: f64, d: f64 },
    Exponential { mean: f64 },
    TruncatedGaussian { mu: f64, sigma2: f64, sigma: f64 },
    Rician { nu: f64, sigma: f64 },
}

/// A validated probability law; construct through the per-family
/// constructors so parameter constraints always hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distribution(Kind);

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), DistError> {
    if cond {
        Ok(())
    } else {
        Err(DistError::InvalidParameters(msg()))
    }
}

impl Distribution {
    /// Gaussian with mean `mu` and variance `sigma2`.
    pub fn gaussian(mu: f64, sigma2: f64) -> Result<Self, DistError> {
        require(mu.is_finite(), || format!("gaussian mu must be finite, got {mu}"))?;
        require(sigma2.is_finite() && sigma2 > 0.0, || {
            format!("gaussian sigma2 must be positive and finite, got {sigma2}")
        })?;
        Ok(Distribution(Kind::Gaussian { mu, sigma2, sigma: sigma2.sqrt() }))
    }

    /// Uniform on [c, d).
    pub fn uniform(c: f64, d: f64) -> Result<Self, DistError> {
        require(c.is_finite() && d.is_finite(), || {
            format!("uniform bounds must be finite, got [{c}, {d})")
        })?;
        require(d > c, || format!("uniform needs d > c, got [{c}, {d})"))?;
        Ok(Distribution(Kind::Uniform { c, d }))
    }

    /// Exponential with the given mean (rate 1/mean).
    pub fn exponential(mean: f64) -> Result<Self, DistError> {
        require(mean.is_finite() && mean > 0.0, || {
            format!("exponential mean must be positive and finite, got {mean}")
        })?;
        Ok(Distribution(Kind::Exponential { mean }))
    }

    /// Gaussian with parent parameters (mu, sigma2) conditioned on being
    /// nonnegative. The parent acceptance probability Q(-mu/sigma) must
    /// be at least [`MIN_ACCEPTANCE`] so accept-reject sampling stays
    /// tractable.
    pub fn truncated_gaussian(mu: f64, sigma2: f64) -> Result<Self, DistError> {
        require(mu.is_finite(), || {
            format!("truncated-gaussian mu must be finite, got {mu}")
        })?;
        require(sigma2.is_finite() && sigma2 > 0.0, || {
            format!("truncated-gaussian sigma2 must be positive and finite, got {sigma2}")
        })?;
        let sigma = sigma2.sqrt();
        let acceptance = q_function(-mu / sigma);
        require(acceptance >= MIN_ACCEPTANCE, || {
            format!(
                "truncated-gaussian acceptance Q(-mu/sigma) = {acceptance:.3e} \
                 below the {MIN_ACCEPTANCE:e} sampling guard"
            )
        })?;
        Ok(Distribution(Kind::TruncatedGaussian { mu, sigma2, sigma }))
    }

    /// Rician with line-of-sight amplitude `nu >= 0` and per-axis
    /// deviation `sigma > 0`.
    pub fn rician(nu: f64, sigma: f64) -> Result<Self, DistError> {
        require(nu.is_finite() && nu >= 0.0, || {
            format!("rician nu must be nonnegative and finite, got {nu}")
        })?;
        require(sigma.is_finite() && sigma > 0.0, || {
            format!("rician sigma must be positive and finite, got {sigma}")
        })?;
        Ok(Distribution(Kind::Rician { nu, sigma }))
    }

    /// Family tag of this law.
    pub fn family(&self) -> Family {
        match self.0 {
            Kind::Gaussian { .. } => Family::Gaussian,
            Kind::Uniform { .. } => Family::Uniform,
            Kind::Exponential { .. } => Family::Exponential,
            Kind::TruncatedGaussian { .. } => Family::TruncatedGaussian,
            Kind::Rician { .. } => Family::Rician,
        }
    }

    /// `(mu, sigma)` if this is a plain Gaussian.
    pub fn as_gaussian(&self) -> Option<(f64, f64)> {
        match self.0 {
            Kind::Gaussian { mu, sigma, .. } => Some((mu, sigma)),
            _ => None,
        }
    }

    /// `(c, d)` if this is uniform.
    pub fn as_uniform(&self) -> Option<(f64, f64)> {
        match self.0 {
            Kind::Uniform { c, d } => Some((c, d)),
            _ => None,
        }
    }

    /// Human-readable parameter summary, e.g. `gaussian(mu=19, sigma2=10)`.
    pub fn describe(&self) -> String {
        match self.0 {
            Kind::Gaussian { mu, sigma2, .. } => format!("gaussian(mu={mu}, sigma2={sigma2})"),
            Kind::Uniform { c, d } => format!("uniform(c={c}, d={d})"),
            Kind::Exponential { mean } => format!("exponential(mean={mean})"),
            Kind::TruncatedGaussian { mu, sigma2, .. } => {
                format!("truncated-gaussian(mu={mu}, sigma2={sigma2})")
            }
            Kind::Rician { nu, sigma } => format!("rician(nu={nu}, sigma={sigma})"),
        }
    }

    /// Support interval.
    pub fn support(&self) -> Support {
        match self.0 {
            Kind::Gaussian { .. } => Support { low: f64::NEG_INFINITY, high: f64::INFINITY },
            Kind::Uniform { c, d } => Support { low: c, high: d },
            Kind::Exponential { .. }
            | Kind::TruncatedGaussian { .. }
            | Kind::Rician { .. } => Support { low: 0.0, high: f64::INFINITY },
        }
    }

    /// Probability density at `x` (zero outside the support).
    pub fn pdf(&self, x: f64) -> f64 {
        match self.0 {
            Kind::Gaussian { mu, sigma, .. } => std_normal_pdf((x - mu) / sigma) / sigma,
            Kind::Uniform { c, d } => {
                if x >= c && x < d {
                    1.0 / (d - c)
                } else {
                    0.0
                }
            }
            Kind::Exponential { mean } => {
                if x >= 0.0 {
                    (-x / mean).exp() / mean
                } else {
                    0.0
                }
            }
            Kind::TruncatedGaussian { mu, sigma, .. } => {
                if x >= 0.0 {
                    let z = q_function(-mu / sigma);
                    std_normal_pdf((x - mu) / sigma) / (sigma * z)
                } else {
                    0.0
                }
            }
            Kind::Rician { nu, sigma } => {
                if x > 0.0 {
                    let s2 = sigma * sigma;
                    // scaled-Bessel form: the e^(x nu / s2) inside I0 is
                    // folded into the Gaussian factor, so nothing overflows
                    let g = (-(x - nu) * (x - nu) / (2.0 * s2)).exp();
                    x / s2 * g * bessel_i0_scaled(x * nu / s2)
                } else {
                    0.0
                }
            }
        }
    }

    /// Cumulative distribution function P(X <= x).
    pub fn cdf(&self, x: f64) -> f64 {
        match self.0 {
            Kind::Gaussian { mu, sigma, .. } => std_normal_cdf((x - mu) / sigma),
            Kind::Uniform { c, d } => ((x - c) / (d - c)).clamp(0.0, 1.0),
            Kind::Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / mean).exp_m1()
                }
            }
            Kind::TruncatedGaussian { mu, sigma, .. } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let xi = (x - mu) / sigma;
                let z = q_function(-mu / sigma);
                let upper = 1.0 - q_function(xi) / z;
                if upper > 0.5 {
                    // upper-tail form keeps precision when both CDFs are near 1
                    upper.clamp(0.0, 1.0)
                } else {
                    ((std_normal_cdf(xi) - std_normal_cdf(-mu / sigma)) / z).clamp(0.0, 1.0)
                }
            }
            Kind::Rician { nu, sigma } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let hi = nu + 16.0 * sigma;
                if x >= hi {
                    // mass beyond nu + 16 sigma is below 1e-56
                    return 1.0;
                }
                if x <= nu {
                    let q = quad::integrate(
                        |t| self.pdf(t),
                        0.0,
                        x,
                        1e-13,
                        quad::DEFAULT_MAX_SEGMENTS,
                    );
                    q.value.clamp(0.0, 1.0)
                } else {
                    // past the ridge, integrate the upper tail instead: the
                    // result keeps full relative precision as it approaches 1
                    // instead of drowning in the noise of a mass-1 integral
                    let tail =
                        quad::integrate(|t| self.pdf(t), x, hi, 1e-13, quad::DEFAULT_MAX_SEGMENTS);
                    (1.0 - tail.value.max(0.0)).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// Quantile function: smallest x with `cdf(x) >= p`, for p in (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64, DistError> {
        require(p > 0.0 && p < 1.0, || {
            format!("quantile probability must lie in (0, 1), got {p}")
        })?;
        Ok(match self.0 {
            Kind::Gaussian { mu, sigma, .. } => mu + sigma * std_normal_quantile(p),
            Kind::Uniform { c, d } => c + p * (d - c),
            Kind::Exponential { mean } => -mean * (-p).ln_1p(),
            Kind::TruncatedGaussian { mu, sigma, .. } => {
                let alpha = -mu / sigma;
                let lo = std_normal_cdf(alpha);
                let target = lo + p * (1.0 - lo);
                let x = mu + sigma * std_normal_quantile(target);
                x.max(0.0)
            }
            Kind::Rician { nu, sigma } => {
                // bisection on the (monotone) CDF; tail bound nu + 16 sigma
                // holds far past p = 1 - 1e-14
                let mut lo = 0.0_f64;
                let mut hi = nu + 16.0 * sigma;
                for _ in 0..120 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        })
    }

    /// Mean, in closed form.
    pub fn mean(&self) -> f64 {
        match self.0 {
            Kind::Gaussian { mu, .. } => mu,
            Kind::Uniform { c, d } => 0.5 * (c + d),
            Kind::Exponential { mean } => mean,
            Kind::TruncatedGaussian { mu, sigma, .. } => {
                let (lambda, _) = mills(mu, sigma);
                mu + sigma * lambda
            }
            Kind::Rician { nu, sigma } => rician_mean(nu, sigma),
        }
    }

    /// Variance, in closed form.
    pub fn variance(&self) -> f64 {
        match self.0 {
            Kind::Gaussian { sigma2, .. } => sigma2,
            Kind::Uniform { c, d } => (d - c) * (d - c) / 12.0,
            Kind::Exponential { mean } => mean * mean,
            Kind::TruncatedGaussian { mu, sigma, .. } => {
                let (lambda, alpha) = mills(mu, sigma);
                sigma * sigma * (1.0 + alpha * lambda - lambda * lambda)
            }
            Kind::Rician { nu, sigma } => {
                let m = rician_mean(nu, sigma);
                2.0 * sigma * sigma + nu * nu - m * m
            }
        }
    }

    /// Central interval holding all probability mass except `eps` in each
    /// tail, intersected with the support. Used to clip integration ranges.
    pub fn quantile_range(&self, eps: f64) -> Result<(f64, f64), DistError> {
        let lo = self.quantile(eps)?;
        let hi = self.quantile(1.0 - eps)?;
        Ok((lo, hi))
    }

    /// Draws one value.
    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        self.sample_counted(stream).0
    }

    /// Draws one value and reports how many base proposals were consumed:
    /// always 1 except for the accept-reject truncated Gaussian, where the
    /// count audits the acceptance rate.
    pub fn sample_counted(&self, stream: &mut RandomStream) -> (f64, u64) {
        match self.0 {
            Kind::Gaussian { mu, sigma, .. } => (mu + sigma * stream.next_standard_normal(), 1),
            Kind::Uniform { c, d } => (c + stream.next_uniform() * (d - c), 1),
            Kind::Exponential { mean } => {
                // inversion; u in [0, 1) keeps the log argument positive
                let u = stream.next_uniform();
                (-mean * (-u).ln_1p(), 1)
            }
            Kind::TruncatedGaussian { mu, sigma, .. } => {
                let mut proposals = 0u64;
                loop {
                    proposals += 1;
                    let x = mu + sigma * stream.next_standard_normal();
                    if x >= 0.0 {
                        return (x, proposals);
                    }
                }
            }
            Kind::Rician { nu, sigma } => {
                let z1 = stream.next_standard_normal();
                let z2 = stream.next_standard_normal();
                let a = nu + sigma * z1;
                let b = sigma * z2;
                ((a * a + b * b).sqrt(), 1)
            }
        }
    }

    /// Law of `factor * X` within the same family, defined for every
    /// family here (all five are closed under positive scaling).
    pub fn scale(&self, factor: f64) -> Result<Self, DistError> {
        require(factor.is_finite() && factor > 0.0, || {
            format!("scale factor must be positive and finite, got {factor}")
        })?;
        match self.0 {
            Kind::Gaussian { mu, sigma2, .. } => {
                Distribution::gaussian(factor * mu, factor * factor * sigma2)
            }
            Kind::Uniform { c, d } => Distribution::uniform(factor * c, factor * d),
            Kind::Exponential { mean } => Distribution::exponential(factor * mean),
            Kind::TruncatedGaussian { mu, sigma2, .. } => {
                Distribution::truncated_gaussian(factor * mu, factor * factor * sigma2)
            }
            Kind::Rician { nu, sigma } => Distribution::rician(factor * nu, factor * sigma),
        }
    }
}

/// Inverse Mills ratio lambda = pdf(alpha)/Q(alpha) at the truncation
/// point alpha = -mu/sigma, returned with alpha.
fn mills(mu: f64, sigma: f64) -> (f64, f64) {
    let alpha = -mu / sigma;
    (std_normal_pdf(alpha) / q_function(alpha), alpha)
}

/// Rician mean via the Laguerre function of order 1/2:
/// E[X] = sigma * sqrt(pi/2) * L_{1/2}(-nu^2 / (2 sigma^2)), with the
/// Laguerre function expressed through scaled Bessel I0/I1 so large
/// nu/sigma cannot overflow.
fn rician_mean(nu: f64, sigma: f64) -> f64 {
    let t = nu * nu / (2.0 * sigma * sigma);
    let laguerre = (1.0 + t) * bessel_i0_scaled(0.5 * t) + t * bessel_i1_scaled(0.5 * t);
    sigma * (std::f64::consts::PI / 2.0).sqrt() * laguerre
}

// Acklam's rational approximation of the standard normal quantile,
// polished below with two Halley steps against our own CDF.
const ACKLAM_A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const ACKLAM_B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const ACKLAM_C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const ACKLAM_D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

/// Standard normal quantile for p in (0, 1); |error| ~ 1 ulp after the
/// Halley refinements.
fn std_normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const P_LOW: f64 = 0.02425;
    let mut x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((ACKLAM_C[0] * q + ACKLAM_C[1]) * q + ACKLAM_C[2]) * q + ACKLAM_C[3]) * q
            + ACKLAM_C[4])
            * q
            + ACKLAM_C[5])
            / ((((ACKLAM_D[0] * q + ACKLAM_D[1]) * q + ACKLAM_D[2]) * q + ACKLAM_D[3]) * q + 1.0)
    } else if p > 1.0 - P_LOW {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((ACKLAM_C[0] * q + ACKLAM_C[1]) * q + ACKLAM_C[2]) * q + ACKLAM_C[3]) * q
            + ACKLAM_C[4])
            * q
            + ACKLAM_C[5])
            / ((((ACKLAM_D[0] * q + ACKLAM_D[1]) * q + ACKLAM_D[2]) * q + ACKLAM_D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((ACKLAM_A[0] * r + ACKLAM_A[1]) * r + ACKLAM_A[2]) * r + ACKLAM_A[3]) * r
            + ACKLAM_A[4])
            * r
            + ACKLAM_A[5])
            * q
            / (((((ACKLAM_B[0] * r + ACKLAM_B[1]) * r + ACKLAM_B[2]) * r + ACKLAM_B[3]) * r
                + ACKLAM_B[4])
                * r
                + 1.0)
    };
    for _ in 0..2 {
        let e = std_normal_cdf(x) - p;
        let pdf = std_normal_pdf(x);
        if pdf == 0.0 {
            break;
        }
        let u = e / pdf;
        // Halley step
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// A moment-matching result: the fitted law plus a flag for families with
/// too few degrees of freedom to hit the variance (exponential matches
/// the mean only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentMatch {
    pub distribution: Distribution,
    /// False when the family could only match the mean.
    pub variance_matched: bool,
}

/// Finds parameters in `family` with the given mean and variance.
///
/// Uniform and the Gaussian-derived families match both moments exactly;
/// Exponential has one parameter and matches the mean only (flagged).
/// The plain Gaussian is an arrival-time law, not a duration law, and is
/// not a matching target.
///
/// # Errors
///
/// [`DistError::InvalidParameters`] for nonpositive targets or the
/// Gaussian family; [`DistError::NoSolution`] when the family cannot
/// reach the target pair, with the feasibility bound in the message.
pub fn match_moments(family: Family, mean: f64, variance: f64) -> Result<MomentMatch, DistError> {
    require(mean.is_finite() && mean > 0.0, || {
        format!("target mean must be positive and finite, got {mean}")
    })?;
    require(variance.is_finite() && variance > 0.0, || {
        format!("target variance must be positive and finite, got {variance}")
    })?;
    match family {
        Family::Gaussian => Err(DistError::InvalidParameters(
            "gaussian is an arrival-time family, not a moment-matching target".into(),
        )),
        Family::Uniform => {
            let half_width = (3.0 * variance).sqrt();
            let c = mean - half_width;
            let d = mean + half_width;
            if c < 0.0 {
                return Err(DistError::NoSolution(format!(
                    "uniform durations need mean - sqrt(3 variance) >= 0; \
                     got c = {c:.6} for mean {mean}, variance {variance}"
                )));
            }
            Ok(MomentMatch { distribution: Distribution::uniform(c, d)?, variance_matched: true })
        }
        Family::Exponential => {
            let distribution = Distribution::exponential(mean)?;
            let variance_matched = (variance - mean * mean).abs() <= 1e-12 * mean * mean;
            Ok(MomentMatch { distribution, variance_matched })
        }
        Family::TruncatedGaussian => match_truncated_gaussian(mean, variance),
        Family::Rician => match_rician(mean, variance),
    }
}

/// Damped Newton on (mu, sigma) with the analytic Jacobian built from the
/// Mills-ratio derivative lambda'(alpha) = lambda * (lambda - alpha).
fn match_truncated_gaussian(mean: f64, variance: f64) -> Result<MomentMatch, DistError> {
    // as mu -> -inf the law tends to exponential-like with mean^2/var -> 1,
    // so targets at or below that ratio are unreachable
    if mean * mean / variance <= 1.0 {
        return Err(DistError::NoSolution(format!(
            "truncated gaussian needs mean^2/variance > 1, got {:.6}",
            mean * mean / variance
        )));
    }
    let mut mu = mean;
    let mut sigma = variance.sqrt();
    let resid = |mu: f64, sigma: f64| -> (f64, f64) {
        let alpha = -mu / sigma;
        let lam = std_normal_pdf(alpha) / q_function(alpha);
        let m = mu + sigma * lam;
        let v = sigma * sigma * (1.0 + alpha * lam - lam * lam);
        (m - mean, v - variance)
    };
    let norm = |r: (f64, f64)| (r.0 / mean).abs().max((r.1 / variance).abs());
    let mut r = resid(mu, sigma);
    for _ in 0..200 {
        if norm(r) < 1e-13 {
            break;
        }
        let alpha = -mu / sigma;
        let lam = std_normal_pdf(alpha) / q_function(alpha);
        let dlam = lam * (lam - alpha);
        // alpha depends on both parameters: d(alpha)/d(mu) = -1/sigma,
        // d(alpha)/d(sigma) = mu/sigma^2
        let dm_dmu = 1.0 - dlam;
        let dm_dsigma = lam + dlam * mu / sigma;
        let dv_dalpha = sigma * sigma * (lam + alpha * dlam - 2.0 * lam * dlam);
        let dv_dmu = dv_dalpha * (-1.0 / sigma);
        let dv_dsigma =
            2.0 * sigma * (1.0 + alpha * lam - lam * lam) + dv_dalpha * (mu / (sigma * sigma));
        let det = dm_dmu * dv_dsigma - dm_dsigma * dv_dmu;
        if det == 0.0 || !det.is_finite() {
            return Err(DistError::NoSolution(
                "truncated-gaussian Newton iteration hit a singular Jacobian".into(),
            ));
        }
        let step_mu = (r.0 * dv_dsigma - r.1 * dm_dsigma) / det;
        let step_sigma = (r.1 * dm_dmu - r.0 * dv_dmu) / det;
        // damping: halve until sigma stays positive and the residual drops
        let mut t = 1.0;
        let mut advanced = false;
        for _ in 0..40 {
            let mu_try = mu - t * step_mu;
            let sigma_try = sigma - t * step_sigma;
            if sigma_try > 0.0 {
                let r_try = resid(mu_try, sigma_try);
                if norm(r_try) < norm(r) {
                    mu = mu_try;
                    sigma = sigma_try;
                    r = r_try;
                    advanced = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    if norm(r) >= 1e-12 {
        return Err(DistError::NoSolution(format!(
            "truncated-gaussian matching did not converge for mean {mean}, variance {variance} \
             (residual {:.3e})",
            norm(r)
        )));
    }
    Ok(MomentMatch {
        distribution: Distribution::truncated_gaussian(mu, sigma * sigma)?,
        variance_matched: true,
    })
}

/// Bisection on kappa = nu/sigma: mean^2/variance is monotone increasing
/// in kappa, from pi/(4-pi) at the Rayleigh limit toward infinity, and
/// sigma drops out of the ratio, so one scalar solve suffices.
fn match_rician(mean: f64, variance: f64) -> Result<MomentMatch, DistError> {
    let target = mean * mean / variance;
    if target <= RICIAN_FEASIBILITY_BOUND {
        return Err(DistError::NoSolution(format!(
            "rician needs mean^2/variance > pi/(4-pi) = {RICIAN_FEASIBILITY_BOUND:.12}, \
             got {target:.12}"
        )));
    }
    let ratio = |kappa: f64| {
        let m = rician_mean(kappa, 1.0);
        let v = 2.0 + kappa * kappa - m * m;
        m * m / v
    };
    let mut lo = 0.0_f64;
    let mut hi = 1000.0_f64;
    if ratio(hi) < target {
        return Err(DistError::NoSolution(format!(
            "rician matching target mean^2/variance = {target:.6} needs kappa > 1000"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let kappa = 0.5 * (lo + hi);
    let sigma = mean / rician_mean(kappa, 1.0);
    let nu = kappa * sigma;
    let distribution = Distribution::rician(nu, sigma)?;
    let m = distribution.mean();
    let v = distribution.variance();
    let residual = ((m - mean) / mean).abs().max(((v - variance) / variance).abs());
    if residual >= 1e-12 {
        return Err(DistError::NoSolution(format!(
            "rician matching residual {residual:.3e} exceeds tolerance for \
             mean {mean}, variance {variance}"
        )));
    }
    Ok(MomentMatch { distribution, variance_matched: true })
}
