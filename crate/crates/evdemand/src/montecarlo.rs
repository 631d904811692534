//! Monte Carlo estimation of the daily demand profile.
//!
//! Sessions are drawn independently, each from its own counter-derived RNG
//! stream, and deposited into fixed-size chunks of a histogram. Chunk
//! boundaries (not worker scheduling) define the floating-point reduction
//! order, so a run is bit-identical for any worker count.

use std::error::Error;
use std::fmt;

use rayon::prelude::*;

use crate::analytic::SessionModel;
use crate::profile::{
    bins_for_resolution, DemandProfile, ProfileError, ProfileMeta, Provenance, DAY_HOURS,
};
use crate::rng::RandomStream;

/// Sessions per reduction chunk. Fixed: changing it changes the rounding
/// order and therefore the exact output bits.
pub const CHUNK_SESSIONS: u64 = 4096;

/// Errors from histogram accumulation or simulation.
#[derive(Debug)]
pub enum McError {
    InvalidOptions(String),
    /// Histograms on different grids cannot merge.
    GridMismatch(String),
    Profile(ProfileError),
}

impl fmt::Display for McError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            McError::InvalidOptions(msg) => write!(f, "invalid simulation options: {msg}"),
            McError::GridMismatch(msg) => write!(f, "grid mismatch: {msg}"),
            McError::Profile(e) => write!(f, "profile error: {e}"),
        }
    }
}

impl Error for McError {
    fn source(&self) -> Option<&(dyn Error + 'static)> {
        match self {
            McError::Profile(e) => Some(e),
            _ => None,
        }
    }
}

impl From<ProfileError> for McError {
    fn from(e: ProfileError) -> Self {
        McError::Profile(e)
    }
}

/// One sampled charging session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargingSession {
    /// Plug-in time in hours; any real value, folded onto the 24 h clock.
    pub arrival_h: f64,
    /// Charging duration in hours, >= 0.
    pub duration_h: f64,
    /// Constant draw while charging, kW.
    pub power_kw: f64,
}

/// Accumulates per-bin sums and squared sums of session demand, plus the
/// per-session energy moments needed for an aggregate-energy standard
/// error (bins are correlated, so per-bin errors cannot be summed).
#[derive(Debug, Clone)]
pub struct PartialHistogram {
    resolution_h: f64,
    sum_kw: Vec<f64>,
    sumsq_kw: Vec<f64>,
    energy_sum_kwh: f64,
    energy_sumsq_kwh: f64,
    count: u64,
    // per-session scratch: a wrapped session can hit one bin twice and the
    // two pieces must be summed before squaring
    scratch: Vec<f64>,
    touched: Vec<usize>,
}

impl PartialHistogram {
    pub fn new(resolution_h: f64) -> Result<Self, McError> {
        let n = bins_for_resolution(resolution_h)?;
        Ok(PartialHistogram {
            resolution_h,
            sum_kw: vec![0.0; n],
            sumsq_kw: vec![0.0; n],
            energy_sum_kwh: 0.0,
            energy_sumsq_kwh: 0.0,
            count: 0,
            scratch: vec![0.0; n],
            touched: Vec::new(),
        })
    }

    pub fn resolution_h(&self) -> f64 {
        self.resolution_h
    }

    pub fn n_bins(&self) -> usize {
        self.sum_kw.len()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Per-bin sums of deposited demand, kW.
    pub fn sum_kw(&self) -> &[f64] {
        &self.sum_kw
    }

    /// Per-bin sums of squared deposits, kW^2.
    pub fn sumsq_kw(&self) -> &[f64] {
        &self.sumsq_kw
    }

    /// Folds one session onto the day grid. Bin `i` receives
    /// `power * overlap_i / resolution` where `overlap_i` is the time the
    /// session spends in bin `i` (mod 24 h), so the session's deposits
    /// integrate back to `power * duration`.
    pub fn deposit_session(&mut self, session: &ChargingSession) {
        let a = session.power_kw;
        let duration = session.duration_h.max(0.0);
        let n = self.n_bins();
        let mut start = session.arrival_h.rem_euclid(DAY_HOURS);
        if start >= DAY_HOURS {
            // rem_euclid of a tiny negative can round up to exactly 24
            start = 0.0;
        }
        let full_days = (duration / DAY_HOURS).floor();
        let remainder = duration - full_days * DAY_HOURS;
        let end = start + remainder;
        self.mark_segment(a, start, end.min(DAY_HOURS));
        if end > DAY_HOURS {
            self.mark_segment(a, 0.0, end - DAY_HOURS);
        }
        if full_days > 0.0 {
            // the session covers every clock bin full_days times over
            let base = a * full_days;
            for i in 0..n {
                let d = base + self.scratch[i];
                self.sum_kw[i] += d;
                self.sumsq_kw[i] += d * d;
                self.scratch[i] = 0.0;
            }
            self.touched.clear();
        } else {
            for k in 0..self.touched.len() {
                let i = self.touched[k];
                let d = self.scratch[i];
                self.sum_kw[i] += d;
                self.sumsq_kw[i] += d * d;
                self.scratch[i] = 0.0;
            }
            self.touched.clear();
        }
        let energy = a * duration;
        self.energy_sum_kwh += energy;
        self.energy_sumsq_kwh += energy * energy;
        self.count += 1;
    }

    /// Adds the demand of the in-day interval `[lo, hi)` into the scratch
    /// buffer, one entry per overlapped bin.
    fn mark_segment(&mut self, a: f64, lo: f64, hi: f64) {
        if hi <= lo {
            return;
        }
        let n = self.n_bins();
        let dt = self.resolution_h;
        let mut i = ((lo / dt) as usize).min(n - 1);
        loop {
            let bin_lo = i as f64 * dt;
            let bin_hi = (i as f64 + 1.0) * dt;
            let overlap = hi.min(bin_hi) - lo.max(bin_lo);
            if overlap > 0.0 {
                if self.scratch[i] == 0.0 {
                    self.touched.push(i);
                }
                self.scratch[i] += a * overlap / dt;
            }
            i += 1;
            if bin_hi >= hi || i >= n {
                break;
            }
        }
    }

    /// Adds another partial's accumulators into this one.
    ///
    /// # Errors
    ///
    /// [`McError::GridMismatch`] when grids differ (resolution compared
    /// bitwise).
    pub fn merge_from(&mut self, other: &PartialHistogram) -> Result<(), McError> {
        if self.resolution_h.to_bits() != other.resolution_h.to_bits()
            || self.n_bins() != other.n_bins()
        {
            return Err(McError::GridMismatch(format!(
                "{} bins at {} h vs {} bins at {} h",
                self.n_bins(),
                self.resolution_h,
                other.n_bins(),
                other.resolution_h
            )));
        }
        for i in 0..self.n_bins() {
            self.sum_kw[i] += other.sum_kw[i];
            self.sumsq_kw[i] += other.sumsq_kw[i];
        }
        self.energy_sum_kwh += other.energy_sum_kwh;
        self.energy_sumsq_kwh += other.energy_sumsq_kwh;
        self.count += other.count;
        Ok(())
    }

    /// Mean session energy, kWh.
    pub fn mean_session_energy_kwh(&self) -> f64 {
        self.energy_sum_kwh / self.count as f64
    }

    /// Standard error of the mean session energy. Scaling by the grid-sum
    /// identity, this is also the standard error of the profile's daily
    /// energy.
    pub fn session_energy_stderr_kwh(&self) -> f64 {
        let n = self.count as f64;
        let var =
            ((self.energy_sumsq_kwh - self.energy_sum_kwh * self.energy_sum_kwh / n) / (n - 1.0))
                .max(0.0);
        (var / n).sqrt()
    }

    /// Converts accumulated sums into a profile: per-bin mean demand and
    /// its standard error. A single session has no variance estimate, so
    /// its profile carries no stderr column.
    ///
    /// # Errors
    ///
    /// `InvalidOptions` when no sessions were deposited.
    pub fn to_profile(&self, seed: u64) -> Result<DemandProfile, McError> {
        if self.count == 0 {
            return Err(McError::InvalidOptions(
                "cannot build a profile from zero sessions".into(),
            ));
        }
        let n = self.count as f64;
        let values: Vec<f64> = self.sum_kw.iter().map(|s| s / n).collect();
        let stderr = (self.count >= 2).then(|| {
            self.sum_kw
                .iter()
                .zip(&self.sumsq_kw)
                .map(|(&s, &sq)| {
                    let var = ((sq - s * s / n) / (n - 1.0)).max(0.0);
                    (var / n).sqrt()
                })
                .collect()
        });
        let meta =
            ProfileMeta::new(Provenance::MonteCarlo { sessions: self.count, seed });
        Ok(DemandProfile::new(self.resolution_h, values, stderr, meta)?)
    }
}

/// Folds a list of partials into one, left to right. The caller fixes the
/// order; with chunked inputs this makes the reduction independent of how
/// work was scheduled.
///
/// # Errors
///
/// `InvalidOptions` on an empty list, `GridMismatch` on differing grids.
pub fn merge_partials(parts: &[PartialHistogram]) -> Result<PartialHistogram, McError> {
    let Some(first) = parts.first() else {
        return Err(McError::InvalidOptions("nothing to merge".into()));
    };
    let mut total = first.clone();
    for part in &parts[1..] {
        total.merge_from(part)?;
    }
    Ok(total)
}

/// Draws one session from the model. Arrival first, duration second; each
/// session owns a whole RNG stream, so the draw count of one session
/// never shifts another.
pub fn sample_session(model: &SessionModel, stream: &mut RandomStream) -> ChargingSession {
    let arrival_h = model.arrival().sample(stream);
    let duration_h = model.charge_time().sample(stream);
    ChargingSession { arrival_h, duration_h, power_kw: model.power_kw() }
}

/// Simulation controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub sessions: u64,
    pub seed: u64,
    pub resolution_h: f64,
    /// Worker threads; 0 means one per available core. The result does
    /// not depend on this value.
    pub workers: usize,
}

/// Samples `sessions` independent sessions from the model and accumulates
/// them. Session `s` always uses RNG stream `s` of `seed`, and sessions
/// are reduced in fixed chunks of [`CHUNK_SESSIONS`], so the result is
/// bit-identical for any `workers`.
pub fn simulate_histogram(
    model: &SessionModel,
    opts: &SimOptions,
) -> Result<PartialHistogram, McError> {
    if opts.sessions == 0 {
        return Err(McError::InvalidOptions("need at least 1 session".into()));
    }
    // validate the grid before spawning anything
    bins_for_resolution(opts.resolution_h)?;
    let n_chunks = opts.sessions.div_ceil(CHUNK_SESSIONS);
    let run_chunk = |chunk: u64| -> PartialHistogram {
        let mut hist = PartialHistogram::new(opts.resolution_h).expect("grid validated above");
        let lo = chunk * CHUNK_SESSIONS;
        let hi = opts.sessions.min(lo + CHUNK_SESSIONS);
        for s in lo..hi {
            let mut stream = RandomStream::new(opts.seed, s);
            hist.deposit_session(&sample_session(model, &mut stream));
        }
        hist
    };
    let parts: Vec<PartialHistogram> = if opts.workers == 1 {
        (0..n_chunks).map(run_chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| McError::InvalidOptions(format!("thread pool: {e}")))?;
        pool.install(|| (0..n_chunks).into_par_iter().map(run_chunk).collect())
    };
    merge_partials(&parts)
}

/// [`simulate_histogram`] finished into a profile with per-bin standard
/// errors.
pub fn simulate_fleet(model: &SessionModel, opts: &SimOptions) -> Result<DemandProfile, McError> {
    simulate_histogram(model, opts)?.to_profile(opts.seed)
}
