//! Daily demand profiles: the common output type of the analytic and
//! Monte Carlo paths.
//!
//! A profile covers one day of width-`resolution_h` bins. Values are
//! expected drawn power per vehicle (kW) at the bin centers; Monte Carlo
//! profiles also carry a per-bin standard error. The CSV form uses 17
//! significant digits so write/read round trips are bit-exact.

use std::error::Error;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

/// Which analytic evaluation produced a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemandPath {
    /// Gaussian arrival + uniform duration closed form.
    ClosedForm,
    /// Arrival CDF averaged over the duration law by adaptive quadrature.
    Quadrature,
}

impl fmt::Display for DemandPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DemandPath::ClosedForm => f.write_str("closed-form"),
            DemandPath::Quadrature => f.write_str("quadrature"),
        }
    }
}

/// How a profile was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Analytic { path: DemandPath },
    MonteCarlo { sessions: u64, seed: u64 },
    /// Parsed back from CSV, which does not store provenance.
    Imported,
}

/// Metadata attached to a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMeta {
    pub provenance: Provenance,
    /// Hash of the scenario configuration that produced the profile.
    pub scenario_hash: Option<u64>,
    /// Analytic only: estimated probability mass ignored by the finite
    /// fold window.
    pub truncation_mass: Option<f64>,
}

impl ProfileMeta {
    pub fn new(provenance: Provenance) -> Self {
        ProfileMeta { provenance, scenario_hash: None, truncation_mass: None }
    }
}

/// Errors building, serializing, or comparing profiles.
#[derive(Debug)]
pub enum ProfileError {
    InvalidGrid(String),
    GridMismatch(String),
    Parse { line: usize, message: String },
    Io(io::Error),
}

impl fmt::Display for ProfileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileError::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            ProfileError::GridMismatch(msg) => write!(f, "grid mismatch: {msg}"),
            ProfileError::Parse { line, message } => {
                write!(f, "CSV parse error at line {line}: {message}")
            }
            ProfileError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl Error for ProfileError {
    fn source(&self) -> Option<&(dyn Error + 'static)> {
        match self {
            ProfileError::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for ProfileError {
    fn from(e: io::Error) -> Self {
        ProfileError::Io(e)
    }
}

/// Hours in the folded day.
pub const DAY_HOURS: f64 = 24.0;

const CSV_HEADER: &str = "t_start_h,t_end_h,expected_kw,stderr_kw";

/// A one-day expected-demand curve on a uniform bin grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandProfile {
    resolution_h: f64,
    values_kw: Vec<f64>,
    stderr_kw: Option<Vec<f64>>,
    meta: ProfileMeta,
}

impl DemandProfile {
    /// Builds a profile, checking that the bin width divides 24 h and the
    /// value (and optional stderr) lengths match the grid.
    pub fn new(
        resolution_h: f64,
        values_kw: Vec<f64>,
        stderr_kw: Option<Vec<f64>>,
        meta: ProfileMeta,
    ) -> Result<Self, ProfileError> {
        let n = bins_for_resolution(resolution_h)?;
        if values_kw.len() != n {
            return Err(ProfileError::InvalidGrid(format!(
                "expected {n} bins for resolution {resolution_h} h, got {}",
                values_kw.len()
            )));
        }
        if let Some(s) = &stderr_kw {
            if s.len() != n {
                return Err(ProfileError::InvalidGrid(format!(
                    "stderr length {} does not match {n} bins",
                    s.len()
                )));
            }
        }
        if let Some(bad) = values_kw.iter().find(|v| !v.is_finite()) {
            return Err(ProfileError::InvalidGrid(format!("non-finite value {bad}")));
        }
        Ok(DemandProfile { resolution_h, values_kw, stderr_kw, meta })
    }

    pub fn resolution_h(&self) -> f64 {
        self.resolution_h
    }

    pub fn n_bins(&self) -> usize {
        self.values_kw.len()
    }

    /// Left edge of bin `i`.
    pub fn bin_start(&self, i: usize) -> f64 {
        i as f64 * self.resolution_h
    }

    /// Center of bin `i`; analytic profiles are evaluated here.
    pub fn bin_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.resolution_h
    }

    pub fn values_kw(&self) -> &[f64] {
        &self.values_kw
    }

    pub fn stderr_kw(&self) -> Option<&[f64]> {
        self.stderr_kw.as_deref()
    }

    pub fn meta(&self) -> &ProfileMeta {
        &self.meta
    }

    pub fn set_scenario_hash(&mut self, hash: u64) {
        self.meta.scenario_hash = Some(hash);
    }

    /// Riemann sum of the curve over the day: kWh per vehicle.
    pub fn daily_energy_kwh(&self) -> f64 {
        self.values_kw.iter().sum::<f64>() * self.resolution_h
    }

    /// Highest bin: (index, kW).
    pub fn peak(&self) -> (usize, f64) {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, &v) in self.values_kw.iter().enumerate() {
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }

    /// Mean of the bins whose centers fall in the clock window
    /// [start_h, end_h); a start after the end wraps past midnight.
    pub fn mean_over_window(&self, start_h: f64, end_h: f64) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for i in 0..self.n_bins() {
            let t = self.bin_center(i);
            let inside = if start_h <= end_h {
                t >= start_h && t < end_h
            } else {
                t >= start_h || t < end_h
            };
            if inside {
                sum += self.values_kw[i];
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    /// Multiplies values (and stderr) by `factor`; scaling a per-vehicle
    /// profile by the fleet size gives the fleet profile.
    pub fn scale_values(&mut self, factor: f64) {
        for v in &mut self.values_kw {
            *v *= factor;
        }
        if let Some(s) = &mut self.stderr_kw {
            for v in s {
                *v *= factor;
            }
        }
    }

    /// Serializes to CSV with 17 significant digits per float.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.n_bins() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for i in 0..self.n_bins() {
            let start = self.bin_start(i);
            let end = (i as f64 + 1.0) * self.resolution_h;
            out.push_str(&format!("{:.16e},{:.16e},{:.16e},", start, end, self.values_kw[i]));
            if let Some(s) = &self.stderr_kw {
                out.push_str(&format!("{:.16e}", s[i]));
            }
            out.push('\n');
        }
        out
    }

    /// Writes [`Self::to_csv`] to a file.
    pub fn write_csv(&self, path: &Path) -> Result<(), ProfileError> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parses a profile previously written by [`Self::to_csv`].
    /// Provenance is not stored in CSV, so it comes back as `Imported`.
    pub fn from_csv_str(text: &str) -> Result<Self, ProfileError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end() == CSV_HEADER => {}
            Some((_, h)) => {
                return Err(ProfileError::Parse {
                    line: 1,
                    message: format!("expected header '{CSV_HEADER}', got '{h}'"),
                })
            }
            None => {
                return Err(ProfileError::Parse { line: 1, message: "empty input".into() })
            }
        }
        let mut resolution: Option<f64> = None;
        let mut values = Vec::new();
        let mut stderr: Vec<f64> = Vec::new();
        let mut stderr_seen = 0usize;
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(ProfileError::Parse {
                    line: lineno,
                    message: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let parse = |s: &str, what: &str| -> Result<f64, ProfileError> {
                s.parse::<f64>().map_err(|e| ProfileError::Parse {
                    line: lineno,
                    message: format!("bad {what} '{s}': {e}"),
                })
            };
            let t_start = parse(fields[0], "t_start_h")?;
            let t_end = parse(fields[1], "t_end_h")?;
            let value = parse(fields[2], "expected_kw")?;
            if values.is_empty() {
                if t_start != 0.0 {
                    return Err(ProfileError::Parse {
                        line: lineno,
                        message: format!("first bin must start at 0, got {t_start}"),
                    });
                }
                resolution = Some(t_end);
            }
            values.push(value);
            if !fields[3].is_empty() {
                stderr.push(parse(fields[3], "stderr_kw")?);
                stderr_seen += 1;
            }
        }
        if values.is_empty() {
            return Err(ProfileError::Parse { line: 2, message: "no data rows".into() });
        }
        if stderr_seen != 0 && stderr_seen != values.len() {
            return Err(ProfileError::Parse {
                line: 1,
                message: format!(
                    "stderr present on {stderr_seen} of {} rows; must be all or none",
                    values.len()
                ),
            });
        }
        let stderr = if stderr_seen == 0 { None } else { Some(stderr) };
        DemandProfile::new(
            resolution.expect("nonempty"),
            values,
            stderr,
            ProfileMeta::new(Provenance::Imported),
        )
    }

    /// Reads a CSV profile from a file.
    pub fn read_csv(path: &Path) -> Result<Self, ProfileError> {
        let text = fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }
}

pub(crate) fn bins_for_resolution(resolution_h: f64) -> Result<usize, ProfileError> {
    if !(resolution_h.is_finite() && resolution_h > 0.0 && resolution_h <= DAY_HOURS) {
        return Err(ProfileError::InvalidGrid(format!(
            "resolution must lie in (0, 24] h, got {resolution_h}"
        )));
    }
    let bins = DAY_HOURS / resolution_h;
    let n = bins.round();
    if (bins - n).abs() > 1e-9 || n < 1.0 {
        return Err(ProfileError::InvalidGrid(format!(
            "resolution {resolution_h} h does not divide the 24 h day evenly"
        )));
    }
    Ok(n as usize)
}

/// Pointwise difference summary between two profiles on the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileDelta {
    pub max_abs_diff_kw: f64,
    /// Max difference divided by the larger of the two peaks.
    pub max_diff_frac_of_peak: f64,
    pub rms_diff_kw: f64,
}

/// Compares two profiles bin by bin.
///
/// # Errors
///
/// [`ProfileError::GridMismatch`] when resolutions or bin counts differ.
pub fn compare_profiles(a: &DemandProfile, b: &DemandProfile) -> Result<ProfileDelta, ProfileError> {
    if a.resolution_h() != b.resolution_h() || a.n_bins() != b.n_bins() {
        return Err(ProfileError::GridMismatch(format!(
            "{} bins at {} h vs {} bins at {} h",
            a.n_bins(),
            a.resolution_h(),
            b.n_bins(),
            b.resolution_h()
        )));
    }
    let mut max_abs = 0.0_f64;
    let mut sumsq = 0.0_f64;
    for (x, y) in a.values_kw().iter().zip(b.values_kw()) {
        let d = (x - y).abs();
        max_abs = max_abs.max(d);
        sumsq += d * d;
    }
    let peak = a.peak().1.max(b.peak().1);
    let frac = if peak > 0.0 { max_abs / peak } else { 0.0 };
    Ok(ProfileDelta {
        max_abs_diff_kw: max_abs,
        max_diff_frac_of_peak: frac,
        rms_diff_kw: (sumsq / a.n_bins() as f64).sqrt(),
    })
}
