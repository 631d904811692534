//! Physical-world layer: charging outlets, driven-distance to
//! charging-time conversion, fleet scaling, and the shipped experiment
//! presets.

use std::error::Error;
use std::fmt;

use crate::analytic::{fold_to_day, AnalyticError, SessionModel};
use crate::dist::{match_moments, DistError, Distribution, Family};
use crate::montecarlo::{simulate_fleet, McError, SimOptions};
use crate::profile::DemandProfile;

/// One row of the outlet catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutletSpec {
    pub name: &'static str,
    pub voltage_v: f64,
    pub current_a: f64,
    pub power_kw: f64,
    /// Miles of driving range replenished per hour of charging.
    pub replenish_rate_mi_per_h: f64,
}

/// The built-in outlet catalog.
pub const OUTLETS: [OutletSpec; 4] = [
    OutletSpec {
        name: "Standard",
        voltage_v: 110.0,
        current_a: 12.0,
        power_kw: 1.4,
        replenish_rate_mi_per_h: 3.0,
    },
    OutletSpec {
        name: "NewerStandard",
        voltage_v: 110.0,
        current_a: 15.0,
        power_kw: 1.8,
        replenish_rate_mi_per_h: 4.0,
    },
    OutletSpec {
        name: "SingleFast",
        voltage_v: 240.0,
        current_a: 40.0,
        power_kw: 10.0,
        replenish_rate_mi_per_h: 29.0,
    },
    OutletSpec {
        name: "TwinFast",
        voltage_v: 240.0,
        current_a: 80.0,
        power_kw: 20.0,
        replenish_rate_mi_per_h: 58.0,
    },
];

/// Default driving energy intensity, kWh per mile.
pub const DEFAULT_KWH_PER_MILE: f64 = 0.25;

/// Errors from scenario assembly.
#[derive(Debug)]
pub enum ScenarioError {
    UnknownOutlet { name: String },
    UnknownPreset { name: String },
    InvalidParameter(String),
    Distribution(DistError),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::UnknownOutlet { name } => {
                let known: Vec<&str> = OUTLETS.iter().map(|o| o.name).collect();
                write!(f, "unknown outlet '{name}'; known outlets: {}", known.join(", "))
            }
            ScenarioError::UnknownPreset { name } => {
                write!(f, "unknown preset '{name}'; known presets: {}", PRESET_NAMES.join(", "))
            }
            ScenarioError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            ScenarioError::Distribution(e) => write!(f, "distribution error: {e}"),
        }
    }
}

impl Error for ScenarioError {
    fn source(&self) -> Option<&(dyn Error + 'static)> {
        match self {
            ScenarioError::Distribution(e) => Some(e),
            _ => None,
        }
    }
}

impl From<DistError> for ScenarioError {
    fn from(e: DistError) -> Self {
        ScenarioError::Distribution(e)
    }
}

fn normalize_name(name: &str) -> String {
    name.chars()
        .filter(|c| !matches!(c, '-' | '_' | ' '))
        .flat_map(char::to_lowercase)
        .collect()
}

/// Finds an outlet by name, ignoring case and `-`/`_`/space separators:
/// "TwinFast", "twin-fast" and "twin_fast" all match.
pub fn outlet_lookup(name: &str) -> Result<&'static OutletSpec, ScenarioError> {
    let wanted = normalize_name(name);
    OUTLETS
        .iter()
        .find(|o| normalize_name(o.name) == wanted)
        .ok_or_else(|| ScenarioError::UnknownOutlet { name: name.to_owned() })
}

/// How driven miles convert into charging hours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceMode {
    /// Table-rate mode: hours = miles / replenish rate. The catalog rates
    /// already fold in charging efficiency.
    Rate,
    /// Energy mode: hours = miles * kwh_per_mile / outlet power.
    Energy { kwh_per_mile: f64 },
}

impl DistanceMode {
    /// Charging hours needed per mile driven on the given outlet.
    pub fn hours_per_mile(&self, outlet: &OutletSpec) -> Result<f64, ScenarioError> {
        let factor = match *self {
            DistanceMode::Rate => 1.0 / outlet.replenish_rate_mi_per_h,
            DistanceMode::Energy { kwh_per_mile } => {
                if !(kwh_per_mile.is_finite() && kwh_per_mile > 0.0) {
                    return Err(ScenarioError::InvalidParameter(format!(
                        "kwh_per_mile must be positive and finite, got {kwh_per_mile}"
                    )));
                }
                kwh_per_mile / outlet.power_kw
            }
        };
        if !(factor.is_finite() && factor > 0.0) {
            return Err(ScenarioError::InvalidParameter(format!(
                "degenerate hours-per-mile factor {factor} for outlet {}",
                outlet.name
            )));
        }
        Ok(factor)
    }
}

/// Converts one driven distance into a charging duration.
pub fn charging_time_from_distance(
    miles: f64,
    outlet: &OutletSpec,
    mode: DistanceMode,
) -> Result<f64, ScenarioError> {
    if !(miles.is_finite() && miles >= 0.0) {
        return Err(ScenarioError::InvalidParameter(format!(
            "distance must be nonnegative and finite, got {miles} miles"
        )));
    }
    Ok(miles * mode.hours_per_mile(outlet)?)
}

/// Maps a driven-distance law into a charging-duration law. All supported
/// families are closed under positive scaling, so the family survives.
pub fn derive_charge_time_distribution(
    distance: &Distribution,
    outlet: &OutletSpec,
    mode: DistanceMode,
) -> Result<Distribution, ScenarioError> {
    if distance.support().low < 0.0 {
        return Err(ScenarioError::InvalidParameter(format!(
            "distance law {} admits negative miles",
            distance.describe()
        )));
    }
    Ok(distance.scale(mode.hours_per_mile(outlet)?)?)
}

/// Per-vehicle profile times the fleet size: values and stderr both scale
/// linearly because the per-vehicle stderr already describes the mean
/// estimator.
pub fn scale_to_fleet(per_ev: &DemandProfile, fleet_size: u64) -> DemandProfile {
    assert!(fleet_size >= 1, "fleet size must be at least 1");
    let mut fleet = per_ev.clone();
    fleet.scale_values(fleet_size as f64);
    fleet
}

/// A fully resolved experiment description: everything needed to run the
/// analytic fold or the Monte Carlo simulation, minus the worker count
/// (which never affects results).
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub label: String,
    pub arrival: Distribution,
    pub charge_time: Distribution,
    pub power_kw: f64,
    pub fleet_size: u64,
    pub seed: u64,
    pub resolution_h: f64,
    pub fold_window_days: u32,
}

impl ScenarioConfig {
    pub fn model(&self) -> Result<SessionModel, AnalyticError> {
        SessionModel::new(self.arrival.clone(), self.charge_time.clone(), self.power_kw)
    }

    /// Analytic per-vehicle daily profile, stamped with the scenario hash.
    pub fn expected_profile(&self) -> Result<DemandProfile, AnalyticError> {
        let mut p = fold_to_day(&self.model()?, self.resolution_h, self.fold_window_days)?;
        p.set_scenario_hash(self.hash());
        Ok(p)
    }

    /// Monte Carlo per-vehicle daily profile over `fleet_size` sessions,
    /// stamped with the scenario hash.
    pub fn simulate_fleet(&self, workers: usize) -> Result<DemandProfile, ScenarioRunError> {
        let model = self.model()?;
        let opts = SimOptions {
            sessions: self.fleet_size,
            seed: self.seed,
            resolution_h: self.resolution_h,
            workers,
        };
        let mut p = simulate_fleet(&model, &opts)?;
        p.set_scenario_hash(self.hash());
        Ok(p)
    }

    /// Canonical text form of every result-relevant field; two configs
    /// hash equal exactly when this string is equal.
    pub fn canonical_string(&self) -> String {
        format!(
            "arrival={};charge_time={};power_kw={};fleet_size={};seed={};resolution_h={};fold_window_days={}",
            self.arrival.describe(),
            self.charge_time.describe(),
            self.power_kw,
            self.fleet_size,
            self.seed,
            self.resolution_h,
            self.fold_window_days,
        )
    }

    /// FNV-1a hash of [`Self::canonical_string`].
    pub fn hash(&self) -> u64 {
        fnv1a64(self.canonical_string().as_bytes())
    }
}

/// Errors from running a scenario end to end.
#[derive(Debug)]
pub enum ScenarioRunError {
    Analytic(AnalyticError),
    MonteCarlo(McError),
}

impl fmt::Display for ScenarioRunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioRunError::Analytic(e) => e.fmt(f),
            ScenarioRunError::MonteCarlo(e) => e.fmt(f),
        }
    }
}

impl Error for ScenarioRunError {
    fn source(&self) -> Option<&(dyn Error + 'static)> {
        match self {
            ScenarioRunError::Analytic(e) => Some(e),
            ScenarioRunError::MonteCarlo(e) => Some(e),
        }
    }
}

impl From<AnalyticError> for ScenarioRunError {
    fn from(e: AnalyticError) -> Self {
        ScenarioRunError::Analytic(e)
    }
}

impl From<McError> for ScenarioRunError {
    fn from(e: McError) -> Self {
        ScenarioRunError::MonteCarlo(e)
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325_u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Shipped preset names.
pub const PRESET_NAMES: [&str; 4] =
    ["fig9-uniform", "fig8-trunc-gauss", "fig8-rician", "fig8-exponential"];

/// Arrival mean shared by every preset, hours.
const PRESET_ARRIVAL_MU: f64 = 19.0;
/// Arrival variance shared by every preset, hours squared.
const PRESET_ARRIVAL_SIGMA2: f64 = 10.0;
/// Duration mean targeted by every preset, hours.
const PRESET_DURATION_MEAN: f64 = 6.0;
/// Duration variance targeted by the moment-matched presets: the variance
/// of U[1,11], taken as exactly 100/12.
const PRESET_DURATION_VARIANCE: f64 = 100.0 / 12.0;

/// Builds one of the shipped presets. All use a 100,000-vehicle fleet on
/// Standard outlets (1.4 kW), 0.05 h bins, seed 1, and a duration law
/// with mean 6 h; the non-uniform duration laws are moment-matched to
/// U[1,11] (the exponential can match the mean only, and its heavy tail
/// needs a wider fold window).
pub fn preset(name: &str) -> Result<ScenarioConfig, ScenarioError> {
    let arrival = Distribution::gaussian(PRESET_ARRIVAL_MU, PRESET_ARRIVAL_SIGMA2)?;
    let base = ScenarioConfig {
        label: String::new(),
        arrival,
        charge_time: Distribution::uniform(1.0, 11.0)?,
        power_kw: outlet_lookup("Standard")?.power_kw,
        fleet_size: 100_000,
        seed: 1,
        resolution_h: 0.05,
        fold_window_days: 2,
    };
    let wanted = normalize_name(name);
    let config = match wanted.as_str() {
        "fig9uniform" => ScenarioConfig { label: "fig9-uniform".into(), ..base },
        "fig8truncgauss" => ScenarioConfig {
            label: "fig8-trunc-gauss".into(),
            charge_time: match_moments(
                Family::TruncatedGaussian,
                PRESET_DURATION_MEAN,
                PRESET_DURATION_VARIANCE,
            )?
            .distribution,
            ..base
        },
        "fig8rician" => ScenarioConfig {
            label: "fig8-rician".into(),
            charge_time: match_moments(
                Family::Rician,
                PRESET_DURATION_MEAN,
                PRESET_DURATION_VARIANCE,
            )?
            .distribution,
            ..base
        },
        "fig8exponential" => ScenarioConfig {
            label: "fig8-exponential".into(),
            charge_time: Distribution::exponential(PRESET_DURATION_MEAN)?,
            fold_window_days: 6,
            ..base
        },
        _ => return Err(ScenarioError::UnknownPreset { name: name.to_owned() }),
    };
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    #[test]
    fn outlet_table_matches_catalog() {
        let s = outlet_lookup("Standard").unwrap();
        assert_eq!((s.voltage_v, s.current_a), (110.0, 12.0));
        assert_eq!(s.power_kw, 1.4);
        assert_eq!(s.replenish_rate_mi_per_h, 3.0);
        let t = outlet_lookup("TwinFast").unwrap();
        assert_eq!((t.voltage_v, t.current_a), (240.0, 80.0));
        assert_eq!(t.power_kw, 20.0);
        assert_eq!(t.replenish_rate_mi_per_h, 58.0);
    }

    #[test]
    fn outlet_lookup_ignores_case_and_separators() {
        for alias in ["standard", "STANDARD", "Standard"] {
            assert_eq!(outlet_lookup(alias).unwrap().name, "Standard");
        }
        for alias in ["twin-fast", "twin_fast", "Twin Fast", "twinfast"] {
            assert_eq!(outlet_lookup(alias).unwrap().name, "TwinFast");
        }
        assert_eq!(outlet_lookup("newer-standard").unwrap().name, "NewerStandard");
        assert_eq!(outlet_lookup("single_fast").unwrap().name, "SingleFast");
        let err = outlet_lookup("MegaFast").unwrap_err();
        assert!(err.to_string().contains("MegaFast"));
    }

    #[test]
    fn outlet_power_is_consistent_with_volts_times_amps() {
        for o in &OUTLETS {
            let va_kw = o.voltage_v * o.current_a / 1000.0;
            let rel = (o.power_kw - va_kw).abs() / va_kw;
            assert!(rel <= 0.10, "{}: {} kW vs V*A {} kW", o.name, o.power_kw, va_kw);
        }
    }

    #[test]
    fn distance_conversion_modes() {
        let s = outlet_lookup("Standard").unwrap();
        // rate mode: 3 miles on a 3 mi/h outlet is one hour
        let h = charging_time_from_distance(3.0, s, DistanceMode::Rate).unwrap();
        assert!((h - 1.0).abs() < 1e-15);
        assert_eq!(charging_time_from_distance(0.0, s, DistanceMode::Rate).unwrap(), 0.0);
        // energy mode: 30 mi * 0.25 kWh/mi / 1.4 kW
        let h = charging_time_from_distance(
            30.0,
            s,
            DistanceMode::Energy { kwh_per_mile: DEFAULT_KWH_PER_MILE },
        )
        .unwrap();
        assert!((h - 30.0 * 0.25 / 1.4).abs() < 1e-12, "{h}");
        assert!(charging_time_from_distance(-1.0, s, DistanceMode::Rate).is_err());
        assert!(charging_time_from_distance(
            10.0,
            s,
            DistanceMode::Energy { kwh_per_mile: 0.0 }
        )
        .is_err());
    }

    #[test]
    fn derived_duration_laws_keep_their_family() {
        let s = outlet_lookup("Standard").unwrap();
        // exponential 18 mi at 3 mi/h becomes exponential 6 h
        let dist = Distribution::exponential(18.0).unwrap();
        let t = derive_charge_time_distribution(&dist, s, DistanceMode::Rate).unwrap();
        assert_eq!(t.family(), Family::Exponential);
        assert!((t.mean() - 6.0).abs() < 1e-12);
        // U[3,33] mi becomes U[1,11] h
        let dist = Distribution::uniform(3.0, 33.0).unwrap();
        let t = derive_charge_time_distribution(&dist, s, DistanceMode::Rate).unwrap();
        assert_eq!(t.as_uniform(), Some((1.0, 11.0)));
        // a distance law with negative support is rejected
        let dist = Distribution::gaussian(18.0, 4.0).unwrap();
        assert!(derive_charge_time_distribution(&dist, s, DistanceMode::Rate).is_err());
    }

    #[test]
    fn derived_sampling_agrees_with_sampled_then_converted() {
        // scaling the law and scaling the samples must give the same
        // stream of durations exactly
        let s = outlet_lookup("SingleFast").unwrap();
        let miles = Distribution::exponential(29.0).unwrap();
        let hours = derive_charge_time_distribution(&miles, s, DistanceMode::Rate).unwrap();
        let factor = DistanceMode::Rate.hours_per_mile(s).unwrap();
        let mut s1 = RandomStream::new(5, 0);
        let mut s2 = RandomStream::new(5, 0);
        for _ in 0..1000 {
            let direct = hours.sample(&mut s1);
            let converted = miles.sample(&mut s2) * factor;
            assert!((direct - converted).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn fleet_scaling_is_linear_and_shape_preserving() {
        let preset = preset("fig9-uniform").unwrap();
        let mut small = preset.clone();
        small.fleet_size = 400;
        small.resolution_h = 0.25;
        let per_ev = small.simulate_fleet(1).unwrap();
        let fleet = scale_to_fleet(&per_ev, 100_000);
        assert_eq!(scale_to_fleet(&per_ev, 1), per_ev);
        assert_eq!(fleet.peak().0, per_ev.peak().0);
        assert!((fleet.peak().1 - 1e5 * per_ev.peak().1).abs() < 1e-9 * fleet.peak().1);
        assert!(
            (fleet.daily_energy_kwh() - 1e5 * per_ev.daily_energy_kwh()).abs()
                < 1e-9 * fleet.daily_energy_kwh()
        );
        let se_ratio = fleet.stderr_kw().unwrap()[76] / per_ev.stderr_kw().unwrap()[76];
        assert!((se_ratio - 1e5).abs() < 1.0);
    }

    #[test]
    fn presets_encode_the_reference_experiment() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert_eq!(p.label, name);
            assert_eq!(p.arrival.as_gaussian().map(|(mu, _)| mu), Some(19.0));
            assert_eq!(p.power_kw, 1.4);
            assert_eq!(p.fleet_size, 100_000);
            assert_eq!(p.resolution_h, 0.05);
            assert_eq!(p.seed, 1);
            let mean = p.charge_time.mean();
            assert!((mean - 6.0).abs() < 1e-9, "{name}: duration mean {mean}");
            if name != "fig8-exponential" {
                let var = p.charge_time.variance();
                assert!(
                    (var - 100.0 / 12.0).abs() < 1e-8,
                    "{name}: duration variance {var}"
                );
                assert_eq!(p.fold_window_days, 2);
            } else {
                assert_eq!(p.fold_window_days, 6);
            }
        }
        assert!(preset("fig10-bogus").is_err());
        // separators and case are forgiven
        assert_eq!(preset("Fig9_Uniform").unwrap().label, "fig9-uniform");
    }

    #[test]
    fn preset_families_differ_as_labeled() {
        assert_eq!(preset("fig9-uniform").unwrap().charge_time.family(), Family::Uniform);
        assert_eq!(
            preset("fig8-trunc-gauss").unwrap().charge_time.family(),
            Family::TruncatedGaussian
        );
        assert_eq!(preset("fig8-rician").unwrap().charge_time.family(), Family::Rician);
        assert_eq!(
            preset("fig8-exponential").unwrap().charge_time.family(),
            Family::Exponential
        );
    }

    #[test]
    fn hash_tracks_result_relevant_fields_only() {
        let a = preset("fig9-uniform").unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
        let mut c = a.clone();
        c.label = "renamed".into();
        assert_eq!(a.hash(), c.hash());
        let mut d = a.clone();
        d.fleet_size = 50_000;
        assert_ne!(a.hash(), d.hash());
    }

    #[test]
    fn fnv_reference_values() {
        // standard FNV-1a test vectors
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }
}
