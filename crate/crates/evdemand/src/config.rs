//! On-disk scenario description: a single TOML file resolved into a
//! [`ScenarioConfig`].
//!
//! ```toml
//! label = "weeknight"            # optional, defaults to the file stem
//! fleet_size = 100000
//! seed = 1
//! resolution_h = 0.05
//! fold_window_days = 2
//! power_kw = 1.4                 # optional when [outlet] is present
//!
//! [arrival]
//! family = "gaussian"
//! mu = 19.0
//! sigma2 = 10.0
//!
//! [charge_time]                  # exactly one of [charge_time]/[distance]
//! family = "uniform"
//! c = 1.0
//! d = 11.0
//! ```
//!
//! Distributions take either their native parameters or target moments
//! (`mean` + `variance`, matched numerically). A `[distance]` table (miles
//! driven) plus an `[outlet]` derives the charging-time law instead:
//!
//! ```toml
//! [outlet]
//! name = "Standard"
//!
//! [distance]
//! family = "exponential"
//! mean = 18.0
//! mode = "rate"                  # or "energy" (+ optional kwh_per_mile)
//! ```

use std::error::Error;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use serde::Deserialize;

use crate::dist::{match_moments, DistError, Distribution, Family};
use crate::profile::bins_for_resolution;
use crate::scenario::{
    derive_charge_time_distribution, outlet_lookup, DistanceMode, ScenarioConfig,
    DEFAULT_KWH_PER_MILE,
};

/// Errors loading or validating a config file.
#[derive(Debug)]
pub enum ConfigError {
    Read { path: String, source: io::Error },
    Toml(toml::de::Error),
    /// A specific field is missing, contradictory, or out of range.
    Field { field: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Read { path, source } => {
                write!(f, "cannot read config '{path}': {source}")
            }
            ConfigError::Toml(e) => write!(f, "config syntax error: {e}"),
            ConfigError::Field { field, message } => {
                write!(f, "config field `{field}`: {message}")
            }
        }
    }
}

impl Error for ConfigError {
    fn source(&self) -> Option<&(dyn Error + 'static)> {
        match self {
            ConfigError::Read { source, .. } => Some(source),
            ConfigError::Toml(e) => Some(e),
            ConfigError::Field { .. } => None,
        }
    }
}

fn field_err(field: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError::Field { field: field.to_owned(), message: message.to_string() }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    label: Option<String>,
    fleet_size: u64,
    seed: u64,
    resolution_h: f64,
    fold_window_days: u32,
    power_kw: Option<f64>,
    arrival: DistSpec,
    charge_time: Option<DistSpec>,
    outlet: Option<OutletRef>,
    distance: Option<DistanceSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutletRef {
    name: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistSpec {
    family: String,
    mu: Option<f64>,
    sigma2: Option<f64>,
    c: Option<f64>,
    d: Option<f64>,
    mean: Option<f64>,
    variance: Option<f64>,
    nu: Option<f64>,
    sigma: Option<f64>,
}

// serde's deny_unknown_fields cannot coexist with flatten, so the
// distance table repeats the distribution fields instead of embedding
// DistSpec
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistanceSpec {
    family: String,
    mu: Option<f64>,
    sigma2: Option<f64>,
    c: Option<f64>,
    d: Option<f64>,
    mean: Option<f64>,
    variance: Option<f64>,
    nu: Option<f64>,
    sigma: Option<f64>,
    mode: Option<String>,
    kwh_per_mile: Option<f64>,
}

impl DistanceSpec {
    fn dist_spec(&self) -> DistSpec {
        DistSpec {
            family: self.family.clone(),
            mu: self.mu,
            sigma2: self.sigma2,
            c: self.c,
            d: self.d,
            mean: self.mean,
            variance: self.variance,
            nu: self.nu,
            sigma: self.sigma,
        }
    }
}

fn normalize_family(name: &str) -> String {
    name.chars()
        .filter(|c| !matches!(c, '-' | '_' | ' '))
        .flat_map(char::to_lowercase)
        .collect()
}

fn map_dist_err(field: &str, e: DistError) -> ConfigError {
    field_err(field, e)
}

/// Turns one `[table]` of family + parameters (or moments) into a
/// distribution. `field` names the table for error messages.
fn resolve_distribution(spec: &DistSpec, field: &str) -> Result<Distribution, ConfigError> {
    let family = match normalize_family(&spec.family).as_str() {
        "gaussian" | "normal" => Family::Gaussian,
        "uniform" => Family::Uniform,
        "exponential" => Family::Exponential,
        "truncatedgaussian" => Family::TruncatedGaussian,
        "rician" => Family::Rician,
        other => {
            return Err(field_err(
                &format!("{field}.family"),
                format!(
                    "unknown family '{other}'; expected gaussian, uniform, exponential, \
                     truncated-gaussian, or rician"
                ),
            ))
        }
    };
    // native parameter names per family; anything else must come through
    // the moments form
    let native: &[(&str, Option<f64>)] = match family {
        Family::Gaussian | Family::TruncatedGaussian => {
            &[("mu", spec.mu), ("sigma2", spec.sigma2)]
        }
        Family::Uniform => &[("c", spec.c), ("d", spec.d)],
        Family::Exponential => &[("mean", spec.mean)],
        Family::Rician => &[("nu", spec.nu), ("sigma", spec.sigma)],
    };
    let foreign: &[(&str, Option<f64>)] = &[
        ("mu", spec.mu),
        ("sigma2", spec.sigma2),
        ("c", spec.c),
        ("d", spec.d),
        ("nu", spec.nu),
        ("sigma", spec.sigma),
        ("mean", spec.mean),
        ("variance", spec.variance),
    ];
    for &(name, value) in foreign {
        let is_native = native.iter().any(|&(n, _)| n == name);
        let is_moment = name == "mean" || name == "variance";
        if value.is_some() && !is_native && !is_moment {
            return Err(field_err(
                &format!("{field}.{name}"),
                format!("not a parameter of family '{}'", spec.family),
            ));
        }
    }
    let native_given = native.iter().filter(|(_, v)| v.is_some()).count();
    let wants_moments = match family {
        // exponential's single native parameter is its mean
        Family::Exponential => false,
        _ => spec.mean.is_some() || spec.variance.is_some(),
    };
    if wants_moments {
        if native_given > 0 {
            return Err(field_err(
                field,
                "give either native parameters or mean/variance moments, not both",
            ));
        }
        let mean = spec
            .mean
            .ok_or_else(|| field_err(&format!("{field}.mean"), "required for moment matching"))?;
        let variance = spec.variance.ok_or_else(|| {
            field_err(&format!("{field}.variance"), "required for moment matching")
        })?;
        if family == Family::Gaussian {
            return Distribution::gaussian(mean, variance)
                .map_err(|e| map_dist_err(field, e));
        }
        return Ok(match_moments(family, mean, variance)
            .map_err(|e| map_dist_err(field, e))?
            .distribution);
    }
    if native_given != native.len() {
        let names: Vec<&str> = native.iter().map(|&(n, _)| n).collect();
        return Err(field_err(
            field,
            format!(
                "family '{}' needs {} (or mean/variance for moment matching)",
                spec.family,
                names.join(" and ")
            ),
        ));
    }
    match family {
        Family::Gaussian => Distribution::gaussian(spec.mu.unwrap(), spec.sigma2.unwrap()),
        Family::Uniform => Distribution::uniform(spec.c.unwrap(), spec.d.unwrap()),
        Family::Exponential => {
            if spec.variance.is_some() {
                return Err(field_err(
                    &format!("{field}.variance"),
                    "an exponential's variance is fixed by its mean; omit it",
                ));
            }
            Distribution::exponential(spec.mean.unwrap())
        }
        Family::TruncatedGaussian => {
            Distribution::truncated_gaussian(spec.mu.unwrap(), spec.sigma2.unwrap())
        }
        Family::Rician => Distribution::rician(spec.nu.unwrap(), spec.sigma.unwrap()),
    }
    .map_err(|e| map_dist_err(field, e))
}

impl ConfigFile {
    fn resolve(&self, default_label: &str) -> Result<ScenarioConfig, ConfigError> {
        if self.fleet_size == 0 {
            return Err(field_err("fleet_size", "must be at least 1"));
        }
        bins_for_resolution(self.resolution_h).map_err(|e| field_err("resolution_h", e))?;
        if self.fold_window_days == 0 {
            return Err(field_err("fold_window_days", "must be at least 1 day"));
        }
        if let Some(p) = self.power_kw {
            if !(p.is_finite() && p > 0.0) {
                return Err(field_err("power_kw", format!("must be positive, got {p}")));
            }
        }
        let outlet = match &self.outlet {
            Some(o) => Some(outlet_lookup(&o.name).map_err(|e| field_err("outlet.name", e))?),
            None => None,
        };
        let arrival = resolve_distribution(&self.arrival, "arrival")?;
        let charge_time = match (&self.charge_time, &self.distance) {
            (Some(_), Some(_)) => {
                return Err(field_err(
                    "charge_time",
                    "give either [charge_time] or [distance], not both",
                ))
            }
            (None, None) => {
                return Err(field_err(
                    "charge_time",
                    "either a [charge_time] or a [distance] table is required",
                ))
            }
            (Some(spec), None) => resolve_distribution(spec, "charge_time")?,
            (None, Some(distance)) => {
                let Some(outlet) = outlet else {
                    return Err(field_err(
                        "outlet",
                        "[distance] needs an [outlet] to convert miles into hours",
                    ));
                };
                let mode = match distance.mode.as_deref().map(normalize_family).as_deref() {
                    None | Some("rate") => {
                        if distance.kwh_per_mile.is_some() {
                            return Err(field_err(
                                "distance.kwh_per_mile",
                                "only meaningful in energy mode",
                            ));
                        }
                        DistanceMode::Rate
                    }
                    Some("energy") => DistanceMode::Energy {
                        kwh_per_mile: distance.kwh_per_mile.unwrap_or(DEFAULT_KWH_PER_MILE),
                    },
                    Some(other) => {
                        return Err(field_err(
                            "distance.mode",
                            format!("expected 'rate' or 'energy', got '{other}'"),
                        ))
                    }
                };
                let miles = resolve_distribution(&distance.dist_spec(), "distance")?;
                derive_charge_time_distribution(&miles, outlet, mode)
                    .map_err(|e| field_err("distance", e))?
            }
        };
        let power_kw = match (self.power_kw, outlet) {
            // an explicit power wins over the outlet's
            (Some(p), _) => p,
            (None, Some(o)) => o.power_kw,
            (None, None) => {
                return Err(field_err(
                    "power_kw",
                    "required when no [outlet] supplies a power rating",
                ))
            }
        };
        Ok(ScenarioConfig {
            label: self.label.clone().unwrap_or_else(|| default_label.to_owned()),
            arrival,
            charge_time,
            power_kw,
            fleet_size: self.fleet_size,
            seed: self.seed,
            resolution_h: self.resolution_h,
            fold_window_days: self.fold_window_days,
        })
    }
}

/// Parses config text. `default_label` is used when the file sets none.
pub fn parse_config(text: &str, default_label: &str) -> Result<ScenarioConfig, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(ConfigError::Toml)?;
    file.resolve(default_label)
}

/// Reads and resolves a config file; the file stem is the default label.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let stem =
        path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_config(&text, if stem.is_empty() { "scenario" } else { &stem })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
fleet_size = 100000
seed = 1
resolution_h = 0.05
fold_window_days = 2
power_kw = 1.4

[arrival]
family = "gaussian"
mu = 19.0
sigma2 = 10.0

[charge_time]
family = "uniform"
c = 1.0
d = 11.0
"#;

    #[test]
    fn full_config_resolves() {
        let s = parse_config(BASE, "base").unwrap();
        assert_eq!(s.label, "base");
        assert_eq!(s.arrival.as_gaussian(), Some((19.0, 10.0_f64.sqrt())));
        assert_eq!(s.charge_time.as_uniform(), Some((1.0, 11.0)));
        assert_eq!(s.power_kw, 1.4);
        assert_eq!(s.fleet_size, 100_000);
        assert_eq!(s.seed, 1);
        assert_eq!(s.resolution_h, 0.05);
        assert_eq!(s.fold_window_days, 2);
    }

    #[test]
    fn label_field_overrides_default() {
        let text = format!("label = \"custom\"\n{BASE}");
        assert_eq!(parse_config(&text, "fallback").unwrap().label, "custom");
    }

    #[test]
    fn moment_matched_duration() {
        let text = BASE.replace(
            "family = \"uniform\"\nc = 1.0\nd = 11.0",
            "family = \"rician\"\nmean = 6.0\nvariance = 8.333333333333334",
        );
        let s = parse_config(&text, "t").unwrap();
        assert_eq!(s.charge_time.family(), crate::dist::Family::Rician);
        assert!((s.charge_time.mean() - 6.0).abs() < 1e-9);
    }

    #[test]
    fn distance_with_outlet_derives_duration() {
        let text = r#"
fleet_size = 1000
seed = 7
resolution_h = 0.25
fold_window_days = 6

[arrival]
family = "gaussian"
mu = 19.0
sigma2 = 10.0

[outlet]
name = "standard"

[distance]
family = "exponential"
mean = 18.0
"#;
        let s = parse_config(text, "t").unwrap();
        assert_eq!(s.charge_time.family(), crate::dist::Family::Exponential);
        assert!((s.charge_time.mean() - 6.0).abs() < 1e-12);
        // power falls back to the outlet rating
        assert_eq!(s.power_kw, 1.4);
    }

    #[test]
    fn energy_mode_uses_kwh_per_mile() {
        let text = r#"
fleet_size = 1000
seed = 7
resolution_h = 0.25
fold_window_days = 8

[arrival]
family = "gaussian"
mu = 19.0
sigma2 = 10.0

[outlet]
name = "Standard"

[distance]
family = "exponential"
mean = 18.0
mode = "energy"
"#;
        let s = parse_config(text, "t").unwrap();
        // 18 mi * 0.25 kWh/mi / 1.4 kW
        assert!((s.charge_time.mean() - 18.0 * 0.25 / 1.4).abs() < 1e-12);
    }

    #[test]
    fn field_errors_name_the_field() {
        let cases: &[(&str, &str, &str)] = &[
            ("fleet_size = 100000", "fleet_size = 0", "fleet_size"),
            ("resolution_h = 0.05", "resolution_h = 0.07", "resolution_h"),
            ("fold_window_days = 2", "fold_window_days = 0", "fold_window_days"),
            ("power_kw = 1.4", "power_kw = -2.0", "power_kw"),
            ("family = \"gaussian\"", "family = \"weibull\"", "arrival.family"),
            ("mu = 19.0", "nu = 19.0", "arrival.nu"),
        ];
        for (from, to, field) in cases {
            let text = BASE.replace(from, to);
            let err = parse_config(&text, "t").unwrap_err();
            let msg = err.to_string();
            assert!(msg.contains(field), "expected `{field}` in: {msg}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{BASE}\nbogus_key = 3\n");
        assert!(matches!(parse_config(&text, "t"), Err(ConfigError::Toml(_))));
        let text = BASE.replace("d = 11.0", "d = 11.0\nskew = 0.3");
        assert!(parse_config(&text, "t").is_err());
    }

    #[test]
    fn missing_required_field_is_a_syntax_error_naming_it() {
        let text = BASE.replace("seed = 1\n", "");
        let err = parse_config(&text, "t").unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
    }

    #[test]
    fn charge_time_and_distance_are_mutually_exclusive() {
        let both = format!(
            "{BASE}\n[outlet]\nname = \"Standard\"\n\n[distance]\nfamily = \"exponential\"\nmean = 18.0\n"
        );
        let err = parse_config(&both, "t").unwrap_err();
        assert!(err.to_string().contains("not both"), "{err}");
        let neither = BASE.replace("[charge_time]\nfamily = \"uniform\"\nc = 1.0\nd = 11.0", "");
        assert!(parse_config(&neither, "t").is_err());
    }

    #[test]
    fn distance_without_outlet_is_rejected() {
        let text = BASE.replace(
            "[charge_time]\nfamily = \"uniform\"\nc = 1.0\nd = 11.0",
            "[distance]\nfamily = \"exponential\"\nmean = 18.0",
        );
        let err = parse_config(&text, "t").unwrap_err();
        assert!(err.to_string().contains("outlet"), "{err}");
    }

    #[test]
    fn power_required_without_outlet() {
        let text = BASE.replace("power_kw = 1.4\n", "");
        let err = parse_config(&text, "t").unwrap_err();
        assert!(err.to_string().contains("power_kw"), "{err}");
    }

    #[test]
    fn mixed_parameters_and_moments_are_rejected() {
        let text = BASE.replace(
            "family = \"uniform\"\nc = 1.0\nd = 11.0",
            "family = \"uniform\"\nc = 1.0\nd = 11.0\nmean = 6.0\nvariance = 8.3",
        );
        let err = parse_config(&text, "t").unwrap_err();
        assert!(err.to_string().contains("not both"), "{err}");
    }

    #[test]
    fn exponential_rejects_an_independent_variance() {
        let text = BASE.replace(
            "family = \"uniform\"\nc = 1.0\nd = 11.0",
            "family = \"exponential\"\nmean = 6.0\nvariance = 10.0",
        );
        let err = parse_config(&text, "t").unwrap_err();
        assert!(err.to_string().contains("variance"), "{err}");
    }

    #[test]
    fn kwh_per_mile_needs_energy_mode() {
        let text = r#"
fleet_size = 10
seed = 0
resolution_h = 1.0
fold_window_days = 8

[arrival]
family = "gaussian"
mu = 19.0
sigma2 = 10.0

[outlet]
name = "Standard"

[distance]
family = "exponential"
mean = 18.0
kwh_per_mile = 0.3
"#;
        let err = parse_config(text, "t").unwrap_err();
        assert!(err.to_string().contains("kwh_per_mile"), "{err}");
    }

    #[test]
    fn infeasible_moments_surface_the_distribution_error() {
        // uniform with mean 2 and variance 25 would need a negative lower
        // endpoint
        let text = BASE.replace(
            "family = \"uniform\"\nc = 1.0\nd = 11.0",
            "family = \"uniform\"\nmean = 2.0\nvariance = 25.0",
        );
        let err = parse_config(&text, "t").unwrap_err();
        assert!(err.to_string().contains("charge_time"), "{err}");
    }
}
