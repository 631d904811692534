//! Command-line front end: `expected`, `simulate`, `compare`, `presets`.
//!
//! Every run writes its profile CSV (and optional SVG) into the output
//! directory and prints a JSON run report to stdout. Exit codes: 0
//! success, 2 usage, 3 invalid config, 4 numeric failure, 5 I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::analytic::AnalyticError;
use crate::config::{load_config, ConfigError};
use crate::dist::DistError;
use crate::montecarlo::McError;
use crate::profile::{compare_profiles, DemandProfile, ProfileError, Provenance};
use crate::report::{DeltaReport, ProfileReport, RunReport};
use crate::scenario::{
    preset, ScenarioConfig, ScenarioError, ScenarioRunError, OUTLETS, PRESET_NAMES,
};
use crate::svg::{render_overlay, SvgError};

/// Environment variable overriding the seed (flag still wins).
pub const ENV_SEED: &str = "EVDEMAND_SEED";
/// Environment variable overriding the output directory (flag still wins).
pub const ENV_OUT: &str = "EVDEMAND_OUT";

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "evdemand",
    version,
    about = "Expected daily charging demand of plug-in vehicle fleets",
    long_about = "Models a fleet of plug-in vehicles whose charging sessions start at a \
                  random arrival time and run for a random duration at constant power, and \
                  computes the expected daily demand profile analytically or by simulation."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the analytic expected profile and write it as CSV
    Expected(ExpectedArgs),
    /// Estimate the profile by Monte Carlo and write it (with standard
    /// errors) as CSV
    Simulate(SimulateArgs),
    /// Run two or more scenarios analytically and compare their profiles
    Compare(CompareArgs),
    /// List built-in presets and the outlet catalog
    Presets,
}

/// Where a single scenario comes from: a config file or a preset.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct ScenarioSource {
    /// Path to a TOML scenario config
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Name of a built-in preset (see `evdemand presets`)
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output directory for CSV/SVG/report files [env: EVDEMAND_OUT] [default: .]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also render an SVG chart of the profile(s)
    #[arg(long)]
    svg: bool,
}

#[derive(Debug, Args)]
struct ExpectedArgs {
    #[command(flatten)]
    source: ScenarioSource,
    #[command(flatten)]
    output: OutputArgs,
    /// Override the scenario seed [env: EVDEMAND_SEED]
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: ScenarioSource,
    #[command(flatten)]
    output: OutputArgs,
    /// Override the scenario seed [env: EVDEMAND_SEED]
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads (0 = one per core); never changes the result
    #[arg(long, value_name = "N", default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Config file to include (repeatable)
    #[arg(long = "config", value_name = "PATH")]
    configs: Vec<PathBuf>,
    /// Preset to include (repeatable)
    #[arg(long = "preset", value_name = "NAME")]
    presets: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

/// An error plus the exit code it maps to.
#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }

    fn config(message: impl std::fmt::Display) -> Self {
        CliError { code: EXIT_CONFIG, message: message.to_string() }
    }

    fn io(message: impl std::fmt::Display) -> Self {
        CliError { code: EXIT_IO, message: message.to_string() }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            // an unreadable file is an I/O problem, not a bad config
            ConfigError::Read { .. } => CliError::io(e),
            _ => CliError::config(e),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::config(e)
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        match &e {
            AnalyticError::QuadratureFailure { .. } => {
                CliError { code: EXIT_NUMERIC, message: e.to_string() }
            }
            AnalyticError::Distribution(DistError::NoSolution(_)) => CliError::config(e),
            AnalyticError::Distribution(_) => {
                CliError { code: EXIT_NUMERIC, message: e.to_string() }
            }
            AnalyticError::Profile(p) => match p {
                ProfileError::Io(_) => CliError::io(e),
                _ => CliError::config(e),
            },
            // invalid model / too-small window are fixable in the config
            _ => CliError::config(e),
        }
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match &e {
            McError::Profile(ProfileError::Io(_)) => CliError::io(e),
            _ => CliError::config(e),
        }
    }
}

impl From<ScenarioRunError> for CliError {
    fn from(e: ScenarioRunError) -> Self {
        match e {
            ScenarioRunError::Analytic(a) => a.into(),
            ScenarioRunError::MonteCarlo(m) => m.into(),
        }
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match &e {
            ProfileError::Io(_) => CliError::io(e),
            _ => CliError::config(e),
        }
    }
}

impl From<SvgError> for CliError {
    fn from(e: SvgError) -> Self {
        CliError::config(e)
    }
}

/// Parses argv and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Expected(args) => cmd_expected(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Presets => {
            cmd_presets();
            Ok(())
        }
    }
}

fn load_scenario(source: &ScenarioSource) -> Result<ScenarioConfig, CliError> {
    match (&source.config, &source.preset) {
        (Some(path), None) => Ok(load_config(path)?),
        (None, Some(name)) => Ok(preset(name)?),
        // clap's arg group guarantees exactly one
        _ => unreachable!("clap enforces exactly one scenario source"),
    }
}

fn seed_override(flag: Option<u64>) -> Result<Option<u64>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(ENV_SEED) {
        Ok(text) => text
            .parse::<u64>()
            .map(Some)
            .map_err(|e| CliError::config(format!("{ENV_SEED}='{text}': {e}"))),
        Err(_) => Ok(None),
    }
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.clone();
    }
    match std::env::var_os(ENV_OUT) {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from("."),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("cannot create output directory '{}': {e}", dir.display())))
}

/// Keeps labels safe to embed in file names.
fn sanitize(label: &str) -> String {
    let cleaned: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '-' })
        .collect();
    if cleaned.is_empty() {
        "scenario".into()
    } else {
        cleaned
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::io(format!("cannot write '{}': {e}", path.display())))
}

fn analytic_path_name(profile: &DemandProfile) -> Option<String> {
    match profile.meta().provenance {
        Provenance::Analytic { path } => Some(path.to_string()),
        _ => None,
    }
}

fn emit_report(report: &RunReport, path: &Path) -> Result<(), CliError> {
    use std::io::Write;
    let json = report.to_json();
    write_file(path, &json)?;
    // a closed stdout (e.g. piping into `head`) is not an error: the
    // report already reached the file
    let _ = writeln!(std::io::stdout(), "{json}");
    Ok(())
}

fn cmd_expected(args: ExpectedArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut scenario = load_scenario(&args.source)?;
    if let Some(seed) = seed_override(args.seed)? {
        scenario.seed = seed;
    }
    let profile = scenario.expected_profile()?;
    let dir = out_dir(&args.output.out);
    ensure_dir(&dir)?;
    let stem = sanitize(&scenario.label);
    let csv_path = dir.join(format!("{stem}-expected.csv"));
    profile.write_csv(&csv_path)?;
    let svg_path = if args.output.svg {
        let path = dir.join(format!("{stem}-expected.svg"));
        let chart = render_overlay(&scenario.label, &[(scenario.label.as_str(), &profile)])?;
        write_file(&path, &chart)?;
        Some(path)
    } else {
        None
    };
    let report_path = dir.join(format!("{stem}-expected-report.json"));
    let mut entry = ProfileReport::new(&scenario.label, &profile, scenario.fleet_size);
    entry.csv_path = Some(csv_path.display().to_string());
    let report = RunReport {
        mode: "analytic".into(),
        scenario_hash: Some(format!("{:016x}", scenario.hash())),
        seed: Some(scenario.seed),
        sessions: None,
        workers: None,
        analytic_path: analytic_path_name(&profile),
        truncation_mass: profile.meta().truncation_mass,
        resolution_h: profile.resolution_h(),
        profiles: vec![entry],
        deltas: vec![],
        metrics_csv_path: None,
        svg_path: svg_path.map(|p| p.display().to_string()),
        report_path: Some(report_path.display().to_string()),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    emit_report(&report, &report_path)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut scenario = load_scenario(&args.source)?;
    if let Some(seed) = seed_override(args.seed)? {
        scenario.seed = seed;
    }
    let profile = scenario.simulate_fleet(args.workers)?;
    let dir = out_dir(&args.output.out);
    ensure_dir(&dir)?;
    let stem = sanitize(&scenario.label);
    let csv_path = dir.join(format!("{stem}-simulated.csv"));
    profile.write_csv(&csv_path)?;
    let svg_path = if args.output.svg {
        let path = dir.join(format!("{stem}-simulated.svg"));
        let chart = render_overlay(&scenario.label, &[(scenario.label.as_str(), &profile)])?;
        write_file(&path, &chart)?;
        Some(path)
    } else {
        None
    };
    let report_path = dir.join(format!("{stem}-simulated-report.json"));
    let mut entry = ProfileReport::new(&scenario.label, &profile, scenario.fleet_size);
    entry.csv_path = Some(csv_path.display().to_string());
    let report = RunReport {
        mode: "mc".into(),
        scenario_hash: Some(format!("{:016x}", scenario.hash())),
        seed: Some(scenario.seed),
        sessions: Some(scenario.fleet_size),
        workers: Some(args.workers),
        analytic_path: None,
        truncation_mass: None,
        resolution_h: profile.resolution_h(),
        profiles: vec![entry],
        deltas: vec![],
        metrics_csv_path: None,
        svg_path: svg_path.map(|p| p.display().to_string()),
        report_path: Some(report_path.display().to_string()),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    emit_report(&report, &report_path)
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut scenarios: Vec<ScenarioConfig> = Vec::new();
    for path in &args.configs {
        scenarios.push(load_config(path)?);
    }
    for name in &args.presets {
        scenarios.push(preset(name)?);
    }
    if scenarios.len() < 2 {
        return Err(CliError::usage(format!(
            "compare needs at least two scenarios (got {}); pass --config/--preset repeatedly",
            scenarios.len()
        )));
    }
    let mut profiles: Vec<(String, DemandProfile)> = Vec::new();
    for s in &scenarios {
        profiles.push((s.label.clone(), s.expected_profile()?));
    }
    let dir = out_dir(&args.output.out);
    ensure_dir(&dir)?;

    let mut metrics_csv =
        String::from("baseline,candidate,max_abs_diff_kw,max_diff_frac_of_peak,rms_diff_kw\n");
    let mut deltas = Vec::new();
    for i in 0..profiles.len() {
        for j in (i + 1)..profiles.len() {
            let delta = compare_profiles(&profiles[i].1, &profiles[j].1)?;
            metrics_csv.push_str(&format!(
                "{},{},{:.16e},{:.16e},{:.16e}\n",
                profiles[i].0,
                profiles[j].0,
                delta.max_abs_diff_kw,
                delta.max_diff_frac_of_peak,
                delta.rms_diff_kw
            ));
            deltas.push(DeltaReport::new(&profiles[i].0, &profiles[j].0, &delta));
        }
    }
    let metrics_path = dir.join("compare-metrics.csv");
    write_file(&metrics_path, &metrics_csv)?;
    let svg_path = if args.output.svg {
        let path = dir.join("compare-overlay.svg");
        let refs: Vec<(&str, &DemandProfile)> =
            profiles.iter().map(|(l, p)| (l.as_str(), p)).collect();
        let chart = render_overlay("profile comparison", &refs)?;
        write_file(&path, &chart)?;
        Some(path)
    } else {
        None
    };
    let report_path = dir.join("compare-report.json");
    let entries: Vec<ProfileReport> = scenarios
        .iter()
        .zip(&profiles)
        .map(|(s, (label, p))| ProfileReport::new(label, p, s.fleet_size))
        .collect();
    let report = RunReport {
        mode: "compare".into(),
        scenario_hash: None,
        seed: None,
        sessions: None,
        workers: None,
        analytic_path: None,
        truncation_mass: None,
        resolution_h: profiles[0].1.resolution_h(),
        profiles: entries,
        deltas,
        metrics_csv_path: Some(metrics_path.display().to_string()),
        svg_path: svg_path.map(|p| p.display().to_string()),
        report_path: Some(report_path.display().to_string()),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    emit_report(&report, &report_path)
}

fn cmd_presets() {
    println!("presets:");
    for name in PRESET_NAMES {
        let p = preset(name).expect("built-in preset must build");
        println!(
            "  {name}: arrival {}, charge time {}, {} kW, fleet {}, bin {} h, window {} d, seed {}",
            p.arrival.describe(),
            p.charge_time.describe(),
            p.power_kw,
            p.fleet_size,
            p.resolution_h,
            p.fold_window_days,
            p.seed
        );
    }
    println!("outlets:");
    for o in OUTLETS {
        println!(
            "  {}: {} V / {} A, {} kW, {} miles per charging hour",
            o.name, o.voltage_v, o.current_a, o.power_kw, o.replenish_rate_mi_per_h
        );
    }
}
