//! Command-line front end: TOML run configs in, CSV/JSON artifacts out.
//!
//! Every run writes into one output directory: an echo of the config, a
//! `provenance.json`, and the command's artifacts. Outputs depend only on
//! the config, flags, and seed, so repeated runs are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    classify_mode, estimate_period, integrate, IntegratorConfig, ModeLabel, PeriodEstimate,
    Trajectory,
};
use crate::error::Error;
use crate::fixedpoints::{
    bifurcation_sweep, euler_check, scan_stationary_points, MorseCount, StationaryPoint,
    SweepParam, SweepRow, DEFAULT_GRID_N, MAX_GRID_N,
};
use crate::model::{PhaseState, PhysicalParams, PumpSchedule, ReducedParams, Reduction};
use crate::portrait::{
    default_levels, extract_contours, sample_grid, separatrix_levels, DEFAULT_GRID_SIDE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "bjj-cavity",
    version,
    about = "Mean-field Bose Josephson junction in an optical cavity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Root-bracketing grid size (overrides the config).
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    /// Seed recorded with the outputs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Reduce laboratory parameters to (r, Ã, B, C).
    Reduce,
    /// Locate and classify stationary points.
    FixedPoints,
    /// Integrate one trajectory.
    Trajectory,
    /// Sample the energy surface and extract contours.
    Portrait,
    /// Count stationary points along a parameter sweep.
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Reduce => "reduce",
            Command::FixedPoints => "fixed-points",
            Command::Trajectory => "trajectory",
            Command::Portrait => "portrait",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::EulerViolation { .. } => EXIT_INVARIANT,
            Error::PoleApproach { .. } | Error::StepLimitExceeded { .. } => EXIT_RUNTIME,
            _ => EXIT_CONFIG,
        };
        CliError::new(code, err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::new(EXIT_IO, err.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::new(EXIT_IO, err.to_string())
    }
}

/// A frequency given in rad/s or as `"2π×<Hz>"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Frequency {
    RadPerSecond(f64),
    Text(String),
}

impl Frequency {
    pub fn rad_per_second(&self) -> Result<f64, CliError> {
        match self {
            Frequency::RadPerSecond(v) => Ok(*v),
            Frequency::Text(s) => parse_frequency(s),
        }
    }
}

/// Parses `"2π×50"`, `"2pi*50"`, `"-2*pi*1e6"` and plain numbers into rad/s.
pub fn parse_frequency(text: &str) -> Result<f64, CliError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let (sign, body) = match compact.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, compact.as_str()),
    };
    const PREFIXES: [&str; 8] = ["2π×", "2π*", "2π·", "2*π*", "2pi×", "2pi*", "2*pi*", "2pi·"];
    let bad = || CliError::new(EXIT_CONFIG, format!("cannot parse frequency {text:?}"));
    for prefix in PREFIXES {
        if let Some(hz) = body.strip_prefix(prefix) {
            let hz: f64 = hz.parse().map_err(|_| bad())?;
            return Ok(sign * std::f64::consts::TAU * hz);
        }
    }
    body.parse::<f64>().map(|v| sign * v).map_err(|_| bad())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalBlock {
    pub tunneling: Frequency,
    pub interaction: Frequency,
    pub atom_number: u64,
    #[serde(default)]
    pub light_shift: Option<Frequency>,
    #[serde(default)]
    pub bare_coupling: Option<Frequency>,
    #[serde(default)]
    pub atomic_frequency: Option<Frequency>,
    pub overlap_left: f64,
    pub overlap_right: f64,
    pub cavity_frequency: Frequency,
    pub pump_frequency: Frequency,
    pub loss_rate: Frequency,
    pub pump_amplitude: Frequency,
}

impl PhysicalBlock {
    pub fn to_params(&self) -> Result<PhysicalParams, CliError> {
        let opt = |f: &Option<Frequency>| f.as_ref().map(Frequency::rad_per_second).transpose();
        Ok(PhysicalParams {
            tunneling: self.tunneling.rad_per_second()?,
            interaction: self.interaction.rad_per_second()?,
            atom_number: self.atom_number,
            light_shift: opt(&self.light_shift)?,
            bare_coupling: opt(&self.bare_coupling)?,
            atomic_frequency: opt(&self.atomic_frequency)?,
            overlap_left: self.overlap_left,
            overlap_right: self.overlap_right,
            cavity_frequency: self.cavity_frequency.rad_per_second()?,
            pump_frequency: self.pump_frequency.rad_per_second()?,
            loss_rate: self.loss_rate.rad_per_second()?,
            pump_amplitude: self.pump_amplitude.rad_per_second()?,
        })
    }
}

/// Dimensionless parameters. Give either `tilt` (Ã, constant pump) or
/// `tilt_scale` together with a `[pump]` schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedBlock {
    pub r: f64,
    pub b: f64,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilt_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointsBlock {
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
}

fn default_grid_n() -> usize {
    DEFAULT_GRID_N
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryBlock {
    pub z0: f64,
    #[serde(default)]
    pub phi0: f64,
    pub t_end: f64,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortraitBlock {
    #[serde(default = "default_side")]
    pub n_z: usize,
    #[serde(default = "default_side")]
    pub n_phi: usize,
    /// Evaluation time for time-dependent pumps.
    #[serde(default)]
    pub t: f64,
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
    #[serde(default = "default_quantiles")]
    pub quantiles: usize,
}

fn default_side() -> usize {
    DEFAULT_GRID_SIDE
}

fn default_quantiles() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub vary: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub physical: Option<PhysicalBlock>,
    #[serde(default)]
    pub reduced: Option<ReducedBlock>,
    #[serde(default)]
    pub pump: Option<PumpSchedule>,
    #[serde(default)]
    pub fixed_points: Option<FixedPointsBlock>,
    #[serde(default)]
    pub trajectory: Option<TrajectoryBlock>,
    #[serde(default)]
    pub portrait: Option<PortraitBlock>,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text)
            .map_err(|e| CliError::new(EXIT_CONFIG, format!("invalid config: {e}")))?;
        match (&config.physical, &config.reduced) {
            (Some(_), Some(_)) => Err(CliError::new(
                EXIT_CONFIG,
                "config must contain exactly one of [physical] or [reduced], not both",
            )),
            (None, None) => Err(CliError::new(
                EXIT_CONFIG,
                "config must contain a [physical] or a [reduced] block",
            )),
            _ => Ok(config),
        }
    }

    /// Reduced parameters, from whichever block is present. A `[pump]`
    /// schedule replaces the constant pump of a physical block.
    pub fn reduced_params(&self) -> Result<ReducedParams, CliError> {
        if let Some(physical) = &self.physical {
            let red = Reduction::from_physical(&physical.to_params()?)?;
            let p = red.params;
            return Ok(match &self.pump {
                Some(pump) => {
                    ReducedParams::with_schedule(p.r(), p.tilt_scale(), p.b(), p.c(), pump.clone())?
                }
                None => p,
            });
        }
        let block = self.reduced.as_ref().expect("checked in parse");
        match (block.tilt, block.tilt_scale, &self.pump) {
            (Some(tilt), None, None) => Ok(ReducedParams::new(block.r, tilt, block.b, block.c)?),
            (None, Some(scale), Some(pump)) => Ok(ReducedParams::with_schedule(
                block.r,
                scale,
                block.b,
                block.c,
                pump.clone(),
            )?),
            _ => Err(CliError::new(
                EXIT_CONFIG,
                "[reduced] needs either `tilt` alone, or `tilt_scale` with a [pump] block",
            )),
        }
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text }
    }

    fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    fn write(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, &self.text)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    seed: u64,
    grid_n_override: Option<usize>,
}

/// Parses the config, prepares the output directory, and dispatches.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .common
        .config
        .as_ref()
        .ok_or_else(|| CliError::new(EXIT_CONFIG, "--config <path> is required"))?;
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::new(
            EXIT_CONFIG,
            format!("cannot read config {}: {e}", path.display()),
        )
    })?;
    let config = RunConfig::parse(&text)?;
    let out = &cli.common.out;
    fs::create_dir_all(out)?;
    fs::write(out.join("config.toml"), &text)?;
    let seed = cli.common.seed.or(config.seed).unwrap_or(0);
    write_json(
        &out.join("provenance.json"),
        &Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: cli.command.name(),
            seed,
            grid_n_override: cli.common.grid_n,
        },
    )?;
    let grid_n = cli
        .common
        .grid_n
        .or(config.fixed_points.as_ref().map(|b| b.grid_n))
        .unwrap_or(DEFAULT_GRID_N);
    match cli.command {
        Command::Reduce => cmd_reduce(&config, out),
        Command::FixedPoints => cmd_fixed_points(&config, out, grid_n),
        Command::Trajectory => cmd_trajectory(&config, out, grid_n),
        Command::Portrait => cmd_portrait(&config, out, grid_n),
        Command::Sweep => cmd_sweep(&config, out, grid_n),
    }
}

#[derive(Serialize)]
struct ReduceReport {
    input: PhysicalParams,
    r: f64,
    tilt: f64,
    b: f64,
    c: f64,
    pump: f64,
    detuning: f64,
    coupling_difference: f64,
    tilt_scale: f64,
    light_shift: f64,
    unit: f64,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct ReducedEcho {
    reduced: ReducedBlock,
    pump: PumpSchedule,
}

pub fn cmd_reduce(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    let physical = config
        .physical
        .as_ref()
        .ok_or_else(|| CliError::new(EXIT_CONFIG, "reduce needs a [physical] block"))?
        .to_params()?;
    let red = Reduction::from_physical(&physical)?;
    let p = &red.params;
    let mut warnings = Vec::new();
    if !(-1.0..=1.0).contains(&p.b()) {
        warnings.push(format!(
            "reduced detuning B = {} lies outside [-1, 1]",
            p.b()
        ));
    }
    if p.c() > 1.0 {
        warnings.push(format!("reduced loss rate C = {} exceeds 1", p.c()));
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    write_json(
        &out.join("reduced.json"),
        &ReduceReport {
            input: physical.clone(),
            r: p.r(),
            tilt: p.tilt(),
            b: p.b(),
            c: p.c(),
            pump: red.pump,
            detuning: red.detuning,
            coupling_difference: red.coupling_difference,
            tilt_scale: p.tilt_scale(),
            light_shift: red.light_shift,
            unit: red.unit,
            warnings,
        },
    )?;
    // a config fragment that reproduces these parameters exactly
    let echo = ReducedEcho {
        reduced: ReducedBlock {
            r: p.r(),
            b: p.b(),
            c: p.c(),
            tilt: None,
            tilt_scale: Some(p.tilt_scale()),
        },
        pump: p.pump().clone(),
    };
    let fragment = toml::to_string(&echo)
        .map_err(|e| CliError::new(EXIT_IO, format!("cannot serialize reduced block: {e}")))?;
    fs::write(out.join("reduced.toml"), fragment)?;
    Ok(())
}

#[derive(Serialize)]
struct DegenerateRootReport {
    branch: &'static str,
    z: f64,
    f_derivative: f64,
}

#[derive(Serialize)]
struct MorseReport {
    minima: usize,
    saddles: usize,
    maxima: usize,
    euler_sum: i64,
    euler_ok: bool,
    grid_n: usize,
    degenerate_roots: Vec<DegenerateRootReport>,
}

/// Stationary points with grid doubling; degenerate roots are returned
/// alongside rather than as an error.
fn stationary_points_for_cli(
    params: &ReducedParams,
    grid_n: usize,
) -> Result<(Vec<StationaryPoint>, Vec<usize>, MorseCount, usize), Error> {
    let mut n = grid_n;
    loop {
        let (points, degenerate) = scan_stationary_points(params, n)?;
        let counts = MorseCount::from_points(&points);
        if euler_check(&points).is_ok() || !degenerate.is_empty() || n * 2 > MAX_GRID_N {
            return Ok((points, degenerate, counts, n));
        }
        n *= 2;
    }
}

pub fn cmd_fixed_points(config: &RunConfig, out: &Path, grid_n: usize) -> Result<(), CliError> {
    let params = config.reduced_params()?;
    let (points, degenerate, counts, used_n) = stationary_points_for_cli(&params, grid_n)?;
    let mut csv = Csv::new(&["z", "branch", "kind", "energy", "f_derivative"]);
    for p in &points {
        csv.row(&[
            fmt_f64(p.z),
            p.branch.name().to_string(),
            p.kind.name().to_string(),
            fmt_f64(p.energy),
            fmt_f64(p.f_derivative),
        ]);
    }
    csv.write(&out.join("fixed_points.csv"))?;
    let euler_ok = counts.euler_sum() == 2;
    write_json(
        &out.join("morse.json"),
        &MorseReport {
            minima: counts.minima,
            saddles: counts.saddles,
            maxima: counts.maxima,
            euler_sum: counts.euler_sum(),
            euler_ok,
            grid_n: used_n,
            degenerate_roots: degenerate
                .iter()
                .map(|&k| DegenerateRootReport {
                    branch: points[k].branch.name(),
                    z: points[k].z,
                    f_derivative: points[k].f_derivative,
                })
                .collect(),
        },
    )?;
    if !euler_ok && degenerate.is_empty() {
        return Err(Error::EulerViolation { counts }.into());
    }
    Ok(())
}

#[derive(Serialize)]
struct TrajectorySummary {
    status: &'static str,
    z0: f64,
    phi0: f64,
    t_end: f64,
    samples: usize,
    energy_drift: f64,
    period: Option<PeriodEstimate>,
    period_error: Option<String>,
    mode: Option<ModeLabel>,
    mode_error: Option<String>,
    separatrix_energies: Vec<f64>,
    error: Option<String>,
}

fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> std::io::Result<()> {
    let mut csv = Csv::new(&["t", "z", "phi_unwrapped", "H_c", "photon"]);
    for k in 0..traj.len() {
        csv.row(&[
            fmt_f64(traj.times()[k]),
            fmt_f64(traj.z()[k]),
            fmt_f64(traj.phi()[k]),
            fmt_f64(traj.energies()[k]),
            fmt_f64(traj.photons()[k]),
        ]);
    }
    csv.write(path)
}

pub fn cmd_trajectory(config: &RunConfig, out: &Path, grid_n: usize) -> Result<(), CliError> {
    let params = config.reduced_params()?;
    let block = config
        .trajectory
        .as_ref()
        .ok_or_else(|| CliError::new(EXIT_CONFIG, "trajectory needs a [trajectory] block"))?;
    let state0 = PhaseState::new(block.z0, block.phi0)?;
    let separatrix = if params.pump().is_constant() {
        stationary_points_for_cli(&params, grid_n)
            .map(|(points, _, _, _)| separatrix_levels(&points))
            .unwrap_or_default()
    } else {
        Vec::new()
    };
    let mut summary = TrajectorySummary {
        status: "ok",
        z0: block.z0,
        phi0: state0.phi(),
        t_end: block.t_end,
        samples: 0,
        energy_drift: 0.0,
        period: None,
        period_error: None,
        mode: None,
        mode_error: None,
        separatrix_energies: separatrix.clone(),
        error: None,
    };
    match integrate(&state0, &params, block.t_end, &block.integrator) {
        Ok(traj) => {
            write_trajectory_csv(&traj, &out.join("trajectory.csv"))?;
            summary.samples = traj.len();
            summary.energy_drift = traj.energy_drift();
            match estimate_period(&traj) {
                Ok(p) => summary.period = Some(p),
                Err(e) => summary.period_error = Some(e.to_string()),
            }
            match classify_mode(&traj, &params, &separatrix) {
                Ok(m) => summary.mode = Some(m),
                Err(e) => summary.mode_error = Some(e.to_string()),
            }
            write_json(&out.join("summary.json"), &summary)
        }
        Err(Error::PoleApproach { t, z, partial }) => {
            write_trajectory_csv(&partial, &out.join("trajectory.csv"))?;
            let message = format!("trajectory approached a pole at t = {t} (z = {z})");
            summary.status = "pole_approach";
            summary.samples = partial.len();
            summary.energy_drift = partial.energy_drift();
            summary.error = Some(message.clone());
            write_json(&out.join("summary.json"), &summary)?;
            Err(CliError::new(EXIT_RUNTIME, message))
        }
        Err(err) => Err(err.into()),
    }
}

#[derive(Serialize)]
struct SeparatrixReport {
    levels: Vec<f64>,
    stationary_points: Vec<StationaryPoint>,
}

pub fn cmd_portrait(config: &RunConfig, out: &Path, grid_n: usize) -> Result<(), CliError> {
    let params = config.reduced_params()?;
    let block = config.portrait.clone().unwrap_or(PortraitBlock {
        n_z: DEFAULT_GRID_SIDE,
        n_phi: DEFAULT_GRID_SIDE,
        t: 0.0,
        levels: None,
        quantiles: default_quantiles(),
    });
    let grid = sample_grid(&params, block.n_z, block.n_phi, block.t)?;
    let mut csv = Csv::new(&["z", "phi", "H_c"]);
    for (i, &z) in grid.z.iter().enumerate() {
        for (j, &phi) in grid.phi.iter().enumerate() {
            csv.row(&[fmt_f64(z), fmt_f64(phi), fmt_f64(grid.value(i, j))]);
        }
    }
    csv.write(&out.join("grid.csv"))?;

    let (points, _, _, _) = stationary_points_for_cli(&params, grid_n)?;
    let levels = match &block.levels {
        Some(levels) => levels.clone(),
        None => default_levels(&grid, &points, block.quantiles),
    };
    write_json(
        &out.join("contours.json"),
        &extract_contours(&grid, &levels),
    )?;
    write_json(
        &out.join("separatrix.json"),
        &SeparatrixReport {
            levels: separatrix_levels(&points),
            stationary_points: points,
        },
    )
}

/// `branch:kind:z` triples joined by `;`.
fn serialize_points(points: &[StationaryPoint]) -> String {
    let mut s = String::new();
    for (k, p) in points.iter().enumerate() {
        if k > 0 {
            s.push(';');
        }
        let _ = write!(s, "{}:{}:{}", p.branch.name(), p.kind.name(), fmt_f64(p.z));
    }
    s
}

pub fn cmd_sweep(config: &RunConfig, out: &Path, grid_n: usize) -> Result<(), CliError> {
    let params = config.reduced_params()?;
    let block = config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::new(EXIT_CONFIG, "sweep needs a [sweep] block"))?;
    let vary: SweepParam = block.vary.parse()?;
    let rows = bifurcation_sweep(&params, vary, (block.from, block.to), block.steps, grid_n)?;
    write_sweep_csv(&rows, &out.join("sweep.csv"))?;
    Ok(())
}

fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> std::io::Result<()> {
    let mut csv = Csv::new(&["value", "m0", "m1", "m2", "euler_ok", "flag", "points"]);
    for row in rows {
        let counts = |f: fn(&MorseCount) -> usize| {
            row.counts
                .as_ref()
                .map(|c| f(c).to_string())
                .unwrap_or_default()
        };
        csv.row(&[
            fmt_f64(row.value),
            counts(|c| c.minima),
            counts(|c| c.saddles),
            counts(|c| c.maxima),
            row.euler_ok.to_string(),
            row.flag.clone().unwrap_or_default().replace(',', ";"),
            serialize_points(&row.points),
        ]);
    }
    csv.write(path)
}
