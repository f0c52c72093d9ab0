//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::bifurcation::{
    boundary_curve, find_crossing, sign_change_brackets, stability_scan_with, sweep_mu,
    BoundaryCurve, BoundaryFamily, CrossingResult, ScanVerdict, SweepPoint, DEFAULT_SCAN_POINTS,
};
use crate::config::{parse_config, ConfigError, RunConfig};
use crate::control::ControlVariant;
use crate::dynamics::{detect_cycle, integrate, CycleReport, Trajectory};
use crate::equilibrium::solve_equilibrium;
use crate::error::ModelError;
use crate::model::VolumeState;
use crate::params::CardioParams;
use crate::report::{self, OutputDir, OutputError};
use crate::spectral::analyze_equilibrium;
use crate::svg::{self, Plot, Series};

/// Starting point of `simulate` when `--init` is not given.
pub const DEFAULT_SIMULATION_START: VolumeState = VolumeState::new(1.0, 3.4, 0.5);
/// Trajectory CSVs written by `reproduce` keep every tenth sample.
pub const REPRODUCE_STRIDE: usize = 10;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(ModelError),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidArgument(_) | ModelError::InvalidParameter { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Numeric(other),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<OutputError> for CliError {
    fn from(e: OutputError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(format!("stdout: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "mayerwave", version, about = "Baroreflex circulation model: equilibria, spectra, Hopf crossings and limit cycles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Run configuration (`key = value` lines).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for output files and the run manifest.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the steady state.
    Steady {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mu: Option<f64>,
        /// Newton starting point v_sa,v_sv,v_pv.
        #[arg(long, value_parser = parse_init, allow_hyphen_values = true)]
        init: Option<VolumeState>,
    },
    /// Eigenvalues of the linearization at the steady state.
    Eigs {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, value_parser = parse_init, allow_hyphen_values = true)]
        init: Option<VolumeState>,
    },
    /// Spectrum over a uniform gain grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mu_min: Option<f64>,
        #[arg(long)]
        mu_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Locate the Hopf crossing inside a gain bracket.
    Crossing {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mu_lo: f64,
        #[arg(long)]
        mu_hi: f64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Scan (0, mu_max] for loss of stability.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mu_max: Option<f64>,
        /// Number of grid points.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Crossing gain as a function of the secondary constant.
    Boundary {
        #[command(flatten)]
        common: Common,
        /// Family: vd (unstressed volume) or csv (venous compliance).
        #[arg(long)]
        variant: BoundaryFamily,
        /// Number of equally spaced secondary values starting at zero.
        #[arg(long, default_value_t = 4)]
        grid: usize,
        #[arg(long)]
        mu_max: Option<f64>,
    },
    /// Integrate in time and classify the oscillation.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, value_parser = parse_init, allow_hyphen_values = true)]
        init: Option<VolumeState>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        /// Leading fraction of the run ignored by cycle detection.
        #[arg(long)]
        transient_fraction: Option<f64>,
    },
    /// Regenerate every figure data set and the crossing summary.
    Reproduce {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
    },
}

fn parse_init(s: &str) -> Result<VolumeState, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected v_sa,v_sv,v_pv, got `{s}`"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
    }
    Ok(VolumeState::from_array(v))
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let command_line = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let stdout = io::stdout();
    match run(cli, command_line, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Session {
    started: Instant,
    command_line: Vec<String>,
    snapshot: BTreeMap<String, String>,
    out: Option<OutputDir>,
}

impl Session {
    fn new(common: &Common, command_line: Vec<String>, cfg: Option<&RunConfig>) -> Result<Self, CliError> {
        let snapshot = cfg
            .map(|c| c.snapshot.iter().cloned().collect())
            .unwrap_or_default();
        let out = common.out.as_ref().map(OutputDir::create).transpose()?;
        Ok(Session {
            started: Instant::now(),
            command_line,
            snapshot,
            out,
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        if let Some(out) = self.out.as_mut() {
            out.write(name, contents)?;
        }
        Ok(())
    }

    fn finish(self) -> Result<(), CliError> {
        if let Some(out) = self.out {
            out.finish(self.command_line, self.snapshot, self.started.elapsed().as_secs_f64())?;
        }
        Ok(())
    }
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config is required for this command".into()))?;
    Ok(parse_config(path)?)
}

fn load_params(common: &Common) -> Result<(CardioParams, Option<RunConfig>), CliError> {
    match &common.config {
        Some(path) => {
            let cfg = parse_config(path)?;
            Ok((cfg.params, Some(cfg)))
        }
        None => Ok((CardioParams::default(), None)),
    }
}

fn gain(flag: Option<f64>, cfg: &RunConfig) -> Result<f64, CliError> {
    let mu = flag
        .or(cfg.mu)
        .ok_or_else(|| CliError::Usage("a gain is required: pass --mu or set `mu` in the config".into()))?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(CliError::Usage(format!("--mu must be positive, got {mu}")));
    }
    Ok(mu)
}

pub fn run(cli: Cli, command_line: Vec<String>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Steady { common, mu, init } => {
            let cfg = load(&common)?;
            let mu = gain(mu, &cfg)?;
            let mut session = Session::new(&common, command_line, Some(&cfg))?;
            let res = solve_equilibrium(&cfg.params, &cfg.variant, mu, init.unwrap_or(VolumeState::RESTING))?;
            let text = format!(
                "v_sa={:.12} v_sv={:.12} v_pv={:.12} residual={:.3e} iterations={}\n",
                res.state.v_sa, res.state.v_sv, res.state.v_pv, res.residual_norm, res.iterations
            );
            stdout.write_all(text.as_bytes())?;
            session.write("steady.txt", &text)?;
            session.finish()
        }
        Command::Eigs { common, mu, init } => {
            let cfg = load(&common)?;
            let mu = gain(mu, &cfg)?;
            let mut session = Session::new(&common, command_line, Some(&cfg))?;
            let a = analyze_equilibrium(&cfg.params, &cfg.variant, mu, init.unwrap_or(VolumeState::RESTING))?;
            let s = a.equilibrium.state;
            let text = format!(
                "mu={mu} equilibrium=({:.10}, {:.10}, {:.10}) {}\n",
                s.v_sa, s.v_sv, s.v_pv, a.spectrum
            );
            stdout.write_all(text.as_bytes())?;
            session.write("eigs.txt", &text)?;
            session.finish()
        }
        Command::Sweep {
            common,
            mu_min,
            mu_max,
            steps,
        } => {
            let cfg = load(&common)?;
            let mut session = Session::new(&common, command_line, Some(&cfg))?;
            let points = sweep_mu(
                &cfg.params,
                &cfg.variant,
                mu_min.unwrap_or(cfg.mu_min),
                mu_max.unwrap_or(cfg.mu_max),
                steps.unwrap_or(cfg.steps),
            )?;
            let csv = report::sweep_csv(&points);
            if session.out.is_some() {
                session.write("sweep.csv", &csv)?;
                session.write("sweep.svg", &svg::render(&sweep_plot(&points, &cfg.variant.to_string())))?;
                for (lo, hi) in sign_change_brackets(&points) {
                    writeln!(stdout, "sign change in [{lo}, {hi}]")?;
                }
            } else {
                stdout.write_all(csv.as_bytes())?;
            }
            session.finish()
        }
        Command::Crossing {
            common,
            mu_lo,
            mu_hi,
            tol,
        } => {
            let cfg = load(&common)?;
            let mut session = Session::new(&common, command_line, Some(&cfg))?;
            let c = find_crossing(&cfg.params, &cfg.variant, mu_lo, mu_hi, tol.unwrap_or(cfg.tol))?;
            let text = format!("{c}\n");
            stdout.write_all(text.as_bytes())?;
            session.write("crossing.txt", &text)?;
            session.finish()
        }
        Command::Scan {
            common,
            mu_max,
            steps,
            tol,
        } => {
            let cfg = load(&common)?;
            let mut session = Session::new(&common, command_line, Some(&cfg))?;
            let verdict = stability_scan_with(
                &cfg.params,
                &cfg.variant,
                mu_max.unwrap_or(cfg.mu_max_scan),
                steps.unwrap_or(DEFAULT_SCAN_POINTS),
                tol.unwrap_or(cfg.tol),
            )?;
            let text = format!("{verdict}\n");
            stdout.write_all(text.as_bytes())?;
            session.write("scan.txt", &text)?;
            session.finish()
        }
        Command::Boundary {
            common,
            variant,
            grid,
            mu_max,
        } => {
            let (params, cfg) = load_params(&common)?;
            let mu_max = mu_max.or(cfg.as_ref().map(|c| c.mu_max_scan)).unwrap_or(crate::bifurcation::DEFAULT_SCAN_MU_MAX);
            let mut session = Session::new(&common, command_line, cfg.as_ref())?;
            let secondary = secondary_grid(variant, &params, grid)?;
            let curve = boundary_curve(&params, variant, &secondary, mu_max)?;
            let csv = report::boundary_csv(&curve);
            if session.out.is_some() {
                let stem = format!("boundary_{}", variant.short_name());
                session.write(&format!("{stem}.csv"), &csv)?;
                session.write(&format!("{stem}.svg"), &svg::render(&boundary_plot(&curve)))?;
                writeln!(stdout, "strictly_increasing={}", curve.is_strictly_increasing())?;
            } else {
                stdout.write_all(csv.as_bytes())?;
            }
            session.finish()
        }
        Command::Simulate {
            common,
            mu,
            init,
            dt,
            t_end,
            transient_fraction,
        } => {
            let cfg = load(&common)?;
            let mu = gain(mu, &cfg)?;
            let mut session = Session::new(&common, command_line, Some(&cfg))?;
            let traj = integrate(
                &cfg.params,
                &cfg.variant,
                mu,
                init.unwrap_or(DEFAULT_SIMULATION_START),
                dt.unwrap_or(cfg.dt),
                t_end.unwrap_or(cfg.t_end),
            )?;
            let cycle = detect_cycle(&traj, transient_fraction.unwrap_or(cfg.transient_fraction))?;
            let text = format!("{}\n", cycle_line(&cycle));
            stdout.write_all(text.as_bytes())?;
            session.write("trajectory.csv", &report::trajectory_csv(&traj, 1))?;
            session.write(
                "trajectory.svg",
                &svg::render(&phase_plot(&traj, &format!("{} at mu = {mu}", cfg.variant))),
            )?;
            session.write("cycle.txt", &text)?;
            session.finish()
        }
        Command::Reproduce { common, dt, t_end } => {
            let out = common
                .out
                .clone()
                .ok_or_else(|| CliError::Usage("reproduce needs --out DIR".into()))?;
            let (params, cfg) = load_params(&common)?;
            let mut settings = ReproduceSettings::from_config(cfg.as_ref());
            settings.dt = dt.unwrap_or(settings.dt);
            settings.t_end = t_end.unwrap_or(settings.t_end);
            let mut session = Session::new(&common, command_line, cfg.as_ref())?;
            let summary = reproduce(&params, &settings, &mut session)?;
            stdout.write_all(summary.as_bytes())?;
            writeln!(stdout, "wrote {}", out.display())?;
            session.finish()
        }
    }
}

/// `n` values `rest·i/n`, `i = 0..n`, of the family's secondary constant.
pub fn secondary_grid(family: BoundaryFamily, params: &CardioParams, n: usize) -> Result<Vec<f64>, CliError> {
    if n == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    let rest = family.resting_value(params);
    Ok((0..n).map(|i| rest * i as f64 / n as f64).collect())
}

pub fn cycle_line(c: &CycleReport) -> String {
    let period = c
        .period_s
        .map(|p| format!("{p:.3}"))
        .unwrap_or_else(|| "n/a".into());
    format!(
        "classification={} amplitude={:.6e} period_s={period} peaks={}",
        c.classification.as_str(),
        c.amplitude,
        c.peak_times.len()
    )
}

fn sweep_plot(points: &[SweepPoint], title: &str) -> Plot {
    Plot {
        title: format!("Re(λ) of the complex pair, {title}"),
        x_label: "gain μ".into(),
        y_label: "Re(λ) (1/min)".into(),
        series: vec![Series {
            label: String::new(),
            points: points
                .iter()
                .filter_map(|p| p.pair_real_part().map(|re| (p.mu, re)))
                .collect(),
        }],
        zero_line: true,
    }
}

fn phase_plot(traj: &Trajectory, title: &str) -> Plot {
    // Long runs are thinned to about 20k vertices.
    let stride = (traj.len() / 20_000).max(1);
    Plot {
        title: title.into(),
        x_label: "v_sa (litres)".into(),
        y_label: "v_sv (litres)".into(),
        series: vec![Series {
            label: String::new(),
            points: traj
                .states
                .iter()
                .step_by(stride)
                .map(|s| (s.v_sa, s.v_sv))
                .collect(),
        }],
        zero_line: false,
    }
}

fn boundary_plot(curve: &BoundaryCurve) -> Plot {
    let name = curve.family.secondary_name();
    Plot {
        title: format!("{name} against the crossing gain"),
        x_label: "crossing gain μ*".into(),
        y_label: name.into(),
        series: vec![Series {
            label: String::new(),
            points: curve
                .points
                .iter()
                .filter_map(|p| p.crossing().map(|c| (c.mu_star, p.secondary)))
                .collect(),
        }],
        zero_line: false,
    }
}

/// Grids and horizons used by `reproduce`.
#[derive(Debug, Clone)]
pub struct ReproduceSettings {
    pub mu_min: f64,
    pub mu_max: f64,
    pub steps: usize,
    pub mu_max_scan: f64,
    pub tol: f64,
    pub dt: f64,
    pub t_end: f64,
    pub transient_fraction: f64,
}

impl ReproduceSettings {
    pub fn from_config(cfg: Option<&RunConfig>) -> Self {
        let defaults = RunConfig::with_variant(ControlVariant::linear());
        let c = cfg.unwrap_or(&defaults);
        ReproduceSettings {
            mu_min: c.mu_min,
            mu_max: c.mu_max,
            steps: c.steps,
            mu_max_scan: c.mu_max_scan,
            tol: c.tol,
            dt: c.dt,
            t_end: c.t_end,
            transient_fraction: c.transient_fraction,
        }
    }
}

/// The seven reference configurations: four unstressed-volume loops and
/// three venous-compliance loops, all preserving the resting equilibrium.
pub fn reference_configurations() -> Vec<(String, BoundaryFamily, f64)> {
    let vd = [0.0, 0.5, 1.0, 1.5].map(|d2| (format!("d1={} d2={d2}", 2.0 * (2.0 - d2)), BoundaryFamily::UnstressedVolume, d2));
    let csv = [0.0, 0.25, 0.5].map(|c2| (format!("c1={} c2={c2}", 2.0 * (0.75 - c2)), BoundaryFamily::VenousCompliance, c2));
    vd.into_iter().chain(csv).collect()
}

struct Simulation {
    name: &'static str,
    mu: f64,
    init: VolumeState,
}

const SIMULATIONS: [Simulation; 3] = [
    Simulation { name: "fig3a", mu: 10.0, init: VolumeState::new(1.0, 3.4, 0.5) },
    Simulation { name: "fig3b", mu: 20.0, init: VolumeState::new(1.0, 3.47, 0.39) },
    Simulation { name: "fig3c", mu: 20.0, init: VolumeState::new(1.0, 3.4, 0.5) },
];

fn reproduce(params: &CardioParams, s: &ReproduceSettings, session: &mut Session) -> Result<String, CliError> {
    let configs = reference_configurations();
    let mut summary = String::from("# Hopf crossings of the reference configurations\n");
    let mut crossings: Vec<(String, CrossingResult)> = Vec::new();

    let fig_names = ["fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig2c"];
    for ((label, family, secondary), fig) in configs.iter().zip(fig_names) {
        let variant = family.variant_for(*secondary, params)?;
        let points = sweep_mu(params, &variant, s.mu_min, s.mu_max, s.steps)?;
        session.write(&format!("{fig}.csv"), &report::sweep_csv(&points))?;
        session.write(&format!("{fig}.svg"), &svg::render(&sweep_plot(&points, label)))?;

        let verdict = stability_scan_with(params, &variant, s.mu_max_scan, DEFAULT_SCAN_POINTS, s.tol)?;
        match verdict {
            ScanVerdict::CrossingFound(c) => {
                summary.push_str(&format!("{label}: {c}\n"));
                crossings.push((label.clone(), c));
            }
            other => summary.push_str(&format!("{label}: {other}\n")),
        }
    }
    session.write("crossings.csv", &report::crossings_csv(&crossings))?;
    let crossing_plot = Plot {
        title: "Crossing gain and oscillation period".into(),
        x_label: "crossing gain μ*".into(),
        y_label: "period (s)".into(),
        series: vec![Series {
            label: String::new(),
            points: crossings.iter().map(|(_, c)| (c.mu_star, c.period_s)).collect(),
        }],
        zero_line: false,
    };
    session.write("crossings.svg", &svg::render(&crossing_plot))?;

    summary.push_str("# Phase portraits, unstressed-volume loop d1=4 d2=0\n");
    let vd40 = BoundaryFamily::UnstressedVolume.variant_for(0.0, params)?;
    for sim in &SIMULATIONS {
        let traj = integrate(params, &vd40, sim.mu, sim.init, s.dt, s.t_end)?;
        let cycle = detect_cycle(&traj, s.transient_fraction)?;
        session.write(&format!("{}.csv", sim.name), &report::trajectory_csv(&traj, REPRODUCE_STRIDE))?;
        let title = format!("mu = {} from ({}, {}, {})", sim.mu, sim.init.v_sa, sim.init.v_sv, sim.init.v_pv);
        session.write(&format!("{}.svg", sim.name), &svg::render(&phase_plot(&traj, &title)))?;
        summary.push_str(&format!("{}: {}\n", sim.name, cycle.classification.as_str()));
    }

    summary.push_str("# Stability boundaries\n");
    for (family, n) in [(BoundaryFamily::UnstressedVolume, 20), (BoundaryFamily::VenousCompliance, 15)] {
        let grid = secondary_grid(family, params, n)?;
        let curve = boundary_curve(params, family, &grid, s.mu_max_scan)?;
        let stem = format!("fig4_{}", family.short_name());
        session.write(&format!("{stem}.csv"), &report::boundary_csv(&curve))?;
        session.write(&format!("{stem}.svg"), &svg::render(&boundary_plot(&curve)))?;
        summary.push_str(&format!(
            "{stem}: strictly_increasing={}\n",
            curve.is_strictly_increasing()
        ));
    }

    session.write("summary.txt", &summary)?;
    Ok(summary)
}
