//! CSV serialization and run manifests.
//!
//! Numbers are written with 17 significant digits so every value round-trips
//! exactly through `str::parse::<f64>`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bifurcation::{BoundaryCurve, BoundaryOutcome, CrossingResult, PointOutcome, SweepPoint};
use crate::dynamics::Trajectory;

pub const SWEEP_HEADER: &str = "mu,pair_re,pair_im,real_eig";
pub const TRAJECTORY_HEADER: &str = "t_min,v_sa,v_sv,v_pv";
pub const BOUNDARY_HEADER: &str = "secondary,mu_star,omega,period_s";
pub const CROSSINGS_HEADER: &str = "config,mu_star,omega,period_s";
/// Written in the `mu_star` column where the scan found no crossing.
pub const STABLE_MARKER: &str = "stable-up-to-mu-max";
pub const UNRESOLVED_MARKER: &str = "unresolved";
/// Written in the pair columns where the spectrum is three-real.
pub const NO_PAIR_MARKER: &str = "none";
pub const FAILED_MARKER: &str = "failed";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `mu,pair_re,pair_im,real_eig`. Three-real points carry [`NO_PAIR_MARKER`]
/// in the pair columns and their largest eigenvalue in `real_eig`.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for p in points {
        let mu = num(p.mu);
        let _ = match &p.outcome {
            PointOutcome::Pair { re, im, real } => {
                writeln!(out, "{mu},{},{},{}", num(*re), num(*im), num(*real))
            }
            PointOutcome::ThreeReal { eigenvalues } => {
                let top = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                writeln!(out, "{mu},{NO_PAIR_MARKER},{NO_PAIR_MARKER},{}", num(top))
            }
            PointOutcome::Failed { .. } => {
                writeln!(out, "{mu},{FAILED_MARKER},{FAILED_MARKER},{FAILED_MARKER}")
            }
        };
    }
    out
}

/// `t_min,v_sa,v_sv,v_pv`, keeping every `stride`-th sample and the last.
pub fn trajectory_csv(traj: &Trajectory, stride: usize) -> String {
    let stride = stride.max(1);
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    let last = traj.len().saturating_sub(1);
    for (i, (t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
        if i % stride == 0 || i == last {
            let _ = writeln!(out, "{},{},{},{}", num(*t), num(s.v_sa), num(s.v_sv), num(s.v_pv));
        }
    }
    out
}

pub fn boundary_csv(curve: &BoundaryCurve) -> String {
    let mut out = String::from(BOUNDARY_HEADER);
    out.push('\n');
    for p in &curve.points {
        let s = num(p.secondary);
        let _ = match &p.outcome {
            BoundaryOutcome::Crossing(c) => {
                writeln!(out, "{s},{},{},{}", num(c.mu_star), num(c.omega_star), num(c.period_s))
            }
            BoundaryOutcome::StableUpToMuMax => writeln!(out, "{s},{STABLE_MARKER},,"),
            BoundaryOutcome::Unresolved { .. } => writeln!(out, "{s},{UNRESOLVED_MARKER},,"),
        };
    }
    out
}

/// Named crossing points, one per row.
pub fn crossings_csv(rows: &[(String, CrossingResult)]) -> String {
    let mut out = String::from(CROSSINGS_HEADER);
    out.push('\n');
    for (name, c) in rows {
        let _ = writeln!(
            out,
            "{name},{},{},{}",
            num(c.mu_star),
            num(c.omega_star),
            num(c.period_s)
        );
    }
    out
}

/// Provenance record written next to a run's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: BTreeMap<String, String>,
    pub version: String,
    pub outputs: Vec<String>,
    pub duration_s: f64,
}

pub const MANIFEST_NAME: &str = "manifest.json";

/// I/O failure annotated with the path involved.
#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct OutputError {
    pub path: String,
    #[source]
    pub source: io::Error,
}

impl OutputError {
    fn at(path: &Path, source: io::Error) -> Self {
        OutputError {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Output directory that remembers every file written into it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, OutputError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| OutputError::at(&root, e))?;
        Ok(OutputDir {
            root,
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Writes `name` once; a second write to the same name is an error.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, OutputError> {
        let path = self.root.join(name);
        if self.files.iter().any(|f| f == name) {
            return Err(OutputError::at(
                &path,
                io::Error::new(io::ErrorKind::AlreadyExists, "written twice in one run"),
            ));
        }
        fs::write(&path, contents).map_err(|e| OutputError::at(&path, e))?;
        self.files.push(name.to_string());
        Ok(path)
    }

    /// Writes the manifest listing every file written so far.
    pub fn finish(
        self,
        command_line: Vec<String>,
        config: BTreeMap<String, String>,
        duration_s: f64,
    ) -> Result<RunManifest, OutputError> {
        let manifest = RunManifest {
            command_line,
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.files,
            duration_s,
        };
        let path = self.root.join(MANIFEST_NAME);
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| OutputError::at(&path, io::Error::other(e)))?;
        fs::write(&path, json + "\n").map_err(|e| OutputError::at(&path, e))?;
        Ok(manifest)
    }
}
