//! Lumped three-compartment circulation model with baroreflex control.
//!
//! The crate covers the vector field and its observables, steady states,
//! eigen-analysis of the linearization, Hopf crossing detection in the
//! feedback gain, fixed-step simulation with limit-cycle classification, and
//! a command-line front end that writes CSV/SVG reports.

pub mod bifurcation;
pub mod cli;
pub mod config;
pub mod control;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod params;
pub mod report;
pub mod spectral;
pub mod svg;

pub use bifurcation::{
    boundary_curve, find_crossing, stability_scan, sweep_mu, BoundaryFamily, CrossingResult,
    ScanVerdict, SweepPoint,
};
pub use config::{parse_config, parse_config_str, RunConfig};
pub use control::{ControlLaw, ControlRegistry, ControlVariant, ControlledParameter};
pub use dynamics::{detect_cycle, integrate, CycleClass, CycleReport, Trajectory};
pub use equilibrium::{solve_equilibrium, EquilibriumResult};
pub use error::{ModelError, Result};
pub use model::{hill_activity, observables, rhs, Observables, VolumeState};
pub use params::CardioParams;
pub use spectral::{eig3, jacobian_fd, Matrix3, Spectrum, SpectrumKind};
