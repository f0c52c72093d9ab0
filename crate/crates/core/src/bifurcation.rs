//! Gain sweeps and Hopf crossing points.
//!
//! The equilibrium is followed in the gain `μ`; a Hopf point is where the
//! real part of the conjugate eigenvalue pair changes sign from negative to
//! positive. Crossings are bracketed on a grid and refined by bisection.
//! Grid evaluations are independent and run on the rayon pool; results are
//! always returned in grid order.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::control::ControlVariant;
use crate::error::{ModelError, Result};
use crate::params::CardioParams;
use crate::spectral::{classify_at_equilibrium, Spectrum};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_SCAN_MU_MAX: f64 = 100.0;
pub const DEFAULT_SCAN_POINTS: usize = 200;

/// Oscillation period in seconds for an angular frequency in rad/min.
pub fn period_seconds(omega_per_min: f64) -> f64 {
    60.0 * 2.0 * PI / omega_per_min
}

/// Linearisation at one gain value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PointOutcome {
    Pair { re: f64, im: f64, real: f64 },
    ThreeReal { eigenvalues: [f64; 3] },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub mu: f64,
    pub outcome: PointOutcome,
}

impl SweepPoint {
    pub fn from_spectrum(mu: f64, spectrum: &Spectrum) -> Self {
        let outcome = match spectrum.pair() {
            Some(p) => PointOutcome::Pair {
                re: p.re,
                im: p.im,
                real: spectrum.real_eigenvalue(),
            },
            None => PointOutcome::ThreeReal {
                eigenvalues: spectrum.real_parts(),
            },
        };
        SweepPoint { mu, outcome }
    }

    pub fn pair_real_part(&self) -> Option<f64> {
        match self.outcome {
            PointOutcome::Pair { re, .. } => Some(re),
            _ => None,
        }
    }

    pub fn pair_imag_part(&self) -> Option<f64> {
        match self.outcome {
            PointOutcome::Pair { im, .. } => Some(im),
            _ => None,
        }
    }

    /// Real eigenvalue beside the pair, or the largest of three real ones.
    pub fn real_eigenvalue(&self) -> Option<f64> {
        match self.outcome {
            PointOutcome::Pair { real, .. } => Some(real),
            PointOutcome::ThreeReal { eigenvalues } => Some(eigenvalues[0]),
            PointOutcome::Failed { .. } => None,
        }
    }

    pub fn max_real_part(&self) -> Option<f64> {
        match self.outcome {
            PointOutcome::Pair { re, real, .. } => Some(re.max(real)),
            PointOutcome::ThreeReal { eigenvalues } => {
                Some(eigenvalues.into_iter().fold(f64::NEG_INFINITY, f64::max))
            }
            PointOutcome::Failed { .. } => None,
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self.outcome, PointOutcome::Failed { .. })
    }
}

pub fn evaluate_point(params: &CardioParams, variant: &ControlVariant, mu: f64) -> SweepPoint {
    match classify_at_equilibrium(params, variant, mu) {
        Ok(spectrum) => SweepPoint::from_spectrum(mu, &spectrum),
        Err(e) => SweepPoint {
            mu,
            outcome: PointOutcome::Failed {
                reason: e.to_string(),
            },
        },
    }
}

/// `steps` equally spaced values from `mu_min` to `mu_max` inclusive.
pub fn mu_grid(mu_min: f64, mu_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(mu_min > 0.0 && mu_min < mu_max && mu_max.is_finite()) {
        return Err(ModelError::InvalidArgument(format!(
            "gain range must satisfy 0 < mu_min < mu_max, got [{mu_min}, {mu_max}]"
        )));
    }
    if steps < 2 {
        return Err(ModelError::InvalidArgument(format!(
            "a sweep needs at least 2 points, got {steps}"
        )));
    }
    let span = mu_max - mu_min;
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                mu_max
            } else {
                mu_min + span * i as f64 / last
            }
        })
        .collect())
}

/// Evaluates each gain in `grid` concurrently; per-point failures are
/// recorded in the returned points.
pub fn sweep_grid(params: &CardioParams, variant: &ControlVariant, grid: &[f64]) -> Vec<SweepPoint> {
    grid.par_iter()
        .map(|&mu| evaluate_point(params, variant, mu))
        .collect()
}

pub fn sweep_mu(
    params: &CardioParams,
    variant: &ControlVariant,
    mu_min: f64,
    mu_max: f64,
    steps: usize,
) -> Result<Vec<SweepPoint>> {
    let grid = mu_grid(mu_min, mu_max, steps)?;
    Ok(sweep_grid(params, variant, &grid))
}

/// Adjacent grid intervals over which the pair's real part goes from
/// negative to positive. Both endpoints must carry a conjugate pair.
pub fn sign_change_brackets(points: &[SweepPoint]) -> Vec<(f64, f64)> {
    points
        .windows(2)
        .filter_map(|w| match (w[0].pair_real_part(), w[1].pair_real_part()) {
            (Some(a), Some(b)) if a < 0.0 && b > 0.0 => Some((w[0].mu, w[1].mu)),
            _ => None,
        })
        .collect()
}

/// A located Hopf point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingResult {
    pub mu_star: f64,
    /// Imaginary part of the pair at `mu_star`, rad/min.
    pub omega_star: f64,
    pub period_s: f64,
    /// Real eigenvalue at `mu_star`, 1/min.
    pub real_eigenvalue: f64,
    pub bracket: (f64, f64),
    pub bisection_iterations: usize,
}

impl fmt::Display for CrossingResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mu_star={:.2} omega={:.1} rad/min period={:.1} s",
            self.mu_star, self.omega_star, self.period_s
        )
    }
}

fn pair_at(params: &CardioParams, variant: &ControlVariant, mu: f64) -> Result<(f64, f64)> {
    let spectrum = classify_at_equilibrium(params, variant, mu)?;
    spectrum
        .pair()
        .map(|p| (p.re, p.im))
        .ok_or_else(|| ModelError::InvalidBracket {
            lo: mu,
            hi: mu,
            reason: format!("spectrum at mu = {mu} has no conjugate pair"),
        })
}

/// Bisection on the pair's real part between `mu_lo` (stable) and `mu_hi`
/// (unstable) until the bracket is at most `tol` wide.
pub fn find_crossing(
    params: &CardioParams,
    variant: &ControlVariant,
    mu_lo: f64,
    mu_hi: f64,
    tol: f64,
) -> Result<CrossingResult> {
    if !(mu_lo > 0.0 && mu_lo < mu_hi && mu_hi.is_finite()) {
        return Err(ModelError::InvalidBracket {
            lo: mu_lo,
            hi: mu_hi,
            reason: "need 0 < mu_lo < mu_hi".into(),
        });
    }
    if !(tol > 0.0) {
        return Err(ModelError::InvalidArgument(format!(
            "bisection tolerance must be positive, got {tol}"
        )));
    }
    let bracket_err = |reason: String| ModelError::InvalidBracket {
        lo: mu_lo,
        hi: mu_hi,
        reason,
    };
    let (re_lo, _) = pair_at(params, variant, mu_lo).map_err(|e| bracket_err(e.to_string()))?;
    let (re_hi, _) = pair_at(params, variant, mu_hi).map_err(|e| bracket_err(e.to_string()))?;
    if !(re_lo < 0.0 && re_hi > 0.0) {
        return Err(bracket_err(format!(
            "no stable-to-unstable sign change (Re = {re_lo:e} at lo, {re_hi:e} at hi)"
        )));
    }

    let (mut lo, mut hi) = (mu_lo, mu_hi);
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (re, _) = pair_at(params, variant, mid).map_err(|e| bracket_err(e.to_string()))?;
        iterations += 1;
        if re < 0.0 {
            lo = mid;
        } else if re > 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
        }
    }
    let mu_star = 0.5 * (lo + hi);
    let spectrum = classify_at_equilibrium(params, variant, mu_star)?;
    let pair = spectrum
        .pair()
        .ok_or_else(|| bracket_err(format!("no conjugate pair at mu_star = {mu_star}")))?;
    Ok(CrossingResult {
        mu_star,
        omega_star: pair.im,
        period_s: period_seconds(pair.im),
        real_eigenvalue: spectrum.real_eigenvalue(),
        bracket: (mu_lo, mu_hi),
        bisection_iterations: iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum ScanVerdict {
    /// Every scanned point had all eigenvalues in the left half-plane.
    StableUpToMuMax {
        mu_max: f64,
        /// Largest pair real part seen, `None` if no point had a pair.
        max_pair_real_part: Option<f64>,
        /// Largest real part of any eigenvalue seen.
        max_real_part: f64,
        failed_points: usize,
    },
    CrossingFound(CrossingResult),
    /// An eigenvalue reached the right half-plane without a bracketable
    /// pair crossing (e.g. a real eigenvalue through zero).
    UnstableWithoutCrossing { mu: f64, max_real_part: f64 },
}

impl fmt::Display for ScanVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScanVerdict::StableUpToMuMax {
                mu_max,
                max_pair_real_part,
                max_real_part,
                failed_points,
            } => {
                write!(f, "stable-up-to-mu-max mu_max={mu_max} max_real_part={max_real_part:.6}")?;
                if let Some(re) = max_pair_real_part {
                    write!(f, " max_pair_real_part={re:.6}")?;
                }
                if *failed_points > 0 {
                    write!(f, " failed_points={failed_points}")?;
                }
                Ok(())
            }
            ScanVerdict::CrossingFound(c) => write!(f, "crossing-found {c}"),
            ScanVerdict::UnstableWithoutCrossing { mu, max_real_part } => write!(
                f,
                "unstable-without-crossing mu={mu} max_real_part={max_real_part:.6}"
            ),
        }
    }
}

/// Scans `(0, mu_max]` on [`DEFAULT_SCAN_POINTS`] points and refines the
/// first crossing.
pub fn stability_scan(
    params: &CardioParams,
    variant: &ControlVariant,
    mu_max: f64,
) -> Result<ScanVerdict> {
    stability_scan_with(params, variant, mu_max, DEFAULT_SCAN_POINTS, DEFAULT_TOL)
}

pub fn scan_grid(mu_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(mu_max > 0.0 && mu_max.is_finite()) || points == 0 {
        return Err(ModelError::InvalidArgument(format!(
            "scan needs mu_max > 0 and at least one point, got mu_max={mu_max}, points={points}"
        )));
    }
    Ok((1..=points)
        .map(|i| mu_max * i as f64 / points as f64)
        .collect())
}

pub fn stability_scan_with(
    params: &CardioParams,
    variant: &ControlVariant,
    mu_max: f64,
    points: usize,
    tol: f64,
) -> Result<ScanVerdict> {
    let grid = scan_grid(mu_max, points)?;
    let sweep = sweep_grid(params, variant, &grid);

    if let Some(&(lo, hi)) = sign_change_brackets(&sweep).first() {
        return find_crossing(params, variant, lo, hi, tol).map(ScanVerdict::CrossingFound);
    }

    if let Some(p) = sweep
        .iter()
        .find(|p| p.max_real_part().is_some_and(|r| r >= 0.0))
    {
        return Ok(ScanVerdict::UnstableWithoutCrossing {
            mu: p.mu,
            max_real_part: p.max_real_part().unwrap_or(f64::NAN),
        });
    }

    let max_pair_real_part = sweep
        .iter()
        .filter_map(SweepPoint::pair_real_part)
        .reduce(f64::max);
    let max_real_part = sweep
        .iter()
        .filter_map(SweepPoint::max_real_part)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ScanVerdict::StableUpToMuMax {
        mu_max,
        max_pair_real_part,
        max_real_part,
        failed_points: sweep.iter().filter(|p| p.is_failed()).count(),
    })
}

/// Two-parameter family along which the resting equilibrium is preserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryFamily {
    /// `d1 = 2·(V_D − d2)`, secondary parameter `d2` in litres.
    UnstressedVolume,
    /// `c1 = 2·(C_SV − c2)`, secondary parameter `c2` in litres/mmHg.
    VenousCompliance,
}

impl BoundaryFamily {
    pub fn short_name(self) -> &'static str {
        match self {
            BoundaryFamily::UnstressedVolume => "vd",
            BoundaryFamily::VenousCompliance => "csv",
        }
    }

    pub fn secondary_name(self) -> &'static str {
        match self {
            BoundaryFamily::UnstressedVolume => "d2",
            BoundaryFamily::VenousCompliance => "c2",
        }
    }

    /// Upper (exclusive) bound of the secondary parameter.
    pub fn resting_value(self, params: &CardioParams) -> f64 {
        match self {
            BoundaryFamily::UnstressedVolume => params.v_d_base,
            BoundaryFamily::VenousCompliance => params.c_sv_base,
        }
    }

    pub fn variant_for(self, secondary: f64, params: &CardioParams) -> Result<ControlVariant> {
        let rest = self.resting_value(params);
        if !(0.0..rest).contains(&secondary) {
            return Err(ModelError::InvalidArgument(format!(
                "{} = {secondary} must lie in [0, {rest})",
                self.secondary_name()
            )));
        }
        let primary = 2.0 * (rest - secondary);
        match self {
            BoundaryFamily::UnstressedVolume => ControlVariant::unstressed_volume(primary, secondary),
            BoundaryFamily::VenousCompliance => ControlVariant::venous_compliance(primary, secondary),
        }
    }
}

impl FromStr for BoundaryFamily {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vd" | "unstressed-volume" | "unstressed_volume" => Ok(BoundaryFamily::UnstressedVolume),
            "csv" | "venous-compliance" | "venous_compliance" => Ok(BoundaryFamily::VenousCompliance),
            other => Err(ModelError::InvalidArgument(format!(
                "unknown boundary family `{other}` (expected vd or csv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundaryOutcome {
    Crossing(CrossingResult),
    StableUpToMuMax,
    /// No crossing but unstable, or a numerical failure.
    Unresolved { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub secondary: f64,
    pub outcome: BoundaryOutcome,
}

impl BoundaryPoint {
    pub fn crossing(&self) -> Option<&CrossingResult> {
        match &self.outcome {
            BoundaryOutcome::Crossing(c) => Some(c),
            _ => None,
        }
    }
}

/// Crossing gain as a function of the secondary parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCurve {
    pub family: BoundaryFamily,
    pub mu_max: f64,
    pub points: Vec<BoundaryPoint>,
}

impl BoundaryCurve {
    /// `mu_star` strictly increases with the secondary parameter over the
    /// points where a crossing was found.
    pub fn is_strictly_increasing(&self) -> bool {
        let defined: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter_map(|p| p.crossing().map(|c| (p.secondary, c.mu_star)))
            .collect();
        defined
            .windows(2)
            .all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1)
    }
}

/// One stability scan per secondary value; the grid must be strictly
/// increasing.
pub fn boundary_curve(
    params: &CardioParams,
    family: BoundaryFamily,
    grid: &[f64],
    mu_max: f64,
) -> Result<BoundaryCurve> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ModelError::InvalidArgument(
            "boundary grid must be strictly increasing".into(),
        ));
    }
    let variants = grid
        .iter()
        .map(|&s| family.variant_for(s, params))
        .collect::<Result<Vec<_>>>()?;
    let points = grid
        .par_iter()
        .zip(variants.par_iter())
        .map(|(&secondary, variant)| {
            let outcome = match stability_scan(params, variant, mu_max) {
                Ok(ScanVerdict::CrossingFound(c)) => BoundaryOutcome::Crossing(c),
                Ok(ScanVerdict::StableUpToMuMax { .. }) => BoundaryOutcome::StableUpToMuMax,
                Ok(v @ ScanVerdict::UnstableWithoutCrossing { .. }) => BoundaryOutcome::Unresolved {
                    reason: v.to_string(),
                },
                Err(e) => BoundaryOutcome::Unresolved {
                    reason: e.to_string(),
                },
            };
            BoundaryPoint { secondary, outcome }
        })
        .collect();
    Ok(BoundaryCurve {
        family,
        mu_max,
        points,
    })
}
