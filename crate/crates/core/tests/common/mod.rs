//! Hand-derived reference systems shared by the integration tests.
//!
//! Each reference configuration comes with its vector field written out in
//! closed rational form and its Jacobian at the resting state. These are
//! independent of the library's compliance/flow assembly.

#![allow(dead_code)]

use mayerwave::{ControlVariant, VolumeState};

pub type Field = fn(f64, [f64; 3]) -> [f64; 3];

pub struct Reference {
    pub label: &'static str,
    pub variant: ControlVariant,
    /// Approximate crossing gain quoted for this configuration.
    pub quoted_mu_star: f64,
    pub field: Field,
    /// Jacobian at (1.0, 3.5, 0.4) as a function of the gain.
    pub jacobian: fn(f64) -> [[f64; 3]; 3],
    /// `(a, b)` with entry (1,1) = −40/7 − a·μ and entry (2,1) = 40/7 + b·μ.
    pub gain_slopes: (f64, f64),
}

pub const REST: VolumeState = VolumeState::RESTING;

fn y(v_sa: f64, mu: f64) -> f64 {
    v_sa.powf(4.0 * mu)
}

fn pv_row(x: [f64; 3]) -> f64 {
    420.0 - 84.0 * x[0] - 84.0 * x[1] - 105.0 * x[2]
}

fn d40(mu: f64, x: [f64; 3]) -> [f64; 3] {
    let y = y(x[0], mu);
    [
        -40.0 * x[0] / 7.0 + 8.0 * x[1] / 105.0 + 14.0 * x[2] - 32.0 * y / (105.0 * (1.0 + y)),
        40.0 * x[0] / 7.0 - 80.0 * x[1] / 21.0 + 320.0 * y / (21.0 * (1.0 + y)),
        pv_row(x),
    ]
}

fn d305(mu: f64, x: [f64; 3]) -> [f64; 3] {
    let y = y(x[0], mu);
    [
        -40.0 * x[0] / 7.0 + 8.0 * x[1] / 105.0 + 14.0 * x[2] - (28.0 * y + 4.0) / (105.0 * (1.0 + y)),
        40.0 * x[0] / 7.0 - 80.0 * x[1] / 21.0 + 40.0 * (1.0 + 7.0 * y) / (21.0 * (1.0 + y)),
        pv_row(x),
    ]
}

fn d21(mu: f64, x: [f64; 3]) -> [f64; 3] {
    let y = y(x[0], mu);
    [
        -40.0 * x[0] / 7.0 + 8.0 * x[1] / 105.0 + 14.0 * x[2] - (24.0 * y + 8.0) / (105.0 * (1.0 + y)),
        40.0 * x[0] / 7.0 - 80.0 * x[1] / 21.0 + 80.0 * (1.0 + 3.0 * y) / (21.0 * (1.0 + y)),
        pv_row(x),
    ]
}

fn d115(mu: f64, x: [f64; 3]) -> [f64; 3] {
    let y = y(x[0], mu);
    [
        -40.0 * x[0] / 7.0 + 8.0 * x[1] / 105.0 + 14.0 * x[2] - (20.0 * y + 12.0) / (105.0 * (1.0 + y)),
        40.0 * x[0] / 7.0 - 80.0 * x[1] / 21.0 + 40.0 * (3.0 + 5.0 * y) / (21.0 * (1.0 + y)),
        pv_row(x),
    ]
}

fn c150(mu: f64, x: [f64; 3]) -> [f64; 3] {
    let y = y(x[0], mu);
    let r = (1.0 + y) / y;
    [
        -40.0 * x[0] / 7.0 + 4.0 * x[1] * r / 105.0 + 14.0 * x[2] - 8.0 * r / 105.0,
        40.0 * x[0] / 7.0 - 40.0 * x[1] * r / 21.0 + 80.0 * r / 21.0,
        pv_row(x),
    ]
}

fn c1025(mu: f64, x: [f64; 3]) -> [f64; 3] {
    let y = y(x[0], mu);
    let r = (1.0 + y) / (1.0 + 5.0 * y);
    [
        -40.0 * x[0] / 7.0 + 8.0 * x[1] * r / 35.0 + 14.0 * x[2] - 16.0 * r / 35.0,
        40.0 * x[0] / 7.0 - 80.0 * x[1] * r / 7.0 + 160.0 * r / 7.0,
        pv_row(x),
    ]
}

fn c0505(mu: f64, x: [f64; 3]) -> [f64; 3] {
    let y = y(x[0], mu);
    let r = (1.0 + y) / (1.0 + 2.0 * y);
    [
        -40.0 * x[0] / 7.0 + 4.0 * x[1] * r / 35.0 + 14.0 * x[2] - 8.0 * r / 35.0,
        40.0 * x[0] / 7.0 - 40.0 * x[1] * r / 7.0 + 80.0 * r / 7.0,
        pv_row(x),
    ]
}

pub fn jacobian_with(a: f64, b: f64, mu: f64) -> [[f64; 3]; 3] {
    [
        [-40.0 / 7.0 - a * mu, 8.0 / 105.0, 14.0],
        [40.0 / 7.0 + b * mu, -80.0 / 21.0, 0.0],
        [-84.0, -84.0, -105.0],
    ]
}

macro_rules! jac {
    ($a:expr, $b:expr) => {
        |mu| jacobian_with($a, $b, mu)
    };
}

/// Entry (2,1) slope as typeset for the first venous-compliance case. The
/// system itself differentiates to 80/7, the same as `d1=3 d2=0.5`.
pub const TYPESET_C150_SLOPE: f64 = 80.0 / 21.0;

pub fn references() -> Vec<Reference> {
    vec![
        Reference {
            label: "d1=4 d2=0",
            variant: ControlVariant::unstressed_volume(4.0, 0.0).unwrap(),
            quoted_mu_star: 18.0,
            field: d40,
            jacobian: jac!(32.0 / 105.0, 320.0 / 21.0),
            gain_slopes: (32.0 / 105.0, 320.0 / 21.0),
        },
        Reference {
            label: "d1=3 d2=0.5",
            variant: ControlVariant::unstressed_volume(3.0, 0.5).unwrap(),
            quoted_mu_star: 24.0,
            field: d305,
            jacobian: jac!(8.0 / 35.0, 80.0 / 7.0),
            gain_slopes: (8.0 / 35.0, 80.0 / 7.0),
        },
        Reference {
            label: "d1=2 d2=1",
            variant: ControlVariant::unstressed_volume(2.0, 1.0).unwrap(),
            quoted_mu_star: 36.0,
            field: d21,
            jacobian: jac!(16.0 / 105.0, 160.0 / 21.0),
            gain_slopes: (16.0 / 105.0, 160.0 / 21.0),
        },
        Reference {
            label: "d1=1 d2=1.5",
            variant: ControlVariant::unstressed_volume(1.0, 1.5).unwrap(),
            quoted_mu_star: 71.0,
            field: d115,
            jacobian: jac!(8.0 / 105.0, 80.0 / 21.0),
            gain_slopes: (8.0 / 105.0, 80.0 / 21.0),
        },
        Reference {
            label: "c1=1.5 c2=0",
            variant: ControlVariant::venous_compliance(1.5, 0.0).unwrap(),
            quoted_mu_star: 24.0,
            field: c150,
            jacobian: jac!(8.0 / 35.0, 80.0 / 7.0),
            gain_slopes: (8.0 / 35.0, 80.0 / 7.0),
        },
        Reference {
            label: "c1=1 c2=0.25",
            variant: ControlVariant::venous_compliance(1.0, 0.25).unwrap(),
            quoted_mu_star: 36.0,
            field: c1025,
            jacobian: jac!(16.0 / 105.0, 160.0 / 21.0),
            gain_slopes: (16.0 / 105.0, 160.0 / 21.0),
        },
        Reference {
            label: "c1=0.5 c2=0.5",
            variant: ControlVariant::venous_compliance(0.5, 0.5).unwrap(),
            quoted_mu_star: 71.0,
            field: c0505,
            jacobian: jac!(8.0 / 105.0, 80.0 / 21.0),
            gain_slopes: (8.0 / 105.0, 80.0 / 21.0),
        },
    ]
}

/// Closed-form roots of the characteristic cubic for the unstressed-volume
/// references, in Cardano form `λ = S − V + shift` with `V = q/S`.
///
/// Returns `(real_root, pair_re, pair_im)`, or `None` when the radicand is
/// negative (three real roots).
pub struct CardanoForm {
    pub u_poly: [f64; 4],
    pub radical_scale: f64,
    pub radicand: [f64; 5],
    pub v_poly: [f64; 3],
    pub shift_slope: f64,
}

impl CardanoForm {
    pub fn roots(&self, mu: f64) -> Option<(f64, f64, f64)> {
        let poly = |c: &[f64]| c.iter().rev().fold(0.0, |acc, k| acc * mu + k);
        let rad = poly(&self.radicand);
        if rad < 0.0 {
            return None;
        }
        let u = poly(&self.u_poly) + self.radical_scale * rad.sqrt();
        let s = u.cbrt();
        let v = poly(&self.v_poly) / s;
        let shift = -2405.0 / 63.0 - self.shift_slope * mu;
        let half_sqrt3 = 0.5 * 3f64.sqrt();
        Some((s - v + shift, -0.5 * s + 0.5 * v + shift, half_sqrt3 * (s + v)))
    }
}

pub fn cardano_forms() -> [CardanoForm; 4] {
    const U0: f64 = -5103633725.0 / 250047.0;
    const V0: f64 = -2876953.0 / 3969.0;
    [
        CardanoForm {
            u_poly: [U0, -3618065648.0 / 416745.0, 184832.0 / 416745.0, -32768.0 / 31255875.0],
            radical_scale: 8.0 / 2835.0,
            radicand: [4488999170550.0, 45082290017400.0, 9458754238932.0, -942218496.0, 2248704.0],
            v_poly: [V0, 11552.0 / 3969.0, -1024.0 / 99225.0],
            shift_slope: 32.0 / 315.0,
        },
        CardanoForm {
            u_poly: [U0, -904516412.0 / 138915.0, 11552.0 / 46305.0, -512.0 / 1157625.0],
            radical_scale: 4.0 / 2835.0,
            radicand: [17955996682200.0, 135246870052200.0, 21282197037597.0, -1589993712.0, 2846016.0],
            v_poly: [V0, 2888.0 / 1323.0, -64.0 / 11025.0],
            shift_slope: 8.0 / 105.0,
        },
        CardanoForm {
            u_poly: [U0, -1809032824.0 / 416745.0, 46208.0 / 416745.0, -4096.0 / 31255875.0],
            radical_scale: 8.0 / 2835.0,
            radicand: [4488999170550.0, 22541145008700.0, 2364688559733.0, -117777312.0, 140544.0],
            v_poly: [V0, 5776.0 / 3969.0, -256.0 / 99225.0],
            shift_slope: 16.0 / 315.0,
        },
        CardanoForm {
            u_poly: [U0, -904516412.0 / 416745.0, 11552.0 / 416745.0, -512.0 / 31255875.0],
            radical_scale: 4.0 / 2835.0,
            radicand: [17955996682200.0, 45082290017400.0, 2364688559733.0, -58888656.0, 35136.0],
            v_poly: [V0, 2888.0 / 3969.0, -64.0 / 99225.0],
            shift_slope: 8.0 / 315.0,
        },
    ]
}

/// Resting state shifted by 1% in `v_sa`.
pub fn perturbed_rest() -> VolumeState {
    VolumeState::new(1.01, 3.5, 0.4)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
