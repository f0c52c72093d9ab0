//! Three-volume circulation model with baroreflex feedback.
//!
//! The pulmonary arterial volume is eliminated through conservation of total
//! blood volume, leaving `v_sa`, `v_sv` and `v_pv` as dynamic states. Flows
//! follow from compliance relations `v = V_D + C·p`, resistive capillary beds
//! `q = Δp / R` and Frank-Starling cardiac outputs `q = F·C·p_vein`.

use serde::Serialize;

use crate::control::ControlVariant;
use crate::error::{ModelError, Result};
use crate::params::CardioParams;

/// Largest `f64` strictly below one. Activity saturates here.
pub const MAX_ACTIVITY: f64 = 1.0 - f64::EPSILON / 2.0;

/// Dynamic volumes in litres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeState {
    pub v_sa: f64,
    pub v_sv: f64,
    pub v_pv: f64,
}

impl VolumeState {
    /// Resting volumes of a typical adult.
    pub const RESTING: VolumeState = VolumeState {
        v_sa: 1.0,
        v_sv: 3.5,
        v_pv: 0.4,
    };

    pub const fn new(v_sa: f64, v_sv: f64, v_pv: f64) -> Self {
        VolumeState { v_sa, v_sv, v_pv }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        VolumeState::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.v_sa, self.v_sv, self.v_pv]
    }

    /// Pulmonary arterial volume recovered from conservation of `v_o`.
    pub fn v_pa(&self, params: &CardioParams) -> f64 {
        params.v_o - self.v_sa - self.v_sv - self.v_pv
    }

    /// `v_sa > 0` and `v_pa > 0`, the region where the vector field is
    /// defined and physically meaningful.
    pub fn is_admissible(&self, params: &CardioParams) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
            && self.v_sa > 0.0
            && self.v_pa(params) > 0.0
    }

    /// Full invariant: all volumes positive and their sum below `v_o`.
    pub fn validate(&self, params: &CardioParams) -> Result<()> {
        for (name, v) in [("v_sa", self.v_sa), ("v_sv", self.v_sv), ("v_pv", self.v_pv)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(ModelError::Domain(format!("{name} = {v} must be positive")));
            }
        }
        let v_pa = self.v_pa(params);
        if v_pa <= 0.0 {
            return Err(ModelError::Domain(format!(
                "reconstructed v_pa = {v_pa} must be positive"
            )));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &VolumeState) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_norm(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Pressures, flows and feedback quantities at one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    pub p_sa: f64,
    pub p_sv: f64,
    pub p_pa: f64,
    pub p_pv: f64,
    pub v_pa: f64,
    pub q_l: f64,
    pub q_r: f64,
    pub q_s: f64,
    pub q_p: f64,
    pub b: f64,
    pub k_l: f64,
    pub k_r: f64,
}

/// Baroreceptor activity `v^n / (v_c^n + v^n)` with Hill exponent `n = 4μ`,
/// so that the slope at `v = v_c` is `μ / v_c`.
///
/// Evaluated as a logistic in `4μ·ln(v / v_c)`, which cannot overflow. The
/// result saturates to 0 far below `v_c` and to [`MAX_ACTIVITY`] far above.
pub fn hill_activity(v_sa: f64, v_c: f64, mu: f64) -> Result<f64> {
    if !(v_sa > 0.0) || !v_sa.is_finite() {
        return Err(ModelError::Domain(format!(
            "arterial volume {v_sa} must be positive"
        )));
    }
    if !(v_c > 0.0) || !v_c.is_finite() {
        return Err(ModelError::Domain(format!(
            "critical volume {v_c} must be positive"
        )));
    }
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(ModelError::Domain(format!("gain {mu} must be positive")));
    }
    let x = 4.0 * mu * (v_sa / v_c).ln();
    let b = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    Ok(b.min(MAX_ACTIVITY))
}

/// Time derivative of the three volumes, litres/min.
///
/// The controlled parameter is replaced by the law's value at the current
/// baroreceptor activity; the open-loop model ignores `mu`.
pub fn rhs(
    params: &CardioParams,
    variant: &ControlVariant,
    mu: f64,
    state: &VolumeState,
) -> Result<VolumeState> {
    let flows = flows(params, variant, mu, state)?;
    Ok(VolumeState {
        v_sa: flows.q_l - flows.q_s,
        v_sv: flows.q_s - flows.q_r,
        v_pv: flows.q_p - flows.q_l,
    })
}

/// Pressures and flows at a state. Fails if `v_pa` is not positive.
pub fn observables(
    params: &CardioParams,
    variant: &ControlVariant,
    mu: f64,
    state: &VolumeState,
) -> Result<Observables> {
    let obs = flows(params, variant, mu, state)?;
    if obs.v_pa <= 0.0 {
        return Err(ModelError::Domain(format!(
            "reconstructed v_pa = {} is not positive",
            obs.v_pa
        )));
    }
    Ok(obs)
}

fn flows(
    params: &CardioParams,
    variant: &ControlVariant,
    mu: f64,
    state: &VolumeState,
) -> Result<Observables> {
    // The open-loop model tolerates any gain and reports b = 0 when the
    // activity is undefined.
    let b = if variant.is_active() || (mu > 0.0 && state.v_sa > 0.0) {
        hill_activity(state.v_sa, params.v_c, mu)?
    } else {
        0.0
    };
    let eff = variant.effective(b, params);
    if !(eff.c_sv > 0.0) || !(eff.r_s > 0.0) {
        return Err(ModelError::Domain(format!(
            "controlled parameters left their domain (C_SV = {}, R_S = {}) at activity {b}",
            eff.c_sv, eff.r_s
        )));
    }

    let v_pa = state.v_pa(params);
    let p_sa = state.v_sa / params.c_sa;
    let p_sv = (state.v_sv - eff.v_d) / eff.c_sv;
    let p_pa = v_pa / params.c_pa;
    let p_pv = state.v_pv / params.c_pv;

    let k_l = eff.f * params.c_l;
    let k_r = eff.f * params.c_r;

    Ok(Observables {
        p_sa,
        p_sv,
        p_pa,
        p_pv,
        v_pa,
        q_l: k_l * p_pv,
        q_r: k_r * p_sv,
        q_s: (p_sa - p_sv) / eff.r_s,
        q_p: (p_pa - p_pv) / params.r_p,
        b,
        k_l,
        k_r,
    })
}
