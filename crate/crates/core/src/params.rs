//! Physical constants of the lumped circulation.
//!
//! Units: volumes in litres, pressures in mmHg, time in minutes. Compliances
//! are litres/mmHg, resistances mmHg·min/litre and the heart rate is in
//! beats/min.

use serde::Serialize;

use crate::error::{ModelError, Result};

/// Compliances, resistances, heart rate and volumes of the circulation.
///
/// The `_base` fields are the resting values of the parameters a baroreflex
/// loop can modulate; an active control law replaces one of them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CardioParams {
    /// Systemic arterial compliance.
    pub c_sa: f64,
    /// Pulmonary arterial compliance.
    pub c_pa: f64,
    /// Pulmonary venous compliance.
    pub c_pv: f64,
    /// Systemic venous compliance at rest.
    pub c_sv_base: f64,
    /// Left heart compliance.
    pub c_l: f64,
    /// Right heart compliance.
    pub c_r: f64,
    /// Systemic resistance at rest.
    pub r_s_base: f64,
    /// Pulmonary resistance.
    pub r_p: f64,
    /// Resting heart rate.
    pub f_base: f64,
    /// Total blood volume.
    pub v_o: f64,
    /// Systemic arterial volume at the critical pressure (Hill half-point).
    pub v_c: f64,
    /// Unstressed systemic venous volume at rest.
    pub v_d_base: f64,
}

impl Default for CardioParams {
    /// Typical adult values. `r_p` and `c_pa` are the exact rationals whose
    /// rounded forms are 1.79 and 0.00667.
    fn default() -> Self {
        CardioParams {
            c_sa: 0.01,
            c_pa: 1.0 / 150.0,
            c_pv: 0.08,
            c_sv_base: 0.75,
            c_l: 0.014,
            c_r: 0.035,
            r_s_base: 17.5,
            r_p: 25.0 / 14.0,
            f_base: 80.0,
            v_o: 5.0,
            v_c: 1.0,
            v_d_base: 2.0,
        }
    }
}

impl CardioParams {
    pub fn fields(&self) -> [(&'static str, f64); 12] {
        [
            ("c_sa", self.c_sa),
            ("c_pa", self.c_pa),
            ("c_pv", self.c_pv),
            ("c_sv", self.c_sv_base),
            ("c_l", self.c_l),
            ("c_r", self.c_r),
            ("r_s", self.r_s_base),
            ("r_p", self.r_p),
            ("f", self.f_base),
            ("v_o", self.v_o),
            ("v_c", self.v_c),
            ("v_d", self.v_d_base),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.fields() {
            if !value.is_finite() || value <= 0.0 {
                return Err(ModelError::param(
                    name,
                    format!("must be finite and strictly positive, got {value}"),
                ));
            }
        }
        if self.v_d_base >= self.v_o {
            return Err(ModelError::param(
                "v_d",
                format!(
                    "unstressed volume {} must be below total volume {}",
                    self.v_d_base, self.v_o
                ),
            ));
        }
        Ok(())
    }
}
