//! Steady states by damped Newton iteration.

use serde::Serialize;

use crate::control::ControlVariant;
use crate::error::{ModelError, Result};
use crate::model::{rhs, VolumeState};
use crate::params::CardioParams;
use crate::spectral::jacobian_fd;

/// Max-norm of the vector field accepted as a steady state, litres/min.
pub const RESIDUAL_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 100;
pub const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumResult {
    pub state: VolumeState,
    /// Max-norm of the vector field at `state`.
    pub residual_norm: f64,
    /// Newton steps taken; zero when the guess already satisfied the tolerance.
    pub iterations: usize,
}

fn residual(
    params: &CardioParams,
    variant: &ControlVariant,
    mu: f64,
    state: &VolumeState,
) -> Option<f64> {
    if !state.is_admissible(params) {
        return None;
    }
    rhs(params, variant, mu, state)
        .ok()
        .map(|f| f.max_norm())
        .filter(|r| r.is_finite())
}

/// Newton's method with step halving.
///
/// Each step is halved (at most [`MAX_HALVINGS`] times) until the trial
/// point has `v_sa > 0`, `v_pa > 0` and a smaller residual than the current
/// iterate.
pub fn solve_equilibrium(
    params: &CardioParams,
    variant: &ControlVariant,
    mu: f64,
    guess: VolumeState,
) -> Result<EquilibriumResult> {
    if !guess.is_admissible(params) {
        return Err(ModelError::Domain(format!(
            "initial guess {guess:?} is outside the admissible domain"
        )));
    }
    let mut x = guess;
    let mut f = rhs(params, variant, mu, &x)?;
    let mut r = f.max_norm();

    for iteration in 0..=MAX_ITERATIONS {
        if r <= RESIDUAL_TOL {
            return Ok(EquilibriumResult {
                state: x,
                residual_norm: r,
                iterations: iteration,
            });
        }
        if iteration == MAX_ITERATIONS {
            break;
        }

        let jac = jacobian_fd(params, variant, mu, &x)?;
        let step = jac.solve(f.to_array().map(|v| -v))?;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let base = x.to_array();
            let trial = VolumeState::from_array([0, 1, 2].map(|i| base[i] + t * step[i]));
            if let Some(rt) = residual(params, variant, mu, &trial) {
                if rt < r {
                    accepted = Some(trial);
                    break;
                }
            }
            t *= 0.5;
        }
        let Some(next) = accepted else {
            return Err(ModelError::DampingFailed {
                iteration,
                residual: r,
            });
        };
        x = next;
        f = rhs(params, variant, mu, &x)?;
        r = f.max_norm();
    }
    Err(ModelError::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual: r,
    })
}
