use serde::{Deserialize, Serialize};

use super::{
    aux_variable, check_input, check_outputs, reconstruct_phase, FllError, FllGains, FllOutputs,
};
use crate::signal::{park_transform, wrap_angle, ComplexSample};

/// State of the conventional αβ-frame FLL.
///
/// `theta_hat` integrates `ω̂` only to express the outputs in a dq frame; it
/// does not feed back into the loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvFllState {
    /// ROGI state `û_αβ`.
    pub u_hat_ab: ComplexSample,
    pub omega_hat: f64,
    pub theta_hat: f64,
    pub theta_e_hold: f64,
}

impl ConvFllState {
    pub fn initial(omega0: f64, theta0_hat: f64) -> Self {
        ConvFllState {
            u_hat_ab: ComplexSample::new(0.0, 0.0),
            omega_hat: omega0,
            theta_hat: wrap_angle(theta0_hat),
            theta_e_hold: 0.0,
        }
    }

    fn is_finite(&self) -> bool {
        self.u_hat_ab.is_finite() && self.omega_hat.is_finite() && self.theta_hat.is_finite()
    }
}

/// One step of the conventional ROGI-FLL.
///
/// The ROGI `dû/dt = jω̂·û + k(u − û)` advances its rotation term exactly,
/// `û ← e^(jω̂Ts)·û + k·Ts·(u − û)`, and the frequency law
/// `dω̂/dt = (k·d/V²)·Im(u·û*)` by forward Euler.
pub fn conv_fll_step(
    state: &ConvFllState,
    gains: &FllGains,
    u_ab: ComplexSample,
    ts: f64,
) -> Result<(ConvFllState, FllOutputs), FllError> {
    gains.check_step(ts, false)?;
    check_input(u_ab)?;
    if !state.is_finite() {
        return Err(FllError::Diverged("state"));
    }

    let u_hat_ab = state.u_hat_ab;
    let x_a = aux_variable(u_ab, u_hat_ab);
    let u_dq = park_transform(u_ab, state.theta_hat);
    let u_hat_dq = park_transform(u_hat_ab, state.theta_hat);

    let (theta_e_hat, theta_est, u_dq_est) =
        match reconstruct_phase(u_hat_dq, state.theta_hat, u_ab, gains.eps_mag()) {
            Some(p) => (p.theta_e_hat, p.theta_est, p.u_dq_est),
            None => {
                let theta_est = wrap_angle(state.theta_hat + state.theta_e_hold);
                (
                    state.theta_e_hold,
                    theta_est,
                    park_transform(u_ab, theta_est),
                )
            }
        };

    let rotation = ComplexSample::from_polar(1.0, state.omega_hat * ts);
    let next = ConvFllState {
        u_hat_ab: rotation * u_hat_ab + (u_ab - u_hat_ab) * (ts * gains.k),
        omega_hat: state.omega_hat + ts * gains.freq_gain() * x_a.im,
        theta_hat: wrap_angle(state.theta_hat + state.omega_hat * ts),
        theta_e_hold: theta_e_hat,
    };

    let out = FllOutputs {
        omega_hat: state.omega_hat,
        omega_b: state.omega_hat,
        theta_hat: state.theta_hat,
        u_dq,
        u_hat_dq,
        x_a,
        e_q: u_dq.im - u_hat_dq.im,
        theta_e_hat,
        theta_est,
        u_dq_est,
    };
    check_outputs(&out)?;
    if !next.is_finite() {
        return Err(FllError::Diverged("state"));
    }
    Ok((next, out))
}
