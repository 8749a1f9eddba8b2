use serde::{Deserialize, Serialize};

use super::{
    aux_variable, check_input, check_outputs, reconstruct_phase, FllError, FllGains, FllOutputs,
};
use crate::signal::{park_transform, wrap_angle, ComplexSample};

/// State of the synchronous-frame estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrfFllState {
    /// Complex low-pass filter state `û_dq`.
    pub u_hat_dq: ComplexSample,
    /// Frequency integrator output `ω̂_b`.
    pub omega_b: f64,
    /// Generated angle `θ̂`, wrapped to (−π, π].
    pub theta_hat: f64,
    /// Last well-defined `θ̂_e`, reported while `|û_dq|` is degenerate.
    pub theta_e_hold: f64,
}

impl SrfFllState {
    pub fn initial(omega0: f64, theta0_hat: f64) -> Self {
        SrfFllState {
            u_hat_dq: ComplexSample::new(0.0, 0.0),
            omega_b: omega0,
            theta_hat: wrap_angle(theta0_hat),
            theta_e_hold: 0.0,
        }
    }

    fn is_finite(&self) -> bool {
        self.u_hat_dq.is_finite() && self.omega_b.is_finite() && self.theta_hat.is_finite()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    /// SRF-FLL₀: integrator only.
    Plain,
    /// Improved SRF-FLL: `e_q` feedthrough into ω̂.
    Feedthrough,
    /// Frequency integrator held.
    Frozen,
}

/// One step of SRF-FLL₀.
pub fn srf_fll0_step(
    state: &SrfFllState,
    gains: &FllGains,
    u_ab: ComplexSample,
    ts: f64,
) -> Result<(SrfFllState, FllOutputs), FllError> {
    gains.check_step(ts, false)?;
    step(state, gains, u_ab, ts, Mode::Plain)
}

/// One step of the improved SRF-FLL, `ω̂ = ω̂_b + (d/V)·e_q`.
pub fn srf_fll_step(
    state: &SrfFllState,
    gains: &FllGains,
    u_ab: ComplexSample,
    ts: f64,
) -> Result<(SrfFllState, FllOutputs), FllError> {
    gains.check_step(ts, true)?;
    step(state, gains, u_ab, ts, Mode::Feedthrough)
}

/// SRF-FLL₀ with the frequency update disabled: `ω̂_b` stays at its current
/// value while the filter and the angle keep running. Used to observe the
/// auxiliary variable under a fixed frequency error.
pub fn srf_frozen_step(
    state: &SrfFllState,
    gains: &FllGains,
    u_ab: ComplexSample,
    ts: f64,
) -> Result<(SrfFllState, FllOutputs), FllError> {
    gains.check_step(ts, false)?;
    step(state, gains, u_ab, ts, Mode::Frozen)
}

fn step(
    state: &SrfFllState,
    gains: &FllGains,
    u_ab: ComplexSample,
    ts: f64,
    mode: Mode,
) -> Result<(SrfFllState, FllOutputs), FllError> {
    check_input(u_ab)?;
    if !state.is_finite() {
        return Err(FllError::Diverged("state"));
    }

    let u_dq = park_transform(u_ab, state.theta_hat);
    let u_hat_dq = state.u_hat_dq;
    let e_q = u_dq.im - u_hat_dq.im;
    let x_a = aux_variable(u_dq, u_hat_dq);
    let omega_hat = match mode {
        Mode::Feedthrough => state.omega_b + gains.d / gains.v_nom * e_q,
        Mode::Plain | Mode::Frozen => state.omega_b,
    };

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

    let omega_b = match mode {
        Mode::Frozen => state.omega_b,
        Mode::Plain | Mode::Feedthrough => state.omega_b + ts * gains.freq_gain() * x_a.im,
    };
    let next = SrfFllState {
        u_hat_dq: u_hat_dq + (u_dq - u_hat_dq) * (ts * gains.k),
        omega_b,
        theta_hat: wrap_angle(state.theta_hat + omega_hat * ts),
        theta_e_hold: theta_e_hat,
    };

    let out = FllOutputs {
        omega_hat,
        omega_b: state.omega_b,
        theta_hat: state.theta_hat,
        u_dq,
        u_hat_dq,
        x_a,
        e_q,
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

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    const W60: f64 = 2.0 * PI * 60.0;

    #[test]
    fn locked_srf_fll0_only_advances_angle() {
        let gains = FllGains::default();
        let mut s = SrfFllState::initial(W60, 0.2);
        s.u_hat_dq = ComplexSample::new(1.0, 0.0);
        let u_ab = ComplexSample::from_polar(1.0, 0.2);
        let (n, out) = srf_fll0_step(&s, &gains, u_ab, 1e-4).unwrap();
        assert!(out.x_a.im.abs() < 1e-15);
        assert_eq!(n.omega_b, W60);
        assert!((n.u_hat_dq - s.u_hat_dq).norm() < 1e-15);
        assert!((n.theta_hat - (0.2 + W60 * 1e-4)).abs() < 1e-15);
        assert_eq!(out.omega_hat, out.omega_b);
    }

    #[test]
    fn lpf_single_euler_step() {
        let gains = FllGains::new(120.0 * PI, 60.0 * PI);
        let s = SrfFllState::initial(W60, 0.0);
        let (n, _) = srf_fll0_step(&s, &gains, ComplexSample::new(1.0, 0.0), 1e-4).unwrap();
        assert!((n.u_hat_dq.re - 0.037_699_111_843_077_52).abs() < 1e-15);
        assert_eq!(n.u_hat_dq.im, 0.0);
    }

    #[test]
    fn locked_srf_fll_has_no_feedthrough() {
        let gains = FllGains::default();
        let mut s = SrfFllState::initial(W60, 0.0);
        s.u_hat_dq = ComplexSample::new(1.0, 0.0);
        let (n, out) = srf_fll_step(&s, &gains, ComplexSample::new(1.0, 0.0), 1e-4).unwrap();
        assert_eq!(out.e_q, 0.0);
        assert_eq!(out.omega_hat, out.omega_b);
        assert_eq!(n.omega_b, W60);
    }

    #[test]
    fn phase_jump_feedthrough_spike() {
        let gains = FllGains::default();
        let mut s = SrfFllState::initial(W60, 0.0);
        s.u_hat_dq = ComplexSample::new(1.0, 0.0);
        let u_ab = ComplexSample::from_polar(1.0, 20f64.to_radians());
        let (_, out) = srf_fll_step(&s, &gains, u_ab, 1e-4).unwrap();
        let spike = out.omega_hat - W60;
        assert!((spike - 120.0 * PI * 20f64.to_radians().sin()).abs() < 1e-9);
        assert!((spike - 128.94).abs() < 0.01);
    }

    #[test]
    fn frozen_step_holds_frequency() {
        let gains = FllGains::default();
        let mut s = SrfFllState::initial(W60, 0.0);
        s.u_hat_dq = ComplexSample::new(0.5, 0.0);
        let (n, out) = srf_frozen_step(&s, &gains, ComplexSample::new(0.0, 1.0), 1e-4).unwrap();
        assert!(out.x_a.im.abs() > 0.1);
        assert_eq!(n.omega_b, W60);
    }

    #[test]
    fn degenerate_filter_holds_phase() {
        let gains = FllGains::default();
        let mut s = SrfFllState::initial(W60, 0.0);
        s.theta_e_hold = 0.25;
        let (n, out) = srf_fll_step(&s, &gains, ComplexSample::new(1.0, 0.0), 1e-4).unwrap();
        assert_eq!(out.theta_e_hat, 0.25);
        assert_eq!(out.theta_est, 0.25);
        assert_eq!(n.theta_e_hold, 0.25);
    }

    #[test]
    fn step_preconditions() {
        let gains = FllGains::new(100.0, 6000.0);
        let s = SrfFllState::initial(W60, 0.0);
        let u = ComplexSample::new(1.0, 0.0);
        assert!(srf_fll0_step(&s, &gains, u, 1e-4).is_ok());
        assert!(matches!(
            srf_fll_step(&s, &gains, u, 1e-4),
            Err(FllError::StepSize { .. })
        ));
        assert!(matches!(
            srf_fll0_step(&s, &gains, u, 0.0),
            Err(FllError::StepSize { .. })
        ));
        assert!(matches!(
            srf_fll0_step(&s, &gains, u, 0.01),
            Err(FllError::StepSize { .. })
        ));
        let nan = ComplexSample::new(f64::NAN, 0.0);
        assert_eq!(
            srf_fll0_step(&s, &gains, nan, 1e-4),
            Err(FllError::NonFiniteInput)
        );
        let mut bad = s;
        bad.omega_b = f64::INFINITY;
        assert!(matches!(
            srf_fll0_step(&bad, &gains, u, 1e-4),
            Err(FllError::Diverged(_))
        ));
    }
}
