//! Frequency-locked loop estimators.
//!
//! Three estimators share one tuning set ([`FllGains`]) and one output record
//! ([`FllOutputs`]):
//!
//! * the conventional ROGI-based FLL working in the stationary αβ frame,
//! * `SrfFll0`, its synchronous-frame image built on a complex low-pass filter,
//! * `SrfFll`, which adds the q-axis estimation error `e_q` as a proportional
//!   path into the frequency estimate. The extra path realizes the loop filter
//!   `(d/V)·s/(s+k)` without any additional state.
//!
//! Every estimator is a fixed-step state machine. The pure step functions take
//! a state by reference and return the next state; [`Fll`] wraps them behind
//! the [`Estimator`] trait for the simulation harness.

mod conventional;
mod srf;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::{park_transform, wrap_angle, ComplexSample};

pub use conventional::{conv_fll_step, ConvFllState};
pub use srf::{srf_fll0_step, srf_fll_step, srf_frozen_step, SrfFllState};

/// Nominal grid frequency used to initialize the frequency integrator.
pub const NOMINAL_FREQUENCY_HZ: f64 = 60.0;

/// Largest admissible `Ts·k` (and `Ts·d` for the improved SRF-FLL).
pub const MAX_GAIN_STEP_PRODUCT: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FllError {
    #[error("invalid gains: {0}")]
    InvalidGains(String),
    #[error("step size {ts} s is not admissible: {reason}")]
    StepSize { ts: f64, reason: String },
    #[error("non-finite input sample")]
    NonFiniteInput,
    #[error("estimator state diverged ({0} is not finite)")]
    Diverged(&'static str),
}

/// Tuning shared by all estimators.
///
/// The frequency-loop gain `D = k·d/V²` is derived from `k`, `d` and `v_nom`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FllGains {
    /// Low-pass (or ROGI) gain, rad/s.
    pub k: f64,
    /// Frequency-estimation design gain, rad/s.
    pub d: f64,
    /// Nominal amplitude in per-unit.
    #[serde(default = "unit")]
    pub v_nom: f64,
    /// Initial phase of the generated angle, rad.
    #[serde(rename = "theta0_hat_rad", default)]
    pub theta0_hat: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for FllGains {
    fn default() -> Self {
        FllGains::new(120.0 * PI, 120.0 * PI)
    }
}

impl FllGains {
    pub fn new(k: f64, d: f64) -> Self {
        FllGains {
            k,
            d,
            v_nom: 1.0,
            theta0_hat: 0.0,
        }
    }

    pub fn with_theta0_hat(mut self, theta0_hat: f64) -> Self {
        self.theta0_hat = theta0_hat;
        self
    }

    /// Frequency-loop gain `D = k·d/V²`.
    pub fn freq_gain(&self) -> f64 {
        self.k * self.d / (self.v_nom * self.v_nom)
    }

    /// Magnitude below which the phase of `û_dq` is considered undefined.
    pub fn eps_mag(&self) -> f64 {
        1e-6 * self.v_nom
    }

    pub fn validate(&self) -> Result<(), FllError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.k) {
            return Err(FllError::InvalidGains(format!(
                "k must be positive, got {}",
                self.k
            )));
        }
        if !ok(self.d) {
            return Err(FllError::InvalidGains(format!(
                "d must be positive, got {}",
                self.d
            )));
        }
        if !ok(self.v_nom) {
            return Err(FllError::InvalidGains(format!(
                "v_nom must be positive, got {}",
                self.v_nom
            )));
        }
        if !self.theta0_hat.is_finite() {
            return Err(FllError::InvalidGains("theta0_hat is not finite".into()));
        }
        Ok(())
    }

    fn check_step(&self, ts: f64, include_d: bool) -> Result<(), FllError> {
        self.validate()?;
        if !(ts.is_finite() && ts > 0.0) {
            return Err(FllError::StepSize {
                ts,
                reason: "must be positive".into(),
            });
        }
        if ts * self.k >= MAX_GAIN_STEP_PRODUCT {
            return Err(FllError::StepSize {
                ts,
                reason: format!("Ts·k = {} ≥ {}", ts * self.k, MAX_GAIN_STEP_PRODUCT),
            });
        }
        if include_d && ts * self.d >= MAX_GAIN_STEP_PRODUCT {
            return Err(FllError::StepSize {
                ts,
                reason: format!("Ts·d = {} ≥ {}", ts * self.d, MAX_GAIN_STEP_PRODUCT),
            });
        }
        Ok(())
    }
}

/// Everything an estimator reports at one sample.
///
/// All values correspond to the sample being processed: they are computed from
/// the state before the update triggered by that sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FllOutputs {
    pub omega_hat: f64,
    /// Integrator output; equals `omega_hat` for the conventional FLL and SRF-FLL₀.
    pub omega_b: f64,
    pub theta_hat: f64,
    pub u_dq: ComplexSample,
    pub u_hat_dq: ComplexSample,
    pub x_a: ComplexSample,
    pub e_q: f64,
    pub theta_e_hat: f64,
    pub theta_est: f64,
    pub u_dq_est: ComplexSample,
}

impl FllOutputs {
    fn is_finite(&self) -> bool {
        [
            self.omega_hat,
            self.omega_b,
            self.theta_hat,
            self.e_q,
            self.theta_e_hat,
            self.theta_est,
        ]
        .iter()
        .all(|x| x.is_finite())
            && [self.u_dq, self.u_hat_dq, self.x_a, self.u_dq_est]
                .iter()
                .all(|z| z.is_finite())
    }
}

/// `x_a = u_dq · conj(û_dq)`.
pub fn aux_variable(u_dq: ComplexSample, u_hat_dq: ComplexSample) -> ComplexSample {
    u_dq * u_hat_dq.conj()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEstimate {
    pub theta_e_hat: f64,
    pub theta_est: f64,
    pub u_dq_est: ComplexSample,
}

/// Phase reconstruction from the filtered dq voltage.
///
/// Returns `None` when `|û_dq|` is too small for its angle to mean anything.
pub fn phase_outputs(
    state: &SrfFllState,
    gains: &FllGains,
    u_ab: ComplexSample,
) -> Option<PhaseEstimate> {
    reconstruct_phase(state.u_hat_dq, state.theta_hat, u_ab, gains.eps_mag())
}

pub(crate) fn reconstruct_phase(
    u_hat_dq: ComplexSample,
    theta_hat: f64,
    u_ab: ComplexSample,
    eps_mag: f64,
) -> Option<PhaseEstimate> {
    if !(u_hat_dq.norm() > eps_mag) {
        return None;
    }
    let theta_e_hat = u_hat_dq.im.atan2(u_hat_dq.re);
    let theta_est = wrap_angle(theta_hat + theta_e_hat);
    Some(PhaseEstimate {
        theta_e_hat,
        theta_est,
        u_dq_est: park_transform(u_ab, theta_est),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Conventional,
    #[serde(rename = "srf_fll0")]
    SrfFll0,
    SrfFll,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [
        EstimatorKind::Conventional,
        EstimatorKind::SrfFll0,
        EstimatorKind::SrfFll,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Conventional => "conventional",
            EstimatorKind::SrfFll0 => "srf_fll0",
            EstimatorKind::SrfFll => "srf_fll",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown estimator '{s}'"))
    }
}

/// A steppable estimator instance.
pub trait Estimator: Send {
    fn step(&mut self, u_ab: ComplexSample, ts: f64) -> Result<FllOutputs, FllError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum FllState {
    Conventional(ConvFllState),
    Srf(SrfFllState),
}

/// One of the three estimators together with its gains and state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fll {
    kind: EstimatorKind,
    gains: FllGains,
    state: FllState,
}

impl Fll {
    /// Starts from `û = 0`, the nominal frequency and `θ̂ = θ̂₀`.
    pub fn new(kind: EstimatorKind, gains: FllGains) -> Result<Self, FllError> {
        Self::with_initial_frequency(kind, gains, 2.0 * PI * NOMINAL_FREQUENCY_HZ)
    }

    pub fn with_initial_frequency(
        kind: EstimatorKind,
        gains: FllGains,
        omega0: f64,
    ) -> Result<Self, FllError> {
        gains.validate()?;
        let state = match kind {
            EstimatorKind::Conventional => {
                FllState::Conventional(ConvFllState::initial(omega0, gains.theta0_hat))
            }
            EstimatorKind::SrfFll0 | EstimatorKind::SrfFll => {
                FllState::Srf(SrfFllState::initial(omega0, gains.theta0_hat))
            }
        };
        Ok(Fll { kind, gains, state })
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    pub fn gains(&self) -> &FllGains {
        &self.gains
    }
}

impl Estimator for Fll {
    fn step(&mut self, u_ab: ComplexSample, ts: f64) -> Result<FllOutputs, FllError> {
        let (next, out) = match (&self.state, self.kind) {
            (FllState::Conventional(s), _) => {
                let (n, o) = conv_fll_step(s, &self.gains, u_ab, ts)?;
                (FllState::Conventional(n), o)
            }
            (FllState::Srf(s), EstimatorKind::SrfFll0) => {
                let (n, o) = srf_fll0_step(s, &self.gains, u_ab, ts)?;
                (FllState::Srf(n), o)
            }
            (FllState::Srf(s), _) => {
                let (n, o) = srf_fll_step(s, &self.gains, u_ab, ts)?;
                (FllState::Srf(n), o)
            }
        };
        // A frequency estimate past Nyquist no longer describes a sampled signal.
        if out.omega_hat.abs().max(out.omega_b.abs()) * ts > PI {
            return Err(FllError::Diverged("frequency estimate beyond Nyquist"));
        }
        self.state = next;
        Ok(out)
    }
}

fn check_input(u_ab: ComplexSample) -> Result<(), FllError> {
    if u_ab.is_finite() {
        Ok(())
    } else {
        Err(FllError::NonFiniteInput)
    }
}

fn check_outputs(out: &FllOutputs) -> Result<(), FllError> {
    if out.is_finite() {
        Ok(())
    } else {
        Err(FllError::Diverged("output"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aux_variable_examples() {
        let one = ComplexSample::new(1.0, 0.0);
        assert_eq!(aux_variable(one, one), one);
        assert_eq!(aux_variable(ComplexSample::i(), one), ComplexSample::i());
        let x = aux_variable(
            ComplexSample::from_polar(1.0, 0.1),
            ComplexSample::from_polar(1.0, 0.03),
        );
        assert!((x.im - 0.069_942_847_337_71).abs() < 1e-12);
        assert!((x - ComplexSample::from_polar(1.0, 0.07)).norm() < 1e-15);
    }

    #[test]
    fn phase_outputs_examples() {
        let gains = FllGains::default();
        let mut state = SrfFllState::initial(2.0 * PI * 60.0, 0.3);
        state.u_hat_dq = ComplexSample::new(1.0, 0.0);
        let u_ab = ComplexSample::from_polar(1.0, 0.3);
        let p = phase_outputs(&state, &gains, u_ab).unwrap();
        assert_eq!(p.theta_e_hat, 0.0);
        assert_eq!(p.theta_est, 0.3);
        assert!((p.u_dq_est - ComplexSample::new(1.0, 0.0)).norm() < 1e-15);

        state.u_hat_dq = ComplexSample::new(1.0, 1.0);
        let p = phase_outputs(&state, &gains, u_ab).unwrap();
        assert!((p.theta_e_hat - PI / 4.0).abs() < 1e-15);

        // Left half plane: four-quadrant angle, wrapped estimate.
        state.theta_hat = 3.0;
        state.u_hat_dq = ComplexSample::new(-1.0, 0.5);
        let p = phase_outputs(&state, &gains, u_ab).unwrap();
        assert!((p.theta_e_hat - 0.5f64.atan2(-1.0)).abs() < 1e-15);
        assert!(p.theta_est > -PI && p.theta_est <= PI);

        state.u_hat_dq = ComplexSample::new(1e-7, 0.0);
        assert!(phase_outputs(&state, &gains, u_ab).is_none());
    }

    #[test]
    fn gains_validation() {
        assert!(FllGains::new(0.0, 1.0).validate().is_err());
        assert!(FllGains::new(1.0, -1.0).validate().is_err());
        let mut g = FllGains::default();
        g.v_nom = f64::NAN;
        assert!(g.validate().is_err());
        assert!(FllGains::default().validate().is_ok());
        assert!((FllGains::new(2.0, 3.0).freq_gain() - 6.0).abs() < 1e-15);
    }

    #[test]
    fn kind_names() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.as_str().parse::<EstimatorKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.as_str()));
        }
        assert!("pll".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn runaway_frequency_is_divergence() {
        let mut gains = FllGains::default();
        gains.v_nom = 1e-6;
        let mut fll = Fll::new(EstimatorKind::Conventional, gains).unwrap();
        let ts = 1e-4;
        let w = 2.0 * PI * 60.0;
        let err = (0..5000).find_map(|n| {
            fll.step(ComplexSample::from_polar(1.0, 0.3 + w * n as f64 * ts), ts)
                .err()
        });
        assert!(matches!(err, Some(FllError::Diverged(_))), "{err:?}");
    }
}
