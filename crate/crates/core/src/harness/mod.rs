//! Running estimators over scenarios and measuring their responses.

mod metrics;
mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fll::{
    Estimator, EstimatorKind, Fll, FllError, FllGains, FllOutputs, MAX_GAIN_STEP_PRODUCT,
};
use crate::signal::{
    angle_diff, synthesize_scenario, ComplexSample, GridScenario, GroundTruth, ScenarioError,
};

pub use metrics::{step_metrics, StepMetrics, SETTLING_BAND};
pub use sweep::{
    assess, paper_sweep, run_cell, suite_cells, CellResult, Disturbance, Suite, SuiteCheck,
    SweepCell, SweepReport, EVENT_TIME, STEP_DURATION, SUITE_K,
};

/// Time allowed to reach lock before the first event.
pub const DEFAULT_WARMUP: f64 = 0.2;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Estimator(#[from] FllError),
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error("estimator diverged at sample {index}: {source}")]
    Diverged { index: usize, source: FllError },
    #[error("traces have different time grids")]
    GridMismatch,
    #[error("cannot measure step: {0}")]
    Metrics(String),
}

impl HarnessError {
    pub fn is_divergence(&self) -> bool {
        matches!(self, HarnessError::Diverged { .. })
    }
}

/// Builds estimator instances; lets callers substitute their own estimator.
pub type EstimatorFactory =
    dyn Fn(EstimatorKind, FllGains) -> Result<Box<dyn Estimator>, FllError> + Sync;

pub fn default_factory(
    kind: EstimatorKind,
    gains: FllGains,
) -> Result<Box<dyn Estimator>, FllError> {
    Ok(Box::new(Fll::new(kind, gains)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub estimator: EstimatorKind,
    pub gains: FllGains,
    pub scenario: GridScenario,
    #[serde(rename = "warmup_s", default = "default_warmup")]
    pub warmup: f64,
}

fn default_warmup() -> f64 {
    DEFAULT_WARMUP
}

impl RunConfig {
    pub fn new(estimator: EstimatorKind, gains: FllGains, scenario: GridScenario) -> Self {
        RunConfig {
            estimator,
            gains,
            scenario,
            warmup: DEFAULT_WARMUP,
        }
    }

    pub fn ts(&self) -> f64 {
        self.scenario.sample_period()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.scenario.validate()?;
        self.gains.validate()?;
        if !(self.warmup >= 0.0) {
            return Err(HarnessError::Config(format!(
                "warmup {} s is negative",
                self.warmup
            )));
        }
        if let Some(first) = self.scenario.events.first() {
            if self.warmup >= first.time {
                return Err(HarnessError::Config(format!(
                    "warmup {} s does not end before the first event at {} s",
                    self.warmup, first.time
                )));
            }
        }
        let product = self.ts() * self.gains.k.max(self.gains.d);
        if product >= MAX_GAIN_STEP_PRODUCT {
            return Err(HarnessError::Config(format!(
                "Ts·max(k, d) = {product} must stay below {MAX_GAIN_STEP_PRODUCT}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub u_ab: ComplexSample,
    pub truth: GroundTruth,
    pub out: FllOutputs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub config: RunConfig,
    pub samples: Vec<TraceSample>,
}

impl RunTrace {
    pub fn ts(&self) -> f64 {
        self.config.ts()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn channel(&self, channel: Channel) -> Vec<f64> {
        self.samples.iter().map(|s| channel.value(s)).collect()
    }

    /// Index of the first sample at or after `time`.
    pub fn index_at(&self, time: f64) -> usize {
        self.config
            .scenario
            .sample_index(time)
            .min(self.samples.len())
    }
}

pub fn run(config: &RunConfig) -> Result<RunTrace, HarnessError> {
    run_with(config, &default_factory)
}

/// Runs `config` with estimators produced by `factory`.
pub fn run_with(config: &RunConfig, factory: &EstimatorFactory) -> Result<RunTrace, HarnessError> {
    config.validate()?;
    let grid = synthesize_scenario(&config.scenario)?;
    let ts = config.ts();
    let mut estimator = factory(config.estimator, config.gains)?;

    let mut samples = Vec::with_capacity(grid.len());
    for (index, g) in grid.into_iter().enumerate() {
        let out = estimator.step(g.u_ab, ts).map_err(|source| match source {
            FllError::Diverged(_) | FllError::NonFiniteInput => {
                HarnessError::Diverged { index, source }
            }
            other => HarnessError::Estimator(other),
        })?;
        samples.push(TraceSample {
            t: g.t,
            u_ab: g.u_ab,
            truth: g.truth,
            out,
        });
    }
    Ok(RunTrace {
        config: config.clone(),
        samples,
    })
}

/// A scalar column of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    OmegaHat,
    OmegaB,
    ThetaHat,
    ThetaEHat,
    ThetaEst,
    UD,
    UQ,
    UhatD,
    UhatQ,
    UdEst,
    UqEst,
    XaR,
    XaI,
    EQ,
    TrueOmega,
    TrueTheta,
    TrueV,
}

impl Channel {
    pub const ALL: [Channel; 17] = [
        Channel::OmegaHat,
        Channel::OmegaB,
        Channel::ThetaHat,
        Channel::ThetaEHat,
        Channel::ThetaEst,
        Channel::UD,
        Channel::UQ,
        Channel::UhatD,
        Channel::UhatQ,
        Channel::UdEst,
        Channel::UqEst,
        Channel::XaR,
        Channel::XaI,
        Channel::EQ,
        Channel::TrueOmega,
        Channel::TrueTheta,
        Channel::TrueV,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Channel::OmegaHat => "omega_hat",
            Channel::OmegaB => "omega_b",
            Channel::ThetaHat => "theta_hat",
            Channel::ThetaEHat => "theta_e_hat",
            Channel::ThetaEst => "theta_est",
            Channel::UD => "u_d",
            Channel::UQ => "u_q",
            Channel::UhatD => "uhat_d",
            Channel::UhatQ => "uhat_q",
            Channel::UdEst => "ud_est",
            Channel::UqEst => "uq_est",
            Channel::XaR => "x_aR",
            Channel::XaI => "x_aI",
            Channel::EQ => "e_q",
            Channel::TrueOmega => "true_omega",
            Channel::TrueTheta => "true_theta",
            Channel::TrueV => "true_v",
        }
    }

    /// Angle channels are compared on the circle.
    pub fn is_angle(&self) -> bool {
        matches!(
            self,
            Channel::ThetaHat | Channel::ThetaEHat | Channel::ThetaEst | Channel::TrueTheta
        )
    }

    pub fn value(&self, s: &TraceSample) -> f64 {
        let o = &s.out;
        match self {
            Channel::OmegaHat => o.omega_hat,
            Channel::OmegaB => o.omega_b,
            Channel::ThetaHat => o.theta_hat,
            Channel::ThetaEHat => o.theta_e_hat,
            Channel::ThetaEst => o.theta_est,
            Channel::UD => o.u_dq.re,
            Channel::UQ => o.u_dq.im,
            Channel::UhatD => o.u_hat_dq.re,
            Channel::UhatQ => o.u_hat_dq.im,
            Channel::UdEst => o.u_dq_est.re,
            Channel::UqEst => o.u_dq_est.im,
            Channel::XaR => o.x_a.re,
            Channel::XaI => o.x_a.im,
            Channel::EQ => o.e_q,
            Channel::TrueOmega => s.truth.omega,
            Channel::TrueTheta => s.truth.theta,
            Channel::TrueV => s.truth.v,
        }
    }

    /// Signed difference `a − b`, wrap-aware for angles.
    pub fn diff(&self, a: f64, b: f64) -> f64 {
        if self.is_angle() {
            angle_diff(a, b)
        } else {
            a - b
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Channel::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown channel '{s}'"))
    }
}

/// Largest absolute difference between two traces on one channel.
pub fn compare_traces(a: &RunTrace, b: &RunTrace, channel: Channel) -> Result<f64, HarnessError> {
    compare_traces_from(a, b, channel, 0.0)
}

/// As [`compare_traces`], restricted to samples at or after `from`.
pub fn compare_traces_from(
    a: &RunTrace,
    b: &RunTrace,
    channel: Channel,
    from: f64,
) -> Result<f64, HarnessError> {
    if a.len() != b.len() || a.ts() != b.ts() {
        return Err(HarnessError::GridMismatch);
    }
    let start = a.index_at(from);
    Ok(a.samples[start..]
        .iter()
        .zip(&b.samples[start..])
        .map(|(x, y)| channel.diff(channel.value(x), channel.value(y)).abs())
        .fold(0.0, f64::max))
}
