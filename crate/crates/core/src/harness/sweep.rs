//! Comparison suites: frequency steps, phase jumps, the optimal conventional
//! design, and the disturbance set (amplitude sag, frequency drop, phase jump).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    run_with, step_metrics, Channel, EstimatorFactory, HarnessError, RunConfig, RunTrace,
    StepMetrics,
};
use crate::fll::{EstimatorKind, FllGains};
use crate::signal::{GridEvent, GridParams, GridScenario, DEFAULT_SAMPLE_RATE_HZ};

/// Time of the (first) event in every suite scenario.
pub const EVENT_TIME: f64 = 0.25;
/// Observation window after the event.
pub const STEP_DURATION: f64 = 0.3;
/// Low-pass gain used by all suites, rad/s.
pub const SUITE_K: f64 = 120.0 * PI;

const D_GRID: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
const SAG_LENGTH: f64 = 0.15;
const SAG_DEPTH: f64 = 0.5;
const LOCK_TOL_OMEGA: f64 = 1e-3;
const LOCK_TOL_UDQ: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    FreqStepFig5,
    PhaseStepFig6,
    OptimalFig7,
    DisturbanceFig8,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::FreqStepFig5,
        Suite::PhaseStepFig6,
        Suite::OptimalFig7,
        Suite::DisturbanceFig8,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::FreqStepFig5 => "freq_step_fig5",
            Suite::PhaseStepFig6 => "phase_step_fig6",
            Suite::OptimalFig7 => "optimal_fig7",
            Suite::DisturbanceFig8 => "disturbance_fig8",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown suite '{s}'"))
    }
}

/// Disturbance applied in one sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Disturbance {
    FrequencyStep { df_hz: f64 },
    PhaseJump { dtheta_deg: f64 },
    AmplitudeSag,
}

impl Disturbance {
    pub fn label(&self) -> String {
        match self {
            Disturbance::FrequencyStep { df_hz } => format!("freq_step_{df_hz:+}hz"),
            Disturbance::PhaseJump { dtheta_deg } => format!("phase_jump_{dtheta_deg}deg"),
            Disturbance::AmplitudeSag => "amplitude_sag".to_string(),
        }
    }

    pub fn scenario(&self) -> GridScenario {
        let base = GridScenario::new(
            GridParams::nominal(),
            EVENT_TIME + STEP_DURATION,
            DEFAULT_SAMPLE_RATE_HZ,
        );
        match *self {
            Disturbance::FrequencyStep { df_hz } => {
                base.with_event(GridEvent::frequency_step(EVENT_TIME, df_hz))
            }
            Disturbance::PhaseJump { dtheta_deg } => {
                base.with_event(GridEvent::phase_jump_deg(EVENT_TIME, dtheta_deg))
            }
            Disturbance::AmplitudeSag => {
                let mut sc = base
                    .with_event(GridEvent::amplitude_change(EVENT_TIME, SAG_DEPTH))
                    .with_event(GridEvent::amplitude_change(EVENT_TIME + SAG_LENGTH, 1.0));
                sc.duration = EVENT_TIME + SAG_LENGTH + STEP_DURATION;
                sc
            }
        }
    }

    /// Time of the last event; the run must be locked again `STEP_DURATION` later.
    pub fn last_event_time(&self) -> f64 {
        match self {
            Disturbance::AmplitudeSag => EVENT_TIME + SAG_LENGTH,
            _ => EVENT_TIME,
        }
    }

    /// Post-event frequency target in rad/s.
    pub fn omega_target(&self) -> f64 {
        let f = match self {
            Disturbance::FrequencyStep { df_hz } => 60.0 + df_hz,
            _ => 60.0,
        };
        2.0 * PI * f
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub suite: Suite,
    pub d_over_k: f64,
    pub disturbance: Disturbance,
    pub config: RunConfig,
}

impl SweepCell {
    pub fn estimator(&self) -> EstimatorKind {
        self.config.estimator
    }

    /// Identifies the cell within its suite.
    pub fn name(&self) -> String {
        format!(
            "{}/{}/d={}k/{}",
            self.suite,
            self.config.estimator,
            self.d_over_k,
            self.disturbance.label()
        )
    }
}

fn cell(
    suite: Suite,
    estimator: EstimatorKind,
    d_over_k: f64,
    disturbance: Disturbance,
    theta0_hat: f64,
) -> SweepCell {
    let gains = FllGains::new(SUITE_K, d_over_k * SUITE_K).with_theta0_hat(theta0_hat);
    SweepCell {
        suite,
        d_over_k,
        disturbance,
        config: RunConfig::new(estimator, gains, disturbance.scenario()),
    }
}

/// All runs making up `suite`, with the generated angle starting at `theta0_hat`.
pub fn suite_cells(suite: Suite, theta0_hat: f64) -> Vec<SweepCell> {
    let pair = [EstimatorKind::Conventional, EstimatorKind::SrfFll];
    match suite {
        Suite::FreqStepFig5 | Suite::PhaseStepFig6 => {
            let dist = if suite == Suite::FreqStepFig5 {
                Disturbance::FrequencyStep { df_hz: 5.0 }
            } else {
                Disturbance::PhaseJump { dtheta_deg: 20.0 }
            };
            pair.iter()
                .flat_map(|&est| {
                    D_GRID
                        .iter()
                        .map(move |&r| cell(suite, est, r, dist, theta0_hat))
                })
                .collect()
        }
        Suite::OptimalFig7 => {
            let dist = Disturbance::FrequencyStep { df_hz: 5.0 };
            vec![
                cell(suite, EstimatorKind::Conventional, 0.5, dist, theta0_hat),
                cell(suite, EstimatorKind::SrfFll, 1.0, dist, theta0_hat),
            ]
        }
        Suite::DisturbanceFig8 => [
            Disturbance::AmplitudeSag,
            Disturbance::FrequencyStep { df_hz: -5.0 },
            Disturbance::PhaseJump { dtheta_deg: 20.0 },
        ]
        .into_iter()
        .map(|dist| cell(suite, EstimatorKind::SrfFll, 1.0, dist, theta0_hat))
        .collect(),
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: SweepCell,
    pub trace: RunTrace,
    /// Metrics for the `ω̂` and `ω̂_b` channels, in that order.
    pub metrics: Vec<(Channel, StepMetrics)>,
}

impl CellResult {
    pub fn metric(&self, channel: Channel) -> &StepMetrics {
        &self
            .metrics
            .iter()
            .find(|(c, _)| *c == channel)
            .expect("metrics cover omega_hat and omega_b")
            .1
    }

    /// Whether the run ends locked: frequency error and the synchronized dq
    /// voltage both within tolerance on the final sample.
    pub fn ends_locked(&self) -> bool {
        let last = self.trace.samples.last().unwrap();
        let v = last.truth.v;
        (last.out.omega_hat - last.truth.omega).abs() < LOCK_TOL_OMEGA
            && (last.out.u_dq_est.re - v).abs() < LOCK_TOL_UDQ * v
            && last.out.u_dq_est.im.abs() < LOCK_TOL_UDQ * v
    }
}

pub fn run_cell(cell: &SweepCell, factory: &EstimatorFactory) -> Result<CellResult, HarnessError> {
    let trace = run_with(&cell.config, factory)?;
    let target = cell.disturbance.omega_target();
    let metrics = [Channel::OmegaHat, Channel::OmegaB]
        .into_iter()
        .map(|ch| step_metrics(&trace, ch, EVENT_TIME, target).map(|m| (ch, m)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CellResult {
        cell: cell.clone(),
        trace,
        metrics,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub suite: Suite,
    pub cells: Vec<CellResult>,
    pub checks: Vec<SuiteCheck>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs every cell of `suite` serially with the built-in estimators.
pub fn paper_sweep(suite: Suite, factory: &EstimatorFactory) -> Result<SweepReport, HarnessError> {
    let cells = suite_cells(suite, 0.0)
        .iter()
        .map(|c| run_cell(c, factory))
        .collect::<Result<Vec<_>, _>>()?;
    let checks = assess(suite, &cells);
    Ok(SweepReport {
        suite,
        cells,
        checks,
    })
}

fn find(results: &[CellResult], est: EstimatorKind, d_over_k: f64) -> Option<&CellResult> {
    results
        .iter()
        .find(|r| r.cell.estimator() == est && r.cell.d_over_k == d_over_k)
}

fn settling(m: &StepMetrics) -> f64 {
    m.settling_time.unwrap_or(f64::INFINITY)
}

fn check(name: &str, passed: bool, detail: String) -> SuiteCheck {
    SuiteCheck {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn series(
    results: &[CellResult],
    est: EstimatorKind,
    channel: Channel,
    f: impl Fn(&StepMetrics) -> f64,
) -> Option<Vec<f64>> {
    D_GRID
        .iter()
        .map(|&r| find(results, est, r).map(|c| f(c.metric(channel))))
        .collect()
}

fn fmt_series(xs: &[f64]) -> String {
    let parts: Vec<String> = D_GRID
        .iter()
        .zip(xs)
        .map(|(r, x)| format!("d={r}k: {x:.4}"))
        .collect();
    parts.join(", ")
}

/// Qualitative comparisons each suite is expected to reproduce.
pub fn assess(suite: Suite, results: &[CellResult]) -> Vec<SuiteCheck> {
    use EstimatorKind::{Conventional, SrfFll};
    let mut checks = Vec::new();
    let missing = |name: &str| check(name, false, "cell missing".into());

    match suite {
        Suite::FreqStepFig5 => {
            let name = "srf_fll omega_hat settling decreases with d";
            match series(results, SrfFll, Channel::OmegaHat, settling) {
                Some(s) => checks.push(check(
                    name,
                    s.windows(2).all(|w| w[1] < w[0]),
                    fmt_series(&s),
                )),
                None => checks.push(missing(name)),
            }
            let name = "conventional overshoot increases with d";
            match series(results, Conventional, Channel::OmegaHat, |m| m.overshoot) {
                Some(s) => checks.push(check(
                    name,
                    s.windows(2).all(|w| w[1] > w[0]),
                    fmt_series(&s),
                )),
                None => checks.push(missing(name)),
            }
            let name = "srf_fll omega_b overshoot below 1% for every d";
            match series(results, SrfFll, Channel::OmegaB, |m| m.overshoot) {
                Some(s) => checks.push(check(name, s.iter().all(|&o| o < 1.0), fmt_series(&s))),
                None => checks.push(missing(name)),
            }
        }
        Suite::PhaseStepFig6 => {
            let name = "srf_fll omega_b excursion below omega_hat excursion";
            let pairs: Option<Vec<(f64, f64)>> = D_GRID
                .iter()
                .map(|&r| {
                    find(results, SrfFll, r).map(|c| {
                        (
                            c.metric(Channel::OmegaB).peak_excursion,
                            c.metric(Channel::OmegaHat).peak_excursion,
                        )
                    })
                })
                .collect();
            match pairs {
                Some(p) => {
                    let detail = D_GRID
                        .iter()
                        .zip(&p)
                        .map(|(r, (b, h))| format!("d={r}k: {b:.2} vs {h:.2} rad/s"))
                        .collect::<Vec<_>>()
                        .join(", ");
                    checks.push(check(name, p.iter().all(|(b, h)| b < h), detail));
                }
                None => checks.push(missing(name)),
            }
        }
        Suite::OptimalFig7 => {
            match (find(results, Conventional, 0.5), find(results, SrfFll, 1.0)) {
                (Some(conv), Some(srf)) => {
                    let cs = settling(conv.metric(Channel::OmegaHat));
                    let ss = settling(srf.metric(Channel::OmegaHat));
                    checks.push(check(
                        "srf_fll omega_hat settles before conventional",
                        ss < cs,
                        format!("{ss:.5} s vs {cs:.5} s"),
                    ));
                    let co = conv.metric(Channel::OmegaHat).overshoot;
                    checks.push(check(
                        "conventional shows small overshoot (4.33% ± 1.5)",
                        (co - 4.33).abs() <= 1.5,
                        format!("{co:.3}%"),
                    ));
                    let bo = srf.metric(Channel::OmegaB).overshoot;
                    checks.push(check(
                        "srf_fll omega_b has no overshoot (< 1%)",
                        bo < 1.0,
                        format!("{bo:.4}%"),
                    ));
                }
                _ => checks.push(missing("optimal design cells")),
            }
        }
        Suite::DisturbanceFig8 => {
            for r in results {
                checks.push(check(
                    &format!("{} re-locks", r.cell.disturbance.label()),
                    r.ends_locked(),
                    {
                        let last = r.trace.samples.last().unwrap();
                        format!(
                            "|omega error| = {:.2e} rad/s, u_dq_est = {:.6} {:+.6}j",
                            (last.out.omega_hat - last.truth.omega).abs(),
                            last.out.u_dq_est.re,
                            last.out.u_dq_est.im
                        )
                    },
                ));
            }
            if let Some(r) = results
                .iter()
                .find(|r| matches!(r.cell.disturbance, Disturbance::PhaseJump { .. }))
            {
                let i0 = r.trace.index_at(EVENT_TIME);
                let jump = r.trace.samples[i0].out.u_dq.im;
                let expected = 20f64.to_radians().sin();
                let later = r.trace.index_at(EVENT_TIME + 0.1);
                let residual = r.trace.samples[later..]
                    .iter()
                    .map(|s| s.out.u_dq.im.abs())
                    .fold(0.0, f64::max);
                checks.push(check(
                    "u_q tracks the phase jump and returns to zero",
                    (jump - expected).abs() <= 0.05 * expected && residual < 0.01,
                    format!("u_q at event {jump:.4} (expected {expected:.4}), max |u_q| after 0.1 s {residual:.2e}"),
                ));
            }
        }
    }
    checks
}
