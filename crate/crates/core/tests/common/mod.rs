#![allow(dead_code)]

use std::f64::consts::PI;

use gridlock::harness::{run, RunConfig, RunTrace, TraceSample, EVENT_TIME, STEP_DURATION};
use gridlock::{ComplexSample, EstimatorKind, FllGains, GridEvent, GridParams, GridScenario};

pub const K: f64 = 120.0 * PI;
pub const W0: f64 = 2.0 * PI * 60.0;

pub fn step_trace(estimator: EstimatorKind, d: f64, event: GridEvent) -> RunTrace {
    let scenario = GridScenario::new(GridParams::nominal(), EVENT_TIME + STEP_DURATION, 10_000.0)
        .with_event(event);
    run(&RunConfig::new(estimator, FllGains::new(K, d), scenario)).unwrap()
}

pub fn locked(s: &TraceSample) -> bool {
    let v = s.truth.v;
    (s.out.omega_hat - s.truth.omega).abs() < 1e-3
        && (s.out.u_dq_est - ComplexSample::new(v, 0.0)).norm() < 1e-3
}
