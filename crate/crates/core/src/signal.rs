//! Positive-sequence grid voltage synthesis and the αβ → dq frame rotation.
//!
//! A scenario starts from a [`GridParams`] operating point and applies scripted
//! [`GridEvent`]s. The phase is accumulated sample by sample, so frequency steps
//! never introduce a hidden phase discontinuity; only explicit phase jumps do.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Complex sample carrying an αβ- or dq-frame voltage in per-unit.
pub type ComplexSample = Complex64;

/// Default simulation rate.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 10_000.0;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("amplitude must be positive, got {0}")]
    NonPositiveAmplitude(f64),
    #[error("frequency must be positive, got {0} Hz")]
    NonPositiveFrequency(f64),
    #[error("duration must be positive, got {0} s")]
    NonPositiveDuration(f64),
    #[error("sample rate {rate} Hz is below 20x the fundamental ({min} Hz)")]
    SampleRateTooLow { rate: f64, min: f64 },
    #[error("event {index} at t = {time} s is not after the previous event")]
    EventOrder { index: usize, time: f64 },
    #[error("event {index} at t = {time} s lies outside [0, duration)")]
    EventOutOfRange { index: usize, time: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid scenario document: {0}")]
    Parse(String),
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Smallest signed difference `a − b` on the circle, in (−π, π].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

/// Rotates `u_ab` by `e^(−j·angle)`.
pub fn park_transform(u_ab: ComplexSample, angle: f64) -> ComplexSample {
    let (s, c) = angle.sin_cos();
    ComplexSample::new(u_ab.re * c + u_ab.im * s, u_ab.im * c - u_ab.re * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    #[serde(rename = "v")]
    pub amplitude: f64,
    #[serde(rename = "f_hz")]
    pub frequency_hz: f64,
    #[serde(rename = "theta0_rad", default)]
    pub initial_phase: f64,
}

impl GridParams {
    pub fn nominal() -> Self {
        GridParams {
            amplitude: 1.0,
            frequency_hz: 60.0,
            initial_phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    /// Frequency step in Hz.
    FrequencyStep(f64),
    /// Phase jump in radians.
    PhaseJump(f64),
    /// New amplitude in per-unit.
    AmplitudeChange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridEvent {
    pub time: f64,
    pub kind: EventKind,
}

impl GridEvent {
    pub fn frequency_step(time: f64, df_hz: f64) -> Self {
        GridEvent {
            time,
            kind: EventKind::FrequencyStep(df_hz),
        }
    }

    pub fn phase_jump_deg(time: f64, dtheta_deg: f64) -> Self {
        GridEvent {
            time,
            kind: EventKind::PhaseJump(dtheta_deg.to_radians()),
        }
    }

    pub fn amplitude_change(time: f64, v_new: f64) -> Self {
        GridEvent {
            time,
            kind: EventKind::AmplitudeChange(v_new),
        }
    }
}

// Wire form of an event; angles travel in degrees.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
enum EventDoc {
    #[serde(rename = "freq_step")]
    FreqStep { t_s: f64, df_hz: f64 },
    #[serde(rename = "phase_jump")]
    PhaseJump { t_s: f64, dtheta_deg: f64 },
    #[serde(rename = "amp_change")]
    AmpChange { t_s: f64, v_new: f64 },
}

impl From<EventDoc> for GridEvent {
    fn from(doc: EventDoc) -> Self {
        match doc {
            EventDoc::FreqStep { t_s, df_hz } => GridEvent::frequency_step(t_s, df_hz),
            EventDoc::PhaseJump { t_s, dtheta_deg } => GridEvent::phase_jump_deg(t_s, dtheta_deg),
            EventDoc::AmpChange { t_s, v_new } => GridEvent::amplitude_change(t_s, v_new),
        }
    }
}

impl From<GridEvent> for EventDoc {
    fn from(ev: GridEvent) -> Self {
        match ev.kind {
            EventKind::FrequencyStep(df_hz) => EventDoc::FreqStep {
                t_s: ev.time,
                df_hz,
            },
            EventKind::PhaseJump(dtheta) => EventDoc::PhaseJump {
                t_s: ev.time,
                dtheta_deg: dtheta.to_degrees(),
            },
            EventKind::AmplitudeChange(v_new) => EventDoc::AmpChange {
                t_s: ev.time,
                v_new,
            },
        }
    }
}

impl Serialize for GridEvent {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        EventDoc::from(*self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GridEvent {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        EventDoc::deserialize(deserializer).map(GridEvent::from)
    }
}

/// A scripted grid-voltage experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScenario {
    pub initial: GridParams,
    #[serde(default)]
    pub events: Vec<GridEvent>,
    #[serde(rename = "duration_s")]
    pub duration: f64,
    #[serde(rename = "sample_rate_hz", default = "default_sample_rate")]
    pub sample_rate: f64,
}

fn default_sample_rate() -> f64 {
    DEFAULT_SAMPLE_RATE_HZ
}

/// True grid quantities at one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub v: f64,
    pub omega: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSample {
    pub t: f64,
    pub u_ab: ComplexSample,
    pub truth: GroundTruth,
}

impl GridScenario {
    pub fn new(initial: GridParams, duration: f64, sample_rate: f64) -> Self {
        GridScenario {
            initial,
            events: Vec::new(),
            duration,
            sample_rate,
        }
    }

    pub fn with_event(mut self, event: GridEvent) -> Self {
        self.events.push(event);
        self
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let scenario: GridScenario =
            serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn sample_count(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    /// Index of the first sample at or after `time`.
    pub fn sample_index(&self, time: f64) -> usize {
        // Tolerate representation error such as 0.2 * 1e4 = 2000.0000000000002.
        (time * self.sample_rate - 1e-9).ceil().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let init = &self.initial;
        for (what, x) in [
            ("initial.v", init.amplitude),
            ("initial.f_hz", init.frequency_hz),
            ("initial.theta0_rad", init.initial_phase),
            ("duration_s", self.duration),
            ("sample_rate_hz", self.sample_rate),
        ] {
            if !x.is_finite() {
                return Err(ScenarioError::NonFinite(what));
            }
        }
        if init.amplitude <= 0.0 {
            return Err(ScenarioError::NonPositiveAmplitude(init.amplitude));
        }
        if init.frequency_hz <= 0.0 {
            return Err(ScenarioError::NonPositiveFrequency(init.frequency_hz));
        }
        if self.duration <= 0.0 {
            return Err(ScenarioError::NonPositiveDuration(self.duration));
        }
        let min_rate = 20.0 * init.frequency_hz;
        if self.sample_rate < min_rate {
            return Err(ScenarioError::SampleRateTooLow {
                rate: self.sample_rate,
                min: min_rate,
            });
        }

        let mut freq = init.frequency_hz;
        let mut last_time = f64::NEG_INFINITY;
        for (index, ev) in self.events.iter().enumerate() {
            if !ev.time.is_finite() {
                return Err(ScenarioError::NonFinite("event time"));
            }
            if ev.time < 0.0 || ev.time >= self.duration {
                return Err(ScenarioError::EventOutOfRange {
                    index,
                    time: ev.time,
                });
            }
            if ev.time <= last_time {
                return Err(ScenarioError::EventOrder {
                    index,
                    time: ev.time,
                });
            }
            last_time = ev.time;
            match ev.kind {
                EventKind::FrequencyStep(df) => {
                    if !df.is_finite() {
                        return Err(ScenarioError::NonFinite("df_hz"));
                    }
                    freq += df;
                    if freq <= 0.0 {
                        return Err(ScenarioError::NonPositiveFrequency(freq));
                    }
                }
                EventKind::PhaseJump(dtheta) => {
                    if !dtheta.is_finite() {
                        return Err(ScenarioError::NonFinite("dtheta"));
                    }
                }
                EventKind::AmplitudeChange(v) => {
                    if !v.is_finite() {
                        return Err(ScenarioError::NonFinite("v_new"));
                    }
                    if v <= 0.0 {
                        return Err(ScenarioError::NonPositiveAmplitude(v));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Generates every sample of `scenario`.
///
/// Events take effect at the first sample at or after their nominal time. The
/// phase advances by `ω·Ts` per sample using the frequency in force at the
/// current sample, so a frequency step changes the phase slope from the next
/// sample onward while the phase itself stays continuous.
pub fn synthesize_scenario(scenario: &GridScenario) -> Result<Vec<GridSample>, ScenarioError> {
    scenario.validate()?;

    let n = scenario.sample_count();
    let ts = scenario.sample_period();
    let mut pending: Vec<(usize, EventKind)> = scenario
        .events
        .iter()
        .map(|ev| (scenario.sample_index(ev.time), ev.kind))
        .collect();
    pending.reverse();

    let mut v = scenario.initial.amplitude;
    let mut omega = 2.0 * PI * scenario.initial.frequency_hz;
    let mut theta = wrap_angle(scenario.initial.initial_phase);
    let mut out = Vec::with_capacity(n);

    for i in 0..n {
        while let Some(&(at, kind)) = pending.last() {
            if at > i {
                break;
            }
            match kind {
                EventKind::FrequencyStep(df) => omega += 2.0 * PI * df,
                EventKind::PhaseJump(dtheta) => theta = wrap_angle(theta + dtheta),
                EventKind::AmplitudeChange(v_new) => v = v_new,
            }
            pending.pop();
        }

        out.push(GridSample {
            t: i as f64 * ts,
            u_ab: ComplexSample::from_polar(v, theta),
            truth: GroundTruth { v, omega, theta },
        });
        theta = wrap_angle(theta + omega * ts);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(duration: f64) -> GridScenario {
        GridScenario::new(GridParams::nominal(), duration, DEFAULT_SAMPLE_RATE_HZ)
    }

    #[test]
    fn first_sample_is_unit_phasor() {
        let samples = synthesize_scenario(&base(0.01)).unwrap();
        assert_eq!(samples[0].t, 0.0);
        assert_eq!(samples[0].u_ab, ComplexSample::new(1.0, 0.0));
    }

    #[test]
    fn sample_25_phase() {
        let samples = synthesize_scenario(&base(0.01)).unwrap();
        let s = samples[25];
        assert!((s.truth.theta - 0.942_477_796_076_938).abs() < 1e-12);
        assert!((s.u_ab.re - 0.587_785_252_292_473).abs() < 1e-12);
    }

    #[test]
    fn sample_count_rounds() {
        assert_eq!(synthesize_scenario(&base(0.5)).unwrap().len(), 5000);
        let sc = GridScenario::new(GridParams::nominal(), 0.00016, 10_000.0);
        assert_eq!(sc.sample_count(), 2);
    }

    #[test]
    fn frequency_step_keeps_phase_continuous() {
        let sc = base(0.2).with_event(GridEvent::frequency_step(0.1, 5.0));
        let samples = synthesize_scenario(&sc).unwrap();
        let ts = sc.sample_period();
        let i0 = sc.sample_index(0.1);
        assert_eq!(i0, 1000);
        for s in &samples {
            assert!((s.u_ab.norm() - 1.0).abs() < 1e-12);
        }
        let before = angle_diff(samples[i0].truth.theta, samples[i0 - 1].truth.theta);
        let after = angle_diff(samples[i0 + 1].truth.theta, samples[i0].truth.theta);
        assert!((before - 2.0 * PI * 60.0 * ts).abs() < 1e-12);
        assert!((after - 2.0 * PI * 65.0 * ts).abs() < 1e-12);
        assert!((samples[i0].truth.omega - 2.0 * PI * 65.0).abs() < 1e-12);
    }

    #[test]
    fn phase_jump_and_amplitude_change_apply_at_event_sample() {
        let sc = base(0.1)
            .with_event(GridEvent::phase_jump_deg(0.02, 20.0))
            .with_event(GridEvent::amplitude_change(0.05, 0.5));
        let samples = synthesize_scenario(&sc).unwrap();
        let ts = sc.sample_period();
        let jump =
            angle_diff(samples[200].truth.theta, samples[199].truth.theta) - 2.0 * PI * 60.0 * ts;
        assert!((jump - 20f64.to_radians()).abs() < 1e-12);
        assert_eq!(samples[499].truth.v, 1.0);
        assert_eq!(samples[500].truth.v, 0.5);
        assert!((samples[500].u_ab.norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn events_snap_forward_to_next_sample() {
        let sc = base(0.1);
        assert_eq!(sc.sample_index(0.2), 2000);
        assert_eq!(sc.sample_index(0.00012), 2);
        assert_eq!(sc.sample_index(0.0), 0);
    }

    #[test]
    fn rejects_invalid_scenarios() {
        let sc = base(0.1)
            .with_event(GridEvent::frequency_step(0.05, 1.0))
            .with_event(GridEvent::frequency_step(0.05, 1.0));
        assert!(matches!(
            sc.validate(),
            Err(ScenarioError::EventOrder { index: 1, .. })
        ));

        let sc = base(0.1).with_event(GridEvent::phase_jump_deg(0.1, 1.0));
        assert!(matches!(
            sc.validate(),
            Err(ScenarioError::EventOutOfRange { .. })
        ));

        let sc = base(0.1).with_event(GridEvent::amplitude_change(0.01, 0.0));
        assert_eq!(sc.validate(), Err(ScenarioError::NonPositiveAmplitude(0.0)));

        let sc = GridScenario::new(GridParams::nominal(), 0.1, 1000.0);
        assert!(matches!(
            sc.validate(),
            Err(ScenarioError::SampleRateTooLow { .. })
        ));

        let sc = base(0.0);
        assert!(synthesize_scenario(&sc).is_err());
    }

    #[test]
    fn park_examples() {
        let one = ComplexSample::new(1.0, 0.0);
        assert_eq!(park_transform(one, 0.0), one);
        let r = park_transform(one, PI / 2.0);
        assert!(r.re.abs() < 1e-15 && (r.im + 1.0).abs() < 1e-15);
        let r = park_transform(ComplexSample::from_polar(0.8, 1.2), 1.2);
        assert!((r - ComplexSample::new(0.8, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
        assert!((angle_diff(PI - 0.01, -PI + 0.01) + 0.02).abs() < 1e-12);
    }

    #[test]
    fn scenario_json_round_trip() {
        let text = r#"{ "initial": {"v": 1.0, "f_hz": 60.0, "theta0_rad": 0.0},
            "duration_s": 0.5, "sample_rate_hz": 10000,
            "events": [ {"t_s": 0.1, "kind": "freq_step", "df_hz": 5.0},
                        {"t_s": 0.2, "kind": "phase_jump", "dtheta_deg": 20.0},
                        {"t_s": 0.3, "kind": "amp_change", "v_new": 0.5} ] }"#;
        let sc = GridScenario::from_json(text).unwrap();
        assert_eq!(sc.events.len(), 3);
        assert_eq!(sc.events[1].kind, EventKind::PhaseJump(20f64.to_radians()));
        let back = GridScenario::from_json(&serde_json::to_string(&sc).unwrap()).unwrap();
        assert_eq!(back.events[0], sc.events[0]);
        assert_eq!(back.events[2], sc.events[2]);
        match back.events[1].kind {
            EventKind::PhaseJump(x) => assert!((x - 20f64.to_radians()).abs() < 1e-15),
            _ => panic!("wrong kind"),
        }

        assert!(matches!(
            GridScenario::from_json(r#"{"initial": {"v": 1.0, "f_hz": 60.0}, "duration_s": -1}"#),
            Err(ScenarioError::NonPositiveDuration(_))
        ));
        assert!(matches!(
            GridScenario::from_json(r#"{"initial": 3}"#),
            Err(ScenarioError::Parse(_))
        ));
    }
}
