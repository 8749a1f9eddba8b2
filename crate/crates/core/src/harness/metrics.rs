use serde::{Deserialize, Serialize};

use super::{Channel, HarnessError, RunTrace};

/// Settling band as a fraction of the step magnitude.
pub const SETTLING_BAND: f64 = 0.02;

/// Step-response figures of one channel after one event.
///
/// For a step (target differs from the pre-event value) `overshoot` is the
/// excursion beyond the target in the step direction, as a percent of the step.
/// For a return-to-value response (target equal to the pre-event value) the
/// band is taken relative to the peak excursion and `overshoot` is that peak
/// excursion as a percent of `|target|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    /// Time from the event to the last sample outside the band; `None` when the
    /// channel is still outside the band at the end of the trace.
    pub settling_time: Option<f64>,
    pub overshoot: f64,
    pub peak_value: f64,
    pub peak_time: f64,
    /// Final value minus target.
    pub steady_state_error: f64,
    /// `|target − pre-event value|`, zero for return-to-value responses.
    pub step_magnitude: f64,
    /// Largest `|value − target|` after the event.
    pub peak_excursion: f64,
}

impl StepMetrics {
    pub fn settled(&self) -> bool {
        self.settling_time.is_some()
    }
}

pub fn step_metrics(
    trace: &RunTrace,
    channel: Channel,
    event_time: f64,
    target: f64,
) -> Result<StepMetrics, HarnessError> {
    if trace.is_empty() {
        return Err(HarnessError::Metrics("empty trace".into()));
    }
    let i0 = trace.config.scenario.sample_index(event_time);
    if i0 == 0 || i0 >= trace.len() {
        return Err(HarnessError::Metrics(format!(
            "event time {event_time} s has no samples on both sides"
        )));
    }
    let dev: Vec<f64> = trace
        .samples
        .iter()
        .map(|s| channel.diff(channel.value(s), target))
        .collect();
    let after = &dev[i0..];
    let scale = target.abs().max(1.0);
    let tiny = 1e-12 * scale;

    let step = -dev[i0 - 1];
    let magnitude = step.abs();
    let (peak_idx, peak_excursion) =
        after
            .iter()
            .enumerate()
            .map(|(i, e)| (i, e.abs()))
            .fold(
                (0, 0.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );

    let (band, overshoot, peak_rel) = if magnitude > tiny {
        let dir = step.signum();
        // Extreme in the step direction.
        let (idx, beyond) = after.iter().enumerate().map(|(i, e)| (i, dir * e)).fold(
            (0, f64::NEG_INFINITY),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
        (
            SETTLING_BAND * magnitude,
            100.0 * beyond.max(0.0) / magnitude,
            idx,
        )
    } else {
        let overshoot = if target.abs() > 0.0 {
            100.0 * peak_excursion / target.abs()
        } else {
            0.0
        };
        (SETTLING_BAND * peak_excursion, overshoot, peak_idx)
    };

    let settling_time = if peak_excursion <= tiny {
        Some(0.0)
    } else {
        match after.iter().rposition(|e| e.abs() > band) {
            None => Some(0.0),
            Some(last) if last + 1 == after.len() => None,
            Some(last) => Some(trace.samples[i0 + last].t - event_time),
        }
    };

    let peak = &trace.samples[i0 + peak_rel];
    Ok(StepMetrics {
        settling_time,
        overshoot,
        peak_value: channel.value(peak),
        peak_time: peak.t,
        steady_state_error: *dev.last().unwrap(),
        step_magnitude: if magnitude > tiny { magnitude } else { 0.0 },
        peak_excursion,
    })
}
