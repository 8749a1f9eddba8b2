use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gridlock::harness::{CellResult, RunTrace, StepMetrics};

use crate::CliError;

pub const TRACE_HEADER: &str =
    "t,u_alpha,u_beta,u_d,u_q,uhat_d,uhat_q,omega_hat,omega_b,theta_hat,\
theta_e_hat,theta_est,ud_est,uq_est,x_aI,e_q,true_omega,true_theta,true_v";

pub const METRICS_HEADER: &str = "suite,estimator,d_over_k,channel,settling_time_s,overshoot_pct,\
peak_value,peak_time_s,steady_state_error";

pub const BODE_HEADER: &str = "omega_rad_s,kind,magnitude,magnitude_db";

/// 17 significant digits, round-trip exact and locale independent.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trace_csv(trace: &RunTrace) -> String {
    let mut out = String::with_capacity(trace.len() * 19 * 24);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for s in &trace.samples {
        let o = &s.out;
        let row = [
            s.t,
            s.u_ab.re,
            s.u_ab.im,
            o.u_dq.re,
            o.u_dq.im,
            o.u_hat_dq.re,
            o.u_hat_dq.im,
            o.omega_hat,
            o.omega_b,
            o.theta_hat,
            o.theta_e_hat,
            o.theta_est,
            o.u_dq_est.re,
            o.u_dq_est.im,
            o.x_a.im,
            o.e_q,
            s.truth.omega,
            s.truth.theta,
            s.truth.v,
        ];
        for (i, x) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&num(*x));
        }
        out.push('\n');
    }
    out
}

pub fn metrics_rows(out: &mut String, suite_column: &str, result: &CellResult) {
    for (channel, m) in &result.metrics {
        let StepMetrics {
            settling_time,
            overshoot,
            peak_value,
            peak_time,
            steady_state_error,
            ..
        } = *m;
        let settling = settling_time.map_or_else(|| "unsettled".to_string(), num);
        let _ = writeln!(
            out,
            "{suite_column},{},{},{channel},{settling},{},{},{},{}",
            result.cell.estimator(),
            result.cell.d_over_k,
            num(overshoot),
            num(peak_value),
            num(peak_time),
            num(steady_state_error)
        );
    }
}

/// Files produced by one command, written only once the command succeeded.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    pub fn add(&mut self, relative: impl Into<PathBuf>, contents: String) {
        self.files.push((relative.into(), contents));
    }

    /// Writes each file next to its destination and renames it into place.
    pub fn commit(self, dir: &Path) -> Result<(), CliError> {
        let io = |p: &Path, e: std::io::Error| {
            CliError::Usage(format!("cannot write {}: {e}", p.display()))
        };
        for (rel, contents) in self.files {
            let dest = dir.join(rel);
            let parent = dest.parent().unwrap_or(dir);
            fs::create_dir_all(parent).map_err(|e| io(parent, e))?;
            let tmp = parent.join(format!(
                ".{}.tmp",
                dest.file_name().unwrap_or_default().to_string_lossy()
            ));
            fs::write(&tmp, contents).map_err(|e| io(&tmp, e))?;
            fs::rename(&tmp, &dest).map_err(|e| io(&dest, e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.1,
            -1.0 / 3.0,
            2.0 * std::f64::consts::PI * 60.0,
            1e-300,
            0.0,
        ] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(num(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn header_column_count() {
        assert_eq!(TRACE_HEADER.split(',').count(), 19);
        assert_eq!(METRICS_HEADER.split(',').count(), 9);
    }
}
