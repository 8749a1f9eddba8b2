//! Small-signal models of the frequency and phase loops.
//!
//! Transfer functions are rational in the Laplace variable with coefficients
//! stored in ascending powers of `s`. Everything here is closed form, so the
//! results can serve as ground truth for the discrete-time simulations.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::ComplexSample;

/// Relative discriminant threshold below which a quadratic has a double root.
pub const REPEATED_ROOT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TfError {
    #[error("gains must be positive (k = {k}, d = {d})")]
    NonPositiveGain { k: f64, d: f64 },
    #[error("denominator is empty or has a zero leading coefficient")]
    DegenerateDenominator,
    #[error("numerator degree {num} exceeds denominator degree {den}")]
    Improper { num: usize, den: usize },
    #[error("order {0} is not supported (only 1 and 2)")]
    UnsupportedOrder(usize),
    #[error("pole {0} is not in the open left half plane")]
    Unstable(Complex64),
    #[error("frequency {0} rad/s must be positive")]
    NonPositiveFrequency(f64),
    #[error("damping ratio must be positive, got {0}")]
    NonPositiveDamping(f64),
    #[error("unknown transfer function kind '{0}'")]
    UnknownKind(String),
}

/// `num(s)/den(s)` with ascending-power coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTf {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

fn poly_eval(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| i as f64 * c)
        .collect()
}

impl RationalTf {
    pub fn new(num: Vec<f64>, mut den: Vec<f64>) -> Result<Self, TfError> {
        while den.len() > 1 && den.last() == Some(&0.0) {
            den.pop();
        }
        match den.last() {
            Some(&c) if c != 0.0 && c.is_finite() => {}
            _ => return Err(TfError::DegenerateDenominator),
        }
        let mut num = num;
        while num.len() > 1 && num.last() == Some(&0.0) {
            num.pop();
        }
        if num.is_empty() {
            num.push(0.0);
        }
        if num.len() > den.len() {
            return Err(TfError::Improper {
                num: num.len() - 1,
                den: den.len() - 1,
            });
        }
        Ok(RationalTf { num, den })
    }

    /// Degree of the denominator.
    pub fn order(&self) -> usize {
        self.den.len() - 1
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        poly_eval(&self.num, s) / poly_eval(&self.den, s)
    }

    pub fn dc_gain(&self) -> f64 {
        self.num[0] / self.den[0]
    }

    /// Same transfer function with a unit leading denominator coefficient.
    pub fn monic(&self) -> RationalTf {
        let lead = *self.den.last().unwrap();
        RationalTf {
            num: self.num.iter().map(|c| c / lead).collect(),
            den: self.den.iter().map(|c| c / lead).collect(),
        }
    }

    /// Unity-feedback closed loop `G/(1 + G)`.
    pub fn closed_loop(&self) -> RationalTf {
        let mut den = self.den.clone();
        for (i, &c) in self.num.iter().enumerate() {
            den[i] += c;
        }
        RationalTf {
            num: self.num.clone(),
            den,
        }
    }

    /// `G(s)/s`, cancelling a zero at the origin when there is one.
    pub fn times_inverse_s(&self) -> RationalTf {
        if self.num.len() > 1 && self.num[0] == 0.0 {
            RationalTf {
                num: self.num[1..].to_vec(),
                den: self.den.clone(),
            }
        } else {
            let mut den = vec![0.0];
            den.extend_from_slice(&self.den);
            RationalTf {
                num: self.num.clone(),
                den,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TfKind {
    /// Conventional FLL, frequency: `kd/(s² + ks + kd)`.
    ConvOmega,
    /// Conventional FLL, phase: `(ks + kd)/(s² + ks + kd)`.
    ConvTheta,
    /// Improved SRF-FLL, `ω̂`: `d/(s + d)`.
    SrfOmega,
    /// Improved SRF-FLL, `ω̂_b`: `kd/((s + k)(s + d))`.
    SrfOmegaB,
    /// Improved SRF-FLL, generated angle `θ̂`: `d/(s + d)`.
    SrfThetaHat,
    /// Improved SRF-FLL, phase difference `θ̂_e`: `ks/((s + k)(s + d))`.
    SrfThetaE,
    /// Improved SRF-FLL, phase estimate `θ̂_est`: `((k+d)s + kd)/((s + k)(s + d))`.
    SrfThetaEst,
}

impl TfKind {
    pub const ALL: [TfKind; 7] = [
        TfKind::ConvOmega,
        TfKind::ConvTheta,
        TfKind::SrfOmega,
        TfKind::SrfOmegaB,
        TfKind::SrfThetaHat,
        TfKind::SrfThetaE,
        TfKind::SrfThetaEst,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TfKind::ConvOmega => "conv_omega",
            TfKind::ConvTheta => "conv_theta",
            TfKind::SrfOmega => "srf_omega",
            TfKind::SrfOmegaB => "srf_omega_b",
            TfKind::SrfThetaHat => "srf_theta_hat",
            TfKind::SrfThetaE => "srf_theta_e",
            TfKind::SrfThetaEst => "srf_theta_est",
        }
    }
}

impl fmt::Display for TfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TfKind {
    type Err = TfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TfKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| TfError::UnknownKind(s.to_string()))
    }
}

fn check_gains(k: f64, d: f64) -> Result<(), TfError> {
    if k > 0.0 && d > 0.0 && k.is_finite() && d.is_finite() {
        Ok(())
    } else {
        Err(TfError::NonPositiveGain { k, d })
    }
}

pub fn build_tf(kind: TfKind, k: f64, d: f64) -> Result<RationalTf, TfError> {
    check_gains(k, d)?;
    let kd = k * d;
    let (num, den) = match kind {
        TfKind::ConvOmega => (vec![kd], vec![kd, k, 1.0]),
        TfKind::ConvTheta => (vec![kd, k], vec![kd, k, 1.0]),
        TfKind::SrfOmega | TfKind::SrfThetaHat => (vec![d], vec![d, 1.0]),
        TfKind::SrfOmegaB => (vec![kd], vec![kd, k + d, 1.0]),
        TfKind::SrfThetaE => (vec![0.0, k], vec![kd, k + d, 1.0]),
        TfKind::SrfThetaEst => (vec![kd, k + d], vec![kd, k + d, 1.0]),
    };
    RationalTf::new(num, den)
}

/// Open-loop gain of the frequency loop.
///
/// Without the extra loop filter this is `(d/s)·k/(s + k)`; with the selected
/// filter the two branches sum to one and the gain collapses to `d/s`.
pub fn open_loop_gain(k: f64, d: f64, with_selected_g: bool) -> Result<RationalTf, TfError> {
    check_gains(k, d)?;
    if with_selected_g {
        RationalTf::new(vec![d], vec![0.0, 1.0])
    } else {
        RationalTf::new(vec![d * k], vec![0.0, k, 1.0])
    }
}

/// Poles and, for second-order denominators, damping data.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderChar {
    pub poles: Vec<Complex64>,
    pub zeta: Option<f64>,
    pub omega_n: Option<f64>,
}

pub fn characteristic(tf: &RationalTf) -> Result<SecondOrderChar, TfError> {
    let den = &tf.den;
    match tf.order() {
        1 => Ok(SecondOrderChar {
            poles: vec![Complex64::new(-den[0] / den[1], 0.0)],
            zeta: None,
            omega_n: None,
        }),
        2 => {
            let (c, b, a) = (den[0], den[1], den[2]);
            let disc = b * b - 4.0 * a * c;
            let poles = if disc.abs() < REPEATED_ROOT_TOL * (b * b).max((4.0 * a * c).abs()) {
                let p = Complex64::new(-b / (2.0 * a), 0.0);
                vec![p, p]
            } else if disc > 0.0 {
                // Cancellation-free pair.
                let q = -0.5 * (b + b.signum() * disc.sqrt());
                let (r1, r2) = if q == 0.0 {
                    let r = (-c / a).sqrt();
                    (r, -r)
                } else {
                    (q / a, c / q)
                };
                let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
                vec![Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
            } else {
                let re = -b / (2.0 * a);
                let im = (-disc).sqrt() / (2.0 * a).abs();
                vec![Complex64::new(re, im), Complex64::new(re, -im)]
            };
            let (zeta, omega_n) = if c * a > 0.0 {
                (Some(b / (2.0 * (c * a).sqrt())), Some((c / a).sqrt()))
            } else {
                (None, None)
            };
            Ok(SecondOrderChar {
                poles,
                zeta,
                omega_n,
            })
        }
        n => Err(TfError::UnsupportedOrder(n)),
    }
}

pub fn bode_magnitude(tf: &RationalTf, omegas: &[f64]) -> Result<Vec<f64>, TfError> {
    omegas
        .iter()
        .map(|&w| {
            if w > 0.0 {
                Ok(tf.eval(Complex64::new(0.0, w)).norm())
            } else {
                Err(TfError::NonPositiveFrequency(w))
            }
        })
        .collect()
}

/// Unit-step response by partial fractions. Negative times give zero.
///
/// Distinct real, repeated real and complex-conjugate pole pairs each take
/// their own branch; a numerator of equal degree contributes the initial jump.
pub fn step_response(tf: &RationalTf, times: &[f64]) -> Result<Vec<f64>, TfError> {
    let ch = characteristic(tf)?;
    if let Some(p) = ch.poles.iter().find(|p| p.re >= 0.0) {
        return Err(TfError::Unstable(*p));
    }
    let dc = tf.dc_gain();
    let num = &tf.num;
    let dden = poly_derivative(&tf.den);

    // Residue of H(s)/s at a simple pole.
    let residue = |p: Complex64| poly_eval(num, p) / (p * poly_eval(&dden, p));

    let response: Box<dyn Fn(f64) -> f64> = match ch.poles.as_slice() {
        [p] => {
            let r = residue(*p).re;
            let p = p.re;
            Box::new(move |t| dc + r * (p * t).exp())
        }
        [p1, _] if p1.im != 0.0 => {
            let (p, r) = (*p1, residue(*p1));
            Box::new(move |t| dc + 2.0 * (r * (p * t).exp()).re)
        }
        [p1, p2] if p1 == p2 => {
            let p = p1.re;
            let a = tf.den[2];
            let np = poly_eval(num, Complex64::new(p, 0.0)).re;
            let dnp = poly_eval(&poly_derivative(num), Complex64::new(p, 0.0)).re;
            let coef_t = np / (a * p);
            let coef_1 = (dnp * p - np) / (a * p * p);
            Box::new(move |t| dc + (coef_1 + coef_t * t) * (p * t).exp())
        }
        [p1, p2] => {
            let (a, b) = (p1.re, p2.re);
            let (ra, rb) = (residue(*p1).re, residue(*p2).re);
            Box::new(move |t| dc + ra * (a * t).exp() + rb * (b * t).exp())
        }
        _ => return Err(TfError::UnsupportedOrder(tf.order())),
    };

    Ok(times
        .iter()
        .map(|&t| if t < 0.0 { 0.0 } else { response(t) })
        .collect())
}

/// Steady state of the auxiliary variable under a constant frequency error:
/// `V²·(k² + j·k·ω_e)/(k² + ω_e²)`.
pub fn steady_state_aux(k: f64, omega_e: f64, v: f64) -> Result<ComplexSample, TfError> {
    if !(k > 0.0 && v > 0.0) {
        return Err(TfError::NonPositiveGain { k, d: v });
    }
    let scale = v * v / (k * k + omega_e * omega_e);
    Ok(ComplexSample::new(k * k * scale, k * omega_e * scale))
}

/// Peak overshoot (percent) of the unit-step response of a standard
/// second-order system with damping `zeta`.
pub fn overshoot_percent(zeta: f64) -> Result<f64, TfError> {
    if !(zeta > 0.0) {
        return Err(TfError::NonPositiveDamping(zeta));
    }
    if zeta >= 1.0 {
        return Ok(0.0);
    }
    Ok(100.0 * (-PI * zeta / (1.0 - zeta * zeta).sqrt()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    const K: f64 = 120.0 * PI;

    /// Reference step response: RK4 on the controllable canonical realization
    /// of a strictly proper part plus the direct term.
    fn rk4_step_response(tf: &RationalTf, t_end: f64, n: usize) -> Vec<(f64, f64)> {
        let m = tf.monic();
        let order = m.order();
        let mut num = m.num.clone();
        num.resize(order + 1, 0.0);
        let direct = num[order];
        let b: Vec<f64> = (0..order).map(|i| num[i] - direct * m.den[i]).collect();
        let a = &m.den;
        let f = |x: &[f64]| -> Vec<f64> {
            let mut dx = vec![0.0; order];
            for i in 0..order - 1 {
                dx[i] = x[i + 1];
            }
            dx[order - 1] = 1.0 - (0..order).map(|i| a[i] * x[i]).sum::<f64>();
            dx
        };
        let h = t_end / n as f64;
        let mut x = vec![0.0; order];
        let mut out = Vec::with_capacity(n + 1);
        let y = |x: &[f64]| direct + (0..order).map(|i| b[i] * x[i]).sum::<f64>();
        out.push((0.0, y(&x)));
        for i in 0..n {
            let k1 = f(&x);
            let x2: Vec<f64> = x.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
            let k2 = f(&x2);
            let x3: Vec<f64> = x.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
            let k3 = f(&x3);
            let x4: Vec<f64> = x.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
            let k4 = f(&x4);
            for j in 0..order {
                x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            out.push(((i + 1) as f64 * h, y(&x)));
        }
        out
    }

    #[test]
    fn step_response_matches_rk4_for_every_kind() {
        for &(k, d) in &[
            (K, K),
            (K, 0.5 * K),
            (K, 2.0 * K),
            (K, 0.25 * K),
            (K, 0.1 * K),
        ] {
            for kind in TfKind::ALL {
                let tf = build_tf(kind, k, d).unwrap();
                let reference = rk4_step_response(&tf, 0.1, 20_000);
                let times: Vec<f64> = reference.iter().map(|&(t, _)| t).collect();
                let closed = step_response(&tf, &times).unwrap();
                for ((t, r), c) in reference.iter().zip(&closed) {
                    assert!((r - c).abs() < 1e-8, "{kind} d={d} t={t}: rk4 {r} vs {c}");
                }
            }
        }
    }

    #[test]
    fn repeated_pole_at_k_equals_d() {
        let tf = build_tf(TfKind::SrfOmegaB, K, K).unwrap();
        assert_eq!(tf.den, vec![K * K, 2.0 * K, 1.0]);
        let ch = characteristic(&tf).unwrap();
        assert_eq!(ch.poles, vec![Complex64::new(-K, 0.0); 2]);
        assert!((ch.zeta.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dc_gains() {
        for kind in TfKind::ALL {
            let tf = build_tf(kind, K, 0.7 * K).unwrap();
            let expected = if kind == TfKind::SrfThetaE { 0.0 } else { 1.0 };
            assert!((tf.dc_gain() - expected).abs() < 1e-15, "{kind}");
        }
    }

    #[test]
    fn conventional_optimal_damping() {
        let ch = characteristic(&build_tf(TfKind::ConvOmega, K, 0.5 * K).unwrap()).unwrap();
        assert!((ch.zeta.unwrap() - 0.707).abs() < 1e-3);
        assert!((ch.zeta.unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn conventional_critical_damping_boundary() {
        let ch = characteristic(&build_tf(TfKind::ConvOmega, K, 0.25 * K).unwrap()).unwrap();
        assert_eq!(ch.poles[0], ch.poles[1]);
        assert!((ch.poles[0].re + K / 2.0).abs() < 1e-9);
        assert!((ch.zeta.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn srf_omega_b_poles_are_gains() {
        for &d in &[0.25 * K, 0.5 * K, 2.0 * K, 3.3] {
            let ch = characteristic(&build_tf(TfKind::SrfOmegaB, K, d).unwrap()).unwrap();
            let mut re: Vec<f64> = ch.poles.iter().map(|p| p.re).collect();
            re.sort_by(f64::total_cmp);
            let mut want = [-K, -d];
            want.sort_by(f64::total_cmp);
            for (a, b) in re.iter().zip(&want) {
                assert!((a - b).abs() < 1e-9 * K);
            }
            let zeta = ch.zeta.unwrap();
            assert!((zeta - (K + d) / (2.0 * (K * d).sqrt())).abs() < 1e-12);
            assert!(zeta >= 1.0);
            let zw = zeta * ch.omega_n.unwrap();
            assert!((zw - 0.5 * (K + d)).abs() < 1e-9);
        }
    }

    #[test]
    fn perfect_square() {
        let ch = characteristic(&RationalTf::new(vec![1.0], vec![1.0, 2.0, 1.0]).unwrap()).unwrap();
        assert_eq!(ch.poles, vec![Complex64::new(-1.0, 0.0); 2]);
        assert_eq!(ch.zeta, Some(1.0));
        assert_eq!(ch.omega_n, Some(1.0));
    }

    #[test]
    fn order_three_is_rejected() {
        let tf = RationalTf::new(vec![1.0], vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(characteristic(&tf), Err(TfError::UnsupportedOrder(3)));
        assert!(step_response(&tf, &[0.0]).is_err());
    }

    #[test]
    fn invalid_inputs() {
        assert!(build_tf(TfKind::ConvOmega, 0.0, 1.0).is_err());
        assert!(build_tf(TfKind::ConvOmega, 1.0, -1.0).is_err());
        assert!("bogus".parse::<TfKind>().is_err());
        assert!(RationalTf::new(vec![1.0, 1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(RationalTf::new(vec![1.0], vec![0.0]).is_err());
        let unstable = RationalTf::new(vec![1.0], vec![-1.0, 1.0]).unwrap();
        assert!(matches!(
            step_response(&unstable, &[1.0]),
            Err(TfError::Unstable(_))
        ));
        let marginal = open_loop_gain(K, K, true).unwrap();
        assert!(matches!(
            step_response(&marginal, &[1.0]),
            Err(TfError::Unstable(_))
        ));
        let tf = build_tf(TfKind::SrfOmega, K, K).unwrap();
        assert!(bode_magnitude(&tf, &[0.0]).is_err());
    }

    #[test]
    fn open_loop_gain_forms() {
        let g = open_loop_gain(K, 2.0, true).unwrap();
        assert_eq!(g.num, vec![2.0]);
        assert_eq!(g.den, vec![0.0, 1.0]);

        let g = open_loop_gain(K, 0.5 * K, false).unwrap();
        let m = g.eval(Complex64::new(0.0, K)).norm();
        assert!((m - 0.5 * std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let closed = open_loop_gain(K, 0.3 * K, true).unwrap().closed_loop();
        let want = build_tf(TfKind::SrfOmega, K, 0.3 * K).unwrap();
        assert_eq!(closed, want);

        // Without the filter the closed loop is the conventional frequency model.
        let closed = open_loop_gain(K, 0.3 * K, false).unwrap().closed_loop();
        assert_eq!(closed, build_tf(TfKind::ConvOmega, K, 0.3 * K).unwrap());
    }

    #[test]
    fn bode_examples() {
        let srf = build_tf(TfKind::SrfOmegaB, K, K).unwrap();
        let conv = build_tf(TfKind::ConvOmega, K, K).unwrap();
        let m = bode_magnitude(&srf, &[K]).unwrap()[0];
        assert!((m - 0.5).abs() < 1e-12);
        assert!((20.0 * m.log10() + 6.0206).abs() < 1e-4);
        assert!((bode_magnitude(&conv, &[K]).unwrap()[0] - 1.0).abs() < 1e-12);
        for tf in [&srf, &conv] {
            assert!((bode_magnitude(tf, &[1e-6]).unwrap()[0] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn step_response_examples() {
        let d = 200.0;
        let tf = build_tf(TfKind::SrfOmega, K, d).unwrap();
        let y = step_response(&tf, &[1.0 / d, 50f64.ln() / d, 0.0, -1.0]).unwrap();
        assert!((y[0] - (1.0 - (-1f64).exp())).abs() < 1e-12);
        assert!((y[0] - 0.632_12).abs() < 1e-5);
        assert!((y[1] - 0.98).abs() < 1e-12);
        assert!(y[2].abs() < 1e-15);
        assert_eq!(y[3], 0.0);

        for kind in [TfKind::ConvOmega, TfKind::SrfOmegaB, TfKind::SrfThetaE] {
            let y = step_response(&build_tf(kind, K, 0.5 * K).unwrap(), &[0.0]).unwrap();
            assert!(y[0].abs() < 1e-12, "{kind}");
        }
        // The phase-estimate model has a zero but is still strictly proper.
        let est = build_tf(TfKind::SrfThetaEst, K, K).unwrap();
        let y = step_response(&est, &[0.0, 1.0]).unwrap();
        assert!(y[0].abs() < 1e-12 && (y[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn biproper_step_response_starts_at_direct_term() {
        // (2s + 1)/(s + 1): y(0+) = 2, y(∞) = 1.
        let tf = RationalTf::new(vec![1.0, 2.0], vec![1.0, 1.0]).unwrap();
        let y = step_response(&tf, &[0.0, 1.0]).unwrap();
        assert!((y[0] - 2.0).abs() < 1e-15);
        assert!((y[1] - (1.0 + (-1f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn steady_state_aux_examples() {
        assert_eq!(
            steady_state_aux(K, 0.0, 1.0).unwrap(),
            ComplexSample::new(1.0, 0.0)
        );
        assert!((steady_state_aux(K, 0.0, 0.8).unwrap().re - 0.64).abs() < 1e-15);
        let x = steady_state_aux(K, 2.0 * PI * 5.0, 1.0).unwrap();
        assert!((x.re - 0.99310).abs() < 5e-6);
        assert!((x.im - 0.08276).abs() < 5e-6);
        let x = steady_state_aux(100.0, 100.0, 1.0).unwrap();
        assert!((x.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(steady_state_aux(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn overshoot_examples() {
        assert_eq!(overshoot_percent(1.0).unwrap(), 0.0);
        assert_eq!(overshoot_percent(3.0).unwrap(), 0.0);
        assert!((overshoot_percent(0.707).unwrap() - 4.33).abs() < 0.01);
        assert!((overshoot_percent(0.5).unwrap() - 16.30).abs() < 0.01);
        assert!(overshoot_percent(0.0).is_err());
    }

    #[test]
    fn times_inverse_s_cancels_zero() {
        let tf = build_tf(TfKind::SrfThetaE, K, 2.0 * K).unwrap();
        let ramp = tf.times_inverse_s();
        assert_eq!(ramp.num, vec![K]);
        assert_eq!(ramp.den, tf.den);
        let g = build_tf(TfKind::SrfOmega, K, K).unwrap().times_inverse_s();
        assert_eq!(g.den, vec![0.0, K, 1.0]);
    }
}
