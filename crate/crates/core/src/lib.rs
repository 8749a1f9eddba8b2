//! Grid synchronization with frequency-locked loops in the synchronous frame.
//!
//! * [`signal`] synthesizes positive-sequence grid voltages with scripted
//!   frequency, phase and amplitude events.
//! * [`fll`] holds the conventional ROGI-FLL and the synchronous-frame
//!   estimators as discrete-time state machines.
//! * [`small_signal`] builds the closed- and open-loop transfer functions of the
//!   loops and evaluates them in closed form (roots, Bode magnitude, step
//!   response).
//! * [`harness`] runs estimators over scenarios and measures step metrics.
//! * [`validation`] checks the simulated loops against the analytic models.

pub mod fll;
pub mod harness;
pub mod signal;
pub mod small_signal;
pub mod validation;

pub use fll::{Estimator, EstimatorKind, Fll, FllError, FllGains, FllOutputs};
pub use signal::{ComplexSample, GridEvent, GridParams, GridScenario, GroundTruth};
pub use small_signal::{RationalTf, TfKind};
