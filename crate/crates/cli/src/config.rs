use std::path::Path;

use gridlock::harness::{Suite, DEFAULT_WARMUP};
use gridlock::{EstimatorKind, FllGains, GridScenario, TfKind};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// One experiment: every subcommand reads the parts it needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_estimator")]
    pub estimator: EstimatorKind,
    #[serde(default)]
    pub gains: FllGains,
    #[serde(default)]
    pub scenario: Option<GridScenario>,
    #[serde(default = "default_warmup")]
    pub warmup_s: f64,
    #[serde(default)]
    pub suite: Option<SuiteSelection>,
    #[serde(default)]
    pub bode: Option<BodeConfig>,
}

fn default_estimator() -> EstimatorKind {
    EstimatorKind::SrfFll
}

fn default_warmup() -> f64 {
    DEFAULT_WARMUP
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SuiteSelection {
    One(SuiteName),
    Many(Vec<Suite>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SuiteName {
    Suite(Suite),
    All(AllSuites),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllSuites {
    All,
}

impl SuiteSelection {
    pub fn suites(&self) -> Vec<Suite> {
        match self {
            SuiteSelection::One(SuiteName::Suite(s)) => vec![*s],
            SuiteSelection::One(SuiteName::All(_)) => Suite::ALL.to_vec(),
            SuiteSelection::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodeConfig {
    pub k: f64,
    pub d: f64,
    pub kinds: Vec<TfKind>,
    #[serde(default)]
    pub omega_min: Option<f64>,
    #[serde(default)]
    pub omega_max: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    /// Extra frequencies evaluated in addition to the log grid.
    #[serde(default)]
    pub omegas: Vec<f64>,
}

impl BodeConfig {
    /// Log-spaced grid plus the explicit points, sorted and deduplicated.
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        let mut out = Vec::new();
        match (self.omega_min, self.omega_max, self.points) {
            (Some(lo), Some(hi), Some(n)) => {
                if !(lo > 0.0 && hi > lo && hi.is_finite() && n >= 2) {
                    return Err(CliError::Usage(format!(
                        "bad frequency grid: omega_min {lo}, omega_max {hi}, points {n}"
                    )));
                }
                let (a, b) = (lo.log10(), hi.log10());
                out.extend((0..n).map(|i| {
                    if i + 1 == n {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)
                    }
                }));
            }
            (None, None, None) => {}
            _ => {
                return Err(CliError::Usage(
                    "bode grid needs omega_min, omega_max and points together".into(),
                ))
            }
        }
        if let Some(bad) = self.omegas.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(CliError::Usage(format!("bad bode frequency {bad}")));
        }
        out.extend(&self.omegas);
        if out.is_empty() {
            return Err(CliError::Usage("bode frequency grid is empty".into()));
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        Ok(out)
    }
}

/// Reads the config document (or `{}`), applies `key=value` overrides and
/// returns both the typed config and the effective JSON.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<(Config, Value), CliError> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("cannot parse {}: {e}", p.display())))?
        }
        None => Value::Object(Default::default()),
    };
    for item in overrides {
        apply_override(&mut doc, item)?;
    }
    let config: Config = serde_json::from_value(doc.clone())
        .map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
    Ok((config, doc))
}

/// Sets a dotted path such as `gains.d=753.98` or `scenario.events.0.df_hz=-5`.
/// The value is parsed as JSON when possible, otherwise taken as a string.
pub fn apply_override(doc: &mut Value, item: &str) -> Result<(), CliError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override '{item}' is not key=value")))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Usage(format!("bad override key '{key}'")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));

    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(part.to_string(), value);
                    return Ok(());
                }
                map.entry(part.to_string()).or_insert(Value::Null)
            }
            Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| CliError::Usage(format!("'{part}' in '{key}' is not an index")))?;
                let len = items.len();
                let slot = items.get_mut(idx).ok_or_else(|| {
                    CliError::Usage(format!("index {idx} in '{key}' out of range (len {len})"))
                })?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                return Err(CliError::Usage(format!(
                    "'{key}' descends into a non-object value"
                )))
            }
        };
    }
    unreachable!("loop returns on the last key part")
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn overrides() {
        let mut doc =
            json!({"gains": {"k": 1.0, "d": 2.0}, "scenario": {"events": [{"df_hz": 5.0}]}});
        apply_override(&mut doc, "gains.d=753.98").unwrap();
        apply_override(&mut doc, "scenario.events.0.df_hz=-5").unwrap();
        apply_override(&mut doc, "estimator=srf_fll0").unwrap();
        apply_override(&mut doc, "bode.k=3").unwrap();
        assert_eq!(doc["gains"]["d"], json!(753.98));
        assert_eq!(doc["scenario"]["events"][0]["df_hz"], json!(-5));
        assert_eq!(doc["estimator"], json!("srf_fll0"));
        assert_eq!(doc["bode"]["k"], json!(3));
        assert!(apply_override(&mut doc, "gains").is_err());
        assert!(apply_override(&mut doc, "gains.k.x=1").is_err());
        assert!(apply_override(&mut doc, "scenario.events.4.df_hz=1").is_err());
        assert!(apply_override(&mut doc, "a..b=1").is_err());
    }

    #[test]
    fn suite_selection() {
        let c: Config = serde_json::from_value(json!({"suite": "all"})).unwrap();
        assert_eq!(c.suite.unwrap().suites().len(), 4);
        let c: Config = serde_json::from_value(json!({"suite": "optimal_fig7"})).unwrap();
        assert_eq!(c.suite.unwrap().suites(), vec![Suite::OptimalFig7]);
        let c: Config =
            serde_json::from_value(json!({"suite": ["optimal_fig7", "phase_step_fig6"]})).unwrap();
        assert_eq!(c.suite.unwrap().suites().len(), 2);
        assert!(serde_json::from_value::<Config>(json!({"suite": "fig9"})).is_err());
        assert!(serde_json::from_value::<Config>(json!({"sweet": "all"})).is_err());
    }

    #[test]
    fn bode_grid() {
        let mut b = BodeConfig {
            k: 1.0,
            d: 1.0,
            kinds: vec![TfKind::ConvOmega],
            omega_min: Some(0.1),
            omega_max: Some(1e4),
            points: Some(6),
            omegas: vec![120.0 * std::f64::consts::PI],
        };
        let g = b.grid().unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 0.1);
        assert_eq!(*g.last().unwrap(), 1e4);
        b.points = Some(1);
        assert!(b.grid().is_err());
        b.points = None;
        assert!(b.grid().is_err());
        b.omega_min = None;
        b.omega_max = None;
        assert_eq!(b.grid().unwrap().len(), 1);
        b.omegas = vec![-1.0];
        assert!(b.grid().is_err());
    }
}
