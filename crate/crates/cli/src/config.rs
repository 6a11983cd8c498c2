//! Experiment configuration: strict JSON with powers in dBW.

use std::path::Path;

use fdnoma::mc::{Metric, SweepAxis};
use fdnoma::model::{db_to_linear, FarDistanceModel, SystemParams};
use fdnoma::Strategy;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Swept parameter and its values, in configuration units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: String,
    pub values: Vec<f64>,
}

/// One experiment. Every field has a default so a config only lists what
/// it changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Free-form curve name copied to the `curve` output column.
    pub label: String,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub lambda_n: f64,
    pub lambda_f: f64,
    pub alpha: f64,
    pub p_s_dbw: f64,
    pub p_r_dbw: f64,
    pub noise_dbw: f64,
    pub a1: f64,
    pub a2: f64,
    pub rate1: f64,
    pub rate2: f64,
    pub n_t: usize,
    pub n_r: usize,
    pub k_relays: usize,
    pub q_r: f64,
    pub sigma_rr_sq: f64,
    pub far_distance_model: FarDistanceModel,
    pub relay_offset: f64,
    pub strategies: Vec<Strategy>,
    pub metrics: Vec<Metric>,
    pub trials: u64,
    pub seed: u64,
    pub sweep: Option<Sweep>,
    pub quadrature_m: usize,
    pub out: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let p = SystemParams::default();
        Self {
            label: String::new(),
            r1: p.r1,
            r2: p.r2,
            r3: p.r3,
            lambda_n: p.lambda_n,
            lambda_f: p.lambda_f,
            alpha: p.alpha,
            p_s_dbw: 30.0,
            p_r_dbw: 30.0,
            noise_dbw: 1.0,
            a1: p.a1,
            a2: p.a2,
            rate1: p.rate1,
            rate2: p.rate2,
            n_t: p.n_t,
            n_r: p.n_r,
            k_relays: p.k_relays,
            q_r: p.q_r,
            sigma_rr_sq: p.sigma_rr_sq,
            far_distance_model: p.far_distance_model,
            relay_offset: p.relay_offset,
            strategies: vec![Strategy::Rnrf, Strategy::Nnnf],
            metrics: vec![Metric::Near, Metric::Far],
            trials: 100_000,
            seed: 1,
            sweep: None,
            quadrature_m: 100,
            out: None,
        }
    }
}

/// Sweepable configuration keys with their core axis. Power keys are in
/// dBW and converted on the way in.
const AXES: [(&str, SweepAxis); 19] = [
    ("r1", SweepAxis::R1),
    ("r2", SweepAxis::R2),
    ("r3", SweepAxis::R3),
    ("lambda_n", SweepAxis::LambdaN),
    ("lambda_f", SweepAxis::LambdaF),
    ("alpha", SweepAxis::Alpha),
    ("p_s_dbw", SweepAxis::PS),
    ("p_r_dbw", SweepAxis::PR),
    ("noise_dbw", SweepAxis::NoisePower),
    ("a1", SweepAxis::A1),
    ("a2", SweepAxis::A2),
    ("rate1", SweepAxis::Rate1),
    ("rate2", SweepAxis::Rate2),
    ("n_t", SweepAxis::NT),
    ("n_r", SweepAxis::NR),
    ("k_relays", SweepAxis::KRelays),
    ("q_r", SweepAxis::QR),
    ("sigma_rr_sq", SweepAxis::SigmaRrSq),
    ("relay_offset", SweepAxis::RelayOffset),
];

/// Core axis for a configuration key.
pub fn parse_axis(name: &str) -> Result<SweepAxis, CliError> {
    AXES.iter()
        .find(|(k, _)| *k == name)
        .map(|(_, a)| *a)
        .ok_or_else(|| {
            CliError::Config(format!(
                "unknown sweep axis `{name}`; valid axes: {}",
                AXES.iter().map(|(k, _)| *k).collect::<Vec<_>>().join(", ")
            ))
        })
}

fn to_core_value(axis: SweepAxis, value: f64) -> f64 {
    match axis {
        SweepAxis::PS | SweepAxis::PR | SweepAxis::NoisePower => db_to_linear(value),
        _ => value,
    }
}

/// A fully resolved parameter point.
#[derive(Clone, Debug)]
pub struct Point {
    /// Axis value in configuration units; `None` without a sweep.
    pub axis_value: Option<f64>,
    pub params: SystemParams,
}

impl ExperimentConfig {
    /// Linear-unit parameters before any sweep is applied.
    pub fn base_params(&self) -> SystemParams {
        SystemParams {
            r1: self.r1,
            r2: self.r2,
            r3: self.r3,
            lambda_n: self.lambda_n,
            lambda_f: self.lambda_f,
            alpha: self.alpha,
            p_s: db_to_linear(self.p_s_dbw),
            p_r: db_to_linear(self.p_r_dbw),
            noise_power: db_to_linear(self.noise_dbw),
            a1: self.a1,
            a2: self.a2,
            rate1: self.rate1,
            rate2: self.rate2,
            n_t: self.n_t,
            n_r: self.n_r,
            k_relays: self.k_relays,
            q_r: self.q_r,
            sigma_rr_sq: self.sigma_rr_sq,
            far_distance_model: self.far_distance_model,
            relay_offset: self.relay_offset,
        }
    }

    /// Checks every constraint, naming the offending key.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(CliError::Config("`trials` must be >= 1".into()));
        }
        if self.quadrature_m == 0 {
            return Err(CliError::Config("`quadrature_m` must be >= 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(CliError::Config("`strategies` must not be empty".into()));
        }
        if self.metrics.is_empty() {
            return Err(CliError::Config("`metrics` must not be empty".into()));
        }
        for (key, v) in [("p_s_dbw", self.p_s_dbw), ("p_r_dbw", self.p_r_dbw), ("noise_dbw", self.noise_dbw)] {
            if !v.is_finite() {
                return Err(CliError::Config(format!("`{key}` must be finite, got {v}")));
            }
        }
        self.points().map(|_| ())
    }

    /// Parameter points in ascending axis order.
    pub fn points(&self) -> Result<Vec<Point>, CliError> {
        let base = self.base_params();
        let Some(sweep) = &self.sweep else {
            base.validate().map_err(config_error)?;
            return Ok(vec![Point { axis_value: None, params: base }]);
        };
        let axis = parse_axis(&sweep.axis)?;
        if sweep.values.is_empty() {
            return Err(CliError::Config("`sweep.values` must not be empty".into()));
        }
        let mut values = sweep.values.clone();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config("`sweep.values` must be finite".into()));
        }
        values.sort_by(f64::total_cmp);
        values
            .into_iter()
            .map(|v| {
                let params = axis
                    .apply(&base, to_core_value(axis, v))
                    .map_err(|e| CliError::Config(format!("sweep {} = {v}: {e}", sweep.axis)))?;
                Ok(Point { axis_value: Some(v), params })
            })
            .collect()
    }
}

fn config_error(e: fdnoma::Error) -> CliError {
    match e {
        fdnoma::Error::InvalidParams { field, reason } => {
            CliError::Config(format!("invalid `{}`: {reason}", config_key(field)))
        }
        other => CliError::Config(other.to_string()),
    }
}

/// Configuration key of a core parameter name.
fn config_key(field: &str) -> &str {
    match field {
        "p_s" => "p_s_dbw",
        "p_r" => "p_r_dbw",
        "noise_power" => "noise_dbw",
        other => other,
    }
}

/// A config file holds one experiment object or an array of them.
pub fn parse_experiments(value: Value) -> Result<Vec<ExperimentConfig>, CliError> {
    let items = match value {
        Value::Array(items) => items,
        obj @ Value::Object(_) => vec![obj],
        _ => return Err(CliError::Config("config must be a JSON object or an array of objects".into())),
    };
    if items.is_empty() {
        return Err(CliError::Config("config array is empty".into()));
    }
    items
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            serde_json::from_value::<ExperimentConfig>(v)
                .map_err(|e| CliError::Config(format!("experiment {i}: {e}")))
        })
        .collect()
}

pub fn read_config(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Applies `key=value` overrides. The value is parsed as JSON when possible
/// and taken as a string otherwise, so `strategies=["nnnf"]` and
/// `far_distance_model=exact` both work. Dotted keys reach into nested
/// objects (`sweep.values=[0,10]`).
pub fn apply_overrides(value: &mut Value, overrides: &[String]) -> Result<(), CliError> {
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{item}`")))?;
        let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        match &mut *value {
            Value::Array(items) => {
                for v in items {
                    set_path(v, key, parsed.clone())?;
                }
            }
            v => set_path(v, key, parsed)?,
        }
    }
    Ok(())
}

fn set_path(target: &mut Value, key: &str, v: Value) -> Result<(), CliError> {
    let mut cur = target;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("--set {key}: `{part}` is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), v);
            return Ok(());
        }
        cur = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}
