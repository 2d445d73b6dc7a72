//! Run configuration: a JSON document, optionally patched by `key=value`
//! overrides, then parsed into typed per-model and per-task parameters.
//! Unknown keys are errors at every level.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use qherm_core::gaugeem::{PolyFn, PulseSpec};
use qherm_core::models::MetricCase;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Spectrum,
    MetricCheck,
    Observables,
    GaugeCheck,
    SeriesScan,
    Rates,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Spectrum => "spectrum",
            TaskKind::MetricCheck => "metric-check",
            TaskKind::Observables => "observables",
            TaskKind::GaugeCheck => "gauge-check",
            TaskKind::SeriesScan => "series-scan",
            TaskKind::Rates => "rates",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Swanson,
    Cubic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub margin: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    #[serde(default = "empty_object")]
    pub params: Value,
    pub basis: BasisConfig,
    #[serde(default)]
    pub task: Option<TaskKind>,
    #[serde(default = "empty_object")]
    pub task_params: Value,
    #[serde(default)]
    pub output: OutputConfig,
}

fn empty_object() -> Value {
    Value::Object(Map::new())
}

/// Which Swanson metric(s) a run covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseSelection {
    #[serde(rename = "i")]
    PositionQ,
    #[serde(rename = "ii")]
    MomentumQ,
    #[serde(rename = "both")]
    Both,
}

impl CaseSelection {
    pub fn cases(self) -> Vec<MetricCase> {
        match self {
            CaseSelection::PositionQ => vec![MetricCase::PositionQ],
            CaseSelection::MomentumQ => vec![MetricCase::MomentumQ],
            CaseSelection::Both => vec![MetricCase::PositionQ, MetricCase::MomentumQ],
        }
    }
}

fn one() -> f64 {
    1.0
}

fn both() -> CaseSelection {
    CaseSelection::Both
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwansonParams {
    #[serde(default = "one")]
    pub m1: f64,
    pub epsilon: f64,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default = "both")]
    pub metric_case: CaseSelection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubicParams {
    #[serde(default)]
    pub g: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelParams {
    Swanson(SwansonParams),
    Cubic(CubicParams),
}

pub fn default_g_list() -> Vec<f64> {
    vec![0.04, 0.02, 0.01]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    #[serde(default = "SpectrumParams::default_count")]
    pub count: usize,
}

impl SpectrumParams {
    fn default_count() -> usize {
        20
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanParams {
    #[serde(default = "default_g_list")]
    pub g_list: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesParams {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesScanParams {
    #[serde(default = "default_g_list")]
    pub g_list: Vec<f64>,
    /// Coupling for the single-point ground-state check.
    #[serde(default = "SeriesScanParams::default_oracle_g")]
    pub oracle_g: f64,
    /// Levels whose first-order states are compared with exact ones.
    #[serde(default = "SeriesScanParams::default_levels")]
    pub levels: Vec<usize>,
}

impl SeriesScanParams {
    fn default_oracle_g() -> f64 {
        0.05
    }
    fn default_levels() -> Vec<usize> {
        vec![0, 1, 2]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeCheckParams {
    #[serde(default = "GaugeCheckParams::default_alpha")]
    pub alpha: Vec<f64>,
    #[serde(default = "GaugeCheckParams::default_potential")]
    pub potential: Vec<f64>,
    #[serde(default = "one")]
    pub e_charge: f64,
    /// Eigenstates moved by the phase in the probability checks.
    #[serde(default = "GaugeCheckParams::default_levels")]
    pub levels: Vec<usize>,
    #[serde(default = "GaugeCheckParams::default_grid")]
    pub grid: GridConfig,
    /// Wavenumber of the plane-wave similarity check; skipped when absent.
    #[serde(default)]
    pub plane_wave_k: Option<f64>,
}

impl GaugeCheckParams {
    fn default_alpha() -> Vec<f64> {
        vec![0.0, 0.0, 0.1]
    }
    fn default_potential() -> Vec<f64> {
        vec![0.0, 0.3]
    }
    fn default_levels() -> Vec<usize> {
        vec![0]
    }
    fn default_grid() -> GridConfig {
        GridConfig {
            lo: -6.0,
            hi: 6.0,
            step: 0.05,
        }
    }

    pub fn alpha_fn(&self) -> Result<PolyFn, CliError> {
        PolyFn::real(&self.alpha).map_err(|e| CliError::config("task_params.alpha", e))
    }

    pub fn potential_fn(&self) -> Result<PolyFn, CliError> {
        PolyFn::real(&self.potential).map_err(|e| CliError::config("task_params.potential", e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RouteSelection {
    #[serde(rename = "HPicture")]
    NonHermitian,
    #[serde(rename = "hPicture")]
    Hermitian,
    #[serde(rename = "both")]
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transition3dConfig {
    pub from: [usize; 3],
    pub to: [usize; 3],
    pub polarization: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesParams {
    /// `[i, j]` pairs: the element is `<i| ... |j>`.
    #[serde(default = "RatesParams::default_transitions")]
    pub transitions: Vec<[usize; 2]>,
    #[serde(default = "RatesParams::default_pulse")]
    pub pulse: PulseSpec,
    #[serde(default = "one")]
    pub e_charge: f64,
    #[serde(default = "RatesParams::default_route")]
    pub route: RouteSelection,
    /// Repeat the table for each of these `epsilon` (Swanson only).
    #[serde(default)]
    pub epsilon_list: Option<Vec<f64>>,
    /// Compare the two routes on all pairs up to this level.
    #[serde(default)]
    pub route_levels: Option<usize>,
    /// Dipole identity on all pairs up to this level.
    #[serde(default)]
    pub dipole_levels: Option<usize>,
    #[serde(default)]
    pub transitions_3d: Vec<Transition3dConfig>,
}

impl RatesParams {
    fn default_transitions() -> Vec<[usize; 2]> {
        vec![[0, 1]]
    }
    fn default_pulse() -> PulseSpec {
        PulseSpec {
            amplitude: 1.0,
            center: 1.0,
            width: 0.5,
        }
    }
    fn default_route() -> RouteSelection {
        RouteSelection::Hermitian
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::config("config", e))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        serde_json::from_value(value).map_err(|e| CliError::config("config", e))
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        Ok(match self.model {
            ModelKind::Swanson => ModelParams::Swanson(parse_section("params", &self.params)?),
            ModelKind::Cubic => ModelParams::Cubic(parse_section("params", &self.params)?),
        })
    }

    pub fn task_params<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        parse_section("task_params", &self.task_params)
    }
}

fn parse_section<T: DeserializeOwned>(key: &'static str, v: &Value) -> Result<T, CliError> {
    serde_json::from_value(v.clone()).map_err(|e| CliError::config(key, e))
}

/// Apply `a.b.c=value` to a JSON tree. The value is read as JSON when it
/// parses, as a bare string otherwise. Intermediate objects are created.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| {
        CliError::config_msg("--param", format!("expected key=value, got `{spec}`"))
    })?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::config_msg(
            "--param",
            format!("bad key path `{path}`"),
        ));
    }
    let mut node = root;
    for (depth, key) in keys.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| {
            CliError::config_msg(
                "--param",
                format!("`{}` is not an object", keys[..depth].join(".")),
            )
        })?;
        if depth + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj.entry(key.to_string()).or_insert_with(empty_object);
    }
    unreachable!("key path has at least one segment")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        r#"{"model":"swanson","params":{"epsilon":0.4},"basis":{"N":64,"margin":8}}"#;

    #[test]
    fn parses_minimal() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.model, ModelKind::Swanson);
        match c.model_params().unwrap() {
            ModelParams::Swanson(s) => {
                assert_eq!(s.m1, 1.0);
                assert_eq!(s.metric_case, CaseSelection::Both);
            }
            ModelParams::Cubic(_) => panic!("wrong model"),
        }
        let sp: SpectrumParams = c.task_params().unwrap();
        assert_eq!(sp.count, 20);
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = MINIMAL.replace("\"margin\":8", "\"margin\":8,\"extra\":1");
        assert!(RunConfig::from_json(&bad).is_err());
        let c = RunConfig::from_json(&MINIMAL.replace("0.4}", "0.4,\"mass\":2}")).unwrap();
        assert!(c.model_params().is_err());
    }

    #[test]
    fn overrides() {
        let mut v: Value = serde_json::from_str(MINIMAL).unwrap();
        apply_override(&mut v, "params.epsilon=0.6").unwrap();
        apply_override(&mut v, "params.metric_case=ii").unwrap();
        apply_override(&mut v, "task_params.g_list=[0.1,0.05,0.025]").unwrap();
        assert_eq!(v["params"]["epsilon"], 0.6);
        assert_eq!(v["params"]["metric_case"], "ii");
        assert_eq!(v["task_params"]["g_list"][2], 0.025);
        assert!(apply_override(&mut v, "noequals").is_err());
        assert!(apply_override(&mut v, "params.epsilon.deeper=1").is_err());
    }
}
