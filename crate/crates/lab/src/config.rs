//! Run configuration: a JSON object from `--config`, overlaid by inline
//! flags, split into the common keys and a typed per-command part.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use cylfock::pointset::{Descriptor, Metric};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::LabError;

/// Which output files to write (plot files are always written).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

/// Keys shared by every command.
#[derive(Clone, Debug, PartialEq)]
pub struct Common {
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    pub format: Format,
}

pub const COMMON_KEYS: [&str; 4] = ["seed", "threads", "out", "format"];

/// Reads a config file; it must hold a JSON object.
pub fn load_file(path: &Path) -> Result<Map<String, Value>, LabError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_object(&text)
}

pub fn parse_object(text: &str) -> Result<Map<String, Value>, LabError> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(LabError::Config("config must be a JSON object".into())),
        Err(e) => Err(LabError::Config(format!("malformed config JSON: {e}"))),
    }
}

/// Interprets an inline flag value: JSON if it parses, a string otherwise.
pub fn flag_value(s: &str) -> Value {
    serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string()))
}

/// Removes and validates the common keys.
pub fn split_common(map: &mut Map<String, Value>) -> Result<Common, LabError> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        #[serde(default)]
        seed: u64,
        threads: Option<usize>,
        out: Option<PathBuf>,
        #[serde(default)]
        format: Format,
    }
    let mut common = Map::new();
    for k in COMMON_KEYS {
        if let Some(v) = map.remove(k) {
            common.insert(k.to_string(), v);
        }
    }
    let raw: Raw = serde_json::from_value(Value::Object(common))
        .map_err(|e| LabError::Config(format!("common keys: {e}")))?;
    if raw.threads == Some(0) {
        return Err(LabError::Config("threads must be at least 1".into()));
    }
    Ok(Common {
        seed: raw.seed,
        threads: raw.threads,
        out: raw.out.unwrap_or_else(|| PathBuf::from("out")),
        format: raw.format,
    })
}

/// Deserializes the command part, rejecting unknown keys.
pub fn typed<T: DeserializeOwned>(map: Map<String, Value>) -> Result<T, LabError> {
    serde_json::from_value(Value::Object(map)).map_err(|e| LabError::Config(e.to_string()))
}

/// A point-set descriptor given inline or as a path to a JSON file. Paths
/// are resolved to the descriptor before the input is echoed.
pub fn resolve_points(v: &Value) -> Result<Descriptor, LabError> {
    match v {
        Value::String(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| LabError::Config(format!("cannot read point set {path}: {e}")))?;
            Descriptor::parse(&text).map_err(|e| LabError::Config(e.to_string()))
        }
        other => Descriptor::from_value(other.clone()).map_err(|e| LabError::Config(e.to_string())),
    }
}

fn default_alpha() -> f64 {
    PI
}

fn default_r_list() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
}

fn default_k_list() -> Vec<usize> {
    vec![24, 48]
}

fn default_margin() -> usize {
    6
}

fn default_gram_tol() -> f64 {
    1e-16
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub points: Value,
    #[serde(default = "default_r_list")]
    pub r_list: Vec<f64>,
    /// Cap on window centres per height; 0 examines all critical centres.
    #[serde(default)]
    pub w_samples: usize,
    #[serde(default)]
    pub metric: Metric,
    /// When given, `Q*` against `Lambda_alpha` is reported.
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    pub points: Value,
    #[serde(default)]
    pub nu: f64,
    #[serde(rename = "K_list", default = "default_k_list")]
    pub k_list: Vec<usize>,
    #[serde(default = "default_margin")]
    pub margin: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RieszConfig {
    pub points: Value,
    #[serde(default)]
    pub nu: f64,
    /// Central sub-sets `|index| <= K`; the whole set when absent.
    #[serde(rename = "K_list")]
    pub k_list: Option<Vec<usize>>,
    #[serde(default = "default_gram_tol")]
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub beta_min: f64,
    pub beta_max: f64,
    pub steps: usize,
    #[serde(rename = "K_list", default = "default_k_list")]
    pub k_list: Vec<usize>,
    #[serde(default = "default_margin")]
    pub margin: usize,
    #[serde(default)]
    pub nu: f64,
    #[serde(default = "default_gram_tol")]
    pub tol: f64,
}

/// Interpolation data: `"zero"`, `"unimodular"` (random phases on the
/// weighted unit circle, `a_n = e^{2 pi i u_n} e^{(alpha/2)|z_n|^2}`), or
/// `{"values": [[re, im], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSpec {
    Kind(DataKind),
    Values(DataValues),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataValues {
    pub values: Vec<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    Zero,
    Unimodular,
}

fn default_data() -> DataSpec {
    DataSpec::Kind(DataKind::Unimodular)
}

fn default_interp_rel_tol() -> f64 {
    1e-8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpolateConfig {
    pub points: Value,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_data")]
    pub data: DataSpec,
    /// Integration band `[y_lo, y_hi]`; node extent +- 5 when absent.
    pub band: Option<[f64; 2]>,
    #[serde(default = "default_interp_rel_tol")]
    pub rel_tol: f64,
}

fn default_modes() -> Vec<(i64, [f64; 2])> {
    vec![(0, [1.0, 0.0])]
}

fn default_n_probes() -> usize {
    20
}

fn default_probe_y() -> f64 {
    2.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructConfig {
    pub points: Value,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub beta: f64,
    /// Source function `sum c_k phi_k / ||phi_k||` as `[k, [re, im]]`.
    #[serde(default = "default_modes")]
    pub modes: Vec<(i64, [f64; 2])>,
    #[serde(default = "default_n_probes")]
    pub n_probes: usize,
    /// Probes are drawn in `[0, 1) x [-probe_y, probe_y]`.
    #[serde(default = "default_probe_y")]
    pub probe_y: f64,
}

fn default_growth_y() -> f64 {
    8.0
}

fn default_ny() -> usize {
    161
}

fn default_nx() -> usize {
    16
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    pub points: Value,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_growth_y")]
    pub y_max: f64,
    #[serde(default = "default_ny")]
    pub ny: usize,
    #[serde(default = "default_nx")]
    pub nx: usize,
}

fn default_kernel_params() -> Vec<[f64; 2]> {
    vec![[PI, 0.0], [2.0, 0.3], [5.0, 0.9]]
}

fn default_n_pairs() -> usize {
    50
}

fn default_kernel_y() -> f64 {
    3.0
}

fn default_theta_tol() -> f64 {
    1e-16
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelCheckConfig {
    /// `[alpha, nu]` pairs.
    #[serde(default = "default_kernel_params")]
    pub params: Vec<[f64; 2]>,
    #[serde(default = "default_n_pairs")]
    pub n_pairs: usize,
    #[serde(default = "default_kernel_y")]
    pub y_max: f64,
    #[serde(default = "default_theta_tol")]
    pub tol: f64,
}

fn default_tau() -> [f64; 2] {
    [0.0, 1.0]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaConfig {
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub z: [f64; 2],
    #[serde(default = "default_tau")]
    pub tau: [f64; 2],
    #[serde(default = "default_theta_tol")]
    pub tol: f64,
}

/// Parses a complete config (common keys included) for `command`, as the
/// fuzz target and the CLI do. Returns the validated echo of the command
/// part.
pub fn parse_config(command: &str, text: &str) -> Result<Value, LabError> {
    let mut map = parse_object(text)?;
    split_common(&mut map)?;
    let echo = match command {
        "density" => serde_json::to_value(typed::<DensityConfig>(map)?),
        "frame-bounds" => serde_json::to_value(typed::<FrameConfig>(map)?),
        "riesz-bounds" => serde_json::to_value(typed::<RieszConfig>(map)?),
        "sweep" => serde_json::to_value(typed::<SweepConfig>(map)?),
        "interpolate" => serde_json::to_value(typed::<InterpolateConfig>(map)?),
        "reconstruct" => serde_json::to_value(typed::<ReconstructConfig>(map)?),
        "growth" => serde_json::to_value(typed::<GrowthConfig>(map)?),
        "kernel-check" => serde_json::to_value(typed::<KernelCheckConfig>(map)?),
        "theta-eval" => serde_json::to_value(typed::<ThetaConfig>(map)?),
        other => return Err(LabError::Config(format!("unknown command {other}"))),
    };
    echo.map_err(|e| LabError::Config(e.to_string()))
}
