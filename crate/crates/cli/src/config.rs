//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "model": {
//!     "alpha": 1.0,
//!     "hurst": 0.5,
//!     "heat": { "d": 1, "count": 10 },
//!     "sigmas": "unit"
//!   },
//!   "init": "stationary",
//!   "scheme": { "discrete": { "n": 10 } },
//!   "N_grid": [10],
//!   "replications": 2,
//!   "master_seed": 7
//! }
//! ```
//!
//! `model` takes either `thetas` (a list) or `heat` (`{d, count}`, giving
//! `theta_k = k^(2/d)`), never both. `sigmas` is a list or `"unit"` (the
//! default). Optional keys: `nus`, `dimension`.
//!
//! `init` is `"stationary"`, `{"deterministic": [...]}`, `{"constant": c}` or
//! `{"gaussian_iid": {"mean": m, "std": s}}`.
//!
//! `scheme` is `{"discrete": {"n": n}}` or `{"continuous": {"T": T, "h": h,
//! "delta": d}}`. If `delta` is omitted it is 0 for stationary runs and
//! `0.1 T` otherwise.
//!
//! Optional top-level keys: `estimators` (default: the weighted estimator of
//! the scheme plus `unweighted`), `eq34_normalizer` (`"printed"` or
//! `"generic"`), `sampler` (`"auto"`, `"circulant"`, `"cholesky"`).

use serde::Deserialize;
use serde_json::{json, Map, Value};
use spectral_mce::estimators::default_burn_in;
use spectral_mce::harness::ExperimentConfig;
use spectral_mce::model::heat_eigenvalues;
use spectral_mce::{Eq34Normalizer, EstimatorKind, InitialCondition, SamplingMethod, SamplingScheme, SpectralModel};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    model: ModelDoc,
    init: InitDoc,
    scheme: SchemeDoc,
    #[serde(rename = "N_grid")]
    n_grid: Vec<usize>,
    replications: usize,
    master_seed: u64,
    #[serde(default)]
    estimators: Option<Vec<EstimatorKind>>,
    #[serde(default)]
    eq34_normalizer: Eq34Normalizer,
    #[serde(default)]
    sampler: SamplingMethod,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    alpha: f64,
    hurst: f64,
    #[serde(default)]
    thetas: Option<Vec<f64>>,
    #[serde(default)]
    heat: Option<HeatDoc>,
    #[serde(default)]
    sigmas: Option<SigmasDoc>,
    #[serde(default)]
    nus: Option<Vec<f64>>,
    #[serde(default)]
    dimension: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeatDoc {
    d: u32,
    count: usize,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SigmasDoc {
    Named(String),
    Values(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum InitDoc {
    Stationary,
    Deterministic(Vec<f64>),
    Constant(f64),
    GaussianIid { mean: f64, std: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum SchemeDoc {
    Discrete {
        n: usize,
    },
    Continuous {
        #[serde(rename = "T")]
        horizon: f64,
        h: f64,
        #[serde(default)]
        delta: Option<f64>,
    },
}

/// Parses and validates a configuration document, applying `overrides`
/// (`dotted.key=value`) to the JSON tree first.
pub fn parse_config(text: &[u8], overrides: &[String]) -> Result<ExperimentConfig, CliError> {
    let mut value: Value = serde_json::from_slice(text).map_err(|e| CliError::Config {
        pointer: String::new(),
        message: format!("not a JSON document: {e}"),
    })?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let doc: ConfigDoc = serde_path_to_error::deserialize(value).map_err(|e| {
        let pointer = json_pointer(e.path());
        CliError::Config {
            pointer,
            message: e.into_inner().to_string(),
        }
    })?;
    resolve(doc)
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn config_err(pointer: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        pointer: pointer.to_string(),
        message: message.into(),
    }
}

fn resolve(doc: ConfigDoc) -> Result<ExperimentConfig, CliError> {
    let m = doc.model;
    let (thetas, heat_d) = match (m.thetas, m.heat) {
        (Some(t), None) => (t, None),
        (None, Some(h)) => (
            heat_eigenvalues(h.d, h.count).map_err(|e| config_err("/model/heat", e.to_string()))?,
            Some(h.d),
        ),
        (Some(_), Some(_)) => return Err(config_err("/model", "give either `thetas` or `heat`, not both")),
        (None, None) => return Err(config_err("/model", "missing `thetas` or `heat`")),
    };
    let sigmas = match m.sigmas {
        None => vec![1.0; thetas.len()],
        Some(SigmasDoc::Named(s)) if s == "unit" => vec![1.0; thetas.len()],
        Some(SigmasDoc::Named(s)) => {
            return Err(config_err("/model/sigmas", format!("expected a list or \"unit\", got \"{s}\"")))
        }
        Some(SigmasDoc::Values(v)) => v,
    };
    let mut model = SpectralModel::new(m.alpha, m.hurst, thetas, sigmas).map_err(CliError::Core)?;
    if let Some(nus) = m.nus {
        model = model.with_nus(nus).map_err(CliError::Core)?;
    }
    match (m.dimension, heat_d) {
        (Some(d), Some(h)) if d != h => {
            return Err(config_err("/model/dimension", format!("dimension {d} contradicts heat.d = {h}")))
        }
        (Some(d), _) | (None, Some(d)) => model = model.with_dimension_hint(d),
        (None, None) => {}
    }
    model.validate().map_err(CliError::Core)?;

    let init = match doc.init {
        InitDoc::Stationary => InitialCondition::Stationary,
        InitDoc::Deterministic(v) => InitialCondition::Deterministic(v),
        InitDoc::Constant(c) => InitialCondition::Deterministic(vec![c; model.len()]),
        InitDoc::GaussianIid { mean, std } => InitialCondition::GaussianIid { mean, std },
    };
    let scheme = match doc.scheme {
        SchemeDoc::Discrete { n } => SamplingScheme::Discrete { n },
        SchemeDoc::Continuous { horizon, h, delta } => SamplingScheme::Continuous {
            horizon,
            h,
            delta: delta.unwrap_or_else(|| default_burn_in(horizon, h, init.is_stationary())),
        },
    };
    let estimators = doc.estimators.unwrap_or_else(|| match scheme {
        SamplingScheme::Discrete { .. } => vec![EstimatorKind::WeightedDiscrete, EstimatorKind::Unweighted],
        SamplingScheme::Continuous { .. } => vec![EstimatorKind::WeightedContinuous, EstimatorKind::Unweighted],
    });
    let cfg = ExperimentConfig {
        model,
        init,
        scheme,
        n_grid: doc.n_grid,
        replications: doc.replications,
        master_seed: doc.master_seed,
        estimators,
        eq34_normalizer: doc.eq34_normalizer,
        sampler: doc.sampler,
    };
    cfg.validate().map_err(CliError::Core)?;
    Ok(cfg)
}

/// Serializes a config in the documented schema; `parse_config` inverts it.
pub fn config_to_json(cfg: &ExperimentConfig) -> Value {
    let m = &cfg.model;
    let mut model = Map::new();
    model.insert("alpha".into(), json!(m.alpha()));
    model.insert("hurst".into(), json!(m.hurst()));
    model.insert("thetas".into(), json!(m.thetas()));
    model.insert("sigmas".into(), json!(m.sigmas()));
    if let Some(nus) = m.nus() {
        model.insert("nus".into(), json!(nus));
    }
    if let Some(d) = m.dimension_hint() {
        model.insert("dimension".into(), json!(d));
    }
    let init = match &cfg.init {
        InitialCondition::Stationary => json!("stationary"),
        InitialCondition::Deterministic(v) => json!({ "deterministic": v }),
        InitialCondition::GaussianIid { mean, std } => json!({ "gaussian_iid": { "mean": mean, "std": std } }),
    };
    let scheme = match cfg.scheme {
        SamplingScheme::Discrete { n } => json!({ "discrete": { "n": n } }),
        SamplingScheme::Continuous { horizon, h, delta } => {
            json!({ "continuous": { "T": horizon, "h": h, "delta": delta } })
        }
    };
    json!({
        "model": Value::Object(model),
        "init": init,
        "scheme": scheme,
        "N_grid": cfg.n_grid,
        "replications": cfg.replications,
        "master_seed": cfg.master_seed,
        "estimators": cfg.estimators,
        "eq34_normalizer": cfg.eq34_normalizer,
        "sampler": cfg.sampler,
    })
}

/// Applies one `dotted.key=value` override. The value is read as JSON when it
/// parses, otherwise as a string; numeric segments index into arrays.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override `{spec}` is not of the form key=value")))?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(CliError::Usage(format!("override key `{key}` has an empty segment")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let segments: Vec<&str> = key.split('.').collect();
    let mut cur = root;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert(seg.to_string(), value);
                    return Ok(());
                }
                map.entry(seg.to_string()).or_insert_with(|| Value::Object(Map::new()))
            }
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| CliError::Usage(format!("override `{key}`: `{seg}` is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| CliError::Usage(format!("override `{key}`: index {idx} out of range ({len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                return Err(CliError::Usage(format!(
                    "override `{key}`: `{}` is not an object or array",
                    segments[..i].join(".")
                )))
            }
        };
    }
    Ok(())
}

