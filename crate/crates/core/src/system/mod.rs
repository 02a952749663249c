//! Simulator contract, built-in substitute models, and the JSON benchmark
//! configuration.

mod models;
mod rk4;

use std::collections::BTreeMap;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use models::{quantize, ModelKind, ModelSpec};
pub use rk4::rk4_step;

use crate::signal::{grid_len, InputRange, Signal, SignalError, GRID_EPS};
use crate::stl::{self, Formula, StlError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error("invalid benchmark configuration: {0}")]
    Config(String),
    #[error("malformed benchmark document: {0}")]
    Schema(String),
    #[error("spec `{name}`: {source}")]
    Spec {
        name: String,
        #[source]
        source: StlError,
    },
    #[error("input signal is missing channel `{0}`")]
    MissingChannel(String),
    #[error("input grid does not match the benchmark grid ({0})")]
    GridMismatch(String),
    #[error("static parameter `{name}` = {value} is outside [{min}, {max}]")]
    StaticOutOfRange {
        name: String,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("unknown static parameter `{0}`")]
    UnknownStatic(String),
    #[error("non-finite state")]
    NonFinite,
    #[error("simulation produced a non-finite state at grid index {time_index}")]
    SimulationFailure { time_index: usize },
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// On-disk benchmark document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub name: String,
    pub horizon: f64,
    pub dt: f64,
    pub inputs: Vec<InputConfig>,
    pub model: ModelConfig,
    pub specs: IndexMap<String, String>,
    #[serde(default)]
    pub static_params: Vec<StaticParamConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticParamConfig {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub default: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputChannel {
    pub name: String,
    pub range: InputRange,
}

/// A non-signal search variable, such as an initial condition.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticParam {
    pub name: String,
    pub range: InputRange,
    pub default: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spec {
    pub text: String,
    pub formula: Formula,
}

/// A validated benchmark: model, input channels, time grid, and specs.
#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub name: String,
    pub inputs: Vec<InputChannel>,
    pub horizon: f64,
    pub dt: f64,
    pub model: ModelSpec,
    pub specs: IndexMap<String, Spec>,
    pub static_params: Vec<StaticParam>,
}

impl Benchmark {
    pub fn from_config(config: BenchmarkConfig) -> Result<Self, SystemError> {
        let BenchmarkConfig {
            name,
            horizon,
            dt,
            inputs,
            model,
            specs,
            static_params,
        } = config;
        if name.trim().is_empty() {
            return Err(SystemError::Config("benchmark name is empty".into()));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(SystemError::Config(format!("horizon must be positive, got {horizon}")));
        }
        if !(dt.is_finite() && dt > 0.0 && dt <= horizon) {
            return Err(SystemError::Config(format!(
                "dt must satisfy 0 < dt <= horizon, got {dt}"
            )));
        }
        let kind: ModelKind = model.kind.parse()?;
        let model = ModelSpec::new(kind, &model.params)?;

        if inputs.is_empty() {
            return Err(SystemError::Config("at least one input channel is required".into()));
        }
        if inputs.len() != kind.input_count() {
            return Err(SystemError::Config(format!(
                "model `{kind}` takes {} input(s), {} declared",
                kind.input_count(),
                inputs.len()
            )));
        }
        let mut channels = Vec::with_capacity(inputs.len());
        for input in inputs {
            if channels.iter().any(|c: &InputChannel| c.name == input.name) {
                return Err(SystemError::Config(format!("duplicate input `{}`", input.name)));
            }
            let range = InputRange::new(input.min, input.max).map_err(|_| {
                SystemError::Config(format!(
                    "input `{}` range [{}, {}] needs min < max",
                    input.name, input.min, input.max
                ))
            })?;
            channels.push(InputChannel {
                name: input.name,
                range,
            });
        }

        let mut statics = Vec::with_capacity(static_params.len());
        for p in static_params {
            let range = InputRange::new(p.min, p.max).map_err(|_| {
                SystemError::Config(format!(
                    "static parameter `{}` range [{}, {}] needs min < max",
                    p.name, p.min, p.max
                ))
            })?;
            if !range.contains(p.default) {
                return Err(SystemError::Config(format!(
                    "static parameter `{}` default {} outside its range",
                    p.name, p.default
                )));
            }
            if !model.has_param(&p.name) {
                return Err(SystemError::Config(format!(
                    "static parameter `{}` is not a parameter of model `{kind}`",
                    p.name
                )));
            }
            if statics.iter().any(|s: &StaticParam| s.name == p.name) {
                return Err(SystemError::Config(format!("duplicate static parameter `{}`", p.name)));
            }
            statics.push(StaticParam {
                name: p.name,
                range,
                default: p.default,
            });
        }

        if specs.is_empty() {
            return Err(SystemError::Config("no specs declared".into()));
        }
        let outputs = kind.output_names();
        let mut parsed = IndexMap::with_capacity(specs.len());
        for (spec_name, text) in specs {
            let formula = stl::parse(&text).map_err(|source| SystemError::Spec {
                name: spec_name.clone(),
                source,
            })?;
            if formula.horizon() > horizon + GRID_EPS * dt {
                return Err(SystemError::Config(format!(
                    "spec `{spec_name}` looks ahead {} s, beyond the horizon {horizon} s",
                    formula.horizon()
                )));
            }
            if let Some(missing) = formula.signals().into_iter().find(|s| !outputs.contains(&s.as_str())) {
                return Err(SystemError::Spec {
                    name: spec_name,
                    source: StlError::UnknownSignal(missing),
                });
            }
            parsed.insert(spec_name, Spec { text, formula });
        }

        Ok(Self {
            name,
            inputs: channels,
            horizon,
            dt,
            model,
            specs: parsed,
            static_params: statics,
        })
    }

    /// Number of grid instants in `{0, dt, ..., horizon}`.
    pub fn steps(&self) -> usize {
        grid_len(self.horizon, self.dt)
    }

    pub fn spec(&self, name: &str) -> Option<&Spec> {
        self.specs.get(name)
    }

    pub fn input_names(&self) -> Vec<String> {
        self.inputs.iter().map(|c| c.name.clone()).collect()
    }

    /// Declared defaults of every static parameter.
    pub fn static_defaults(&self) -> BTreeMap<String, f64> {
        self.static_params
            .iter()
            .map(|p| (p.name.clone(), p.default))
            .collect()
    }
}

/// Parses and validates a JSON benchmark document.
pub fn load_benchmark(document: &str) -> Result<Benchmark, SystemError> {
    let config: BenchmarkConfig =
        serde_json::from_str(document).map_err(|e| SystemError::Schema(e.to_string()))?;
    Benchmark::from_config(config)
}

pub fn load_benchmark_file(path: impl AsRef<Path>) -> Result<Benchmark, SystemError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| SystemError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    load_benchmark(&text)
}

/// Simulates `benchmark` under `inputs`, returning the output trace on the
/// input grid.
///
/// `static_values` overrides model parameters declared as static search
/// variables; omitted ones keep their declared defaults.
pub fn simulate(
    benchmark: &Benchmark,
    inputs: &Signal,
    static_values: &BTreeMap<String, f64>,
) -> Result<Signal, SystemError> {
    let steps = benchmark.steps();
    if inputs.len() != steps || (inputs.dt() - benchmark.dt).abs() > GRID_EPS * benchmark.dt {
        return Err(SystemError::GridMismatch(format!(
            "{} samples at dt = {}, expected {steps} at dt = {}",
            inputs.len(),
            inputs.dt(),
            benchmark.dt
        )));
    }
    let channels = benchmark
        .inputs
        .iter()
        .map(|c| {
            inputs
                .channel(&c.name)
                .ok_or_else(|| SystemError::MissingChannel(c.name.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut overrides = benchmark.static_defaults();
    for (name, &value) in static_values {
        let param = benchmark
            .static_params
            .iter()
            .find(|p| &p.name == name)
            .ok_or_else(|| SystemError::UnknownStatic(name.clone()))?;
        if !param.range.contains(value) {
            return Err(SystemError::StaticOutOfRange {
                name: name.clone(),
                value,
                min: param.range.lower(),
                max: param.range.upper(),
            });
        }
        overrides.insert(name.clone(), value);
    }
    let model = benchmark.model.with_overrides(&overrides)?;
    let rows = model.run(&channels, benchmark.dt, steps)?;
    let names = model.kind().output_names().iter().map(|s| s.to_string()).collect();
    let trace = Signal::uniform(benchmark.dt, names, rows)?;
    if trace.channels().iter().flatten().any(|v| !v.is_finite()) {
        return Err(SystemError::NonFinite);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn lag_doc() -> serde_json::Value {
        json!({
            "name": "lag",
            "horizon": 10.0,
            "dt": 0.01,
            "inputs": [{"name": "u", "min": 0.0, "max": 1.0}],
            "model": {"kind": "first_order_lag", "params": {"tau": 1.0}},
            "specs": {"phi1": "alw[0,10](y <= 0.85)"}
        })
    }

    #[test]
    fn loads_and_simulates_lag() {
        let b = load_benchmark(&lag_doc().to_string()).unwrap();
        assert_eq!(b.steps(), 1001);
        let u = Signal::uniform(0.01, vec!["u".into()], vec![vec![1.0; 1001]]).unwrap();
        let y = simulate(&b, &u, &BTreeMap::new()).unwrap();
        assert_eq!(y.times(), u.times());
        let end = y.channel("y").unwrap()[1000];
        assert!((end - (1.0 - (-10.0f64).exp())).abs() < 1e-6);
    }

    #[test]
    fn schema_errors() {
        let mut doc = lag_doc();
        doc.as_object_mut().unwrap().remove("horizon");
        assert!(matches!(load_benchmark(&doc.to_string()), Err(SystemError::Schema(_))));

        let mut doc = lag_doc();
        doc["extra"] = json!(1);
        assert!(matches!(load_benchmark(&doc.to_string()), Err(SystemError::Schema(_))));

        let mut doc = lag_doc();
        doc["horizon"] = json!(0.0);
        assert!(matches!(load_benchmark(&doc.to_string()), Err(SystemError::Config(_))));

        let mut doc = lag_doc();
        doc["inputs"][0]["min"] = json!(1.0);
        assert!(matches!(load_benchmark(&doc.to_string()), Err(SystemError::Config(_))));

        let mut doc = lag_doc();
        doc["specs"]["bad"] = json!("alw[0,1](y <");
        assert!(matches!(load_benchmark(&doc.to_string()), Err(SystemError::Spec { .. })));

        let mut doc = lag_doc();
        doc["specs"]["long"] = json!("alw[0,20](y < 1)");
        assert!(matches!(load_benchmark(&doc.to_string()), Err(SystemError::Config(_))));

        let mut doc = lag_doc();
        doc["specs"]["other"] = json!("alw[0,1](z < 1)");
        assert!(matches!(load_benchmark(&doc.to_string()), Err(SystemError::Spec { .. })));

        let mut doc = lag_doc();
        doc["model"]["kind"] = json!("pendulum");
        assert!(matches!(load_benchmark(&doc.to_string()), Err(SystemError::Config(_))));
    }

    #[test]
    fn simulate_checks_inputs() {
        let b = load_benchmark(&lag_doc().to_string()).unwrap();
        let wrong_name = Signal::uniform(0.01, vec!["w".into()], vec![vec![0.0; 1001]]).unwrap();
        assert!(matches!(
            simulate(&b, &wrong_name, &BTreeMap::new()),
            Err(SystemError::MissingChannel(_))
        ));
        let short = Signal::uniform(0.01, vec!["u".into()], vec![vec![0.0; 10]]).unwrap();
        assert!(matches!(
            simulate(&b, &short, &BTreeMap::new()),
            Err(SystemError::GridMismatch(_))
        ));
        let ok = Signal::uniform(0.01, vec!["u".into()], vec![vec![0.0; 1001]]).unwrap();
        let mut statics = BTreeMap::new();
        statics.insert("y0".to_string(), 1.0);
        assert!(matches!(simulate(&b, &ok, &statics), Err(SystemError::UnknownStatic(_))));
    }

    #[test]
    fn static_params_override_model() {
        let mut doc = lag_doc();
        doc["static_params"] = json!([{"name": "y0", "min": -1.0, "max": 1.0, "default": 0.5}]);
        let b = load_benchmark(&doc.to_string()).unwrap();
        let u = Signal::uniform(0.01, vec!["u".into()], vec![vec![0.0; 1001]]).unwrap();
        let y = simulate(&b, &u, &BTreeMap::new()).unwrap();
        assert_eq!(y.channel("y").unwrap()[0], 0.5);
        let mut statics = BTreeMap::new();
        statics.insert("y0".to_string(), -0.25);
        let y = simulate(&b, &u, &statics).unwrap();
        assert_eq!(y.channel("y").unwrap()[0], -0.25);
        statics.insert("y0".to_string(), 2.0);
        assert!(matches!(
            simulate(&b, &u, &statics),
            Err(SystemError::StaticOutOfRange { .. })
        ));
    }
}
