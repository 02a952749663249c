//! Search-space assembly and the falsification loop.
//!
//! An optimizer point in `[0, 1]^n` is decoded into one set of pulse
//! parameters per input channel (plus optional static values), rendered as
//! input signals, simulated, and scored by the spec's robustness. The loop
//! ends at the first negative robustness or when the budget runs out.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optimize::{self, OptimizeError, OptimizerConfig, OptimizerKind};
use crate::signal::{synthesize_named, PulseParam, PulseParams, Signal, SignalError};
use crate::stl::{self, Semantics, StlError};
use crate::system::{simulate, Benchmark, SystemError};

#[derive(Debug, Error)]
pub enum FalsifyError {
    #[error("mask selects no parameters")]
    EmptyMask,
    #[error("invalid mask `{0}`: use letters from L, P, W, H, D")]
    BadMask(String),
    #[error("benchmark has no spec named `{0}`")]
    UnknownSpec(String),
    #[error("point has {got} coordinates, the space has {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("coordinate {index} = {value} lies outside [0, 1]")]
    OutsideCube { index: usize, value: f64 },
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Stl(#[from] StlError),
}

/// Which pulse parameters the optimizer may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct FreeMask {
    bits: u8,
    pub include_static: bool,
}

impl FreeMask {
    pub fn new(params: &[PulseParam]) -> Self {
        let mut m = Self::default();
        for p in params {
            m.bits |= 1 << p.index();
        }
        m
    }

    pub fn all() -> Self {
        Self::new(&PulseParam::ALL)
    }

    pub fn with_static(mut self, include: bool) -> Self {
        self.include_static = include;
        self
    }

    pub fn contains(&self, p: PulseParam) -> bool {
        self.bits & (1 << p.index()) != 0
    }

    pub fn params(&self) -> Vec<PulseParam> {
        PulseParam::ALL.into_iter().filter(|p| self.contains(*p)).collect()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    /// Label such as `L-P-W`, in canonical order.
    pub fn label(&self) -> String {
        self.params()
            .iter()
            .map(|p| p.letter().to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    /// The twelve combinations swept in the dimensionality study.
    pub fn sweep() -> Vec<FreeMask> {
        ["L", "P", "W", "H", "D", "L-P", "L-W", "P-W", "L-P-W", "L-P-W-H", "L-P-W-D", "L-P-W-H-D"]
            .iter()
            .map(|s| s.parse().expect("valid label"))
            .collect()
    }

    /// Every non-empty subset of the five parameters.
    pub fn all_subsets() -> Vec<FreeMask> {
        (1u8..32).map(|bits| FreeMask { bits, include_static: false }).collect()
    }

    pub fn is_subset_of(&self, other: &FreeMask) -> bool {
        self.bits & !other.bits == 0
    }
}

impl FromStr for FreeMask {
    type Err = FalsifyError;

    /// Accepts `L-P-W`, `LPW`, or `l,p,w`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut params = Vec::new();
        for c in s.chars().filter(|c| !matches!(c, '-' | ',' | ' ' | '+')) {
            let p = PulseParam::from_letter(c).ok_or_else(|| FalsifyError::BadMask(s.to_string()))?;
            if params.contains(&p) {
                return Err(FalsifyError::BadMask(s.to_string()));
            }
            params.push(p);
        }
        if params.is_empty() {
            return Err(FalsifyError::EmptyMask);
        }
        Ok(FreeMask::new(&params))
    }
}

impl fmt::Display for FreeMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// What a search coordinate controls.
#[derive(Debug, Clone, PartialEq)]
pub enum CoordTarget {
    Pulse { channel: usize, param: PulseParam },
    Static { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coordinate {
    pub target: CoordTarget,
    pub lower: f64,
    pub upper: f64,
}

/// The optimizer's view of a benchmark under a mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpace {
    pub mask: FreeMask,
    pub fixed_defaults: PulseParams,
    pub channels: usize,
    pub static_names: Vec<String>,
    pub coordinates: Vec<Coordinate>,
}

/// Parameters and static values decoded from one optimizer point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoded {
    pub pulses: Vec<PulseParams>,
    pub statics: BTreeMap<String, f64>,
}

/// Lays out the search coordinates: channels in declaration order, each
/// with its masked parameters in L, P, W, H, D order, then free static
/// parameters.
pub fn build_param_space(benchmark: &Benchmark, mask: FreeMask) -> Result<ParamSpace, FalsifyError> {
    if mask.is_empty() {
        return Err(FalsifyError::EmptyMask);
    }
    let period_max = if mask.contains(PulseParam::Delay) { 1.0 } else { 2.0 };
    let mut coordinates = Vec::new();
    for channel in 0..benchmark.inputs.len() {
        for param in mask.params() {
            let upper = if param == PulseParam::Period { period_max } else { 1.0 };
            coordinates.push(Coordinate {
                target: CoordTarget::Pulse { channel, param },
                lower: 0.0,
                upper,
            });
        }
    }
    let mut static_names = Vec::new();
    if mask.include_static {
        for (index, p) in benchmark.static_params.iter().enumerate() {
            coordinates.push(Coordinate {
                target: CoordTarget::Static { index },
                lower: p.range.lower(),
                upper: p.range.upper(),
            });
            static_names.push(p.name.clone());
        }
    }
    Ok(ParamSpace {
        mask,
        fixed_defaults: PulseParams::FIXED_DEFAULTS,
        channels: benchmark.inputs.len(),
        static_names,
        coordinates,
    })
}

impl ParamSpace {
    pub fn dimension(&self) -> usize {
        self.coordinates.len()
    }

    /// Maps a unit-cube point affinely onto the native parameter ranges.
    pub fn decode(&self, point: &[f64]) -> Result<Decoded, FalsifyError> {
        if point.len() != self.dimension() {
            return Err(FalsifyError::DimensionMismatch {
                got: point.len(),
                expected: self.dimension(),
            });
        }
        let mut pulses = vec![self.fixed_defaults; self.channels];
        let mut statics = BTreeMap::new();
        for (index, (coord, &x)) in self.coordinates.iter().zip(point).enumerate() {
            if !(0.0..=1.0).contains(&x) {
                return Err(FalsifyError::OutsideCube { index, value: x });
            }
            let value = (coord.lower + x * (coord.upper - coord.lower)).clamp(coord.lower, coord.upper);
            match coord.target {
                CoordTarget::Pulse { channel, param } => pulses[channel].set(param, value),
                CoordTarget::Static { index } => {
                    statics.insert(self.static_names[index].clone(), value);
                }
            }
        }
        Ok(Decoded { pulses, statics })
    }
}

/// Renders decoded pulses as the benchmark's multi-channel input signal.
pub fn synthesize_inputs(benchmark: &Benchmark, pulses: &[PulseParams]) -> Result<Signal, FalsifyError> {
    let parts = benchmark
        .inputs
        .iter()
        .zip(pulses)
        .map(|(ch, p)| synthesize_named(p, &ch.range, benchmark.horizon, benchmark.dt, &ch.name))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Signal::merge(parts)?)
}

/// Synthesizes, simulates, and scores one decoded candidate.
pub fn evaluate_candidate(
    benchmark: &Benchmark,
    spec_name: &str,
    decoded: &Decoded,
    semantics: Semantics,
) -> Result<f64, FalsifyError> {
    let spec = benchmark
        .spec(spec_name)
        .ok_or_else(|| FalsifyError::UnknownSpec(spec_name.to_string()))?;
    let inputs = synthesize_inputs(benchmark, &decoded.pulses)?;
    let trace = simulate(benchmark, &inputs, &decoded.statics)?;
    Ok(stl::robustness(&spec.formula, &trace, 0.0, semantics)?)
}

/// Counterexample found by [`falsify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub input_names: Vec<String>,
    #[serde(flatten)]
    pub decoded: Decoded,
    pub robustness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsificationOutcome {
    pub falsified: bool,
    pub simulations_used: usize,
    pub best_robustness: f64,
    pub witness: Option<Witness>,
    /// Robustness of every evaluation, in order (`inf` for failed runs).
    pub history: Vec<f64>,
    pub dimension: usize,
    pub init_samples: usize,
    pub restarts: usize,
}

/// Searches the pulse space of `benchmark` under `mask` for an input that
/// drives the robustness of `spec_name` negative.
pub fn falsify(
    benchmark: &Benchmark,
    spec_name: &str,
    mask: FreeMask,
    optimizer: &OptimizerConfig,
    semantics: Semantics,
) -> Result<FalsificationOutcome, FalsifyError> {
    if benchmark.spec(spec_name).is_none() {
        return Err(FalsifyError::UnknownSpec(spec_name.to_string()));
    }
    let space = build_param_space(benchmark, mask)?;
    let dim = space.dimension();
    let init = optimizer.init_samples_for(dim);
    if optimizer.kind == OptimizerKind::TurboLite && optimizer.budget < init {
        return Err(OptimizeError::BudgetBelowInit {
            budget: optimizer.budget,
            init,
        }
        .into());
    }

    let mut simulations = 0usize;
    let objective = |point: &[f64]| -> f64 {
        simulations += 1;
        space
            .decode(point)
            .and_then(|d| evaluate_candidate(benchmark, spec_name, &d, semantics))
            .unwrap_or(f64::INFINITY)
    };
    let result = optimize::minimize(objective, dim, optimizer)?;
    debug_assert_eq!(simulations, result.evaluations_used);

    let falsified = result.best.value < 0.0;
    let witness = if falsified {
        Some(Witness {
            point: result.best.point.clone(),
            input_names: benchmark.input_names(),
            decoded: space.decode(&result.best.point)?,
            robustness: result.best.value,
        })
    } else {
        None
    };
    Ok(FalsificationOutcome {
        falsified,
        simulations_used: result.evaluations_used,
        best_robustness: result.best.value,
        witness,
        history: result.history.iter().map(|e| e.value).collect(),
        dimension: dim,
        init_samples: if optimizer.kind == OptimizerKind::TurboLite { init } else { 0 },
        restarts: result.restarts,
    })
}
