//! Budgeted black-box minimization over the unit hypercube.
//!
//! Both optimizers stop as soon as an evaluation returns a negative value:
//! in falsification a negative robustness is a counterexample and any
//! further simulation is wasted.

mod lhs;
mod rbf;
mod turbo;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lhs::latin_hypercube;
pub use rbf::{fit_surrogate, RbfSurrogate};
pub use turbo::turbo_lite_minimize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("budget {budget} is smaller than the {init} initial samples")]
    BudgetBelowInit { budget: usize, init: usize },
    #[error("search space has zero dimensions")]
    ZeroDimension,
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum SurrogateError {
    #[error("need at least two distinct points")]
    TooFewPoints,
    #[error("surrogate system is degenerate")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    RandomSearch,
    TurboLite,
}

impl std::str::FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "random" | "random_search" => Ok(OptimizerKind::RandomSearch),
            "turbo" | "turbo_lite" => Ok(OptimizerKind::TurboLite),
            other => Err(format!("unknown optimizer `{other}` (expected random or turbo)")),
        }
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OptimizerKind::RandomSearch => "random_search",
            OptimizerKind::TurboLite => "turbo_lite",
        })
    }
}

/// Trust-region constants for [`turbo_lite_minimize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustRegionConfig {
    pub initial_side: f64,
    pub min_side: f64,
    pub max_side: f64,
    pub success_tolerance: usize,
    /// `None` means one failure per dimension.
    pub failure_tolerance: Option<usize>,
    pub candidates_per_dim: usize,
    pub max_candidates: usize,
    /// Surrogate training set is the evaluated points closest to the
    /// trust-region center, at most this many.
    pub max_fit_points: usize,
}

impl Default for TrustRegionConfig {
    fn default() -> Self {
        Self {
            initial_side: 0.8,
            min_side: 0.5f64.powi(7),
            max_side: 1.6,
            success_tolerance: 3,
            failure_tolerance: None,
            candidates_per_dim: 100,
            max_candidates: 5000,
            max_fit_points: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    /// Maximum number of objective evaluations.
    pub budget: usize,
    /// Initial Latin-hypercube size; `None` means twice the dimension.
    pub init_samples: Option<usize>,
    pub trust_region: TrustRegionConfig,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::TurboLite,
            budget: 1000,
            init_samples: None,
            trust_region: TrustRegionConfig::default(),
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind, budget: usize, seed: u64) -> Self {
        Self {
            kind,
            budget,
            seed,
            ..Self::default()
        }
    }

    pub fn init_samples_for(&self, dim: usize) -> usize {
        self.init_samples.unwrap_or(2 * dim)
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        let tr = &self.trust_region;
        if self.budget < 1 {
            return Err(OptimizeError::InvalidConfig("budget must be at least 1".into()));
        }
        if self.init_samples == Some(0) {
            return Err(OptimizeError::InvalidConfig("init_samples must be at least 1".into()));
        }
        if !(0.0 < tr.min_side && tr.min_side < tr.initial_side && tr.initial_side <= tr.max_side) {
            return Err(OptimizeError::InvalidConfig(
                "trust region sides must satisfy 0 < min < initial <= max".into(),
            ));
        }
        if tr.success_tolerance == 0 || tr.failure_tolerance == Some(0) {
            return Err(OptimizeError::InvalidConfig("tolerances must be positive".into()));
        }
        if tr.candidates_per_dim == 0 || tr.max_candidates == 0 || tr.max_fit_points < 2 {
            return Err(OptimizeError::InvalidConfig(
                "candidate and fit-set sizes must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub point: Vec<f64>,
    pub value: f64,
    /// 1-based evaluation ordinal.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best: EvalRecord,
    pub history: Vec<EvalRecord>,
    pub stopped_early: bool,
    pub evaluations_used: usize,
    /// Number of trust-region restarts (always 0 for random search).
    pub restarts: usize,
}

/// Wraps the objective, enforcing the budget and stop-on-negative rule.
pub(crate) struct Recorder<'a> {
    objective: &'a mut dyn FnMut(&[f64]) -> f64,
    budget: usize,
    history: Vec<EvalRecord>,
    best: Option<usize>,
    stopped: bool,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(objective: &'a mut dyn FnMut(&[f64]) -> f64, budget: usize) -> Self {
        Self {
            objective,
            budget,
            history: Vec::with_capacity(budget.min(4096)),
            best: None,
            stopped: false,
        }
    }

    pub(crate) fn done(&self) -> bool {
        self.stopped || self.history.len() >= self.budget
    }

    /// Evaluates `point`; non-finite objective values are recorded as `+inf`.
    pub(crate) fn eval(&mut self, point: Vec<f64>) -> f64 {
        debug_assert!(!self.done());
        let raw = (self.objective)(&point);
        let value = if raw.is_finite() { raw } else { f64::INFINITY };
        let index = self.history.len() + 1;
        self.history.push(EvalRecord { point, value, index });
        if self.best.is_none_or(|b| value < self.history[b].value) {
            self.best = Some(index - 1);
        }
        if value < 0.0 {
            self.stopped = true;
        }
        value
    }

    pub(crate) fn history(&self) -> &[EvalRecord] {
        &self.history
    }

    pub(crate) fn finish(self, restarts: usize) -> OptimizationResult {
        let best = self.history[self.best.expect("budget >= 1")].clone();
        OptimizationResult {
            best,
            evaluations_used: self.history.len(),
            history: self.history,
            stopped_early: self.stopped,
            restarts,
        }
    }
}

/// Uniform i.i.d. sampling until a negative value or the budget.
pub fn random_search<F>(mut objective: F, dim: usize, config: &OptimizerConfig) -> Result<OptimizationResult, OptimizeError>
where
    F: FnMut(&[f64]) -> f64,
{
    config.validate()?;
    if dim == 0 {
        return Err(OptimizeError::ZeroDimension);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rec = Recorder::new(&mut objective, config.budget);
    while !rec.done() {
        let p: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        rec.eval(p);
    }
    Ok(rec.finish(0))
}

/// Runs the optimizer selected by `config.kind`.
pub fn minimize<F>(objective: F, dim: usize, config: &OptimizerConfig) -> Result<OptimizationResult, OptimizeError>
where
    F: FnMut(&[f64]) -> f64,
{
    match config.kind {
        OptimizerKind::RandomSearch => random_search(objective, dim, config),
        OptimizerKind::TurboLite => turbo_lite_minimize(objective, dim, config),
    }
}
