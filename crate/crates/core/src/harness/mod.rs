//! Repeated, seeded falsification experiments and their summaries.
//!
//! Every `(spec, mask, repetition)` cell runs independently with a seed
//! derived from its key, so results do not depend on scheduling order or
//! on which other cells are part of the experiment.

mod metrics;
mod output;

use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use metrics::{
    aggregate, cactus_data, combination_coverage, format_rate, single_param_successes, AggregateRow,
    CactusRow, CoverageSummary, MaskCoverage, SizeCoverage,
};
pub use output::{
    render_table, write_aggregate_csv, write_cactus_csv, write_coverage_csv, write_results_csv,
    write_sweep_outputs, SWEEP_FILES,
};

use crate::falsify::{falsify, FreeMask};
use crate::optimize::{OptimizerConfig, OptimizerKind, TrustRegionConfig};
use crate::stl::Semantics;
use crate::system::Benchmark;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error("failed to build worker pool: {0}")]
    Pool(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub benchmark: Benchmark,
    /// Spec names to run; empty means every spec of the benchmark.
    pub specs: Vec<String>,
    pub masks: Vec<FreeMask>,
    pub repetitions: usize,
    pub budget: usize,
    pub base_seed: u64,
    pub optimizer: OptimizerKind,
    pub trust_region: TrustRegionConfig,
    pub semantics: Semantics,
    pub parallelism: usize,
}

impl ExperimentConfig {
    /// Defaults: all specs, the twelve sweep masks, 5 repetitions, budget
    /// 1000, trust-region optimizer, classic semantics.
    pub fn new(benchmark: Benchmark) -> Self {
        Self {
            benchmark,
            specs: Vec::new(),
            masks: FreeMask::sweep(),
            repetitions: 5,
            budget: 1000,
            base_seed: 0,
            optimizer: OptimizerKind::TurboLite,
            trust_region: TrustRegionConfig::default(),
            semantics: Semantics::Classic,
            parallelism: 1,
        }
    }

    fn spec_names(&self) -> Result<Vec<String>, HarnessError> {
        if self.specs.is_empty() {
            return Ok(self.benchmark.specs.keys().cloned().collect());
        }
        for s in &self.specs {
            if self.benchmark.spec(s).is_none() {
                return Err(HarnessError::Config(format!(
                    "benchmark `{}` has no spec `{s}`",
                    self.benchmark.name
                )));
            }
        }
        Ok(self.specs.clone())
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.repetitions < 1 {
            return Err(HarnessError::Config("repetitions must be at least 1".into()));
        }
        if self.budget < 1 {
            return Err(HarnessError::Config("budget must be at least 1".into()));
        }
        if self.masks.is_empty() {
            return Err(HarnessError::Config("mask list is empty".into()));
        }
        if self.masks.iter().any(FreeMask::is_empty) {
            return Err(HarnessError::Config("masks must select at least one parameter".into()));
        }
        Ok(())
    }
}

/// Outcome of one `(spec, mask, repetition)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub benchmark: String,
    pub spec: String,
    pub mask: String,
    pub rep: usize,
    pub seed: u64,
    pub falsified: bool,
    pub sims: usize,
    pub best_robustness: f64,
    /// Diagnostic when the run errored or panicked.
    pub error: Option<String>,
}

impl RunRecord {
    /// `benchmark/spec`, the key used by aggregates and coverage.
    pub fn spec_id(&self) -> String {
        format!("{}/{}", self.benchmark, self.spec)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub records: Vec<RunRecord>,
}

impl ResultSet {
    pub fn extend(&mut self, other: ResultSet) {
        self.records.extend(other.records);
    }
}

/// Stable 64-bit hash of a cell key (first eight bytes of its SHA-256).
///
/// `spec` is the benchmark-qualified id, so equally named specs of
/// different benchmarks draw different seeds.
pub fn cell_hash(spec: &str, mask: &str, rep: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(spec.as_bytes());
    h.update([0u8]);
    h.update(mask.as_bytes());
    h.update([0u8]);
    h.update((rep as u64).to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn cell_seed(base_seed: u64, spec: &str, mask: &str, rep: usize) -> u64 {
    base_seed.wrapping_add(cell_hash(spec, mask, rep))
}

/// Runs every cell of the experiment, in parallel up to
/// `config.parallelism`, and returns records in cell order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultSet, HarnessError> {
    config.validate()?;
    let specs = config.spec_names()?;
    let mut cells = Vec::new();
    for spec in &specs {
        for mask in &config.masks {
            for rep in 0..config.repetitions {
                cells.push((spec.as_str(), *mask, rep));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    let records = pool.install(|| {
        cells
            .par_iter()
            .map(|&(spec, mask, rep)| run_cell(config, spec, mask, rep))
            .collect::<Vec<_>>()
    });
    Ok(ResultSet { records })
}

fn run_cell(config: &ExperimentConfig, spec: &str, mask: FreeMask, rep: usize) -> RunRecord {
    let label = mask.label();
    let spec_id = format!("{}/{spec}", config.benchmark.name);
    let seed = cell_seed(config.base_seed, &spec_id, &label, rep);
    let optimizer = OptimizerConfig {
        kind: config.optimizer,
        budget: config.budget,
        init_samples: None,
        trust_region: config.trust_region.clone(),
        seed,
    };
    let mut record = RunRecord {
        benchmark: config.benchmark.name.clone(),
        spec: spec.to_string(),
        mask: label,
        rep,
        seed,
        falsified: false,
        sims: 0,
        best_robustness: f64::INFINITY,
        error: None,
    };
    let run = catch_unwind(AssertUnwindSafe(|| {
        falsify(&config.benchmark, spec, mask, &optimizer, config.semantics)
    }));
    match run {
        Ok(Ok(outcome)) => {
            record.falsified = outcome.falsified;
            record.sims = outcome.simulations_used;
            record.best_robustness = outcome.best_robustness;
        }
        Ok(Err(e)) => record.error = Some(e.to_string()),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            record.error = Some(format!("panic: {msg}"));
        }
    }
    record
}
