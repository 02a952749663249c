//! Falsification of signal temporal logic requirements for simulated
//! dynamical systems, with inputs drawn from a five-parameter pulse
//! generator.
//!
//! The pipeline is: [`falsify::ParamSpace`] decodes an optimizer point into
//! per-channel [`signal::PulseParams`], [`signal`] renders them as input
//! traces, [`system`] simulates the model, and [`stl`] scores the output.
//! [`optimize`] drives the search and [`harness`] repeats it across seeds
//! and parameter masks.

pub mod falsify;
pub mod harness;
pub mod optimize;
pub mod signal;
pub mod stl;
pub mod system;

pub use falsify::{falsify, FalsificationOutcome, FreeMask, ParamSpace};
pub use optimize::{OptimizerConfig, OptimizerKind};
pub use signal::{read_trace_csv, write_trace_csv, InputRange, PulseParam, PulseParams, Signal};
pub use stl::{parse, Formula, Semantics};
pub use system::{load_benchmark, simulate, Benchmark};
