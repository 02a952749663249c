//! Fixtures shared by the criterion benches.

use pulsefalsify::signal::{InputRange, PulseParams, Signal};
use pulsefalsify::system::{load_benchmark, Benchmark};

pub const LAG: &str = include_str!("../../../benchmarks/lag.json");
pub const CC: &str = include_str!("../../../benchmarks/cc.json");

pub fn benchmark(doc: &str) -> Benchmark {
    load_benchmark(doc).expect("shipped benchmark is valid")
}

/// A square wave on `[0, horizon]` with `n` samples.
pub fn square_trace(n: usize, dt: f64) -> Signal {
    let range = InputRange::new(-1.0, 1.0).expect("valid range");
    let horizon = (n - 1) as f64 * dt;
    let p = PulseParams {
        period_n: 0.1,
        ..PulseParams::default()
    };
    let u = pulsefalsify::signal::synthesize_named(&p, &range, horizon, dt, "x").expect("valid pulse");
    let y: Vec<f64> = u.channels()[0].iter().map(|v| 0.5 * v + 0.1).collect();
    Signal::uniform(dt, vec!["x".into(), "y".into()], vec![u.channels()[0].clone(), y]).expect("same grid")
}
