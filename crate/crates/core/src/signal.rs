//! Piecewise-constant signals on a uniform grid and the five-parameter
//! pulse generator used as the input parameterization.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative slack (in units of `dt`) used when comparing grid instants
/// against analytic transition times.
pub(crate) const GRID_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("time grid must start at 0 and be strictly increasing with a uniform step")]
    NonUniformGrid,
    #[error("signal needs at least one sample")]
    Empty,
    #[error("channel `{name}` has {got} samples, expected {expected}")]
    LengthMismatch {
        name: String,
        got: usize,
        expected: usize,
    },
    #[error("{0} channel names for {1} channels")]
    NameCount(usize, usize),
    #[error("duplicate channel name `{0}`")]
    DuplicateName(String),
    #[error("invalid input range [{lower}, {upper}]: lower must be below upper and both finite")]
    InvalidRange { lower: f64, upper: f64 },
    #[error("pulse parameter {param} = {value} is outside [0, {max}]")]
    ParamOutOfRange {
        param: PulseParam,
        value: f64,
        max: f64,
    },
    #[error("horizon must be finite and positive, got {0}")]
    InvalidHorizon(f64),
    #[error("step must satisfy 0 < dt <= horizon, got dt = {dt} for horizon {horizon}")]
    InvalidStep { dt: f64, horizon: f64 },
    #[error("time {t} is outside the signal support [0, {end}]")]
    OutOfRange { t: f64, end: f64 },
    #[error("trace file: {0}")]
    Csv(String),
}

/// One of the five normalized pulse-generator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PulseParam {
    Low,
    Period,
    Width,
    High,
    Delay,
}

impl PulseParam {
    /// Canonical coordinate order (L, P, W, H, D).
    pub const ALL: [PulseParam; 5] = [
        PulseParam::Low,
        PulseParam::Period,
        PulseParam::Width,
        PulseParam::High,
        PulseParam::Delay,
    ];

    pub fn letter(self) -> char {
        match self {
            PulseParam::Low => 'L',
            PulseParam::Period => 'P',
            PulseParam::Width => 'W',
            PulseParam::High => 'H',
            PulseParam::Delay => 'D',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'L' => Some(PulseParam::Low),
            'P' => Some(PulseParam::Period),
            'W' => Some(PulseParam::Width),
            'H' => Some(PulseParam::High),
            'D' => Some(PulseParam::Delay),
            _ => None,
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PulseParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PulseParam::Low => "low'",
            PulseParam::Period => "period'",
            PulseParam::Width => "width'",
            PulseParam::High => "high'",
            PulseParam::Delay => "delay'",
        };
        f.write_str(name)
    }
}

/// Physical bounds of one input channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputRange {
    lower: f64,
    upper: f64,
}

impl InputRange {
    pub fn new(lower: f64, upper: f64) -> Result<Self, SignalError> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(SignalError::InvalidRange { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Normalized pulse parameters.
///
/// `period_n` may range over `[0, 2]`; whether the tighter `[0, 1]` applies
/// depends on whether the delay is optimized too, which is checked by
/// [`validate_period_range`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    pub low_n: f64,
    pub period_n: f64,
    pub width_n: f64,
    pub high_n: f64,
    pub delay_n: f64,
}

impl PulseParams {
    /// Values held by parameters that are not being optimized.
    pub const FIXED_DEFAULTS: PulseParams = PulseParams {
        low_n: 0.0,
        period_n: 0.5,
        width_n: 0.5,
        high_n: 1.0,
        delay_n: 0.0,
    };

    pub fn get(&self, param: PulseParam) -> f64 {
        match param {
            PulseParam::Low => self.low_n,
            PulseParam::Period => self.period_n,
            PulseParam::Width => self.width_n,
            PulseParam::High => self.high_n,
            PulseParam::Delay => self.delay_n,
        }
    }

    pub fn set(&mut self, param: PulseParam, value: f64) {
        match param {
            PulseParam::Low => self.low_n = value,
            PulseParam::Period => self.period_n = value,
            PulseParam::Width => self.width_n = value,
            PulseParam::High => self.high_n = value,
            PulseParam::Delay => self.delay_n = value,
        }
    }

    /// Checks finiteness and the per-parameter bounds (`period_n` against
    /// its widest range `[0, 2]`).
    pub fn validate(&self) -> Result<(), SignalError> {
        for param in PulseParam::ALL {
            let value = self.get(param);
            let max = if param == PulseParam::Period { 2.0 } else { 1.0 };
            if !(value.is_finite() && (0.0..=max).contains(&value)) {
                return Err(SignalError::ParamOutOfRange { param, value, max });
            }
        }
        Ok(())
    }
}

impl Default for PulseParams {
    fn default() -> Self {
        Self::FIXED_DEFAULTS
    }
}

/// Denormalized pulse in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalPulse {
    pub period: f64,
    pub width: f64,
    pub delay: f64,
    pub low: f64,
    pub high: f64,
    pub horizon: f64,
}

impl PhysicalPulse {
    /// Value of the pulse at time `t`, quantizing transitions that fall
    /// between grid points of step `dt` onto the next grid point.
    ///
    /// Each period starts with the high segment; the initial delay holds low.
    pub fn value_at(&self, t: f64, dt: f64) -> f64 {
        let tol = GRID_EPS * dt;
        // a train delayed to the horizon never fires inside [0, T]
        if t < self.delay - tol || self.period <= 0.0 || self.delay >= self.horizon - tol {
            return self.low;
        }
        let mut phase = (t - self.delay).max(0.0) % self.period;
        if phase > self.period - tol {
            phase = 0.0;
        }
        if phase < self.width - tol {
            self.high
        } else {
            self.low
        }
    }
}

/// Maps normalized parameters onto physical pulse quantities.
pub fn denormalize(
    params: &PulseParams,
    range: &InputRange,
    horizon: f64,
) -> Result<PhysicalPulse, SignalError> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(SignalError::InvalidHorizon(horizon));
    }
    params.validate()?;
    let period = params.period_n * horizon;
    let width = params.width_n * period;
    let delay = params.delay_n * horizon;
    let span = range.upper - range.lower;
    // Clamp only absorbs last-ulp rounding; the formulas already land in range.
    let low = (range.lower + params.low_n * span).clamp(range.lower, range.upper);
    let high = (low + params.high_n * (range.upper - low)).clamp(low, range.upper);
    Ok(PhysicalPulse {
        period,
        width,
        delay,
        low,
        high,
        horizon,
    })
}

/// Number of grid instants in `{0, dt, ..., horizon}`.
pub fn grid_len(horizon: f64, dt: f64) -> usize {
    (horizon / dt + GRID_EPS).floor() as usize + 1
}

/// Renders a pulse train as a single-channel signal named `name`.
pub fn synthesize_pulse(
    params: &PulseParams,
    range: &InputRange,
    horizon: f64,
    dt: f64,
) -> Result<Signal, SignalError> {
    synthesize_named(params, range, horizon, dt, "u")
}

pub fn synthesize_named(
    params: &PulseParams,
    range: &InputRange,
    horizon: f64,
    dt: f64,
    name: &str,
) -> Result<Signal, SignalError> {
    let pulse = denormalize(params, range, horizon)?;
    if !(dt.is_finite() && dt > 0.0 && dt <= horizon) {
        return Err(SignalError::InvalidStep { dt, horizon });
    }
    let n = grid_len(horizon, dt);
    let values = (0..n).map(|i| pulse.value_at(i as f64 * dt, dt)).collect();
    Signal::uniform(dt, vec![name.to_string()], vec![values])
}

/// Outcome of [`validate_period_range`].
#[derive(Debug, Clone, PartialEq)]
pub enum PeriodCheck {
    Ok,
    Violation(String),
}

impl PeriodCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, PeriodCheck::Ok)
    }
}

/// `period_n` must lie in `[0, 1]` when the delay is optimized alongside it
/// and in `[0, 2]` otherwise.
pub fn validate_period_range(params: &PulseParams, delay_is_free: bool) -> PeriodCheck {
    let max = if delay_is_free { 1.0 } else { 2.0 };
    let p = params.period_n;
    if p.is_finite() && (0.0..=max).contains(&p) {
        PeriodCheck::Ok
    } else {
        PeriodCheck::Violation(format!(
            "period' = {p} outside [0, {max}] (delay' {})",
            if delay_is_free { "free" } else { "fixed" }
        ))
    }
}

/// Multi-channel, piecewise-constant time series on a uniform grid
/// starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    dt: f64,
    times: Vec<f64>,
    names: Vec<String>,
    channels: Vec<Vec<f64>>,
}

impl Signal {
    /// Builds a signal on the grid `i * dt`.
    pub fn uniform(
        dt: f64,
        names: Vec<String>,
        channels: Vec<Vec<f64>>,
    ) -> Result<Self, SignalError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SignalError::NonUniformGrid);
        }
        let len = channels.first().map(Vec::len).unwrap_or(0);
        let times = (0..len).map(|i| i as f64 * dt).collect();
        Self::build(dt, times, names, channels)
    }

    /// Builds a signal from explicit sample instants, which must form a
    /// uniform grid starting at 0.
    pub fn from_times(
        times: Vec<f64>,
        names: Vec<String>,
        channels: Vec<Vec<f64>>,
    ) -> Result<Self, SignalError> {
        if times.is_empty() {
            return Err(SignalError::Empty);
        }
        if times[0] != 0.0 {
            return Err(SignalError::NonUniformGrid);
        }
        let dt = if times.len() > 1 { times[1] - times[0] } else { 1.0 };
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SignalError::NonUniformGrid);
        }
        for (i, w) in times.windows(2).enumerate() {
            let step = w[1] - w[0];
            let expected = (i + 1) as f64 * dt;
            if step <= 0.0 || (w[1] - expected).abs() > 1e-6 * dt.max(expected) {
                return Err(SignalError::NonUniformGrid);
            }
        }
        Self::build(dt, times, names, channels)
    }

    fn build(
        dt: f64,
        times: Vec<f64>,
        names: Vec<String>,
        channels: Vec<Vec<f64>>,
    ) -> Result<Self, SignalError> {
        if times.is_empty() {
            return Err(SignalError::Empty);
        }
        if names.len() != channels.len() {
            return Err(SignalError::NameCount(names.len(), channels.len()));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(SignalError::DuplicateName(name.clone()));
            }
        }
        for (name, ch) in names.iter().zip(&channels) {
            if ch.len() != times.len() {
                return Err(SignalError::LengthMismatch {
                    name: name.clone(),
                    got: ch.len(),
                    expected: times.len(),
                });
            }
        }
        Ok(Self {
            dt,
            times,
            names,
            channels,
        })
    }

    /// Stacks single- or multi-channel signals sharing one grid.
    pub fn merge(parts: Vec<Signal>) -> Result<Self, SignalError> {
        let mut iter = parts.into_iter();
        let mut acc = iter.next().ok_or(SignalError::Empty)?;
        for part in iter {
            if part.times.len() != acc.times.len() || part.dt != acc.dt {
                return Err(SignalError::NonUniformGrid);
            }
            for (name, ch) in part.names.into_iter().zip(part.channels) {
                if acc.names.contains(&name) {
                    return Err(SignalError::DuplicateName(name));
                }
                acc.names.push(name);
                acc.channels.push(ch);
            }
        }
        Ok(acc)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.channels[i].as_slice())
    }

    /// Grid index holding the value at time `t` (zero-order hold).
    pub fn index_at(&self, t: f64) -> Result<usize, SignalError> {
        let end = self.end_time();
        let tol = GRID_EPS * self.dt;
        if !(t.is_finite() && t >= -tol && t <= end + tol) {
            return Err(SignalError::OutOfRange { t, end });
        }
        let idx = ((t / self.dt) + GRID_EPS).floor().max(0.0) as usize;
        Ok(idx.min(self.times.len() - 1))
    }

    /// Zero-order-hold sample of every channel at time `t`.
    pub fn sample_at(&self, t: f64) -> Result<Vec<f64>, SignalError> {
        let i = self.index_at(t)?;
        Ok(self.channels.iter().map(|ch| ch[i]).collect())
    }
}

/// Reads a trace from CSV with a `time` column plus one column per channel.
pub fn read_trace_csv<R: std::io::Read>(reader: R) -> Result<Signal, SignalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| SignalError::Csv(e.to_string()))?.clone();
    let time_col = headers
        .iter()
        .position(|h| h == "time")
        .ok_or_else(|| SignalError::Csv("missing `time` column".into()))?;
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != time_col)
        .map(|(_, h)| h.to_string())
        .collect();
    let mut times = Vec::new();
    let mut channels = vec![Vec::new(); names.len()];
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| SignalError::Csv(e.to_string()))?;
        let mut ch = 0;
        for (i, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                SignalError::Csv(format!("row {}: `{field}` is not a number", row + 2))
            })?;
            if i == time_col {
                times.push(value);
            } else {
                channels[ch].push(value);
                ch += 1;
            }
        }
    }
    Signal::from_times(times, names, channels)
}

/// Writes `signal` in the format accepted by [`read_trace_csv`].
pub fn write_trace_csv<W: std::io::Write>(writer: W, signal: &Signal) -> Result<(), SignalError> {
    let err = |e: csv::Error| SignalError::Csv(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["time".to_string()];
    header.extend(signal.names.iter().cloned());
    w.write_record(&header).map_err(err)?;
    for (i, t) in signal.times.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(signal.channels.iter().map(|ch| ch[i].to_string()));
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| SignalError::Csv(e.to_string()))
}
