//! Built-in desk-scale models.
//!
//! Continuous-time kinds are integrated with fixed-step RK4 at the trace
//! step; the delta-sigma modulator is a discrete map with one update per
//! grid instant.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::rk4::rk4_step;
use super::SystemError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// `y' = (K·u - y)/tau`.
    FirstOrderLag,
    /// Five-car platoon; the lead car is driven by throttle and brake.
    ChasingCars,
    /// Third-order integrator chain with a sign quantizer in the loop.
    DeltaSigma,
    /// Planar linear system switching dynamics on `|x1| < gamma`.
    SwitchedSystem,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::FirstOrderLag => "first_order_lag",
            ModelKind::ChasingCars => "chasing_cars",
            ModelKind::DeltaSigma => "delta_sigma",
            ModelKind::SwitchedSystem => "switched_system",
        }
    }

    /// Every parameter the kind reads, with its default.
    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            ModelKind::FirstOrderLag => &[("gain", 1.0), ("tau", 1.0), ("y0", 0.0)],
            ModelKind::ChasingCars => &[
                ("k1", 1.0),
                ("k2", 2.0),
                ("d0", 10.0),
                ("throttle_gain", 5.0),
                ("brake_gain", 8.0),
            ],
            ModelKind::DeltaSigma => &[
                ("b1", 0.044),
                ("b2", 0.287),
                ("b3", 0.8),
                ("x1_init", 0.0),
                ("x2_init", 0.0),
                ("x3_init", 0.0),
            ],
            ModelKind::SwitchedSystem => &[
                ("a1_11", -0.2),
                ("a1_12", 1.0),
                ("a1_21", -1.0),
                ("a1_22", -0.2),
                ("a2_11", 0.05),
                ("a2_12", 1.0),
                ("a2_21", -1.0),
                ("a2_22", 0.05),
                ("gamma", 0.7),
                ("x1_init", 0.0),
                ("x2_init", 0.0),
            ],
        }
    }

    pub fn input_count(self) -> usize {
        match self {
            ModelKind::FirstOrderLag | ModelKind::DeltaSigma => 1,
            ModelKind::ChasingCars | ModelKind::SwitchedSystem => 2,
        }
    }

    pub fn output_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::FirstOrderLag => &["y"],
            ModelKind::ChasingCars => &["y1", "y2", "y3", "y4", "y5"],
            ModelKind::DeltaSigma => &["x1", "x2", "x3", "v"],
            ModelKind::SwitchedSystem => &["x1", "x2"],
        }
    }
}

impl FromStr for ModelKind {
    type Err = SystemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first_order_lag" => Ok(ModelKind::FirstOrderLag),
            "chasing_cars" => Ok(ModelKind::ChasingCars),
            "delta_sigma" => Ok(ModelKind::DeltaSigma),
            "switched_system" => Ok(ModelKind::SwitchedSystem),
            other => Err(SystemError::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A model kind with every parameter resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    kind: ModelKind,
    params: BTreeMap<String, f64>,
}

impl ModelSpec {
    /// Fills in defaults; rejects unknown or non-finite parameters.
    pub fn new(kind: ModelKind, overrides: &BTreeMap<String, f64>) -> Result<Self, SystemError> {
        let mut params: BTreeMap<String, f64> = kind
            .defaults()
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        for (k, v) in overrides {
            match params.get_mut(k) {
                Some(slot) if v.is_finite() => *slot = *v,
                Some(_) => {
                    return Err(SystemError::Config(format!("model parameter `{k}` must be finite")))
                }
                None => {
                    return Err(SystemError::Config(format!(
                        "model `{kind}` has no parameter `{k}`"
                    )))
                }
            }
        }
        let spec = Self { kind, params };
        if kind == ModelKind::FirstOrderLag && spec.param("tau") <= 0.0 {
            return Err(SystemError::Config("tau must be positive".into()));
        }
        Ok(spec)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn has_param(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }

    fn param(&self, name: &str) -> f64 {
        self.params[name]
    }

    /// Same model with some parameters replaced.
    pub fn with_overrides(&self, values: &BTreeMap<String, f64>) -> Result<Self, SystemError> {
        let mut out = self.clone();
        for (k, v) in values {
            match out.params.get_mut(k) {
                Some(slot) => *slot = *v,
                None => {
                    return Err(SystemError::Config(format!(
                        "model `{}` has no parameter `{k}`",
                        self.kind
                    )))
                }
            }
        }
        Ok(out)
    }

    /// Runs the model over `steps` grid instants spaced by `dt`.
    ///
    /// `inputs[c][i]` is channel `c` at instant `i`. Returns one row per
    /// output channel.
    pub fn run(&self, inputs: &[&[f64]], dt: f64, steps: usize) -> Result<Vec<Vec<f64>>, SystemError> {
        match self.kind {
            ModelKind::FirstOrderLag => {
                let (gain, tau) = (self.param("gain"), self.param("tau"));
                let rows = integrate(&[self.param("y0")], inputs, dt, steps, |x, u, d| {
                    d[0] = (gain * u[0] - x[0]) / tau;
                }, |_| {})?;
                Ok(rows)
            }
            ModelKind::ChasingCars => self.run_chasing_cars(inputs, dt, steps),
            ModelKind::DeltaSigma => self.run_delta_sigma(inputs, steps),
            ModelKind::SwitchedSystem => {
                let a1 = [
                    [self.param("a1_11"), self.param("a1_12")],
                    [self.param("a1_21"), self.param("a1_22")],
                ];
                let a2 = [
                    [self.param("a2_11"), self.param("a2_12")],
                    [self.param("a2_21"), self.param("a2_22")],
                ];
                let gamma = self.param("gamma");
                let x0 = [self.param("x1_init"), self.param("x2_init")];
                integrate(&x0, inputs, dt, steps, |x, u, d| {
                    let a = if x[0].abs() < gamma { &a1 } else { &a2 };
                    d[0] = a[0][0] * x[0] + a[0][1] * x[1] + u[0];
                    d[1] = a[1][0] * x[0] + a[1][1] * x[1] + u[1];
                }, |_| {})
            }
        }
    }

    fn run_chasing_cars(&self, inputs: &[&[f64]], dt: f64, steps: usize) -> Result<Vec<Vec<f64>>, SystemError> {
        let (k1, k2, d0) = (self.param("k1"), self.param("k2"), self.param("d0"));
        let (tg, bg) = (self.param("throttle_gain"), self.param("brake_gain"));
        // state: positions y1..y5 then velocities v1..v5; car 1 leads
        let mut x0 = vec![0.0; 10];
        for (i, y) in x0.iter_mut().take(5).enumerate() {
            *y = (4 - i) as f64 * d0;
        }
        let rows = integrate(
            &x0,
            inputs,
            dt,
            steps,
            |x, u, d| {
                let mut accel = tg * u[0] - bg * u[1];
                if x[5] <= 0.0 && accel < 0.0 {
                    accel = 0.0;
                }
                d[0] = x[5].max(0.0);
                d[5] = accel;
                for i in 1..5 {
                    d[i] = x[5 + i];
                    d[5 + i] = k1 * (x[i - 1] - x[i] - d0) - k2 * x[5 + i];
                }
            },
            |x| x[5] = x[5].max(0.0),
        )?;
        Ok(rows.into_iter().take(5).collect())
    }

    fn run_delta_sigma(&self, inputs: &[&[f64]], steps: usize) -> Result<Vec<Vec<f64>>, SystemError> {
        let b = [self.param("b1"), self.param("b2"), self.param("b3")];
        let mut x = [self.param("x1_init"), self.param("x2_init"), self.param("x3_init")];
        let mut rows: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(steps)).collect();
        for (k, &u) in inputs[0].iter().enumerate().take(steps) {
            let v = quantize(x[2]);
            for (row, value) in rows.iter_mut().zip([x[0], x[1], x[2], v]) {
                row.push(value);
            }
            x = [
                x[0] + b[0] * (u - v),
                x[1] + b[1] * (x[0] - v),
                x[2] + b[2] * (x[1] - v),
            ];
            if x.iter().any(|s| !s.is_finite()) {
                return Err(SystemError::SimulationFailure { time_index: k + 1 });
            }
        }
        Ok(rows)
    }
}

/// `sign` with `sign(0) = +1`.
pub fn quantize(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Fixed-step RK4 over the grid, input held at the left grid value.
/// `project` runs after each step (used for state constraints).
fn integrate<F, P>(
    x0: &[f64],
    inputs: &[&[f64]],
    dt: f64,
    steps: usize,
    derivative: F,
    project: P,
) -> Result<Vec<Vec<f64>>, SystemError>
where
    F: Fn(&[f64], &[f64], &mut [f64]),
    P: Fn(&mut [f64]),
{
    let n = x0.len();
    let mut rows = vec![Vec::with_capacity(steps); n];
    let mut state = x0.to_vec();
    let mut u = vec![0.0; inputs.len()];
    for k in 0..steps {
        for (row, v) in rows.iter_mut().zip(&state) {
            row.push(*v);
        }
        if k + 1 == steps {
            break;
        }
        for (slot, ch) in u.iter_mut().zip(inputs) {
            *slot = ch[k];
        }
        state = rk4_step(&derivative, &state, &u, dt)
            .map_err(|_| SystemError::SimulationFailure { time_index: k + 1 })?;
        project(&mut state);
    }
    Ok(rows)
}
