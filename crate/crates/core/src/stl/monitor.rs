//! Offline robustness monitor over uniformly sampled traces.
//!
//! Every sub-formula is evaluated to a full-length robustness signal, bottom
//! up. Windows that run past the end of the trace are truncated; the
//! horizon check in [`robustness`] guarantees that such entries are never
//! read at the requested evaluation instant.

use std::collections::VecDeque;

use super::ast::{Atom, Formula, Interval};
use super::StlError;
use crate::signal::{Signal, GRID_EPS};

/// Quantitative semantics used to combine sub-formula robustness values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Semantics {
    /// min/max semantics.
    #[default]
    Classic,
    /// Conjunctions sum their violations, disjunctions sum their
    /// satisfactions; reduces to min/max when no operand disagrees in sign.
    Additive,
}

impl std::str::FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "classic" => Ok(Semantics::Classic),
            "additive" => Ok(Semantics::Additive),
            other => Err(format!("unknown semantics `{other}` (expected classic or additive)")),
        }
    }
}

impl std::fmt::Display for Semantics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Semantics::Classic => "classic",
            Semantics::Additive => "additive",
        })
    }
}

/// Additive conjunction of two values.
pub fn additive_and(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.min(b)
    } else {
        a.min(0.0) + b.min(0.0)
    }
}

/// Additive disjunction of two values.
pub fn additive_or(a: f64, b: f64) -> f64 {
    if a < 0.0 && b < 0.0 {
        a.max(b)
    } else {
        a.max(0.0) + b.max(0.0)
    }
}

/// Additive conjunction over a slice of operand values.
pub fn additive_and_all(values: &[f64]) -> f64 {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        min
    } else {
        values.iter().filter(|v| **v < 0.0).sum::<f64>()
    }
}

/// Additive disjunction over a slice of operand values.
pub fn additive_or_all(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max < 0.0 {
        max
    } else {
        values.iter().filter(|v| **v > 0.0).sum::<f64>()
    }
}

impl Semantics {
    fn and(self, a: f64, b: f64) -> f64 {
        match self {
            Semantics::Classic => a.min(b),
            Semantics::Additive => additive_and(a, b),
        }
    }

    fn or(self, a: f64, b: f64) -> f64 {
        match self {
            Semantics::Classic => a.max(b),
            Semantics::Additive => additive_or(a, b),
        }
    }
}

/// Grid offsets `[lo, hi]` covered by an interval at step `dt`.
fn offsets(i: &Interval, dt: f64) -> (usize, usize) {
    let lo = (i.start / dt - GRID_EPS).ceil().max(0.0) as usize;
    let hi = (i.end / dt + GRID_EPS).floor().max(0.0) as usize;
    (lo, hi.max(lo))
}

/// Look-ahead of a formula in grid steps, computed with the same offsets
/// the evaluator uses.
fn horizon_steps(f: &Formula, dt: f64) -> usize {
    match f {
        Formula::Atom(_) => 0,
        Formula::Not(x) => horizon_steps(x, dt),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            horizon_steps(a, dt).max(horizon_steps(b, dt))
        }
        Formula::Always(i, x) | Formula::Eventually(i, x) => offsets(i, dt).1 + horizon_steps(x, dt),
        Formula::Until(i, a, b) => offsets(i, dt).1 + horizon_steps(a, dt).max(horizon_steps(b, dt)),
    }
}

/// Robustness of `f` on `trace` at time `t0`.
pub fn robustness(
    f: &Formula,
    trace: &Signal,
    t0: f64,
    semantics: Semantics,
) -> Result<f64, StlError> {
    let start = trace.index_at(t0).map_err(|_| StlError::TraceTooShort {
        needed: t0,
        available: trace.end_time(),
    })?;
    if start + horizon_steps(f, trace.dt()) >= trace.len() {
        return Err(StlError::TraceTooShort {
            needed: t0 + f.horizon(),
            available: trace.end_time(),
        });
    }
    let values = evaluate(f, trace, semantics)?;
    let rho = values[start];
    if rho.is_nan() {
        return Err(StlError::NonFinite);
    }
    // adding +0 turns -0 into +0
    Ok(rho + 0.0)
}

pub fn robustness_classic(f: &Formula, trace: &Signal, t0: f64) -> Result<f64, StlError> {
    robustness(f, trace, t0, Semantics::Classic)
}

pub fn robustness_additive(f: &Formula, trace: &Signal, t0: f64) -> Result<f64, StlError> {
    robustness(f, trace, t0, Semantics::Additive)
}

/// Robustness signal of `f` at every grid instant. Entries whose window
/// extends past the trace end are computed over the truncated window.
pub fn evaluate(f: &Formula, trace: &Signal, semantics: Semantics) -> Result<Vec<f64>, StlError> {
    let dt = trace.dt();
    Ok(match f {
        Formula::Atom(a) => atom_signal(a, trace)?,
        Formula::Not(x) => {
            let mut v = evaluate(x, trace, semantics)?;
            v.iter_mut().for_each(|r| *r = -*r);
            v
        }
        Formula::And(a, b) => zip_with(evaluate(a, trace, semantics)?, &evaluate(b, trace, semantics)?, |x, y| {
            semantics.and(x, y)
        }),
        Formula::Or(a, b) => zip_with(evaluate(a, trace, semantics)?, &evaluate(b, trace, semantics)?, |x, y| {
            semantics.or(x, y)
        }),
        Formula::Implies(a, b) => zip_with(evaluate(a, trace, semantics)?, &evaluate(b, trace, semantics)?, |x, y| {
            semantics.or(-x, y)
        }),
        Formula::Always(i, x) => {
            let child = evaluate(x, trace, semantics)?;
            let (lo, hi) = offsets(i, dt);
            let mins = sliding_extreme(&child, lo, hi, true);
            match semantics {
                Semantics::Classic => mins,
                Semantics::Additive => additive_window(&child, &mins, lo, hi, true),
            }
        }
        Formula::Eventually(i, x) => {
            let child = evaluate(x, trace, semantics)?;
            let (lo, hi) = offsets(i, dt);
            let maxs = sliding_extreme(&child, lo, hi, false);
            match semantics {
                Semantics::Classic => maxs,
                Semantics::Additive => additive_window(&child, &maxs, lo, hi, false),
            }
        }
        Formula::Until(i, a, b) => {
            let left = evaluate(a, trace, semantics)?;
            let right = evaluate(b, trace, semantics)?;
            until(&left, &right, offsets(i, dt), semantics)
        }
    })
}

fn zip_with(mut a: Vec<f64>, b: &[f64], op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x = op(*x, *y);
    }
    a
}

fn atom_signal(atom: &Atom, trace: &Signal) -> Result<Vec<f64>, StlError> {
    let margin = atom.margin_expr();
    let mut out = vec![margin.constant; trace.len()];
    for (name, coeff) in &margin.terms {
        let ch = trace
            .channel(name)
            .ok_or_else(|| StlError::UnknownSignal(name.clone()))?;
        for (o, v) in out.iter_mut().zip(ch) {
            *o += coeff * v;
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(StlError::NonFinite);
    }
    Ok(out)
}

/// Window `[i+lo, i+hi]` clamped to the last index.
fn window(i: usize, lo: usize, hi: usize, n: usize) -> (usize, usize) {
    ((i + lo).min(n - 1), (i + hi).min(n - 1))
}

/// Min (or max) of `v` over each window `[i+lo, i+hi]`, using a monotone
/// deque; both window ends are non-decreasing in `i`.
fn sliding_extreme(v: &[f64], lo: usize, hi: usize, is_min: bool) -> Vec<f64> {
    let n = v.len();
    let better = |a: f64, b: f64| if is_min { a <= b } else { a >= b };
    let mut out = Vec::with_capacity(n);
    let mut deque: VecDeque<usize> = VecDeque::new();
    let mut next = 0usize;
    for i in 0..n {
        let (start, end) = window(i, lo, hi, n);
        while next <= end {
            while let Some(&back) = deque.back() {
                if better(v[next], v[back]) {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(next);
            next += 1;
        }
        while let Some(&front) = deque.front() {
            if front < start {
                deque.pop_front();
            } else {
                break;
            }
        }
        out.push(v[*deque.front().expect("window is never empty")]);
    }
    out
}

/// Additive Always (`conj = true`) or Eventually over each window, given
/// the classic window extremes.
fn additive_window(v: &[f64], extremes: &[f64], lo: usize, hi: usize, conj: bool) -> Vec<f64> {
    let n = v.len();
    // prefix sums of the parts that count: violations for Always,
    // satisfactions for Eventually
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &x in v {
        acc += if conj { x.min(0.0) } else { x.max(0.0) };
        prefix.push(acc);
    }
    extremes
        .iter()
        .enumerate()
        .map(|(i, &ext)| {
            let (start, end) = window(i, lo, hi, n);
            let sum = prefix[end + 1] - prefix[start];
            // the sum is at least as extreme as the extreme itself; clamping
            // keeps rounding from moving it toward or across zero
            if conj {
                if ext >= 0.0 {
                    if ext > 0.0 { ext } else { 0.0 }
                } else {
                    sum.min(ext)
                }
            } else if ext <= 0.0 {
                if ext < 0.0 { ext } else { 0.0 }
            } else {
                sum.max(ext)
            }
        })
        .collect()
}

fn until(left: &[f64], right: &[f64], (lo, hi): (usize, usize), semantics: Semantics) -> Vec<f64> {
    let n = left.len();
    (0..n)
        .map(|i| {
            let (start, end) = window(i, lo, hi, n);
            let mut held = left[i];
            let mut acc: Option<f64> = None;
            for j in i..=end {
                if j > i {
                    held = semantics.and(held, left[j]);
                }
                if j >= start {
                    let candidate = semantics.and(right[j], held);
                    acc = Some(match acc {
                        None => candidate,
                        Some(a) => semantics.or(a, candidate),
                    });
                }
            }
            acc.unwrap_or(f64::NEG_INFINITY)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stl::parse;

    fn ramp() -> Signal {
        let y: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        Signal::uniform(0.1, vec!["y".into()], vec![y]).unwrap()
    }

    #[test]
    fn ramp_always_and_eventually() {
        let t = ramp();
        let r = robustness_classic(&parse("alw[0,1](y < 0.5)").unwrap(), &t, 0.0).unwrap();
        assert!((r + 0.5).abs() < 1e-12, "{r}");
        let r = robustness_classic(&parse("ev[0,1](y > 0.5)").unwrap(), &t, 0.0).unwrap();
        assert!((r - 0.5).abs() < 1e-12, "{r}");
    }

    #[test]
    fn ramp_additive_sums_violations() {
        // 0.5 - y is negative at y = 0.6 .. 1.0
        let t = ramp();
        let r = robustness_additive(&parse("alw[0,1](y < 0.5)").unwrap(), &t, 0.0).unwrap();
        assert!((r + 1.5).abs() < 1e-12, "{r}");
    }

    #[test]
    fn zero_margin_boundary() {
        let s = Signal::uniform(1.0, vec!["x".into()], vec![vec![3.0]]).unwrap();
        assert_eq!(robustness_classic(&parse("x > 3").unwrap(), &s, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn additive_combinators() {
        assert_eq!(additive_and_all(&[-1.0, -2.0]), -3.0);
        assert_eq!(additive_and_all(&[1.0, 2.0]), 1.0);
        assert_eq!(additive_or_all(&[-1.0, -2.0]), -1.0);
        assert_eq!(additive_or_all(&[1.0, 2.0]), 3.0);
        assert_eq!(additive_and(-1.0, -2.0), -3.0);
        assert_eq!(additive_and(1.0, 2.0), 1.0);
        assert_eq!(additive_or(-1.0, -2.0), -1.0);
        assert_eq!(additive_and(0.0, 5.0), 0.0);
    }

    #[test]
    fn horizons() {
        assert_eq!(parse("x > 0").unwrap().horizon(), 0.0);
        assert_eq!(parse("alw[0,10](ev[0,5](x > 0))").unwrap().horizon(), 15.0);
        assert_eq!(parse("alw[2,4](x>0) and ev[0,9](y<1)").unwrap().horizon(), 9.0);
    }

    #[test]
    fn short_trace_and_unknown_signal() {
        let t = ramp();
        assert!(matches!(
            robustness_classic(&parse("alw[0,2](y < 0.5)").unwrap(), &t, 0.0),
            Err(StlError::TraceTooShort { .. })
        ));
        assert!(matches!(
            robustness_classic(&parse("alw[0,0.5](y < 0.5)").unwrap(), &t, 0.6),
            Err(StlError::TraceTooShort { .. })
        ));
        assert!(matches!(
            robustness_classic(&parse("z > 0").unwrap(), &t, 0.0),
            Err(StlError::UnknownSignal(_))
        ));
    }

    #[test]
    fn shifted_evaluation_instant() {
        let t = ramp();
        let r = robustness_classic(&parse("alw[0,0.3](y > 0)").unwrap(), &t, 0.5).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sliding_matches_naive() {
        let v = [3.0, -1.0, 4.0, 1.0, -5.0, 9.0, 2.0, 6.0];
        for lo in 0..4 {
            for hi in lo..6 {
                let mins = sliding_extreme(&v, lo, hi, true);
                let maxs = sliding_extreme(&v, lo, hi, false);
                for i in 0..v.len() {
                    let (s, e) = window(i, lo, hi, v.len());
                    let w = &v[s..=e];
                    assert_eq!(mins[i], w.iter().copied().fold(f64::INFINITY, f64::min));
                    assert_eq!(maxs[i], w.iter().copied().fold(f64::NEG_INFINITY, f64::max));
                }
            }
        }
    }

    #[test]
    fn until_simple() {
        // x stays positive until y becomes positive at t = 2
        let s = Signal::uniform(
            1.0,
            vec!["x".into(), "y".into()],
            vec![vec![1.0, 2.0, 0.5, -1.0], vec![-1.0, -1.0, 3.0, -1.0]],
        )
        .unwrap();
        let f = parse("(x > 0 U[0,3] y > 0)").unwrap();
        // j=2: min(3, min(1, 2, 0.5)) = 0.5
        assert_eq!(robustness_classic(&f, &s, 0.0).unwrap(), 0.5);
    }
}
