//! Reference evaluators and random generators shared by the integration
//! tests. The evaluators here recurse directly over grid instants and do
//! not reuse any of the library's monitoring code.

#![allow(dead_code)]

use pulsefalsify::stl::{AffineExpr, Comparator, Formula, Interval};
use pulsefalsify::Signal;
use rand::Rng;

pub const SIGNALS: [&str; 2] = ["x", "y"];

fn margin(atom_lhs: &AffineExpr, cmp: Comparator, rhs: &AffineExpr, trace: &Signal, i: usize) -> f64 {
    let value = |e: &AffineExpr| {
        e.constant
            + e.terms
                .iter()
                .map(|(name, k)| k * trace.channel(name).expect("known signal")[i])
                .sum::<f64>()
    };
    let (l, r) = (value(atom_lhs), value(rhs));
    match cmp {
        Comparator::Gt | Comparator::Ge => l - r,
        Comparator::Lt | Comparator::Le => r - l,
    }
}

fn holds(atom_lhs: &AffineExpr, cmp: Comparator, rhs: &AffineExpr, trace: &Signal, i: usize) -> bool {
    let value = |e: &AffineExpr| {
        e.constant
            + e.terms
                .iter()
                .map(|(name, k)| k * trace.channel(name).expect("known signal")[i])
                .sum::<f64>()
    };
    let (l, r) = (value(atom_lhs), value(rhs));
    match cmp {
        Comparator::Lt => l < r,
        Comparator::Le => l <= r,
        Comparator::Gt => l > r,
        Comparator::Ge => l >= r,
    }
}

/// Grid indices `j` with `t_i + a <= t_j <= t_i + b`; a window holding no
/// grid instant snaps to the first instant after `t_i + a`.
fn instants(trace: &Signal, i: usize, iv: &Interval) -> Vec<usize> {
    let times = trace.times();
    let slack = 1e-9 * trace.dt();
    let (from, to) = (times[i] + iv.start, times[i] + iv.end);
    let mut found: Vec<usize> = (i..times.len())
        .filter(|&j| times[j] >= from - slack && times[j] <= to + slack)
        .collect();
    if found.is_empty() {
        found.extend((i..times.len()).find(|&j| times[j] >= from - slack));
    }
    assert!(
        !found.is_empty() && times[times.len() - 1] + trace.dt() > to + slack,
        "oracle window at {i} leaves the trace"
    );
    found
}

/// Classic robustness by direct recursion.
pub fn brute_robustness(f: &Formula, trace: &Signal, i: usize) -> f64 {
    match f {
        Formula::Atom(a) => margin(&a.lhs, a.cmp, &a.rhs, trace, i),
        Formula::Not(x) => -brute_robustness(x, trace, i),
        Formula::And(a, b) => brute_robustness(a, trace, i).min(brute_robustness(b, trace, i)),
        Formula::Or(a, b) => brute_robustness(a, trace, i).max(brute_robustness(b, trace, i)),
        Formula::Implies(a, b) => (-brute_robustness(a, trace, i)).max(brute_robustness(b, trace, i)),
        Formula::Always(iv, x) => instants(trace, i, iv)
            .into_iter()
            .map(|j| brute_robustness(x, trace, j))
            .fold(f64::INFINITY, f64::min),
        Formula::Eventually(iv, x) => instants(trace, i, iv)
            .into_iter()
            .map(|j| brute_robustness(x, trace, j))
            .fold(f64::NEG_INFINITY, f64::max),
        Formula::Until(iv, a, b) => instants(trace, i, iv)
            .into_iter()
            .map(|j| {
                let left = (i..=j)
                    .map(|k| brute_robustness(a, trace, k))
                    .fold(f64::INFINITY, f64::min);
                brute_robustness(b, trace, j).min(left)
            })
            .fold(f64::NEG_INFINITY, f64::max),
    }
}

fn sum_and(values: &[f64]) -> f64 {
    if values.iter().all(|v| *v > 0.0) {
        values.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        values.iter().filter(|v| **v < 0.0).sum()
    }
}

fn sum_or(values: &[f64]) -> f64 {
    if values.iter().all(|v| *v < 0.0) {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        values.iter().filter(|v| **v > 0.0).sum()
    }
}

/// Additive robustness by direct recursion: conjunctions over all operands
/// at once, no incremental combination.
pub fn brute_additive(f: &Formula, trace: &Signal, i: usize) -> f64 {
    let rec = |g: &Formula, j: usize| brute_additive(g, trace, j);
    match f {
        Formula::Atom(a) => margin(&a.lhs, a.cmp, &a.rhs, trace, i),
        Formula::Not(x) => -rec(x, i),
        Formula::And(a, b) => sum_and(&[rec(a, i), rec(b, i)]),
        Formula::Or(a, b) => sum_or(&[rec(a, i), rec(b, i)]),
        Formula::Implies(a, b) => sum_or(&[-rec(a, i), rec(b, i)]),
        Formula::Always(iv, x) => sum_and(&instants(trace, i, iv).into_iter().map(|j| rec(x, j)).collect::<Vec<_>>()),
        Formula::Eventually(iv, x) => sum_or(&instants(trace, i, iv).into_iter().map(|j| rec(x, j)).collect::<Vec<_>>()),
        Formula::Until(iv, a, b) => sum_or(
            &instants(trace, i, iv)
                .into_iter()
                .map(|j| {
                    let mut operands: Vec<f64> = (i..=j).map(|k| rec(a, k)).collect();
                    operands.push(rec(b, j));
                    sum_and(&operands)
                })
                .collect::<Vec<_>>(),
        ),
    }
}

/// Boolean satisfaction on the same grid.
pub fn satisfies(f: &Formula, trace: &Signal, i: usize) -> bool {
    match f {
        Formula::Atom(a) => holds(&a.lhs, a.cmp, &a.rhs, trace, i),
        Formula::Not(x) => !satisfies(x, trace, i),
        Formula::And(a, b) => satisfies(a, trace, i) && satisfies(b, trace, i),
        Formula::Or(a, b) => satisfies(a, trace, i) || satisfies(b, trace, i),
        Formula::Implies(a, b) => !satisfies(a, trace, i) || satisfies(b, trace, i),
        Formula::Always(iv, x) => instants(trace, i, iv).into_iter().all(|j| satisfies(x, trace, j)),
        Formula::Eventually(iv, x) => instants(trace, i, iv).into_iter().any(|j| satisfies(x, trace, j)),
        Formula::Until(iv, a, b) => instants(trace, i, iv)
            .into_iter()
            .any(|j| satisfies(b, trace, j) && (i..=j).all(|k| satisfies(a, trace, k))),
    }
}

fn random_interval<R: Rng>(rng: &mut R, dt: f64) -> Interval {
    // mix of on-grid and off-grid bounds
    let pick = |rng: &mut R| {
        if rng.random_bool(0.5) {
            rng.random_range(0..=12) as f64 * dt
        } else {
            rng.random_range(0.0..12.0 * dt)
        }
    };
    let (a, b) = (pick(rng), pick(rng));
    Interval::new(a.min(b), a.max(b)).expect("ordered bounds")
}

fn random_atom<R: Rng>(rng: &mut R) -> Formula {
    let cmp = [Comparator::Lt, Comparator::Le, Comparator::Gt, Comparator::Ge][rng.random_range(0..4)];
    let mut lhs = AffineExpr::signal(SIGNALS[rng.random_range(0..2)]);
    if rng.random_bool(0.3) {
        lhs = lhs.add_scaled(AffineExpr::signal(SIGNALS[rng.random_range(0..2)]), rng.random_range(-2.0..2.0));
    }
    // thresholds on a coarse lattice so exact ties with trace values occur
    let c = (rng.random_range(-8..=8) as f64) * 0.25;
    Formula::atom(lhs, cmp, AffineExpr::constant(c))
}

/// Random formula of nesting depth at most `depth`.
pub fn random_formula<R: Rng>(rng: &mut R, depth: usize, dt: f64) -> Formula {
    if depth == 0 || rng.random_bool(0.2) {
        return random_atom(rng);
    }
    let sub = |rng: &mut R| Box::new(random_formula(rng, depth - 1, dt));
    match rng.random_range(0..6) {
        0 => Formula::Not(sub(rng)),
        1 => Formula::And(sub(rng), sub(rng)),
        2 => Formula::Or(sub(rng), sub(rng)),
        3 => Formula::Always(random_interval(rng, dt), sub(rng)),
        4 => Formula::Eventually(random_interval(rng, dt), sub(rng)),
        _ => Formula::Until(random_interval(rng, dt), sub(rng), sub(rng)),
    }
}

/// Random two-channel trace on a lattice of quarter units.
pub fn random_trace<R: Rng>(rng: &mut R, len: usize, dt: f64) -> Signal {
    let channels = SIGNALS
        .iter()
        .map(|_| (0..len).map(|_| rng.random_range(-8..=8) as f64 * 0.25).collect())
        .collect();
    Signal::uniform(dt, SIGNALS.iter().map(|s| s.to_string()).collect(), channels).expect("valid trace")
}

/// Grid steps the formula looks ahead, using the oracle's window rule.
pub fn lookahead_steps(f: &Formula, dt: f64) -> usize {
    let end = |iv: &Interval| ((iv.end / dt + 1e-9).floor() as usize).max((iv.start / dt - 1e-9).ceil() as usize);
    match f {
        Formula::Atom(_) => 0,
        Formula::Not(x) => lookahead_steps(x, dt),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            lookahead_steps(a, dt).max(lookahead_steps(b, dt))
        }
        Formula::Always(iv, x) | Formula::Eventually(iv, x) => end(iv) + lookahead_steps(x, dt),
        Formula::Until(iv, a, b) => end(iv) + lookahead_steps(a, dt).max(lookahead_steps(b, dt)),
    }
}

/// A random `(formula, trace)` pair whose trace covers the formula's
/// horizon from t = 0, with at most `max_len` samples.
pub fn random_case<R: Rng>(rng: &mut R, max_len: usize) -> (Formula, Signal) {
    let dt = [0.1, 0.25, 0.5, 1.0][rng.random_range(0..4)];
    loop {
        let f = random_formula(rng, 3, dt);
        let needed = lookahead_steps(&f, dt) + 1;
        if needed > max_len {
            continue;
        }
        let len = rng.random_range(needed..=max_len);
        return (f, random_trace(rng, len, dt));
    }
}
