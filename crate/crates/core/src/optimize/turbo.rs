//! Single trust-region surrogate optimizer.
//!
//! A Latin hypercube seeds each restart. After that, every step fits a
//! cubic RBF to the evaluated points nearest the incumbent, scores a batch
//! of uniform candidates drawn from the axis-aligned trust region around
//! it, and evaluates the one with the lowest prediction. Streaks of
//! improvements double the region; streaks of failures halve it; once it
//! collapses below the minimum side the search restarts from a fresh
//! design, keeping the evaluation history.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{fit_surrogate, latin_hypercube, OptimizationResult, OptimizeError, OptimizerConfig, Recorder};
use crate::optimize::EvalRecord;

pub fn turbo_lite_minimize<F>(mut objective: F, dim: usize, config: &OptimizerConfig) -> Result<OptimizationResult, OptimizeError>
where
    F: FnMut(&[f64]) -> f64,
{
    config.validate()?;
    if dim == 0 {
        return Err(OptimizeError::ZeroDimension);
    }
    let init = config.init_samples_for(dim);
    if config.budget < init {
        return Err(OptimizeError::BudgetBelowInit {
            budget: config.budget,
            init,
        });
    }
    let tr = &config.trust_region;
    let failure_tolerance = tr.failure_tolerance.unwrap_or(dim);
    let n_candidates = (tr.candidates_per_dim * dim).min(tr.max_candidates);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rec = Recorder::new(&mut objective, config.budget);
    let mut restarts = 0;

    'restart: while !rec.done() {
        let mut side = tr.initial_side;
        let (mut successes, mut failures) = (0usize, 0usize);

        let segment_start = rec.history().len();
        for p in latin_hypercube(init, dim, &mut rng) {
            if rec.done() {
                break 'restart;
            }
            rec.eval(p);
        }
        let mut incumbent = rec.history()[segment_start..]
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .cloned()
            .expect("initial design is non-empty");

        while !rec.done() {
            let candidates = sample_box(&incumbent.point, side, n_candidates, &mut rng);
            let next = match fit_near(rec.history(), &incumbent.point, tr.max_fit_points) {
                Some(model) => candidates
                    .into_iter()
                    .map(|c| (model.predict(&c), c))
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|(_, c)| c)
                    .expect("at least one candidate"),
                // degenerate fit: uniform draw inside the trust region
                None => candidates.into_iter().next().expect("at least one candidate"),
            };
            let value = rec.eval(next);
            if value < incumbent.value {
                incumbent = rec.history().last().cloned().expect("just evaluated");
                successes += 1;
                failures = 0;
            } else {
                failures += 1;
                successes = 0;
            }
            if successes == tr.success_tolerance {
                side = (2.0 * side).min(tr.max_side);
                successes = 0;
            }
            if failures == failure_tolerance {
                side /= 2.0;
                failures = 0;
            }
            if side < tr.min_side {
                restarts += 1;
                continue 'restart;
            }
        }
    }
    Ok(rec.finish(restarts))
}

/// Uniform samples from the box of side `side` centered at `center`,
/// clipped to the unit cube.
fn sample_box(center: &[f64], side: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let bounds: Vec<(f64, f64)> = center
        .iter()
        .map(|&c| ((c - side / 2.0).max(0.0), (c + side / 2.0).min(1.0)))
        .collect();
    (0..n)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
                .collect()
        })
        .collect()
}

/// Fits the surrogate to the `limit` evaluated points nearest `center`.
/// Infinite values (failed evaluations) are replaced by a pessimistic
/// finite stand-in so the surrogate steers away from them.
fn fit_near(history: &[EvalRecord], center: &[f64], limit: usize) -> Option<super::RbfSurrogate> {
    let mut order: Vec<(f64, usize)> = history
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let d: f64 = e.point.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            (d, i)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order.truncate(limit);

    let finite = order.iter().map(|&(_, i)| history[i].value).filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return None;
    }
    let penalty = hi + (hi - lo).max(1.0);
    let points: Vec<Vec<f64>> = order.iter().map(|&(_, i)| history[i].point.clone()).collect();
    let values: Vec<f64> = order
        .iter()
        .map(|&(_, i)| {
            let v = history[i].value;
            if v.is_finite() {
                v
            } else {
                penalty
            }
        })
        .collect();
    fit_surrogate(&points, &values).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::OptimizerKind;

    fn cfg(budget: usize, seed: u64) -> OptimizerConfig {
        OptimizerConfig::new(OptimizerKind::TurboLite, budget, seed)
    }

    #[test]
    fn constant_objective_restarts() {
        let r = turbo_lite_minimize(|_| 1.0, 5, &cfg(200, 4)).unwrap();
        assert!(!r.stopped_early);
        assert_eq!(r.evaluations_used, 200);
        assert!(r.restarts >= 1, "restarts = {}", r.restarts);
    }

    #[test]
    fn negative_first_sample_stops() {
        let mut calls = 0;
        let r = turbo_lite_minimize(
            |_| {
                calls += 1;
                -1.0
            },
            3,
            &cfg(100, 0),
        )
        .unwrap();
        assert_eq!(calls, 1);
        assert_eq!(r.evaluations_used, 1);
        assert!(r.stopped_early);
    }

    #[test]
    fn budget_must_cover_initial_design() {
        assert_eq!(
            turbo_lite_minimize(|_| 1.0, 5, &cfg(9, 0)).unwrap_err(),
            OptimizeError::BudgetBelowInit { budget: 9, init: 10 }
        );
    }

    #[test]
    fn one_dimensional_bowl() {
        let r = turbo_lite_minimize(|p| (p[0] - 0.3).powi(2) - 1e-4, 1, &cfg(100, 1)).unwrap();
        assert!(r.stopped_early);
        assert!((r.best.point[0] - 0.3).abs() < 0.01);
    }

    #[test]
    fn points_stay_in_cube() {
        let r = turbo_lite_minimize(|p| p.iter().sum::<f64>(), 3, &cfg(120, 2)).unwrap();
        assert!(r.history.iter().all(|e| e.point.iter().all(|v| (0.0..=1.0).contains(v))));
        assert!(r.history.iter().enumerate().all(|(i, e)| e.index == i + 1));
    }

    #[test]
    fn failures_do_not_break_fit() {
        let r = turbo_lite_minimize(
            |p| if p[0] > 0.5 { f64::NAN } else { p[1] },
            2,
            &cfg(60, 3),
        )
        .unwrap();
        assert_eq!(r.evaluations_used, 60);
        assert!(r.best.value.is_finite());
    }
}
