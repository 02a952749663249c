//! Success-rate tables, combination coverage, and cactus-plot series.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ResultSet;
use crate::falsify::FreeMask;
use crate::signal::PulseParam;

/// Per `(spec, mask)` summary over its repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    /// `benchmark/spec`.
    pub spec: String,
    pub mask: String,
    pub runs: usize,
    pub successes: usize,
    /// Percent of runs that falsified.
    pub success_rate: f64,
    /// Mean simulations over successful runs, rounded half-up.
    pub mean_sims: Option<u64>,
    /// `(seed, falsified, sims)` of each run.
    pub per_run: Runs,
}

impl AggregateRow {
    /// `60 (20)`, or `0 (-)` when nothing falsified.
    pub fn cell(&self) -> String {
        match self.mean_sims {
            Some(m) => format!("{} ({m})", format_rate(self.success_rate)),
            None => format!("{} (-)", format_rate(self.success_rate)),
        }
    }
}

/// Integer percentages print without decimals; others with two.
pub fn format_rate(rate: f64) -> String {
    if rate.fract() == 0.0 {
        format!("{}", rate as i64)
    } else {
        format!("{rate:.2}")
    }
}

type Runs = Vec<(u64, bool, usize)>;

/// Groups records by `(spec, mask)` in order of first appearance.
pub fn aggregate(results: &ResultSet) -> Vec<AggregateRow> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: BTreeMap<(String, String), Runs> = BTreeMap::new();
    for r in &results.records {
        let key = (r.spec_id(), r.mask.clone());
        let entry = groups.entry(key.clone()).or_default();
        if entry.is_empty() {
            order.push(key);
        }
        entry.push((r.seed, r.falsified, r.sims));
    }
    order
        .into_iter()
        .map(|key| {
            let per_run = groups.remove(&key).expect("grouped above");
            let runs = per_run.len();
            let successful: Vec<u64> = per_run.iter().filter(|r| r.1).map(|r| r.2 as u64).collect();
            let successes = successful.len();
            let mean_sims = (successes > 0).then(|| {
                let total: u64 = successful.iter().sum();
                let n = successes as u64;
                (2 * total + n) / (2 * n)
            });
            AggregateRow {
                spec: key.0,
                mask: key.1,
                runs,
                successes,
                success_rate: 100.0 * successes as f64 / runs as f64,
                mean_sims,
                per_run,
            }
        })
        .collect()
}

/// For every spec in `results`, the single parameters whose one-parameter
/// run falsified it at least once.
pub fn single_param_successes(results: &ResultSet) -> BTreeMap<String, BTreeSet<PulseParam>> {
    let mut out: BTreeMap<String, BTreeSet<PulseParam>> = BTreeMap::new();
    for r in &results.records {
        let entry = out.entry(r.spec_id()).or_default();
        if !r.falsified {
            continue;
        }
        if let Ok(mask) = r.mask.parse::<FreeMask>() {
            if let [single] = mask.params()[..] {
                entry.insert(single);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskCoverage {
    pub mask: String,
    pub size: usize,
    pub specs_covered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeCoverage {
    pub size: usize,
    /// Masks of this size achieving the maximal coverage.
    pub best_masks: Vec<String>,
    pub specs_covered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub total_specs: usize,
    pub sizes: Vec<SizeCoverage>,
    pub per_mask: Vec<MaskCoverage>,
}

/// Counts, for every combination of pulse parameters, the specs it is
/// credited with: a spec counts if any member parameter falsified it on its
/// own, or if the combination's own run (when present) falsified it.
pub fn combination_coverage(
    per_param_success: &BTreeMap<String, BTreeSet<PulseParam>>,
    results: &ResultSet,
) -> CoverageSummary {
    let mut specs: BTreeSet<String> = per_param_success.keys().cloned().collect();
    let mut own_success: BTreeSet<(String, String)> = BTreeSet::new();
    for r in &results.records {
        specs.insert(r.spec_id());
        if r.falsified {
            if let Ok(mask) = r.mask.parse::<FreeMask>() {
                own_success.insert((r.spec_id(), mask.label()));
            }
        }
    }
    let empty = BTreeSet::new();
    let per_mask: Vec<MaskCoverage> = FreeMask::all_subsets()
        .into_iter()
        .map(|mask| {
            let label = mask.label();
            let members = mask.params();
            let specs_covered = specs
                .iter()
                .filter(|spec| {
                    let singles = per_param_success.get(*spec).unwrap_or(&empty);
                    members.iter().any(|p| singles.contains(p))
                        || own_success.contains(&((*spec).clone(), label.clone()))
                })
                .count();
            MaskCoverage {
                mask: label,
                size: mask.len(),
                specs_covered,
            }
        })
        .collect();
    let sizes = (1..=PulseParam::ALL.len())
        .map(|size| {
            let of_size: Vec<&MaskCoverage> = per_mask.iter().filter(|m| m.size == size).collect();
            let best = of_size.iter().map(|m| m.specs_covered).max().unwrap_or(0);
            SizeCoverage {
                size,
                best_masks: canonical_order(
                    of_size
                        .iter()
                        .filter(|m| m.specs_covered == best)
                        .map(|m| m.mask.clone())
                        .collect(),
                ),
                specs_covered: best,
            }
        })
        .collect();
    CoverageSummary {
        total_specs: specs.len(),
        sizes,
        per_mask,
    }
}

/// Sorts labels by their parameter sequence (L < P < W < H < D).
fn canonical_order(mut labels: Vec<String>) -> Vec<String> {
    labels.sort_by_key(|l| {
        l.parse::<FreeMask>()
            .map(|m| m.params())
            .unwrap_or_default()
    });
    labels
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CactusRow {
    pub mask: String,
    pub rank: usize,
    pub sims: usize,
}

/// Per mask (in order of first appearance), the simulation counts of
/// successful runs sorted ascending and paired with their cumulative rank.
pub fn cactus_data(results: &ResultSet) -> Vec<CactusRow> {
    let mut order: Vec<String> = Vec::new();
    let mut series: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for r in &results.records {
        if !series.contains_key(&r.mask) {
            order.push(r.mask.clone());
            series.insert(r.mask.clone(), Vec::new());
        }
        if r.falsified {
            series.get_mut(&r.mask).expect("inserted").push(r.sims);
        }
    }
    let mut rows = Vec::new();
    for mask in order {
        let mut sims = series.remove(&mask).expect("inserted");
        sims.sort_unstable();
        rows.extend(sims.into_iter().enumerate().map(|(i, s)| CactusRow {
            mask: mask.clone(),
            rank: i + 1,
            sims: s,
        }));
    }
    rows
}
