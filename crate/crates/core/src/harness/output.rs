//! CSV emitters for sweep results.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::metrics::{aggregate, cactus_data, combination_coverage, single_param_successes, AggregateRow};
use super::{HarnessError, ResultSet};

/// File names written by [`write_sweep_outputs`].
pub const SWEEP_FILES: [&str; 4] = ["results.csv", "aggregate.csv", "coverage.csv", "cactus.csv"];

pub fn write_results_csv<W: Write>(out: W, results: &ResultSet) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["benchmark", "spec", "mask", "rep", "seed", "falsified", "sims", "best_robustness"])?;
    for r in &results.records {
        w.write_record([
            r.benchmark.clone(),
            r.spec.clone(),
            r.mask.clone(),
            r.rep.to_string(),
            r.seed.to_string(),
            r.falsified.to_string(),
            r.sims.to_string(),
            r.best_robustness.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_aggregate_csv<W: Write>(out: W, rows: &[AggregateRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["spec", "mask", "success_rate", "mean_sims"])?;
    for row in rows {
        w.write_record([
            row.spec.clone(),
            row.mask.clone(),
            super::format_rate(row.success_rate),
            row.mean_sims.map_or_else(|| "-".to_string(), |m| m.to_string()),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One row per best mask of each combination size.
pub fn write_coverage_csv<W: Write>(out: W, results: &ResultSet) -> Result<(), HarnessError> {
    let summary = combination_coverage(&single_param_successes(results), results);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["size", "mask", "specs_covered"])?;
    for size in &summary.sizes {
        for mask in &size.best_masks {
            w.write_record([size.size.to_string(), mask.clone(), size.specs_covered.to_string()])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_cactus_csv<W: Write>(out: W, results: &ResultSet) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mask", "rank", "sims"])?;
    for row in cactus_data(results) {
        w.write_record([row.mask, row.rank.to_string(), row.sims.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Writes the four sweep CSVs into `dir`, creating it if needed.
pub fn write_sweep_outputs(dir: &Path, results: &ResultSet) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let open = |name: &str| {
        let path = dir.join(name);
        File::create(&path)
            .map(|f| (f, path.clone()))
            .map_err(|source| HarnessError::Io {
                path: path.display().to_string(),
                source,
            })
    };
    let mut written = Vec::new();
    let (f, p) = open(SWEEP_FILES[0])?;
    write_results_csv(f, results)?;
    written.push(p);
    let (f, p) = open(SWEEP_FILES[1])?;
    write_aggregate_csv(f, &aggregate(results))?;
    written.push(p);
    let (f, p) = open(SWEEP_FILES[2])?;
    write_coverage_csv(f, results)?;
    written.push(p);
    let (f, p) = open(SWEEP_FILES[3])?;
    write_cactus_csv(f, results)?;
    written.push(p);
    Ok(written)
}

/// Plain-text table with one row per spec and one column per mask.
pub fn render_table(rows: &[AggregateRow]) -> String {
    let mut specs: Vec<&str> = Vec::new();
    let mut masks: Vec<&str> = Vec::new();
    for r in rows {
        if !specs.contains(&r.spec.as_str()) {
            specs.push(&r.spec);
        }
        if !masks.contains(&r.mask.as_str()) {
            masks.push(&r.mask);
        }
    }
    let cell = |spec: &str, mask: &str| {
        rows.iter()
            .find(|r| r.spec == spec && r.mask == mask)
            .map(AggregateRow::cell)
            .unwrap_or_default()
    };
    let mut widths: Vec<usize> = std::iter::once(specs.iter().map(|s| s.len()).max().unwrap_or(0).max(4))
        .chain(masks.iter().map(|m| m.len()))
        .collect();
    for s in &specs {
        for (j, m) in masks.iter().enumerate() {
            widths[j + 1] = widths[j + 1].max(cell(s, m).len());
        }
    }
    let mut out = String::new();
    let line = |cells: Vec<String>, out: &mut String| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    };
    line(
        std::iter::once("spec".to_string())
            .chain(masks.iter().map(|m| m.to_string()))
            .collect(),
        &mut out,
    );
    for s in &specs {
        line(
            std::iter::once(s.to_string())
                .chain(masks.iter().map(|m| cell(s, m)))
                .collect(),
            &mut out,
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::RunRecord;

    fn results() -> ResultSet {
        let rec = |spec: &str, mask: &str, falsified, sims| RunRecord {
            benchmark: "lag".into(),
            spec: spec.into(),
            mask: mask.into(),
            rep: 0,
            seed: 7,
            falsified,
            sims,
            best_robustness: if falsified { -0.5 } else { f64::INFINITY },
            error: None,
        };
        ResultSet {
            records: vec![rec("phi1", "W", true, 3), rec("phi1", "L", false, 10)],
        }
    }

    #[test]
    fn results_schema() {
        let mut buf = Vec::new();
        write_results_csv(&mut buf, &results()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("benchmark,spec,mask,rep,seed,falsified,sims,best_robustness")
        );
        assert_eq!(lines.next(), Some("lag,phi1,W,0,7,true,3,-0.5"));
        assert_eq!(lines.next(), Some("lag,phi1,L,0,7,false,10,inf"));
    }

    #[test]
    fn aggregate_schema() {
        let mut buf = Vec::new();
        write_aggregate_csv(&mut buf, &aggregate(&results())).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "spec,mask,success_rate,mean_sims\nlag/phi1,W,100,3\nlag/phi1,L,0,-\n"
        );
    }

    #[test]
    fn writes_four_files() {
        let dir = tempfile::tempdir().unwrap();
        let written = write_sweep_outputs(dir.path(), &results()).unwrap();
        assert_eq!(written.len(), 4);
        let cov = std::fs::read_to_string(dir.path().join("coverage.csv")).unwrap();
        assert!(cov.starts_with("size,mask,specs_covered\n1,W,1\n"), "{cov}");
        let cactus = std::fs::read_to_string(dir.path().join("cactus.csv")).unwrap();
        assert_eq!(cactus, "mask,rank,sims\nW,1,3\n");
    }

    #[test]
    fn table_layout() {
        let t = render_table(&aggregate(&results()));
        assert!(t.contains("100 (3)"));
        assert!(t.contains("0 (-)"));
    }
}
