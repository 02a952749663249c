use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pulsefalsify"))
}

fn bench(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../benchmarks")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_falsifies_lag_with_random_search() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("w.json");
    let lag = bench("lag.json");
    let out = run(&[
        "run", "--benchmark", &lag, "--spec", "phi1", "--mask", "W", "--optimizer", "random", "--budget", "100",
        "--seed", "0", "--witness", witness.to_str().unwrap(), "--expect-falsified",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("falsified: true"));
    let w: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(witness).unwrap()).unwrap();
    assert!(w["robustness"].as_f64().unwrap() < 0.0);
    assert_eq!(w["pulses"].as_array().unwrap().len(), 1);
}

#[test]
fn expect_falsified_exits_one_when_not_found() {
    let lag = bench("lag.json");
    let args = ["run", "--benchmark", &lag, "--spec", "phi3", "--mask", "W", "--budget", "10", "--optimizer", "random"];
    assert_eq!(run(&args).status.code(), Some(0));
    let mut strict = args.to_vec();
    strict.push("--expect-falsified");
    let out = run(&strict);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("falsified: false"));
}

#[test]
fn usage_and_config_errors_exit_two() {
    assert_eq!(run(&["run", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let lag = bench("lag.json");
    assert_eq!(run(&["run", "--benchmark", &lag, "--spec", "nope", "--mask", "W"]).status.code(), Some(2));
    assert_eq!(run(&["run", "--benchmark", &lag, "--spec", "phi1", "--mask", "Q"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"name":"x","horizon":1,"dt":0.1,"inputs":[],"model":{"kind":"first_order_lag"},"specs":{},"extra":1}"#).unwrap();
    assert_eq!(run(&["validate", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn validate_accepts_shipped_configs() {
    let files: Vec<String> = ["lag.json", "cc.json", "dsm.json", "ss.json"].iter().map(|f| bench(f)).collect();
    let mut args = vec!["validate"];
    args.extend(files.iter().map(String::as_str));
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).matches(": ok").count(), 4);
}

#[test]
fn monitor_prints_both_semantics() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("ramp.csv");
    let rows: String = (0..=10).map(|i| format!("{},{}\n", i as f64 / 10.0, i as f64 / 10.0)).collect();
    std::fs::write(&trace, format!("time,y\n{rows}")).unwrap();
    let out = run(&["monitor", "--spec", "alw[0,1](y < 0.5)", "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("classic: -0.5\n"), "{text}");
    // additive sums the violations 0.1 through 0.5
    let additive: f64 = text.lines().find_map(|l| l.strip_prefix("additive: ")).unwrap().parse().unwrap();
    assert!((additive + 1.5).abs() < 1e-12, "{additive}");

    let spec = dir.path().join("phi.stl");
    std::fs::write(&spec, "ev[0,1](y > 0.5)\n").unwrap();
    let out = run(&["monitor", "--spec-file", spec.to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert!(stdout(&out).contains("classic: 0.5\n"));

    let out = run(&["monitor", "--spec", "alw[0,5](y < 0.5)", "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_is_reproducible_across_parallelism() {
    let dir = tempfile::tempdir().unwrap();
    let (lag, cc) = (bench("lag.json"), bench("cc.json"));
    let sweep = |sub: &str, par: &str| {
        let out_dir = dir.path().join(sub);
        let out = run(&[
            "sweep", "--benchmark", &lag, "--benchmark", &cc, "--specs", "phi1", "--masks", "W,L-P,L-P-W-H-D",
            "--reps", "3", "--budget", "30", "--seed", "42", "--parallel", par, "--out", out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        ["results.csv", "aggregate.csv", "coverage.csv", "cactus.csv"]
            .map(|f| std::fs::read(out_dir.join(f)).unwrap())
    };
    let a = sweep("a", "1");
    let b = sweep("b", "8");
    assert_eq!(a, b);
    let results = String::from_utf8(a[0].clone()).unwrap();
    assert!(results.starts_with("benchmark,spec,mask,rep,seed,falsified,sims,best_robustness\n"));
    assert_eq!(results.lines().count(), 1 + 2 * 3 * 3);
    let agg = String::from_utf8(a[1].clone()).unwrap();
    assert!(agg.starts_with("spec,mask,success_rate,mean_sims\n"));
}
