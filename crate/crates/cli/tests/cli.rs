use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn freqsec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freqsec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn write_json(p: &Path, v: &Value) {
    std::fs::write(p, serde_json::to_string_pretty(v).unwrap()).unwrap();
}

/// Demo inputs in a fresh directory; returns it and the inputs directory.
fn inputs() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let o = freqsec(&["demo", "--inputs-only", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let inputs = dir.path().join("inputs");
    (dir, inputs)
}

/// Writes a config derived from the demo one and returns its path.
fn config_with(inputs: &Path, name: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut c = read_json(&inputs.join("config.json"));
    c["output_dir"] = json!(format!("../{name}"));
    edit(&mut c);
    let path = inputs.join(format!("{name}.json"));
    write_json(&path, &c);
    path
}

fn single_scenario(inputs: &Path) {
    let all = read_json(&inputs.join("scenarios.json"));
    write_json(&inputs.join("one.json"), &json!([all[4].clone()]));
}

fn run_ok(args: &[&str]) -> Output {
    let o = freqsec(args);
    assert!(o.status.success(), "{:?}: {}", args, stderr(&o));
    o
}

#[test]
fn simulate_writes_one_csv_per_node() {
    let (_d, inputs) = inputs();
    single_scenario(&inputs);
    let cfg = config_with(&inputs, "sim", |c| c["scenarios"] = json!("one.json"));
    run_ok(&["simulate", "--config", cfg.to_str().unwrap()]);
    let traj = inputs.join("../sim/trajectories");
    let manifest = read_json(&traj.join("manifest.json"));
    assert_eq!(manifest["format_version"], 1);
    assert_eq!(manifest["seed"], 2024);
    let scenario = manifest["scenarios"][0]["name"].as_str().unwrap().to_string();
    let files: Vec<_> = std::fs::read_dir(traj.join(&scenario)).unwrap().collect();
    assert_eq!(files.len(), 5);
    for f in files {
        let text = std::fs::read_to_string(f.unwrap().path()).unwrap();
        let times: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        assert!(times.len() > 2000);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn simulate_is_reproducible_under_a_seed() {
    let (_d, inputs) = inputs();
    single_scenario(&inputs);
    let read_all = |name: &str, seed: &str| {
        let cfg = config_with(&inputs, name, |c| c["scenarios"] = json!("one.json"));
        run_ok(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", seed]);
        let dir = inputs.join(format!("../{name}/trajectories/uf0.78-dur0.15"));
        ["n1", "n2", "n3", "n4", "n5"].map(|n| std::fs::read(dir.join(format!("{n}.csv"))).unwrap())
    };
    let a = read_all("a", "7");
    let b = read_all("b", "7");
    let c = read_all("c", "8");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn missing_topology_is_a_config_error() {
    let (_d, inputs) = inputs();
    let cfg = config_with(&inputs, "bad", |c| c["topology"] = json!("nowhere/topo.json"));
    let o = freqsec(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nowhere/topo.json"), "{}", stderr(&o));
    let o = freqsec(&["simulate", "--config", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = freqsec(&["simulate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fit_without_trajectories_is_a_config_error() {
    let (_d, inputs) = inputs();
    let cfg = config_with(&inputs, "empty", |_| {});
    std::fs::create_dir_all(inputs.join("../empty/trajectories")).unwrap();
    let o = freqsec(&["fit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

fn fit_errors(report: &Value) -> Vec<f64> {
    report["scenarios"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|s| {
            s["fits"]
                .as_array()
                .unwrap()
                .iter()
                .map(|f| f["error_percent"].as_f64().unwrap())
        })
        .collect()
}

#[test]
fn fit_of_clean_data() {
    let (_d, inputs) = inputs();
    single_scenario(&inputs);
    let mut topo = read_json(&inputs.join("topology.json"));
    for n in topo["nodes"].as_array_mut().unwrap() {
        n["modulation"] = json!({});
    }
    write_json(&inputs.join("clean_topology.json"), &topo);
    let cfg = config_with(&inputs, "clean", |c| {
        c["topology"] = json!("clean_topology.json");
        c["scenarios"] = json!("one.json");
        c["pmu_noise_sigma"] = json!(0.0);
        c["fit"]["filter_window"] = json!(0.0);
    });
    run_ok(&["simulate", "--config", cfg.to_str().unwrap()]);
    run_ok(&["fit", "--config", cfg.to_str().unwrap()]);
    let report = read_json(&inputs.join("../clean/fit/fit_report.json"));
    let errors = fit_errors(&report);
    assert_eq!(errors.len(), 4);
    assert!(errors.iter().all(|e| *e <= 0.1), "{errors:?}");
    assert!(report["scenarios"][0]["interpolated"]["n3"].is_object());
    let overlay = std::fs::read_to_string(inputs.join("../clean/fit/uf0.78-dur0.15/n3.csv")).unwrap();
    assert!(overlay.starts_with("t,omega_actual,omega_enf\n"));
}

#[test]
fn fit_with_modulation_and_noise() {
    let (_d, inputs) = inputs();
    let cfg = config_with(&inputs, "noisy", |_| {});
    run_ok(&["simulate", "--config", cfg.to_str().unwrap()]);
    run_ok(&["fit", "--config", cfg.to_str().unwrap()]);
    let errors = fit_errors(&read_json(&inputs.join("../noisy/fit/fit_report.json")));
    assert_eq!(errors.len(), 36);
    let worst = errors.iter().cloned().fold(0.0, f64::max);
    assert!(worst <= 2.5, "{worst}");
}

#[test]
fn unconverged_fit_exits_4_with_partial_results() {
    let (_d, inputs) = inputs();
    single_scenario(&inputs);
    let cfg = config_with(&inputs, "short", |c| {
        c["scenarios"] = json!("one.json");
        c["fit"]["simplex"]["max_iterations"] = json!(3);
        c["fit"]["warm_start"] = json!(false);
    });
    run_ok(&["simulate", "--config", cfg.to_str().unwrap()]);
    let o = freqsec(&["fit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let report = read_json(&inputs.join("../short/fit/fit_report.json"));
    assert_eq!(report["scenarios"][0]["fits"].as_array().unwrap().len(), 4);
    assert!(inputs.join("../short/fit/uf0.78-dur0.15/n1.csv").exists());
}

#[test]
fn assessment_verdicts_and_errors() {
    let (_d, inputs) = inputs();
    let base = config_with(&inputs, "base", |_| {});
    let o = run_ok(&["assess", "--config", base.to_str().unwrap(), "--build-table"]);
    assert!(stdout(&o).contains("verdict: safe"), "{}", stdout(&o));
    let bars = std::fs::read_to_string(inputs.join("../base/assessment_bars.csv")).unwrap();
    assert!(bars.starts_with("node,h_on,h_cri,kappa\n"));
    assert_eq!(bars.lines().count(), 6);

    // the saved table is reused without --build-table
    let o = run_ok(&["assess", "--config", base.to_str().unwrap()]);
    assert!(stdout(&o).contains("verdict: safe"));

    let weak = config_with(&inputs, "weak", |c| {
        c["topology"] = json!("weakened_topology.json")
    });
    let o = run_ok(&["assess", "--config", weak.to_str().unwrap(), "--build-table"]);
    assert!(stdout(&o).contains("verdict: unsafe"), "{}", stdout(&o));
    let report = read_json(&inputs.join("../weak/assessment.json"));
    let weak_nodes: Vec<&str> = report["assessment"]["weak_nodes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(weak_nodes, vec!["n2", "n5"]);
    for n in &weak_nodes {
        assert!(report["assessment"]["per_node"][n].as_f64().unwrap() < 0.0);
    }

    let mut online = read_json(&inputs.join("online.json"));
    online["disturbance_node"] = json!("n4");
    write_json(&inputs.join("elsewhere.json"), &online);
    let o = freqsec(&[
        "assess",
        "--config",
        base.to_str().unwrap(),
        "--online",
        inputs.join("elsewhere.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));

    let o = freqsec(&[
        "assess",
        "--config",
        config_with(&inputs, "nothing", |_| {}).to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn demo_matches_the_step_by_step_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run_ok(&["demo", "--out", out, "--jobs", "2"]);
    let text = stdout(&o);
    assert!(text.contains("base verdict: safe"), "{text}");
    assert!(text.contains("weakened verdict: unsafe"), "{text}");
    let summary = read_json(&dir.path().join("demo_summary.json"));
    assert_eq!(summary["seed"], 2024);

    let inputs = dir.path().join("inputs");
    run_ok(&[
        "assess",
        "--config",
        inputs.join("config.json").to_str().unwrap(),
        "--build-table",
        "--out",
        dir.path().join("pipeline").to_str().unwrap(),
    ]);
    let demo_report = read_json(&dir.path().join("base/assessment.json"));
    let pipeline_report = read_json(&dir.path().join("pipeline/assessment.json"));
    assert_eq!(demo_report, pipeline_report);
}
