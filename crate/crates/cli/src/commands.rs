use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use freqsec::assessment::{
    assess as assess_case, build_offline_table, measurement, Assessment, CaseDescriptor, LocatedScenario,
    OfflineTable,
};
use freqsec::demo;
use freqsec::enf::{EffectiveParams, EnfResponse, Trajectory};
use freqsec::fitting::{interpolate_params, FitReport};
use freqsec::sim::{NetworkTopology, SimSettings};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{check_name, read_json, Resolved, RunConfig};
use crate::failure::Failure;

/// Version of every JSON file the CLI writes.
pub const OUTPUT_FORMAT_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";

type CmdResult<T = ()> = Result<T, Failure>;

fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create `{}`", dir.display()))
            .map_err(Failure::io)?;
    }
    let text = serde_json::to_string_pretty(value).expect("output serializes");
    fs::write(path, text + "\n")
        .with_context(|| format!("cannot write `{}`", path.display()))
        .map_err(Failure::io)
}

fn create(path: &Path) -> CmdResult<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create `{}`", dir.display()))
            .map_err(Failure::io)?;
    }
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot write `{}`", path.display()))
        .map_err(Failure::io)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestNode {
    pub id: String,
    pub measured: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestScenario {
    #[serde(flatten)]
    pub located: LocatedScenario,
    /// Node id to CSV path relative to the manifest.
    pub files: BTreeMap<String, PathBuf>,
}

/// Index of a trajectory directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub seed: u64,
    pub pmu_noise_sigma: f64,
    pub sim: SimSettings,
    pub nodes: Vec<ManifestNode>,
    pub scenarios: Vec<ManifestScenario>,
}

fn load_inputs(r: &Resolved) -> CmdResult<(NetworkTopology, Vec<LocatedScenario>)> {
    let topo = r.topology().map_err(Failure::config)?;
    for n in &topo.nodes {
        check_name(&n.id).map_err(Failure::config)?;
    }
    let scenarios = r.scenarios().map_err(Failure::config)?;
    Ok((topo, scenarios))
}

/// One CSV per node and scenario plus a manifest.
pub fn simulate(r: &Resolved) -> CmdResult {
    let (topo, scenarios) = load_inputs(r)?;
    let config = r.config.table_config();
    let dir = r.trajectory_dir();
    let jobs: Vec<(usize, usize)> = (0..scenarios.len())
        .flat_map(|i| (0..topo.nodes.len()).map(move |j| (i, j)))
        .collect();
    let trajectories = jobs
        .par_iter()
        .map(|&(i, j)| {
            let (s, node) = (&scenarios[i], &topo.nodes[j]);
            measurement(node, i, j, &s.scenario, &config)
                .map(|t| t.with_meta(s.name.clone()))
                .with_context(|| format!("scenario `{}`, node `{}`", s.name, node.id))
        })
        .collect::<anyhow::Result<Vec<Trajectory>>>()
        .map_err(Failure::simulation)?;

    let mut manifest_scenarios: Vec<ManifestScenario> = scenarios
        .iter()
        .map(|s| ManifestScenario {
            located: s.clone(),
            files: BTreeMap::new(),
        })
        .collect();
    for (&(i, j), traj) in jobs.iter().zip(&trajectories) {
        let rel = PathBuf::from(&scenarios[i].name).join(format!("{}.csv", topo.nodes[j].id));
        let mut w = create(&dir.join(&rel))?;
        traj.write_csv(&mut w).map_err(|e| Failure::io(anyhow!(e)))?;
        w.flush().map_err(Failure::io)?;
        manifest_scenarios[i].files.insert(topo.nodes[j].id.clone(), rel);
    }
    let manifest = Manifest {
        format_version: OUTPUT_FORMAT_VERSION,
        seed: config.seed,
        pmu_noise_sigma: config.pmu_noise_sigma,
        sim: config.sim,
        nodes: topo
            .nodes
            .iter()
            .map(|n| ManifestNode {
                id: n.id.clone(),
                measured: n.measured,
            })
            .collect(),
        scenarios: manifest_scenarios,
    };
    write_json(&dir.join(MANIFEST), &manifest)?;
    println!(
        "wrote {} trajectories for {} scenario(s) to {}",
        trajectories.len(),
        scenarios.len(),
        dir.display()
    );
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeFailure {
    pub node_id: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFit {
    pub scenario: LocatedScenario,
    pub fits: Vec<FitReport>,
    /// Parameters of nodes without a PMU, from their fitted neighbours.
    pub interpolated: BTreeMap<String, EffectiveParams>,
    pub failures: Vec<NodeFailure>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOutput {
    pub format_version: u32,
    pub seed: u64,
    pub scenarios: Vec<ScenarioFit>,
}

fn read_trajectory(dir: &Path, rel: &Path, node: &str) -> anyhow::Result<Trajectory> {
    let path = dir.join(rel);
    let file = File::open(&path).with_context(|| format!("cannot open `{}`", path.display()))?;
    let traj = Trajectory::read_csv(node, file)
        .with_context(|| format!("invalid trajectory `{}`", path.display()))?;
    if traj.is_empty() {
        anyhow::bail!("trajectory `{}` is empty", path.display());
    }
    Ok(traj)
}

fn write_overlay(
    path: &Path,
    observed: &Trajectory,
    params: &EffectiveParams,
    s: &LocatedScenario,
) -> CmdResult {
    let resp = EnfResponse::new(params, &s.scenario).map_err(|e| Failure::fit(e.into()))?;
    let mut w = create(path)?;
    let mut body = String::from("t,omega_actual,omega_enf\n");
    for p in observed.samples() {
        body.push_str(&format!("{:.6},{:.9},{:.9}\n", p.t, p.omega, resp.omega(p.t)));
    }
    w.write_all(body.as_bytes()).map_err(Failure::io)?;
    w.flush().map_err(Failure::io)
}

/// Fits every measured node, interpolates the others, and writes a report
/// and overlay CSVs. Any failed or unconverged fit gives exit code 4 after
/// everything else is written.
pub fn fit(r: &Resolved) -> CmdResult {
    let topo = r.topology().map_err(Failure::config)?;
    let dir = r.trajectory_dir();
    let manifest_path = dir.join(MANIFEST);
    if !manifest_path.exists() {
        return Err(Failure::config(anyhow!(
            "no trajectories in `{}` (missing {MANIFEST}; run `simulate` first)",
            dir.display()
        )));
    }
    let manifest: Manifest = read_json(&manifest_path, "trajectory manifest").map_err(Failure::config)?;
    if manifest.scenarios.is_empty() {
        return Err(Failure::config(anyhow!(
            "trajectory manifest `{}` lists no scenarios",
            manifest_path.display()
        )));
    }
    let fit_config = &r.config.fit;

    // read everything up front so that a missing file is a config error
    let mut observed: Vec<Vec<(String, Trajectory)>> = Vec::new();
    for s in &manifest.scenarios {
        let mut per = Vec::new();
        for node in &topo.nodes {
            if let Some(rel) = s.files.get(&node.id) {
                per.push((
                    node.id.clone(),
                    read_trajectory(&dir, rel, &node.id).map_err(Failure::config)?,
                ));
            } else if node.measured {
                return Err(Failure::config(anyhow!(
                    "scenario `{}` has no trajectory for measured node `{}`",
                    s.located.name,
                    node.id
                )));
            }
        }
        observed.push(per);
    }

    let out_dir = r.out.join("fit");
    let mut scenarios = Vec::new();
    let mut trouble = Vec::new();
    for (s, per) in manifest.scenarios.iter().zip(&observed) {
        let scn = &s.located.scenario;
        let measured: Vec<&(String, Trajectory)> = per
            .iter()
            .filter(|(id, _)| topo.node(id).is_some_and(|n| n.measured))
            .collect();
        let results: Vec<_> = measured
            .par_iter()
            .map(|(id, traj)| (id.clone(), fit_config.run(traj, scn)))
            .collect();
        let mut fits = Vec::new();
        let mut failures = Vec::new();
        for (id, res) in results {
            match res {
                Ok(result) => {
                    if !result.converged {
                        trouble.push(format!("{}/{id}: not converged", s.located.name));
                    }
                    fits.push(FitReport {
                        node_id: id,
                        scenario: Some(s.located.name.clone()),
                        weights: fit_config.weights,
                        result,
                    });
                }
                Err(e) => {
                    trouble.push(format!("{}/{id}: {e}", s.located.name));
                    failures.push(NodeFailure {
                        node_id: id,
                        error: e.to_string(),
                    });
                }
            }
        }
        let fitted: BTreeMap<String, EffectiveParams> = fits
            .iter()
            .map(|f| (f.node_id.clone(), f.result.params))
            .collect();
        let mut interpolated = BTreeMap::new();
        for node in topo.nodes.iter().filter(|n| !n.measured) {
            match interpolate_params(&node.id, &topo, &fitted) {
                Ok(p) => {
                    interpolated.insert(node.id.clone(), p);
                }
                Err(e) => {
                    trouble.push(format!("{}/{}: {e}", s.located.name, node.id));
                    failures.push(NodeFailure {
                        node_id: node.id.clone(),
                        error: e.to_string(),
                    });
                }
            }
        }
        for (id, traj) in per {
            let params = fitted.get(id).or_else(|| interpolated.get(id));
            if let Some(p) = params {
                write_overlay(
                    &out_dir.join(&s.located.name).join(format!("{id}.csv")),
                    traj,
                    p,
                    &s.located,
                )?;
            }
        }
        scenarios.push(ScenarioFit {
            scenario: s.located.clone(),
            fits,
            interpolated,
            failures,
        });
    }
    let worst = scenarios
        .iter()
        .flat_map(|s| s.fits.iter().map(|f| f.result.error_percent))
        .fold(0.0, f64::max);
    write_json(
        &out_dir.join("fit_report.json"),
        &FitOutput {
            format_version: OUTPUT_FORMAT_VERSION,
            seed: manifest.seed,
            scenarios,
        },
    )?;
    println!(
        "fit report written to {} (worst error {worst:.3} %)",
        out_dir.display()
    );
    if trouble.is_empty() {
        Ok(())
    } else {
        Err(Failure::fit(anyhow!(
            "{} node(s) failed: {}",
            trouble.len(),
            trouble.join("; ")
        )))
    }
}

pub fn table_build(r: &Resolved) -> CmdResult<OfflineTable> {
    let (topo, scenarios) = load_inputs(r)?;
    let th = r.thresholds().map_err(Failure::config)?;
    let table = build_offline_table(&topo, &scenarios, &th, &r.config.table_config())
        .map_err(Failure::from_assessment)?;
    let path = r.table_path();
    write_json(&path, &table)?;
    println!(
        "offline table with {} record(s) written to {}",
        table.records.len(),
        path.display()
    );
    Ok(table)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssessmentOutput {
    pub format_version: u32,
    pub seed: u64,
    pub neighbors: usize,
    pub online: LocatedScenario,
    pub assessment: Assessment,
}

fn write_bars(path: &Path, a: &Assessment) -> CmdResult {
    let mut body = String::from("node,h_on,h_cri,kappa\n");
    for (id, v) in &a.inertia {
        body.push_str(&format!(
            "{id},{:.6},{:.6},{:.6}\n",
            v.h_effective, v.h_critical, a.per_node[id]
        ));
    }
    let mut w = create(path)?;
    w.write_all(body.as_bytes()).map_err(Failure::io)?;
    w.flush().map_err(Failure::io)
}

fn write_assessment(dir: &Path, out: &AssessmentOutput) -> CmdResult {
    write_json(&dir.join("assessment.json"), out)?;
    write_bars(&dir.join("assessment_bars.csv"), &out.assessment)
}

fn print_assessment(prefix: &str, a: &Assessment) {
    println!("{prefix}verdict: {}", a.verdict);
    println!("{prefix}kappa: {:.3} %", a.kappa);
    if !a.weak_nodes.is_empty() {
        println!("{prefix}weak nodes: {}", a.weak_nodes.join(", "));
    }
}

pub fn assess(r: &Resolved, build: bool, online: Option<PathBuf>, neighbors: Option<usize>) -> CmdResult {
    let online_path = online.or_else(|| r.config.online.clone()).ok_or_else(|| {
        Failure::config(anyhow!(
            "no online case (set `online` in the config or pass --online)"
        ))
    })?;
    let located: LocatedScenario = read_json(&online_path, "online case").map_err(Failure::config)?;
    let k = neighbors.unwrap_or(r.config.neighbors);
    let table = if build {
        table_build(r)?
    } else {
        let path = r.table_path();
        if !path.exists() {
            return Err(Failure::config(anyhow!(
                "offline table `{}` does not exist (run `table-build` or pass --build-table)",
                path.display()
            )));
        }
        OfflineTable::load(&path)
            .with_context(|| format!("cannot load offline table `{}`", path.display()))
            .map_err(Failure::config)?
    };
    let case = CaseDescriptor::from_located(&located).map_err(Failure::from_assessment)?;
    let a = assess_case(&table, &case, k).map_err(Failure::from_assessment)?;
    write_assessment(
        &r.out,
        &AssessmentOutput {
            format_version: OUTPUT_FORMAT_VERSION,
            seed: table.provenance.seed,
            neighbors: k,
            online: located,
            assessment: a.clone(),
        },
    )?;
    print_assessment("", &a);
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemoSummary {
    pub format_version: u32,
    pub seed: u64,
    pub base: Assessment,
    pub weakened: Assessment,
}

fn demo_config(topology: &str, output_dir: &str, seed: u64) -> RunConfig {
    let table = demo::table_config(seed);
    RunConfig {
        topology: topology.into(),
        scenarios: "scenarios.json".into(),
        thresholds: Some("thresholds.json".into()),
        output_dir: output_dir.into(),
        trajectories: None,
        table: None,
        online: Some("online.json".into()),
        neighbors: freqsec::assessment::DEFAULT_NEIGHBORS,
        fit: table.fit,
        sim: Some(table.sim),
        pmu_noise_sigma: table.pmu_noise_sigma,
        critical: table.critical,
        seed,
    }
}

/// Writes the example's inputs under `out/inputs` and, unless `inputs_only`,
/// runs the base and weakened configurations.
pub fn demo(out: &Path, seed: u64, inputs_only: bool) -> CmdResult {
    let inputs = out.join("inputs");
    write_json(&inputs.join("topology.json"), &demo::topology())?;
    write_json(&inputs.join("weakened_topology.json"), &demo::weakened_topology())?;
    write_json(&inputs.join("scenarios.json"), &demo::offline_scenarios())?;
    write_json(&inputs.join("online.json"), &demo::online_scenario())?;
    write_json(&inputs.join("thresholds.json"), &demo::thresholds())?;
    write_json(
        &inputs.join("config.json"),
        &demo_config("topology.json", "../base", seed),
    )?;
    write_json(
        &inputs.join("weakened_config.json"),
        &demo_config("weakened_topology.json", "../weakened", seed),
    )?;
    if inputs_only {
        println!("demo inputs written to {}", inputs.display());
        return Ok(());
    }
    let report = demo::run(seed).map_err(Failure::from_assessment)?;
    let online = demo::online_scenario();
    for (name, run) in [("base", &report.base), ("weakened", &report.weakened)] {
        let dir = out.join(name);
        write_json(&dir.join("offline_table.json"), &run.table)?;
        write_assessment(
            &dir,
            &AssessmentOutput {
                format_version: OUTPUT_FORMAT_VERSION,
                seed,
                neighbors: freqsec::assessment::DEFAULT_NEIGHBORS,
                online: online.clone(),
                assessment: run.assessment.clone(),
            },
        )?;
    }
    write_json(
        &out.join("demo_summary.json"),
        &DemoSummary {
            format_version: OUTPUT_FORMAT_VERSION,
            seed,
            base: report.base.assessment.clone(),
            weakened: report.weakened.assessment.clone(),
        },
    )?;
    print_assessment("base ", &report.base.assessment);
    print_assessment("weakened ", &report.weakened.assessment);
    Ok(())
}
