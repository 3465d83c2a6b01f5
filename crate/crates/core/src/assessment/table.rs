use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::case::{derive_seed, CaseDescriptor, FeatureScales, LocatedScenario};
use super::AssessmentError;
use crate::enf::{DisturbanceScenario, EffectiveParams, Trajectory};
use crate::fitting::{interpolate_params, FitConfig, FitError};
use crate::security::{critical_inertia_with, CriticalInertia, CriticalInertiaOptions, SecurityThresholds};
use crate::sim::{
    settling_horizon, simulate_with, synthesize_pmu, NetworkTopology, SimError, SimSettings, TopologyNode,
};

pub const TABLE_FORMAT_VERSION: u32 = 1;

/// Everything besides topology and scenarios that shapes a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableConfig {
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default = "default_sim")]
    pub sim: SimSettings,
    /// Standard deviation of the PMU noise added to simulated data, pu.
    #[serde(default)]
    pub pmu_noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub critical: CriticalInertiaOptions,
}

fn default_sim() -> SimSettings {
    SimSettings {
        record_interval: 0.01,
        ..SimSettings::default()
    }
}

impl Default for TableConfig {
    fn default() -> Self {
        Self {
            fit: FitConfig::default(),
            sim: default_sim(),
            pmu_noise_sigma: 0.0,
            seed: 0,
            critical: CriticalInertiaOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub params: EffectiveParams,
    pub critical: CriticalInertia,
    /// Fitted from its own trajectory, as opposed to interpolated.
    pub measured: bool,
    #[serde(default)]
    pub error_percent: Option<f64>,
    #[serde(default)]
    pub converged: Option<bool>,
}

impl NodeRecord {
    pub fn h_bar(&self) -> f64 {
        self.params.h_bar
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineRecord {
    pub name: String,
    pub case: CaseDescriptor,
    pub scenario: LocatedScenario,
    pub nodes: BTreeMap<String, NodeRecord>,
}

/// Effective and critical inertia of every node under every offline case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineTable {
    pub format_version: u32,
    pub thresholds: SecurityThresholds,
    pub node_ids: Vec<String>,
    pub feature_scales: FeatureScales,
    pub provenance: TableConfig,
    pub records: Vec<OfflineRecord>,
}

impl OfflineTable {
    pub fn validate(&self) -> Result<(), AssessmentError> {
        if self.format_version != TABLE_FORMAT_VERSION {
            return Err(AssessmentError::InvalidTable(format!(
                "format version {} (expected {TABLE_FORMAT_VERSION})",
                self.format_version
            )));
        }
        self.thresholds.validate()?;
        self.feature_scales.validate()?;
        for r in &self.records {
            if !r.nodes.keys().eq(self.node_ids.iter()) {
                return Err(AssessmentError::InvalidTable(format!(
                    "record `{}` does not cover the table's node set",
                    r.name
                )));
            }
        }
        Ok(())
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, AssessmentError> {
        let table: Self = serde_json::from_str(text)?;
        table.validate()?;
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<(), AssessmentError> {
        std::fs::write(path, self.to_json_pretty())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, AssessmentError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Simulated PMU recording of `node` (position `node_index` in the topology)
/// under scenario number `scenario_index`: the modulated model integrated
/// over a horizon long enough to settle and cover the loss probes, plus
/// measurement noise. Both random streams derive from `config.seed` and the
/// two indices.
pub fn measurement(
    node: &TopologyNode,
    scenario_index: usize,
    node_index: usize,
    scn: &DisturbanceScenario,
    config: &TableConfig,
) -> Result<Trajectory, SimError> {
    let (i, j) = (scenario_index as u64, node_index as u64);
    let mut modulation = node.modulation.clone();
    modulation.seed = derive_seed(modulation.seed ^ config.seed, i, j);
    let settings = SimSettings {
        horizon: config
            .sim
            .horizon
            .max(settling_horizon(&node.params, scn))
            .max(config.fit.weights.t_inf + 0.5),
        ..config.sim
    };
    let traj = simulate_with(&node.params, &modulation, scn, &settings)?;
    Ok(synthesize_pmu(
        &traj,
        config.pmu_noise_sigma,
        derive_seed(config.seed, i, j | (1 << 32)),
    ))
}

/// Simulates, fits and evaluates every scenario; one record per scenario.
///
/// Measured nodes are simulated with their modulation, overlaid with PMU
/// noise, filtered and fitted; unmeasured nodes take the inverse-distance
/// average of their fitted neighbours. Scenarios and measured nodes are
/// processed in parallel on the current rayon pool. Every random stream is
/// seeded from `(config.seed, scenario index, node index)`, so the result
/// does not depend on scheduling.
pub fn build_offline_table(
    topo: &NetworkTopology,
    scenarios: &[LocatedScenario],
    th: &SecurityThresholds,
    config: &TableConfig,
) -> Result<OfflineTable, AssessmentError> {
    if scenarios.is_empty() {
        return Err(AssessmentError::NoScenarios);
    }
    topo.validate()
        .map_err(|e| AssessmentError::InvalidTable(e.to_string()))?;
    th.validate()?;
    let records = scenarios
        .par_iter()
        .enumerate()
        .map(|(i, s)| build_record(topo, i, s, th, config))
        .collect::<Result<Vec<_>, _>>()?;
    let feature_scales = FeatureScales::from_cases(records.iter().map(|r| &r.case));
    let mut node_ids: Vec<String> = topo.node_ids().map(String::from).collect();
    node_ids.sort();
    Ok(OfflineTable {
        format_version: TABLE_FORMAT_VERSION,
        thresholds: *th,
        node_ids,
        feature_scales,
        provenance: config.clone(),
        records,
    })
}

fn build_record(
    topo: &NetworkTopology,
    index: usize,
    located: &LocatedScenario,
    th: &SecurityThresholds,
    config: &TableConfig,
) -> Result<OfflineRecord, AssessmentError> {
    let case = CaseDescriptor::from_located(located)?;
    let scn = &located.scenario;
    let name = located.name.clone();
    let fit_err = |node: &str, source: FitError| AssessmentError::Fit {
        scenario: name.clone(),
        node: node.to_string(),
        source,
    };

    let measured: Vec<(usize, &TopologyNode)> = topo
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.measured)
        .collect();
    let fitted = measured
        .par_iter()
        .map(|&(j, node)| {
            let noisy =
                measurement(node, index, j, scn, config).map_err(|source| AssessmentError::Simulation {
                    scenario: name.clone(),
                    node: node.id.clone(),
                    source,
                })?;
            let fit = config.fit.run(&noisy, scn).map_err(|e| fit_err(&node.id, e))?;
            Ok((node.id.clone(), fit))
        })
        .collect::<Result<Vec<_>, AssessmentError>>()?;

    let fitted_params: BTreeMap<String, EffectiveParams> =
        fitted.iter().map(|(id, f)| (id.clone(), f.params)).collect();
    let mut nodes = BTreeMap::new();
    for node in &topo.nodes {
        let (params, error_percent, converged) = match fitted.iter().find(|(id, _)| *id == node.id) {
            Some((_, f)) => (f.params, Some(f.error_percent), Some(f.converged)),
            None => (
                interpolate_params(&node.id, topo, &fitted_params).map_err(|e| fit_err(&node.id, e))?,
                None,
                None,
            ),
        };
        let critical = critical_inertia_with(&params, scn, th, &config.critical).map_err(|source| {
            AssessmentError::Security {
                scenario: name.clone(),
                node: node.id.clone(),
                source,
            }
        })?;
        nodes.insert(
            node.id.clone(),
            NodeRecord {
                params,
                critical,
                measured: node.measured,
                error_percent,
                converged,
            },
        );
    }
    Ok(OfflineRecord {
        name,
        case,
        scenario: located.clone(),
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::sim::ParameterModulation;

    fn clean_topology() -> NetworkTopology {
        let mut t = demo::topology();
        for n in &mut t.nodes {
            n.modulation = ParameterModulation::none();
        }
        t
    }

    fn one_scenario() -> Vec<LocatedScenario> {
        vec![demo::offline_scenarios().swap_remove(4)]
    }

    #[test]
    fn clean_data_recovers_inertia() {
        let topo = clean_topology();
        let table = build_offline_table(
            &topo,
            &one_scenario(),
            &demo::thresholds(),
            &TableConfig::default(),
        )
        .unwrap();
        table.validate().unwrap();
        assert_eq!(table.node_ids, vec!["n1", "n2", "n3", "n4", "n5"]);
        let rec = &table.records[0];
        for node in topo.nodes.iter().filter(|n| n.measured) {
            let r = &rec.nodes[&node.id];
            assert!(r.measured);
            assert!(
                (r.params.h_bar - node.params.h_bar).abs() < 0.05,
                "{} {:?}",
                node.id,
                r.params
            );
            assert!(r.error_percent.unwrap() < 1.0);
        }
        let n3 = &rec.nodes["n3"];
        assert!(!n3.measured && n3.error_percent.is_none());
        let back = OfflineTable::from_json(&table.to_json_pretty()).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn empty_scenario_list() {
        assert!(matches!(
            build_offline_table(
                &demo::topology(),
                &[],
                &demo::thresholds(),
                &TableConfig::default()
            ),
            Err(AssessmentError::NoScenarios)
        ));
    }

    #[test]
    fn independent_of_thread_count() {
        let topo = demo::topology();
        let scenarios: Vec<_> = demo::offline_scenarios().into_iter().take(2).collect();
        let config = demo::table_config(3);
        let build = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| build_offline_table(&topo, &scenarios, &demo::thresholds(), &config).unwrap())
        };
        assert_eq!(build(1), build(3));
    }

    #[test]
    fn rejects_foreign_format() {
        let table = OfflineTable {
            format_version: 99,
            thresholds: SecurityThresholds::default(),
            node_ids: vec![],
            feature_scales: FeatureScales::default(),
            provenance: TableConfig::default(),
            records: vec![],
        };
        assert!(OfflineTable::from_json(&serde_json::to_string(&table).unwrap()).is_err());
    }
}
