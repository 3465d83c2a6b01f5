//! Bundled five-node example system.
//!
//! Five lightly damped nodes, one of them without a PMU. The offline grid
//! holds nine cleared faults at `n1` varying the retained voltage and the
//! fault duration; the online case sits between grid points. The weakened
//! variant lowers the inertia of `n2` and `n5`.

use serde::{Deserialize, Serialize};

use crate::assessment::{
    assess, build_offline_table, Assessment, AssessmentError, CaseDescriptor, LocatedScenario, OfflineTable,
    TableConfig, DEFAULT_NEIGHBORS,
};
use crate::enf::{DisturbanceScenario, EffectiveParams, TemporaryFault};
use crate::security::SecurityThresholds;
use crate::sim::{Line, NetworkTopology, ParameterModulation, TopologyNode};

pub const DEMO_SEED: u64 = 2024;
pub const DISTURBANCE_NODE: &str = "n1";
/// Nodes whose inertia the weakened variant lowers, with the lowered values.
pub const WEAKENED: [(&str, f64); 2] = [("n2", 2.0), ("n5", 2.3)];
pub const PMU_NOISE_SIGMA: f64 = 1e-4;

const NODES: [(&str, f64, f64, f64, f64, bool); 5] = [
    ("n1", 4.2, 1.5, 18.0, 0.8, true),
    ("n2", 3.8, 1.0, 14.0, 1.0, true),
    ("n3", 4.0, 1.2, 16.0, 0.9, false),
    ("n4", 4.5, 2.0, 20.0, 1.2, true),
    ("n5", 3.6, 1.0, 12.0, 0.7, true),
];

const LINES: [(&str, &str, f64); 6] = [
    ("n1", "n2", 40.0),
    ("n2", "n3", 35.0),
    ("n3", "n4", 50.0),
    ("n4", "n5", 30.0),
    ("n1", "n5", 60.0),
    ("n3", "n5", 45.0),
];

const GRID_VOLTAGE: [f64; 3] = [0.76, 0.78, 0.80];
const GRID_DURATION: [f64; 3] = [0.10, 0.15, 0.20];

fn topology_with(inertia: impl Fn(&str, f64) -> f64) -> NetworkTopology {
    let nodes = NODES
        .iter()
        .map(|&(id, h, d, k, tau, measured)| {
            let params = EffectiveParams::new_unchecked(inertia(id, h), d, k, tau);
            TopologyNode {
                id: id.to_string(),
                params,
                modulation: ParameterModulation::inertia_default(&params),
                measured,
            }
        })
        .collect();
    let edges = LINES
        .iter()
        .map(|&(from, to, length_km)| Line {
            from: from.into(),
            to: to.into(),
            length_km,
        })
        .collect();
    NetworkTopology::new(nodes, edges).expect("demo topology is valid")
}

/// Base configuration.
pub fn topology() -> NetworkTopology {
    topology_with(|_, h| h)
}

/// Base configuration with the inertia of [`WEAKENED`] nodes lowered.
pub fn weakened_topology() -> NetworkTopology {
    topology_with(|id, h| WEAKENED.iter().find(|w| w.0 == id).map_or(h, |w| w.1))
}

/// Cleared fault at 1 s with retained voltage `u_f` lasting `duration` s.
pub fn fault(u_f: f64, duration: f64) -> DisturbanceScenario {
    DisturbanceScenario::Temporary(TemporaryFault {
        t_f: 1.0,
        t_c: 1.0 + duration,
        r_p: 2.0,
        p_gfl0: 0.2,
        p_load0: 0.9,
        u_f,
        a: 0.3,
        b: 0.3,
        c: 0.4,
    })
}

/// The default demo scenario: `U_f = 0.8` for 150 ms.
pub fn default_scenario() -> DisturbanceScenario {
    fault(0.8, 0.15)
}

pub fn offline_scenarios() -> Vec<LocatedScenario> {
    let mut out = Vec::new();
    for u in GRID_VOLTAGE {
        for d in GRID_DURATION {
            out.push(LocatedScenario {
                name: format!("uf{:.2}-dur{:.2}", u, d),
                disturbance_node: DISTURBANCE_NODE.into(),
                scenario: fault(u, d),
            });
        }
    }
    out
}

pub fn online_scenario() -> LocatedScenario {
    LocatedScenario {
        name: "online".into(),
        disturbance_node: DISTURBANCE_NODE.into(),
        scenario: fault(0.79, 0.14),
    }
}

pub fn thresholds() -> SecurityThresholds {
    SecurityThresholds::default()
}

pub fn table_config(seed: u64) -> TableConfig {
    TableConfig {
        pmu_noise_sigma: PMU_NOISE_SIGMA,
        seed,
        ..TableConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoRun {
    pub table: OfflineTable,
    pub assessment: Assessment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub seed: u64,
    pub base: DemoRun,
    pub weakened: DemoRun,
}

/// Builds the offline table of `topo` and assesses the online case.
pub fn run_configuration(topo: &NetworkTopology, seed: u64) -> Result<DemoRun, AssessmentError> {
    let table = build_offline_table(topo, &offline_scenarios(), &thresholds(), &table_config(seed))?;
    let online = CaseDescriptor::from_located(&online_scenario())?;
    let assessment = assess(&table, &online, DEFAULT_NEIGHBORS)?;
    Ok(DemoRun { table, assessment })
}

/// Base and weakened configurations end to end.
pub fn run(seed: u64) -> Result<DemoReport, AssessmentError> {
    Ok(DemoReport {
        seed,
        base: run_configuration(&topology(), seed)?,
        weakened: run_configuration(&weakened_topology(), seed)?,
    })
}
