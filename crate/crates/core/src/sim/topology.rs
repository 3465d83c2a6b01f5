use std::collections::{HashMap, HashSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::modulation::ParameterModulation;
use super::SimError;
use crate::enf::EffectiveParams;

fn measured_default() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyNode {
    pub id: String,
    pub params: EffectiveParams,
    #[serde(default)]
    pub modulation: ParameterModulation,
    /// Whether a PMU records this node.
    #[serde(default = "measured_default")]
    pub measured: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub from: String,
    pub to: String,
    pub length_km: f64,
}

/// Nodes with their effective parameters and the lines joining them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkTopology {
    pub nodes: Vec<TopologyNode>,
    pub edges: Vec<Line>,
}

impl NetworkTopology {
    /// Validates ids, line lengths and connectivity.
    pub fn new(nodes: Vec<TopologyNode>, edges: Vec<Line>) -> Result<Self, SimError> {
        let topo = Self { nodes, edges };
        topo.validate()?;
        Ok(topo)
    }

    pub fn from_json_file(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)?;
        let topo: Self = serde_json::from_str(&text)?;
        topo.validate()?;
        Ok(topo)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology serializes")
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.nodes.is_empty() {
            return Err(SimError::Topology("no nodes".into()));
        }
        let mut ids = HashSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                return Err(SimError::Topology(format!("duplicate node id `{}`", n.id)));
            }
            if !n.params.is_positive() {
                return Err(SimError::Topology(format!(
                    "node `{}` has non-positive parameters",
                    n.id
                )));
            }
        }
        for e in &self.edges {
            for end in [&e.from, &e.to] {
                if !ids.contains(end.as_str()) {
                    return Err(SimError::Topology(format!(
                        "line references unknown node `{end}`"
                    )));
                }
            }
            if e.from == e.to {
                return Err(SimError::Topology(format!("self loop at `{}`", e.from)));
            }
            if !(e.length_km > 0.0 && e.length_km.is_finite()) {
                return Err(SimError::Topology(format!(
                    "line {}-{} has non-positive length {}",
                    e.from, e.to, e.length_km
                )));
            }
        }
        if !self.is_connected() {
            return Err(SimError::Topology("network is not connected".into()));
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let mut adj: HashMap<&str, Vec<&str>> = HashMap::new();
        for e in &self.edges {
            adj.entry(&e.from).or_default().push(&e.to);
            adj.entry(&e.to).or_default().push(&e.from);
        }
        let start = self.nodes[0].id.as_str();
        let mut seen = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for &m in adj.get(n).into_iter().flatten() {
                if seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        seen.len() == self.nodes.len()
    }

    pub fn node(&self, id: &str) -> Option<&TopologyNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.id.as_str())
    }

    /// Directly connected nodes with the line length to each, in edge order.
    pub fn neighbors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = (&'a str, f64)> + 'a {
        self.edges.iter().filter_map(move |e| {
            if e.from == id {
                Some((e.to.as_str(), e.length_km))
            } else if e.to == id {
                Some((e.from.as_str(), e.length_km))
            } else {
                None
            }
        })
    }
}
