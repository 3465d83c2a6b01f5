use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CriticalInertia, SecurityError, SecurityIndicators};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Safe,
    Critical,
    Unsafe,
}

impl Verdict {
    pub fn from_kappa(kappa: f64) -> Self {
        if kappa > 0.0 {
            Verdict::Safe
        } else if kappa == 0.0 {
            Verdict::Critical
        } else {
            Verdict::Unsafe
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Safe => "safe",
            Verdict::Critical => "critical",
            Verdict::Unsafe => "unsafe",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityIndex {
    /// κ_j in percent.
    pub per_node: BTreeMap<String, f64>,
    /// κ = min κ_j, percent.
    pub system: f64,
    /// Nodes with κ_j < 0, most insecure first.
    pub weak_nodes: Vec<String>,
    pub verdict: Verdict,
}

/// `κ_j = (H̄_j − H_cri,j)/H_cri,j · 100 %` per node and the system minimum.
pub fn security_index(
    h_actual: &BTreeMap<String, f64>,
    h_cri: &BTreeMap<String, f64>,
) -> Result<SecurityIndex, SecurityError> {
    if h_actual.is_empty() {
        return Err(SecurityError::KeyMismatch("no nodes".into()));
    }
    if let Some(k) = h_actual.keys().find(|k| !h_cri.contains_key(*k)) {
        return Err(SecurityError::KeyMismatch(format!(
            "no critical inertia for `{k}`"
        )));
    }
    if let Some(k) = h_cri.keys().find(|k| !h_actual.contains_key(*k)) {
        return Err(SecurityError::KeyMismatch(format!("no inertia for `{k}`")));
    }
    let mut per_node = BTreeMap::new();
    for (node, &h) in h_actual {
        let hc = h_cri[node];
        if !(hc > 0.0 && hc.is_finite()) {
            return Err(SecurityError::KeyMismatch(format!(
                "critical inertia of `{node}` is {hc}"
            )));
        }
        per_node.insert(node.clone(), (h - hc) / hc * 100.0);
    }
    let system = per_node.values().copied().fold(f64::INFINITY, f64::min);
    let mut weak: Vec<(&String, f64)> = per_node
        .iter()
        .filter(|(_, &k)| k < 0.0)
        .map(|(n, &k)| (n, k))
        .collect();
    weak.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    Ok(SecurityIndex {
        weak_nodes: weak.into_iter().map(|(n, _)| n.clone()).collect(),
        verdict: Verdict::from_kappa(system),
        per_node,
        system,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeIndicatorReport {
    pub h_bar: f64,
    pub indicators: SecurityIndicators,
    pub critical: CriticalInertia,
    pub kappa: f64,
}

/// Per-node indicators with the system summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorReport {
    pub nodes: BTreeMap<String, NodeIndicatorReport>,
    pub system_kappa: f64,
    pub weak_nodes: Vec<String>,
    pub verdict: Verdict,
}
