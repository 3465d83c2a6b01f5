use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::case::CaseDescriptor;
use super::table::{OfflineRecord, OfflineTable};
use super::AssessmentError;
use crate::security::{security_index, SecurityIndex, Verdict};

pub const DEFAULT_NEIGHBORS: usize = 4;

/// An offline record with its normalised distance to the online case.
#[derive(Debug, Clone, Copy)]
pub struct Neighbor<'a> {
    pub record: &'a OfflineRecord,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnlineInertia {
    /// Effective inertia, s.
    pub h_effective: f64,
    /// Critical inertia, s.
    pub h_critical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborSummary {
    pub name: String,
    pub distance: f64,
}

/// Online assessment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub case: CaseDescriptor,
    pub kappa: f64,
    pub verdict: Verdict,
    pub weak_nodes: Vec<String>,
    pub per_node: BTreeMap<String, f64>,
    pub inertia: BTreeMap<String, OnlineInertia>,
    pub neighbors: Vec<NeighborSummary>,
}

impl Assessment {
    pub fn index(&self) -> SecurityIndex {
        SecurityIndex {
            per_node: self.per_node.clone(),
            system: self.kappa,
            weak_nodes: self.weak_nodes.clone(),
            verdict: self.verdict,
        }
    }
}

/// The `k` nearest comparable records, closest first.
///
/// Records must share the disturbance type and node of `online`. Records
/// identical in case and node data to an earlier one are skipped, so a
/// duplicated table entry does not gain weight.
pub fn select_neighbors<'a>(
    table: &'a OfflineTable,
    online: &CaseDescriptor,
    k: usize,
) -> Result<Vec<Neighbor<'a>>, AssessmentError> {
    if k == 0 {
        return Err(AssessmentError::InvalidNeighborCount);
    }
    let mut found: Vec<Neighbor<'a>> = Vec::new();
    for r in table.records.iter().filter(|r| r.case.comparable(online)) {
        if found
            .iter()
            .any(|n| n.record.case == r.case && n.record.nodes == r.nodes)
        {
            continue;
        }
        found.push(Neighbor {
            record: r,
            distance: r.case.distance(online, &table.feature_scales),
        });
    }
    if found.is_empty() {
        return Err(AssessmentError::NoComparableCase {
            kind: format!("{:?}", online.disturbance_type).to_lowercase(),
            node: online.disturbance_node.clone(),
        });
    }
    // stable: equal distances keep table order
    found.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    found.truncate(k);
    Ok(found)
}

/// Inverse-distance weighted effective and critical inertia per node,
/// `H_on = Σ(H_r/L_r) / Σ(1/L_r)`. A zero-distance neighbour is copied.
pub fn interpolate_online(
    neighbors: &[Neighbor<'_>],
) -> Result<BTreeMap<String, OnlineInertia>, AssessmentError> {
    let first = neighbors.first().ok_or(AssessmentError::EmptyNeighborSet)?;
    if let Some(exact) = neighbors.iter().find(|n| n.distance == 0.0) {
        return Ok(exact
            .record
            .nodes
            .iter()
            .map(|(id, r)| {
                (
                    id.clone(),
                    OnlineInertia {
                        h_effective: r.params.h_bar,
                        h_critical: r.critical.h_cri,
                    },
                )
            })
            .collect());
    }
    let total: f64 = neighbors.iter().map(|n| 1.0 / n.distance).sum();
    let mut out = BTreeMap::new();
    for id in first.record.nodes.keys() {
        let values: Vec<(f64, f64, f64)> = neighbors
            .iter()
            .map(|n| {
                let r = n.record.nodes.get(id).ok_or_else(|| {
                    AssessmentError::InvalidTable(format!("record `{}` lacks node `{id}`", n.record.name))
                })?;
                Ok((1.0 / n.distance / total, r.params.h_bar, r.critical.h_cri))
            })
            .collect::<Result<_, AssessmentError>>()?;
        out.insert(
            id.clone(),
            OnlineInertia {
                h_effective: weighted(&values, |v| v.1),
                h_critical: weighted(&values, |v| v.2),
            },
        );
    }
    Ok(out)
}

fn weighted(values: &[(f64, f64, f64)], pick: impl Fn(&(f64, f64, f64)) -> f64) -> f64 {
    let first = pick(&values[0]);
    if values.iter().all(|v| pick(v) == first) {
        return first;
    }
    let v: f64 = values.iter().map(|v| v.0 * pick(v)).sum();
    let lo = values.iter().map(&pick).fold(f64::INFINITY, f64::min);
    let hi = values.iter().map(&pick).fold(f64::NEG_INFINITY, f64::max);
    v.clamp(lo, hi)
}

/// Neighbour selection, interpolation and the security index of the online
/// case.
pub fn assess(
    table: &OfflineTable,
    online: &CaseDescriptor,
    k: usize,
) -> Result<Assessment, AssessmentError> {
    table.validate()?;
    let neighbors = select_neighbors(table, online, k)?;
    let inertia = interpolate_online(&neighbors)?;
    let h_on: BTreeMap<String, f64> = inertia.iter().map(|(k, v)| (k.clone(), v.h_effective)).collect();
    let h_cri: BTreeMap<String, f64> = inertia.iter().map(|(k, v)| (k.clone(), v.h_critical)).collect();
    let index = security_index(&h_on, &h_cri)?;
    Ok(Assessment {
        case: online.clone(),
        kappa: index.system,
        verdict: index.verdict,
        weak_nodes: index.weak_nodes,
        per_node: index.per_node,
        inertia,
        neighbors: neighbors
            .iter()
            .map(|n| NeighborSummary {
                name: n.record.name.clone(),
                distance: n.distance,
            })
            .collect(),
    })
}
