use std::collections::BTreeMap;

use super::FitError;
use crate::enf::EffectiveParams;
use crate::sim::NetworkTopology;

/// Parameters of an unmeasured node as the inverse-line-length weighted
/// average of its fitted neighbours, `Σ(x_q/l_q) / Σ(1/l_q)`.
pub fn interpolate_params(
    target: &str,
    topo: &NetworkTopology,
    fitted: &BTreeMap<String, EffectiveParams>,
) -> Result<EffectiveParams, FitError> {
    let terms: Vec<(f64, [f64; 4])> = topo
        .neighbors(target)
        .filter_map(|(n, l)| fitted.get(n).map(|p| (1.0 / l, p.to_array())))
        .collect();
    if terms.is_empty() {
        return Err(FitError::NoFittedNeighbor(target.to_string()));
    }
    let first = terms[0].1;
    if terms.iter().all(|(_, x)| *x == first) {
        return Ok(EffectiveParams::from_array(first));
    }
    let total: f64 = terms.iter().map(|(w, _)| w).sum();
    let out = std::array::from_fn(|i| {
        let v: f64 = terms.iter().map(|(w, x)| w / total * x[i]).sum();
        // rounding must not leave the neighbour range
        let lo = terms.iter().map(|t| t.1[i]).fold(f64::INFINITY, f64::min);
        let hi = terms.iter().map(|t| t.1[i]).fold(f64::NEG_INFINITY, f64::max);
        v.clamp(lo, hi)
    });
    Ok(EffectiveParams::from_array(out))
}
