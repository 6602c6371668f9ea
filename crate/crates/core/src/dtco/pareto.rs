use std::cmp::Ordering;

use super::{DeviceMetrics, DtcoError};

fn by_delay(a: &DeviceMetrics, b: &DeviceMetrics) -> Ordering {
    a.delay
        .total_cmp(&b.delay)
        .then(a.energy.total_cmp(&b.energy))
        .then(a.params.cmp(&b.params))
}

/// Points not dominated in (energy, delay), sorted by delay ascending.
///
/// A point is dominated when another is no worse in both and strictly better
/// in one, so exact duplicates all survive.
pub fn pareto_frontier(points: &[DeviceMetrics]) -> Result<Vec<DeviceMetrics>, DtcoError> {
    if points.is_empty() {
        return Err(DtcoError::Empty);
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(by_delay);
    let mut out: Vec<DeviceMetrics> = Vec::new();
    for p in sorted {
        match out.last() {
            None => out.push(p),
            Some(last) => {
                let best_e = last.energy;
                if p.energy < best_e || (p.energy == best_e && p.delay == last.delay) {
                    out.push(p);
                }
            }
        }
    }
    Ok(out)
}

/// The minimum-EDP point; equal EDPs go to the smaller parameter tuple.
pub fn min_edp(points: &[DeviceMetrics]) -> Result<DeviceMetrics, DtcoError> {
    points
        .iter()
        .min_by(|a, b| a.edp.total_cmp(&b.edp).then(a.params.cmp(&b.params)))
        .copied()
        .ok_or(DtcoError::Empty)
}
