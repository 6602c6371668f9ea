use std::collections::BTreeMap;

use serde::Serialize;

use super::AnalysisError;
use crate::celllib::{cell_area, Architecture, CellLibrary, LibraryError};
use crate::netlist::Netlist;

/// Per-master cell count and area of a design next to a reference design,
/// both normalized to the reference totals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaRow {
    pub master: String,
    pub count: usize,
    pub reference_count: usize,
    pub area_norm: f64,
    pub reference_area_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaReport {
    pub rows: Vec<AreaRow>,
    /// µm²
    pub cell_area_um2: f64,
    pub reference_cell_area_um2: f64,
    pub count_norm: f64,
}

impl AreaReport {
    /// Design cell area over reference cell area.
    pub fn area_norm(&self) -> f64 {
        self.cell_area_um2 / self.reference_cell_area_um2
    }
}

fn tally(netlist: &Netlist, arch: Architecture, lib: &CellLibrary) -> Result<BTreeMap<String, (usize, f64)>, AnalysisError> {
    let mut m: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    for c in netlist.cells() {
        let master = lib.any_master(&c.master, arch).ok_or_else(|| LibraryError::MissingCell(c.master.clone()))?;
        let e = m.entry(c.master.clone()).or_default();
        e.0 += 1;
        e.1 += cell_area(master) * 1e-6;
    }
    Ok(m)
}

/// Cell-area breakdown of `design` normalized to `reference`.
pub fn area_report(
    design: (&Netlist, Architecture),
    reference: (&Netlist, Architecture),
    library: &CellLibrary,
) -> Result<AreaReport, AnalysisError> {
    let a = tally(design.0, design.1, library)?;
    let b = tally(reference.0, reference.1, library)?;
    if !a.is_empty() && !b.is_empty() && !a.keys().any(|k| b.contains_key(k)) {
        return Err(AnalysisError::DisjointCells);
    }
    let total_a: f64 = a.values().map(|v| v.1).sum();
    let total_b: f64 = b.values().map(|v| v.1).sum();
    let count_b: usize = b.values().map(|v| v.0).sum();
    let norm = |x: f64| if total_b > 0.0 { x / total_b } else { 0.0 };
    let mut names: Vec<&String> = a.keys().chain(b.keys()).collect();
    names.sort();
    names.dedup();
    let rows = names
        .into_iter()
        .map(|n| {
            let (ca, aa) = a.get(n).copied().unwrap_or_default();
            let (cb, ab) = b.get(n).copied().unwrap_or_default();
            AreaRow { master: n.clone(), count: ca, reference_count: cb, area_norm: norm(aa), reference_area_norm: norm(ab) }
        })
        .collect();
    let count_a: usize = a.values().map(|v| v.0).sum();
    Ok(AreaReport {
        rows,
        cell_area_um2: total_a,
        reference_cell_area_um2: total_b,
        count_norm: if count_b > 0 { count_a as f64 / count_b as f64 } else { 0.0 },
    })
}
