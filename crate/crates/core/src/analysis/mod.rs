//! Timing, energy and area of a routed block.
//!
//! Delays are in ps, capacitances in fF, resistances in kΩ and energies in fJ
//! per clock cycle.

mod area;
mod energy;
mod report;
mod sta;

use thiserror::Error;

use crate::celllib::{Architecture, CellLibrary, CellMaster, LibraryError, PinAccessPattern};
use crate::layout::{NetRoute, RoutingState};
use crate::netlist::{CellId, Netlist, NetlistError, PinRef};

pub use area::{area_report, AreaReport, AreaRow};
pub use energy::{energy, energy_from_loads, EnergyResult};
pub use report::{area_csv, area_svg, breakdown_svg, energy_csv, timing_csv, timing_json, wirelength_svg};
pub(crate) use sta::sta_with_loads;
pub use sta::{delay_breakdown, elmore_delays, insertion_delays, sta, DelayBreakdown, Endpoint, PathBreakdown, TimingResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("combinational loop through `{0}`")]
    CombinationalLoop(String),
    #[error("no characterized master for `{cell}` ({master})")]
    MissingMaster { cell: String, master: String },
    #[error("designs share no cell masters")]
    DisjointCells,
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    /// Toggles per cycle of data nets and data cells.
    pub activity: f64,
    /// Endpoints averaged for the achieved delay and skew.
    pub top_k: usize,
    /// Wire capacitance grows by this factor times the layer's track occupancy.
    pub coupling_uplift: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { activity: 0.1, top_k: 100, coupling_uplift: 0.3 }
    }
}

/// Pin-access pattern a block on `arch` is built from.
pub fn block_pattern(arch: Architecture) -> PinAccessPattern {
    if arch.is_double_sided() {
        PinAccessPattern::Do
    } else {
        PinAccessPattern::Sio
    }
}

/// Everything the analyses read, bundled.
#[derive(Clone, Copy)]
pub struct Design<'a> {
    pub netlist: &'a Netlist,
    pub routing: &'a RoutingState,
    pub library: &'a CellLibrary,
    pub arch: Architecture,
}

impl<'a> Design<'a> {
    pub fn master(&self, c: CellId) -> Result<&'a CellMaster, AnalysisError> {
        let cell = self.netlist.cell(c);
        self.library
            .master(&cell.master, self.arch, block_pattern(self.arch), cell.flavor)
            .ok_or_else(|| AnalysisError::MissingMaster { cell: cell.name.clone(), master: cell.master.clone() })
    }

    pub fn vdd(&self) -> f64 {
        self.library.vdd_of(self.arch)
    }

    fn pin_cap(&self, p: &PinRef) -> Result<f64, AnalysisError> {
        match p {
            PinRef::Cell { cell, pin } => Ok(self.master(*cell)?.cap_in_of(pin).unwrap_or(0.0)),
            PinRef::Port(_) => Ok(0.0),
        }
    }
}

/// Capacitive load of one net and the wire delay to each of its load pins.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetLoad {
    pub wire_c: f64,
    pub pin_c: f64,
    /// Output capacitance of the driving cell.
    pub driver_c: f64,
    /// Elmore delay from the driver pin, per load in net order.
    pub elmore: Vec<f64>,
}

/// Track occupancy of each layer, 0 for layers without capacity.
fn layer_density(routing: &RoutingState) -> Vec<f64> {
    routing
        .grid
        .cap
        .iter()
        .zip(&routing.grid.usage)
        .map(|(c, u)| {
            let c: u64 = c.iter().map(|&x| x as u64).sum();
            let u: u64 = u.iter().map(|&x| x as u64).sum();
            if c == 0 {
                0.0
            } else {
                u as f64 / c as f64
            }
        })
        .collect()
}

/// Per-node resistance and capacitance of a routed tree, wire capacitance split evenly between the two ends.
fn tree_rc(d: &Design, route: &NetRoute, density: &[f64], uplift: f64) -> Result<(Vec<f64>, Vec<f64>, f64), AnalysisError> {
    let n = route.nodes.len();
    let mut r = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut wire = 0.0;
    for (i, node) in route.nodes.iter().enumerate() {
        if let (Some(p), Some(l)) = (node.parent, node.layer) {
            let layer = d.routing.stack.layer(l);
            let um = node.len_nm / 1000.0;
            let cw = um * layer.cap_ff_per_um * (1.0 + uplift * density[l.0]);
            r[i] = um * layer.r_kohm_per_um();
            c[i] += cw / 2.0;
            c[p] += cw / 2.0;
            wire += cw;
        }
        if i > 0 {
            if let Some(pin) = &node.pin {
                c[i] += d.pin_cap(pin)?;
            }
        }
    }
    Ok((r, c, wire))
}

/// Loads of every net, indexed by net id. Unrouted nets see only their pins.
pub fn net_loads(d: &Design, opts: &AnalysisOptions) -> Result<Vec<NetLoad>, AnalysisError> {
    let density = layer_density(d.routing);
    let mut out = Vec::with_capacity(d.netlist.nets().len());
    for id in d.netlist.net_ids() {
        let net = d.netlist.net(id);
        let mut nl = NetLoad { elmore: vec![0.0; net.loads.len()], ..Default::default() };
        for l in &net.loads {
            nl.pin_c += d.pin_cap(l)?;
        }
        if let Some(c) = net.driver.cell() {
            nl.driver_c = d.master(c)?.cap_out;
        }
        for route in d.routing.routes_of(id) {
            let (r, c, wire) = tree_rc(d, route, &density, opts.coupling_uplift)?;
            nl.wire_c += wire;
            let parent: Vec<Option<usize>> = route.nodes.iter().map(|n| n.parent).collect();
            let t = elmore_delays(&parent, &r, &c);
            for (k, l) in net.loads.iter().enumerate() {
                if let Some(i) = route.node_of(l) {
                    nl.elmore[k] = t[i];
                }
            }
        }
        out.push(nl);
    }
    Ok(out)
}
