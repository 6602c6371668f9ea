use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LayoutError, Placement};
use crate::celllib::{Architecture, CellLibrary, LibraryError};
use crate::netlist::{CellId, CellInstance, Flavor, LogicalNet, NetId, NetKind, Netlist, PinRef};

#[derive(Debug, Clone, PartialEq)]
pub struct CtsOptions {
    /// Most loads a clock driver may have.
    pub max_fanout: usize,
    /// Seed for the buffer flavors.
    pub seed: u64,
}

impl Default for CtsOptions {
    fn default() -> Self {
        CtsOptions { max_fanout: 8, seed: 1 }
    }
}

/// Inserted clock buffers, leaf level first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClockTree {
    pub levels: Vec<Vec<CellId>>,
    /// Clock pins of sequential cells.
    pub sinks: Vec<PinRef>,
    /// Clock nets after insertion, root nets first.
    pub nets: Vec<NetId>,
}

impl ClockTree {
    pub fn buffers(&self) -> impl Iterator<Item = CellId> + '_ {
        self.levels.iter().flatten().copied()
    }

    pub fn buffer_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }
}

/// Splits points into groups of at most `max` by recursive median bisection on the longer side.
fn bisect(mut pts: Vec<(usize, (f64, f64))>, max: usize, out: &mut Vec<Vec<(usize, (f64, f64))>>) {
    if pts.len() <= max {
        out.push(pts);
        return;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (_, (x, y)) in &pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if x1 - x0 >= y1 - y0 {
        pts.sort_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.0.cmp(&b.0)));
    } else {
        pts.sort_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)));
    }
    let hi = pts.split_off(pts.len() / 2);
    bisect(pts, max, out);
    bisect(hi, max, out);
}

fn center(pts: &[(usize, (f64, f64))]) -> (f64, f64) {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (_, (x, y)) in pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    ((x0 + x1) / 2.0, (y0 + y1) / 2.0)
}

/// Builds a buffer tree on every clock net with more loads than `max_fanout`.
///
/// Loads are grouped by recursive geometric bisection; each group gets a
/// clock buffer at the center of its bounding box, legalized to the nearest
/// free sites. Buffer flavors are drawn at random, as a delay-only clock tree
/// tool would leave them.
pub fn cts(
    netlist: &mut Netlist,
    placement: &mut Placement,
    library: &CellLibrary,
    arch: Architecture,
    opts: &CtsOptions,
) -> Result<ClockTree, LayoutError> {
    assert!(opts.max_fanout >= 2, "fan-out limit below 2 cannot reduce a net");
    let buf = library.clock_buffer_name().ok_or_else(|| LibraryError::MissingCell("clock buffer".into()))?.to_string();
    let m = library.any_master(&buf, arch).ok_or_else(|| LibraryError::MissingCell(buf.clone()))?;
    let (width, in_pin, out_pin) = (m.width_gp, m.input_pins[0].clone(), m.output_pins[0].clone());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut tree = ClockTree::default();

    let clock_nets: Vec<NetId> = netlist.sorted_net_ids().into_iter().filter(|&n| netlist.net(n).kind == NetKind::Clock).collect();
    let mut new_nets: Vec<NetId> = Vec::new();
    let mut counter = 0usize;
    for root in clock_nets.iter().copied() {
        let loads = netlist.net(root).loads.clone();
        for l in &loads {
            if l.cell().is_some_and(|c| netlist.cell(c).is_sequential) {
                tree.sinks.push(l.clone());
            }
        }
        let mut current: Vec<PinRef> = loads;
        let mut level = 0;
        while current.len() > opts.max_fanout {
            let pts: Vec<(usize, (f64, f64))> = current.iter().enumerate().map(|(i, p)| (i, placement.pin_xy(p))).collect();
            let mut groups = Vec::new();
            bisect(pts, opts.max_fanout, &mut groups);
            let mut next = Vec::with_capacity(groups.len());
            for g in groups {
                let name = loop {
                    let n = format!("cts_buf_{counter}");
                    counter += 1;
                    if netlist.cell_id(&n).is_none() {
                        break n;
                    }
                };
                let flavor = if rng.gen_bool(0.5) { Flavor::Ti } else { Flavor::Bi };
                let id = netlist.push_cell(CellInstance {
                    name: name.clone(),
                    master: buf.clone(),
                    flavor,
                    is_sequential: false,
                    is_clock_buffer: true,
                });
                placement.insert_near(id, width, center(&g))?;
                let net = netlist.push_net(LogicalNet {
                    name: format!("{}_{name}", netlist.net(root).name),
                    driver: PinRef::Cell { cell: id, pin: out_pin.clone() },
                    loads: g.iter().map(|(i, _)| current[*i].clone()).collect(),
                    kind: NetKind::Clock,
                });
                new_nets.push(net);
                if tree.levels.len() <= level {
                    tree.levels.push(Vec::new());
                }
                tree.levels[level].push(id);
                next.push(PinRef::Cell { cell: id, pin: in_pin.clone() });
            }
            current = next;
            level += 1;
        }
        netlist.net_mut(root).loads = current;
    }
    netlist.reindex(library)?;
    tree.nets = clock_nets;
    tree.nets.extend(new_nets.into_iter().rev());
    Ok(tree)
}
