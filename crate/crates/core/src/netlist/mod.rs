//! Flat gate-level netlist: cell instances, logical nets and block ports.
//!
//! The netlist is a directed hypergraph. Every logical net has exactly one
//! driver pin and any number of load pins. Cells reference library masters by
//! name only, so one netlist can be implemented with any architecture variant.

mod parse;
mod physical;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use parse::{parse_netlist, serialize_netlist};
pub use physical::{derive_physical_nets, load_side, net_physical, split_net_count, PhysicalNet, RoutingStyle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetlistError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undeclared master `{master}`")]
    UndeclaredMaster { line: usize, master: String },
    #[error("line {line}: dangling pin `{pin}`")]
    DanglingPin { line: usize, pin: String },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: pin `{pin}` connected more than once")]
    PinReused { line: usize, pin: String },
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
    #[error("unknown net `{0}`")]
    UnknownNet(String),
    #[error("cell `{0}` has no flavor assigned")]
    UnassignedFlavor(String),
}

/// Pin-level description of a library cell, shared by every architecture variant.
#[derive(Debug, Clone, PartialEq)]
pub struct CellPins {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Clock input of a sequential master.
    pub clock: Option<String>,
    pub is_sequential: bool,
    pub is_clock_buffer: bool,
}

impl CellPins {
    pub fn has_input(&self, pin: &str) -> bool {
        self.inputs.iter().any(|p| p == pin)
    }

    pub fn has_output(&self, pin: &str) -> bool {
        self.outputs.iter().any(|p| p == pin)
    }
}

/// Anything that can resolve a master name to its pin list.
pub trait MasterCatalog {
    fn cell_pins(&self, master: &str) -> Option<&CellPins>;
}

impl MasterCatalog for BTreeMap<String, CellPins> {
    fn cell_pins(&self, master: &str) -> Option<&CellPins> {
        self.get(master)
    }
}

/// Which side carries a cell's input pin(s).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flavor {
    Ti,
    Bi,
    Unassigned,
}

impl Flavor {
    pub fn input_side(self) -> Option<Side> {
        match self {
            Flavor::Ti => Some(Side::Top),
            Flavor::Bi => Some(Side::Bottom),
            Flavor::Unassigned => None,
        }
    }

    pub fn flipped(self) -> Flavor {
        match self {
            Flavor::Ti => Flavor::Bi,
            Flavor::Bi => Flavor::Ti,
            Flavor::Unassigned => Flavor::Unassigned,
        }
    }

    pub fn from_side(side: Side) -> Flavor {
        match side {
            Side::Top => Flavor::Ti,
            Side::Bottom => Flavor::Bi,
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Ti => "TI",
            Flavor::Bi => "BI",
            Flavor::Unassigned => "--",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Top,
    Bottom,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Top => Side::Bottom,
            Side::Bottom => Side::Top,
        }
    }

    pub const BOTH: [Side; 2] = [Side::Top, Side::Bottom];
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Top => "top",
            Side::Bottom => "bottom",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PortSide {
    Top,
    Bottom,
    Either,
}

impl PortSide {
    pub fn fixed(self) -> Option<Side> {
        match self {
            PortSide::Top => Some(Side::Top),
            PortSide::Bottom => Some(Side::Bottom),
            PortSide::Either => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PortDir {
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NetId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub name: String,
    pub dir: PortDir,
    pub side: PortSide,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellInstance {
    pub name: String,
    pub master: String,
    pub flavor: Flavor,
    pub is_sequential: bool,
    pub is_clock_buffer: bool,
}

/// One end of a net connection.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PinRef {
    Cell { cell: CellId, pin: String },
    Port(PortId),
}

impl PinRef {
    pub fn cell(&self) -> Option<CellId> {
        match self {
            PinRef::Cell { cell, .. } => Some(*cell),
            PinRef::Port(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NetKind {
    Signal,
    Clock,
    Power,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogicalNet {
    pub name: String,
    pub driver: PinRef,
    pub loads: Vec<PinRef>,
    pub kind: NetKind,
}

/// A validated flat netlist.
///
/// Storage is append-only so `CellId`/`NetId` stay stable when the clock tree
/// inserts buffers. All name-facing queries return results in lexicographic
/// id order.
#[derive(Debug, Clone, Default)]
pub struct Netlist {
    cells: Vec<CellInstance>,
    nets: Vec<LogicalNet>,
    ports: Vec<Port>,
    cell_index: BTreeMap<String, CellId>,
    net_index: BTreeMap<String, NetId>,
    port_index: BTreeMap<String, PortId>,
    // per cell: nets touching an input pin / driven by an output pin
    fanin: Vec<Vec<NetId>>,
    fanout: Vec<Vec<NetId>>,
    port_net: Vec<Option<NetId>>,
}

impl Netlist {
    pub fn cells(&self) -> &[CellInstance] {
        &self.cells
    }

    pub fn nets(&self) -> &[LogicalNet] {
        &self.nets
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn cell(&self, id: CellId) -> &CellInstance {
        &self.cells[id.0]
    }

    pub fn net(&self, id: NetId) -> &LogicalNet {
        &self.nets[id.0]
    }

    pub fn port(&self, id: PortId) -> &Port {
        &self.ports[id.0]
    }

    pub fn cell_id(&self, name: &str) -> Option<CellId> {
        self.cell_index.get(name).copied()
    }

    pub fn net_id(&self, name: &str) -> Option<NetId> {
        self.net_index.get(name).copied()
    }

    pub fn port_id(&self, name: &str) -> Option<PortId> {
        self.port_index.get(name).copied()
    }

    pub fn cell_ids(&self) -> impl Iterator<Item = CellId> {
        (0..self.cells.len()).map(CellId)
    }

    pub fn net_ids(&self) -> impl Iterator<Item = NetId> {
        (0..self.nets.len()).map(NetId)
    }

    /// Cell ids in lexicographic name order.
    pub fn sorted_cell_ids(&self) -> Vec<CellId> {
        self.cell_index.values().copied().collect()
    }

    /// Net ids in lexicographic name order.
    pub fn sorted_net_ids(&self) -> Vec<NetId> {
        self.net_index.values().copied().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn pin_name(&self, pin: &PinRef) -> String {
        match pin {
            PinRef::Cell { cell, pin } => format!("{}.{}", self.cells[cell.0].name, pin),
            PinRef::Port(p) => self.ports[p.0].name.clone(),
        }
    }

    pub fn set_flavor(&mut self, cell: CellId, flavor: Flavor) {
        self.cells[cell.0].flavor = flavor;
    }

    /// Net attached to a block port, if any.
    pub fn port_net(&self, port: PortId) -> Option<NetId> {
        self.port_net.get(port.0).copied().flatten()
    }

    /// All nets with a load pin on `cell` (signal and clock), sorted by net name.
    pub fn fanin_nets(&self, cell: CellId) -> Result<Vec<NetId>, NetlistError> {
        let list = self
            .fanin
            .get(cell.0)
            .ok_or_else(|| NetlistError::UnknownCell(format!("#{}", cell.0)))?;
        Ok(list.clone())
    }

    /// Nets driven by an output pin of `cell`, sorted by net name.
    pub fn fanout_nets(&self, cell: CellId) -> &[NetId] {
        &self.fanout[cell.0]
    }

    /// Load instances of `net`, deduplicated and sorted by cell name.
    pub fn fanout_cells(&self, net: NetId) -> Result<Vec<CellId>, NetlistError> {
        let n = self
            .nets
            .get(net.0)
            .ok_or_else(|| NetlistError::UnknownNet(format!("#{}", net.0)))?;
        let set: BTreeSet<(&str, CellId)> = n
            .loads
            .iter()
            .filter_map(|p| p.cell())
            .map(|c| (self.cells[c.0].name.as_str(), c))
            .collect();
        Ok(set.into_iter().map(|(_, c)| c).collect())
    }

    /// Cell driving `net`, if it is not a port.
    pub fn driver_cell(&self, net: NetId) -> Option<CellId> {
        self.nets[net.0].driver.cell()
    }

    /// Net connected to a specific input pin of a cell.
    pub fn input_net(&self, cell: CellId, pin: &str) -> Option<NetId> {
        self.fanin[cell.0].iter().copied().find(|&n| {
            self.nets[n.0]
                .loads
                .iter()
                .any(|l| matches!(l, PinRef::Cell { cell: c, pin: p } if *c == cell && p == pin))
        })
    }

    /// Builds a netlist from parts and validates it against `catalog`.
    pub fn from_parts(
        cells: Vec<CellInstance>,
        nets: Vec<LogicalNet>,
        ports: Vec<Port>,
        catalog: &dyn MasterCatalog,
    ) -> Result<Netlist, NetlistError> {
        let mut nl = Netlist {
            cells,
            nets,
            ports,
            ..Default::default()
        };
        nl.reindex(catalog)?;
        Ok(nl)
    }

    /// Appends a cell; callers must call [`Netlist::reindex`] after a batch of edits.
    pub fn push_cell(&mut self, cell: CellInstance) -> CellId {
        self.cells.push(cell);
        CellId(self.cells.len() - 1)
    }

    pub fn push_net(&mut self, net: LogicalNet) -> NetId {
        self.nets.push(net);
        NetId(self.nets.len() - 1)
    }

    pub fn net_mut(&mut self, id: NetId) -> &mut LogicalNet {
        &mut self.nets[id.0]
    }

    /// Rebuilds name indices and connectivity, re-checking every invariant.
    pub fn reindex(&mut self, catalog: &dyn MasterCatalog) -> Result<(), NetlistError> {
        self.cell_index.clear();
        self.net_index.clear();
        self.port_index.clear();
        for (i, c) in self.cells.iter_mut().enumerate() {
            let pins = catalog
                .cell_pins(&c.master)
                .ok_or_else(|| NetlistError::UndeclaredMaster {
                    line: 0,
                    master: c.master.clone(),
                })?;
            c.is_sequential = pins.is_sequential;
            c.is_clock_buffer = pins.is_clock_buffer;
            if self.cell_index.insert(c.name.clone(), CellId(i)).is_some() {
                return Err(NetlistError::DuplicateId { line: 0, id: c.name.clone() });
            }
        }
        for (i, p) in self.ports.iter().enumerate() {
            if self.port_index.insert(p.name.clone(), PortId(i)).is_some() {
                return Err(NetlistError::DuplicateId { line: 0, id: p.name.clone() });
            }
        }
        for (i, n) in self.nets.iter().enumerate() {
            if self.net_index.insert(n.name.clone(), NetId(i)).is_some() {
                return Err(NetlistError::DuplicateId { line: 0, id: n.name.clone() });
            }
        }

        let mut fanin = vec![Vec::new(); self.cells.len()];
        let mut fanout = vec![Vec::new(); self.cells.len()];
        let mut port_net = vec![None; self.ports.len()];
        let mut used: BTreeSet<PinRef> = BTreeSet::new();
        for (ni, net) in self.nets.iter().enumerate() {
            let id = NetId(ni);
            let mut check = |pin: &PinRef, is_driver: bool| -> Result<(), NetlistError> {
                let name = match pin {
                    PinRef::Cell { cell, pin: p } => {
                        let c = self.cells.get(cell.0).ok_or_else(|| NetlistError::DanglingPin {
                            line: 0,
                            pin: format!("#{}.{}", cell.0, p),
                        })?;
                        let pins = catalog.cell_pins(&c.master).expect("checked above");
                        let ok = if is_driver { pins.has_output(p) } else { pins.has_input(p) };
                        if !ok {
                            return Err(NetlistError::DanglingPin {
                                line: 0,
                                pin: format!("{}.{}", c.name, p),
                            });
                        }
                        format!("{}.{}", c.name, p)
                    }
                    PinRef::Port(p) => {
                        let port = self.ports.get(p.0).ok_or_else(|| NetlistError::DanglingPin {
                            line: 0,
                            pin: format!("port#{}", p.0),
                        })?;
                        let ok = (port.dir == PortDir::In) == is_driver;
                        if !ok {
                            return Err(NetlistError::DanglingPin { line: 0, pin: port.name.clone() });
                        }
                        port.name.clone()
                    }
                };
                if !used.insert(pin.clone()) {
                    return Err(NetlistError::PinReused { line: 0, pin: name });
                }
                Ok(())
            };
            check(&net.driver, true)?;
            for l in &net.loads {
                check(l, false)?;
            }
            if net.kind == NetKind::Power && !net.loads.is_empty() {
                return Err(NetlistError::Syntax {
                    line: 0,
                    msg: format!("power net `{}` lists signal loads", net.name),
                });
            }
            match &net.driver {
                PinRef::Cell { cell, .. } => fanout[cell.0].push(id),
                PinRef::Port(p) => port_net[p.0] = Some(id),
            }
            if net.kind != NetKind::Power {
                for l in &net.loads {
                    match l {
                        PinRef::Cell { cell, .. } => fanin[cell.0].push(id),
                        PinRef::Port(p) => port_net[p.0] = Some(id),
                    }
                }
            }
        }
        let nets = &self.nets;
        let by_name = |v: &mut Vec<NetId>| {
            v.sort_by(|a, b| nets[a.0].name.cmp(&nets[b.0].name));
            v.dedup();
        };
        fanin.iter_mut().for_each(by_name);
        fanout.iter_mut().for_each(by_name);
        self.fanin = fanin;
        self.fanout = fanout;
        self.port_net = port_net;
        Ok(())
    }
}
