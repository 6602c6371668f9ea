use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::*;

/// Parses the line-oriented netlist format.
///
/// ```text
/// port <name> <in|out> <top|bottom|either>
/// cell <instance> <master> [flavor=TI|BI]
/// net <name> [clock|power] <driver> <load> ...
/// ```
///
/// Pins are `inst.pin` or a bare port name; the first pin of a net is its driver.
pub fn parse_netlist(text: &str, catalog: &dyn MasterCatalog) -> Result<Netlist, NetlistError> {
    let mut ports = Vec::new();
    let mut cells = Vec::new();
    let mut port_ix: BTreeMap<String, PortId> = BTreeMap::new();
    let mut cell_ix: BTreeMap<String, CellId> = BTreeMap::new();
    let mut net_names: BTreeSet<String> = BTreeSet::new();
    // nets are resolved after every cell/port is known, so declaration order is free
    let mut pending: Vec<(usize, String, NetKind, Vec<String>)> = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let syntax = |msg: &str| NetlistError::Syntax { line, msg: msg.to_string() };
        match toks[0] {
            "port" => {
                if toks.len() != 4 {
                    return Err(syntax("expected `port <name> <in|out> <top|bottom|either>`"));
                }
                let dir = match toks[2] {
                    "in" => PortDir::In,
                    "out" => PortDir::Out,
                    d => return Err(syntax(&format!("bad port direction `{d}`"))),
                };
                let side = match toks[3] {
                    "top" => PortSide::Top,
                    "bottom" => PortSide::Bottom,
                    "either" => PortSide::Either,
                    s => return Err(syntax(&format!("bad port side `{s}`"))),
                };
                let name = toks[1].to_string();
                if port_ix.contains_key(&name) || cell_ix.contains_key(&name) {
                    return Err(NetlistError::DuplicateId { line, id: name });
                }
                port_ix.insert(name.clone(), PortId(ports.len()));
                ports.push(Port { name, dir, side });
            }
            "cell" => {
                if toks.len() < 3 || toks.len() > 4 {
                    return Err(syntax("expected `cell <instance> <master> [flavor=TI|BI]`"));
                }
                let master = toks[2];
                let pins = catalog
                    .cell_pins(master)
                    .ok_or_else(|| NetlistError::UndeclaredMaster { line, master: master.to_string() })?;
                let flavor = match toks.get(3) {
                    None => Flavor::Unassigned,
                    Some(&"flavor=TI") => Flavor::Ti,
                    Some(&"flavor=BI") => Flavor::Bi,
                    Some(t) => return Err(syntax(&format!("bad cell attribute `{t}`"))),
                };
                let name = toks[1].to_string();
                if cell_ix.contains_key(&name) || port_ix.contains_key(&name) {
                    return Err(NetlistError::DuplicateId { line, id: name });
                }
                cell_ix.insert(name.clone(), CellId(cells.len()));
                cells.push(CellInstance {
                    name,
                    master: master.to_string(),
                    flavor,
                    is_sequential: pins.is_sequential,
                    is_clock_buffer: pins.is_clock_buffer,
                });
            }
            "net" => {
                if toks.len() < 3 {
                    return Err(syntax("expected `net <name> [clock|power] <driver> <loads...>`"));
                }
                let (kind, rest) = match toks[2] {
                    "clock" => (NetKind::Clock, &toks[3..]),
                    "power" => (NetKind::Power, &toks[3..]),
                    _ => (NetKind::Signal, &toks[2..]),
                };
                if rest.is_empty() {
                    return Err(syntax("net has no driver"));
                }
                let name = toks[1].to_string();
                if !net_names.insert(name.clone()) {
                    return Err(NetlistError::DuplicateId { line, id: name });
                }
                pending.push((line, name, kind, rest.iter().map(|s| s.to_string()).collect()));
            }
            other => return Err(syntax(&format!("unknown statement `{other}`"))),
        }
    }

    let mut used: BTreeSet<PinRef> = BTreeSet::new();
    let mut nets = Vec::with_capacity(pending.len());
    for (line, name, kind, pins) in pending {
        let mut refs = Vec::with_capacity(pins.len());
        for (i, tok) in pins.iter().enumerate() {
            let is_driver = i == 0;
            let dangling = || NetlistError::DanglingPin { line, pin: tok.clone() };
            let pin = if let Some((inst, pin)) = tok.split_once('.') {
                let cell = *cell_ix.get(inst).ok_or_else(dangling)?;
                let cp = catalog.cell_pins(&cells[cell.0].master).expect("resolved at declaration");
                let ok = if is_driver { cp.has_output(pin) } else { cp.has_input(pin) };
                if !ok {
                    return Err(dangling());
                }
                PinRef::Cell { cell, pin: pin.to_string() }
            } else {
                let port = *port_ix.get(tok.as_str()).ok_or_else(dangling)?;
                if (ports[port.0].dir == PortDir::In) != is_driver {
                    return Err(dangling());
                }
                PinRef::Port(port)
            };
            if !used.insert(pin.clone()) {
                return Err(NetlistError::PinReused { line, pin: tok.clone() });
            }
            refs.push(pin);
        }
        let driver = refs.remove(0);
        if kind == NetKind::Power && !refs.is_empty() {
            return Err(NetlistError::Syntax {
                line,
                msg: format!("power net `{name}` lists signal loads"),
            });
        }
        nets.push(LogicalNet { name, driver, loads: refs, kind });
    }

    Netlist::from_parts(cells, nets, ports, catalog)
}

/// Writes `netlist` in the same grammar, with every section sorted by id.
pub fn serialize_netlist(netlist: &Netlist) -> String {
    let mut out = String::new();
    let mut ports: Vec<&Port> = netlist.ports().iter().collect();
    ports.sort_by(|a, b| a.name.cmp(&b.name));
    for p in ports {
        let dir = match p.dir {
            PortDir::In => "in",
            PortDir::Out => "out",
        };
        let side = match p.side {
            PortSide::Top => "top",
            PortSide::Bottom => "bottom",
            PortSide::Either => "either",
        };
        let _ = writeln!(out, "port {} {} {}", p.name, dir, side);
    }
    for id in netlist.sorted_cell_ids() {
        let c = netlist.cell(id);
        match c.flavor {
            Flavor::Unassigned => {
                let _ = writeln!(out, "cell {} {}", c.name, c.master);
            }
            f => {
                let _ = writeln!(out, "cell {} {} flavor={}", c.name, c.master, f);
            }
        }
    }
    for id in netlist.sorted_net_ids() {
        let n = netlist.net(id);
        let _ = write!(out, "net {}", n.name);
        match n.kind {
            NetKind::Clock => out.push_str(" clock"),
            NetKind::Power => out.push_str(" power"),
            NetKind::Signal => {}
        }
        let _ = write!(out, " {}", netlist.pin_name(&n.driver));
        let mut loads: Vec<String> = n.loads.iter().map(|l| netlist.pin_name(l)).collect();
        loads.sort();
        for l in loads {
            let _ = write!(out, " {l}");
        }
        out.push('\n');
    }
    out
}
