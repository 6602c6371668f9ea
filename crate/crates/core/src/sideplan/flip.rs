use std::collections::BTreeSet;

use super::SideplanError;
use crate::layout::{Placement, RoutingState};
use crate::netlist::{CellId, MasterCatalog, NetId, NetKind, Netlist, PinRef};

/// Flips every clock buffer whose input is reached through the middle layer.
///
/// The clock nets feeding flipped buffers are rerouted in place; a second
/// call on the result finds nothing to flip.
pub fn flip_clock_buffers(
    netlist: &mut Netlist,
    state: &mut RoutingState,
    placement: &Placement,
) -> Result<usize, SideplanError> {
    let mut flipped: BTreeSet<CellId> = BTreeSet::new();
    let mut nets: BTreeSet<NetId> = BTreeSet::new();
    for r in state.nets.values() {
        for s in r.crossings() {
            if let PinRef::Cell { cell, .. } = &s.pin {
                if netlist.cell(*cell).is_clock_buffer {
                    flipped.insert(*cell);
                    nets.insert(r.net);
                }
            }
        }
    }
    for &c in &flipped {
        let f = netlist.cell(c).flavor.flipped();
        netlist.set_flavor(c, f);
    }
    for &n in &nets {
        state.reroute_net(netlist, placement, n)?;
    }
    Ok(flipped.len())
}

fn logical_hpwl(netlist: &Netlist, placement: &Placement, net: NetId) -> f64 {
    let n = netlist.net(net);
    let pts: Vec<(f64, f64)> = std::iter::once(&n.driver).chain(&n.loads).map(|p| placement.pin_xy(p)).collect();
    let xs = pts.iter().map(|p| p.0);
    let ys = pts.iter().map(|p| p.1);
    let span = |v: &mut dyn Iterator<Item = f64>| {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for x in v {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        hi - lo
    };
    span(&mut xs.into_iter()) + span(&mut ys.into_iter())
}

/// Flips data-path buffers and inverters whose fan-in net detours.
///
/// A single-input, single-output cell qualifies when the routed length of its
/// fan-in net exceeds `beta` times that net's half-perimeter. The flip is
/// kept only if rerouting makes the net shorter without adding a split.
/// Up to three passes run, stopping early once a pass flips nothing.
pub fn flip_datapath_buffers(
    netlist: &mut Netlist,
    state: &mut RoutingState,
    placement: &Placement,
    catalog: &dyn MasterCatalog,
    beta: f64,
) -> Result<usize, SideplanError> {
    if !(beta > 1.0) {
        return Err(SideplanError::Beta(beta));
    }
    let candidates: Vec<CellId> = netlist
        .sorted_cell_ids()
        .into_iter()
        .filter(|&c| {
            let cell = netlist.cell(c);
            !cell.is_clock_buffer
                && !cell.is_sequential
                && catalog.cell_pins(&cell.master).is_some_and(|p| p.inputs.len() == 1 && p.outputs.len() == 1)
        })
        .collect();
    let mut total = 0;
    for _ in 0..3 {
        let mut flips = 0;
        for &c in &candidates {
            let Some(&net) = netlist.fanin_nets(c)?.first() else { continue };
            if netlist.net(net).kind != NetKind::Signal {
                continue;
            }
            let len = state.net_length_nm(net);
            let hp = logical_hpwl(netlist, placement, net);
            if len <= beta * hp {
                continue;
            }
            let splits = state.routes_of(net).count();
            let old = state.take_net(net);
            let f = netlist.cell(c).flavor;
            netlist.set_flavor(c, f.flipped());
            state.reroute_net(netlist, placement, net)?;
            if state.net_length_nm(net) < len && state.routes_of(net).count() <= splits {
                flips += 1;
            } else {
                state.take_net(net);
                state.restore(old);
                netlist.set_flavor(c, f);
            }
        }
        total += flips;
        if flips == 0 {
            break;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::celllib::Architecture;
    use crate::layout::{build_floorplan, cell_widths, cts, global_route, CtsOptions, LayerStack, RouteOptions, RouteScope};
    use crate::netlist::{split_net_count, Flavor, RoutingStyle};
    use crate::testlib::{library, parse};

    #[test]
    fn beta_must_exceed_one() {
        let lib = library();
        let mut nl = parse("cell a INVD1 flavor=TI\ncell b INVD1 flavor=TI\nnet n a.ZN b.I\n");
        let fp = build_floorplan(&nl, &lib, Architecture::Omni3d, 0.6).unwrap();
        let w = cell_widths(&nl, &lib, Architecture::Omni3d).unwrap();
        let pl = crate::layout::seed_placement(&nl, &fp, &w, &[]).unwrap();
        let mut st = global_route(&nl, &pl, &fp, &LayerStack::omni(), RoutingStyle::DoubleSideDo, &RouteOptions::default()).unwrap();
        let err = flip_datapath_buffers(&mut nl, &mut st, &pl, &lib, 1.0).unwrap_err();
        assert_eq!(err, SideplanError::Beta(1.0));
        // a straight net is never touched
        assert_eq!(flip_datapath_buffers(&mut nl, &mut st, &pl, &lib, 1.5).unwrap(), 0);
    }

    #[test]
    fn detoured_buffer_is_flipped_and_split_removed() {
        let lib = library();
        // driver d feeds l (TI) and buffer b (BI): the net splits across stacks
        let mut nl = parse(
            "port o out either\ncell d INVD1 flavor=TI\ncell l INVD1 flavor=TI\ncell b BUFD1 flavor=BI\ncell e INVD1 flavor=TI\n\
             net n d.ZN l.I b.I\nnet m b.Z e.I\nnet z e.ZN o\n",
        );
        let arch = Architecture::Omni3d;
        let fp = build_floorplan(&nl, &lib, arch, 0.6).unwrap();
        let fp = crate::layout::Floorplan { n_sites: 80, n_rows: 3, ..fp };
        let w = cell_widths(&nl, &lib, arch).unwrap();
        let pl = Placement::fixed(&nl, &fp, &w, &[(1, 0), (1, 70), (1, 40), (0, 40)]).unwrap();
        let mut st = global_route(&nl, &pl, &fp, &LayerStack::omni(), RoutingStyle::DoubleSideDo, &RouteOptions::default()).unwrap();
        assert_eq!(split_net_count(&nl, RoutingStyle::DoubleSideDo).unwrap(), 1);
        let n = flip_datapath_buffers(&mut nl, &mut st, &pl, &lib, 1.1).unwrap();
        assert_eq!(n, 1);
        assert_eq!(nl.cell(nl.cell_id("b").unwrap()).flavor, Flavor::Ti);
        assert_eq!(split_net_count(&nl, RoutingStyle::DoubleSideDo).unwrap(), 0);
        assert_eq!(st.routes_of(nl.net_id("n").unwrap()).count(), 1);
    }

    #[test]
    fn clock_buffer_flips_clear_every_crossing() {
        let lib = library();
        let arch = Architecture::Omni3d;
        let mut text = String::from("port clk in top\n");
        let mut clk = String::from("net clk clock clk");
        for i in 0..64 {
            let f = if i % 3 == 0 { "BI" } else { "TI" };
            text += &format!("cell f{i} DFFQD1 flavor={f}\nnet q{i} f{i}.Q f{}.D\n", (i + 1) % 64);
            clk += &format!(" f{i}.CP");
        }
        text += &clk;
        text.push('\n');
        let mut nl = parse(&text);
        let fp = build_floorplan(&nl, &lib, arch, 0.6).unwrap();
        let w = cell_widths(&nl, &lib, arch).unwrap();
        let mut pl = crate::layout::seed_placement(&nl, &fp, &w, &[]).unwrap();
        let tree = cts(&mut nl, &mut pl, &lib, arch, &CtsOptions { max_fanout: 4, seed: 11 }).unwrap();
        assert!(tree.buffer_count() > 8);
        let opts = RouteOptions { scope: RouteScope::ClockOnly, ..Default::default() };
        let mut st = global_route(&nl, &pl, &fp, &LayerStack::omni(), RoutingStyle::DoubleSideDo, &opts).unwrap();
        let offending = st.crossing_pins().len();
        assert!(offending > 0);
        assert_eq!(flip_clock_buffers(&mut nl, &mut st, &pl).unwrap(), offending);
        assert!(st.crossing_pins().is_empty());
        let again = global_route(&nl, &pl, &fp, &LayerStack::omni(), RoutingStyle::DoubleSideDo, &opts).unwrap();
        assert!(again.crossing_pins().is_empty());
        assert_eq!(flip_clock_buffers(&mut nl, &mut st, &pl).unwrap(), 0);
    }
}
