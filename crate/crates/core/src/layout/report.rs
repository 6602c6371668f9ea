use std::fmt::Write;

use super::{Allow, LayerId, Placement, RoutingState};
use crate::netlist::{Flavor, Netlist, Side};
use crate::svg::{boxes, heatmap};

/// Routed wirelength on one layer, or on a TMk+BMk pair when `combined`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LayerWirelength {
    pub layer: String,
    pub um: f64,
    pub combined: bool,
}

/// Per-layer wirelength in stack order, then the combined `Mk` rows of a two-sided stack.
pub fn wirelength_by_layer(state: &RoutingState) -> Vec<LayerWirelength> {
    let stack = &state.stack;
    let mut per = vec![0.0; stack.layers.len()];
    for r in state.nets.values() {
        for n in &r.nodes {
            if let Some(l) = n.layer {
                per[l.0] += n.len_nm / 1000.0;
            }
        }
    }
    let mut rows: Vec<LayerWirelength> = stack
        .layers
        .iter()
        .zip(&per)
        .filter(|(l, _)| l.allow != Allow::Power)
        .map(|(l, &um)| LayerWirelength { layer: l.name.clone(), um, combined: false })
        .collect();
    let two_sided = stack.has_signal_side(Side::Top) && stack.has_signal_side(Side::Bottom);
    if two_sided {
        let mut levels: Vec<u32> = stack.layers.iter().filter(|l| l.allow == Allow::Signal).map(|l| l.level).collect();
        levels.sort_unstable();
        levels.dedup();
        for k in levels {
            let um = (0..stack.layers.len())
                .filter(|&i| stack.layers[i].level == k && stack.layers[i].allow == Allow::Signal)
                .map(|i| per[i])
                .sum();
            rows.push(LayerWirelength { layer: format!("M{k}"), um, combined: true });
        }
    }
    rows
}

pub fn wirelength_csv(rows: &[LayerWirelength]) -> String {
    let mut s = String::from("layer,wirelength_um,combined\n");
    for r in rows {
        let _ = writeln!(s, "{},{:.4},{}", r.layer, r.um, r.combined);
    }
    s
}

/// Text dump of every routed net: a header line, one line per wire, one per stub.
///
/// ```text
/// net <name> side=<top|bottom> length_um=<f> hpwl_um=<f>
///   wire <layer> <x0> <y0> <x1> <y1> <length_nm>
///   stub <port|crossing> <layer> <pin>
/// ```
pub fn routing_dump(netlist: &Netlist, state: &RoutingState) -> String {
    let mut s = String::new();
    for r in state.nets.values() {
        let _ = writeln!(
            s,
            "net {} side={} length_um={:.4} hpwl_um={:.4}",
            netlist.net(r.net).name,
            r.side,
            r.length_nm() / 1000.0,
            r.hpwl_nm() / 1000.0
        );
        for n in &r.nodes {
            if let (Some(p), Some(l)) = (n.parent, n.layer) {
                let a = r.nodes[p].xy;
                let _ = writeln!(
                    s,
                    "  wire {} {:.1} {:.1} {:.1} {:.1} {:.1}",
                    state.stack.layer(l).name,
                    a.0,
                    a.1,
                    n.xy.0,
                    n.xy.1,
                    n.len_nm
                );
            }
        }
        for st in &r.stubs {
            let kind = match st.kind {
                super::StubKind::Port => "port",
                super::StubKind::Crossing => "crossing",
            };
            let _ = writeln!(s, "  stub {kind} {} {}", state.stack.layer(st.layer).name, netlist.pin_name(&st.pin));
        }
    }
    s
}

/// Heatmap of gcell usage over capacity on one side.
pub fn congestion_svg(state: &RoutingState, side: Side) -> String {
    heatmap(&format!("Routing demand / capacity, {side} stack"), &state.grid.utilization_map(side))
}

/// One row per cell: name, master, flavor, row, first site, width in sites and center in nm.
pub fn placement_csv(netlist: &Netlist, pl: &Placement) -> String {
    let mut s = String::from("cell,master,flavor,row,site,width,x_nm,y_nm\n");
    for c in netlist.sorted_cell_ids() {
        let cell = netlist.cell(c);
        let (x, y) = pl.cell_xy(c);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{:.1},{:.1}",
            cell.name, cell.master, cell.flavor, pl.row[c.0], pl.site[c.0], pl.width[c.0], x, y
        );
    }
    s
}

/// Cell footprints colored by flavor, clock buffers in a third color.
pub fn placement_svg(netlist: &Netlist, pl: &Placement) -> String {
    let (sw, rh) = (pl.site_width_nm(), pl.row_height_nm());
    let rects: Vec<(f64, f64, f64, f64, usize)> = netlist
        .cell_ids()
        .map(|c| {
            let cell = netlist.cell(c);
            let color = match (cell.is_clock_buffer, cell.flavor) {
                (true, _) => 2,
                (_, Flavor::Bi) => 1,
                _ => 0,
            };
            (pl.site[c.0] as f64 * sw, pl.row[c.0] as f64 * rh, pl.width[c.0] as f64 * sw, rh, color)
        })
        .collect();
    boxes("Placement (blue top-in, red bottom-in, green clock)", pl.n_sites() as f64 * sw, pl.n_rows() as f64 * rh, &rects)
}

/// Wirelength on one layer, µm.
pub fn layer_um(state: &RoutingState, l: LayerId) -> f64 {
    state.nets.values().map(|r| r.length_on(l)).sum::<f64>() / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::celllib::Architecture;
    use crate::layout::{build_floorplan, cell_widths, global_route, seed_placement, LayerStack, RouteOptions};
    use crate::netlist::RoutingStyle;
    use crate::testlib::{library, parse};

    #[test]
    fn empty_routing_is_all_zero() {
        let lib = library();
        let nl = parse("cell a INVD1 flavor=TI\n");
        let fp = build_floorplan(&nl, &lib, Architecture::Omni3d, 0.6).unwrap();
        let pl = seed_placement(&nl, &fp, &cell_widths(&nl, &lib, Architecture::Omni3d).unwrap(), &[]).unwrap();
        let st = global_route(&nl, &pl, &fp, &LayerStack::omni(), RoutingStyle::DoubleSideDo, &RouteOptions::default()).unwrap();
        let rows = wirelength_by_layer(&st);
        assert!(rows.iter().all(|r| r.um == 0.0));
        assert!(rows.iter().any(|r| r.layer == "M2" && r.combined));
        assert!(rows.iter().any(|r| r.layer == "M8" && !r.combined));
        assert_eq!(routing_dump(&nl, &st), "");
    }

    #[test]
    fn straight_net_lands_on_lowest_horizontal_layer() {
        let lib = library();
        // two cells far apart on one row: a pure horizontal run
        let nl = parse("cell a INVD1 flavor=TI\ncell b INVD1 flavor=TI\nnet n a.ZN b.I\n");
        let arch = Architecture::Omni3d;
        let fp = build_floorplan(&nl, &lib, arch, 0.6).unwrap();
        let w = cell_widths(&nl, &lib, arch).unwrap();
        let fp = crate::layout::Floorplan { n_sites: 60, n_rows: 1, ..fp };
        let pl = crate::layout::Placement::fixed(&nl, &fp, &w, &[(0, 0), (0, 55)]).unwrap();
        let opts = RouteOptions { gcell_sites: 10, gcell_rows: 1, ..Default::default() };
        let st = global_route(&nl, &pl, &fp, &LayerStack::omni(), RoutingStyle::DoubleSideDo, &opts).unwrap();
        let r = st.nets.values().next().unwrap();
        assert_eq!(r.edges.len(), 5);
        let rows = wirelength_by_layer(&st);
        let total: f64 = rows.iter().filter(|r| !r.combined).map(|r| r.um).sum();
        let tm2 = rows.iter().find(|r| r.layer == "TM2").unwrap().um;
        assert!((tm2 - total).abs() < 1e-9);
        assert!((rows.iter().find(|r| r.layer == "M2").unwrap().um - tm2).abs() < 1e-12);
        assert!(wirelength_csv(&rows).lines().count() == rows.len() + 1);
        assert!(congestion_svg(&st, Side::Top).contains("</svg>"));
    }
}
