use serde::Serialize;

use super::{net_loads, AnalysisError, AnalysisOptions, Design, NetLoad};
use crate::netlist::NetKind;

/// Energy per clock cycle, fJ.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EnergyResult {
    pub internal: f64,
    pub pin_switching: f64,
    pub net_switching: f64,
    pub leakage: f64,
}

impl EnergyResult {
    pub fn total(&self) -> f64 {
        self.internal + self.pin_switching + self.net_switching + self.leakage
    }

    /// Shares of internal, pin switching, net switching and leakage.
    pub fn fractions(&self) -> [f64; 4] {
        let t = self.total();
        if t == 0.0 {
            return [0.0; 4];
        }
        [self.internal / t, self.pin_switching / t, self.net_switching / t, self.leakage / t]
    }
}

pub fn energy(d: &Design, period: f64, opts: &AnalysisOptions) -> Result<EnergyResult, AnalysisError> {
    let loads = net_loads(d, opts)?;
    energy_from_loads(d, &loads, period, opts)
}

/// Energy from precomputed net loads; clock nets, flip-flops and clock
/// buffers toggle every cycle, everything else at `opts.activity`.
pub fn energy_from_loads(
    d: &Design,
    loads: &[NetLoad],
    period: f64,
    opts: &AnalysisOptions,
) -> Result<EnergyResult, AnalysisError> {
    let v2 = d.vdd() * d.vdd();
    let mut e = EnergyResult::default();
    for id in d.netlist.net_ids() {
        let a = match d.netlist.net(id).kind {
            NetKind::Signal => opts.activity,
            NetKind::Clock => 1.0,
            NetKind::Power => continue,
        };
        let l = &loads[id.0];
        e.pin_switching += a * (l.pin_c + l.driver_c) * v2;
        e.net_switching += a * l.wire_c * v2;
    }
    for c in d.netlist.cell_ids() {
        let cell = d.netlist.cell(c);
        let m = d.master(c)?;
        let a = if cell.is_sequential || cell.is_clock_buffer { 1.0 } else { opts.activity };
        e.internal += a * m.e_internal;
        // nA · V · ps = 1e-21 J
        e.leakage += m.leakage_na * d.vdd() * period * 1e-6;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::celllib::Architecture;
    use crate::fixtures::fixture;
    use crate::layout::{build_floorplan, cell_widths, global_route, seed_placement, LayerStack, RouteOptions};
    use crate::netlist::RoutingStyle;
    use crate::testlib::library;

    fn lfsr_design() -> (crate::netlist::Netlist, crate::layout::RoutingState) {
        let lib = library();
        let mut nl = fixture("lfsr32").unwrap();
        let clusters = crate::sideplan::cluster_cells(&nl, &Default::default());
        crate::sideplan::assign_flavors(&clusters).apply(&mut nl);
        let arch = Architecture::Omni3d;
        let fp = build_floorplan(&nl, &lib, arch, 0.6).unwrap();
        let w = cell_widths(&nl, &lib, arch).unwrap();
        let pl = seed_placement(&nl, &fp, &w, &[]).unwrap();
        let st = global_route(&nl, &pl, &fp, &LayerStack::omni(), RoutingStyle::DoubleSideDo, &RouteOptions::default()).unwrap();
        (nl, st)
    }

    #[test]
    fn scaling_laws() {
        let lib = library();
        let (nl, st) = lfsr_design();
        let d = Design { netlist: &nl, routing: &st, library: &lib, arch: Architecture::Omni3d };
        let opts = AnalysisOptions::default();
        let loads = net_loads(&d, &opts).unwrap();
        let base = energy_from_loads(&d, &loads, 100.0, &opts).unwrap();
        assert!(base.net_switching > 0.0 && base.leakage > 0.0);

        let doubled: Vec<NetLoad> = loads.iter().map(|l| NetLoad { wire_c: 2.0 * l.wire_c, ..l.clone() }).collect();
        let e2 = energy_from_loads(&d, &doubled, 100.0, &opts).unwrap();
        assert!((e2.net_switching - 2.0 * base.net_switching).abs() <= 1e-9 * base.net_switching);
        assert_eq!(e2.pin_switching, base.pin_switching);

        let long = energy_from_loads(&d, &loads, 200.0, &opts).unwrap();
        assert!((long.leakage - 2.0 * base.leakage).abs() <= 1e-9 * base.leakage);
        assert_eq!(long.internal, base.internal);

        // independent recount of the switching terms at a different supply
        let v = d.vdd();
        let mut wire = 0.0;
        for id in nl.net_ids() {
            let a = if nl.net(id).kind == NetKind::Clock { 1.0 } else { opts.activity };
            wire += a * loads[id.0].wire_c;
        }
        assert!((base.net_switching - wire * v * v).abs() <= 1e-9 * base.net_switching);
        let mut hot = lib.clone();
        hot.vdd.insert(Architecture::Omni3d, 2.0 * v);
        let dh = Design { library: &hot, ..d };
        let eh = energy_from_loads(&dh, &loads, 100.0, &opts).unwrap();
        assert!((eh.net_switching - 4.0 * base.net_switching).abs() <= 1e-9 * base.net_switching);
        assert!((eh.pin_switching - 4.0 * base.pin_switching).abs() <= 1e-9 * base.pin_switching);
        let f = base.fractions();
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
