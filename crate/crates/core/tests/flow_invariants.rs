use omni3d::celllib::Architecture;
use omni3d::fixtures::FIXTURES;
use omni3d::flow::{implement, FlowConfig};
use omni3d::netlist::{split_net_count, Flavor, RoutingStyle};

fn quick(design: &str, arch: Architecture) -> FlowConfig {
    FlowConfig { design: design.into(), arch, moves_per_cell: 2, ..FlowConfig::default() }
}

#[test]
fn clustered_fixtures_route_without_split_nets() {
    for f in FIXTURES {
        let imp = implement(&quick(f, Architecture::Omni3d)).unwrap();
        assert!(imp.netlist.cells().iter().all(|c| c.flavor != Flavor::Unassigned), "{f}");
        assert_eq!(split_net_count(&imp.netlist, RoutingStyle::DoubleSideDo).unwrap(), 0, "{f}");
        if let Some(io) = imp.routing.stack.io_layer() {
            assert_eq!(imp.routing.segments_on(io), 0, "{f}");
        }
    }
}

#[test]
fn cfet_stays_on_one_side() {
    let imp = implement(&quick("adder16", Architecture::Cfet)).unwrap();
    assert!(imp.netlist.cells().iter().all(|c| c.flavor == Flavor::Ti));
    assert_eq!(imp.clock_flips + imp.datapath_flips, 0);
    let sides: std::collections::BTreeSet<_> = imp.routing.nets.values().map(|r| r.side).collect();
    assert_eq!(sides.len(), 1);
}

#[test]
fn omni_is_smaller_than_cfet() {
    let omni = implement(&quick("lfsr32", Architecture::Omni3d)).unwrap();
    let cfet = implement(&quick("lfsr32", Architecture::Cfet)).unwrap();
    assert!(omni.floorplan.core_area_nm2() < cfet.floorplan.core_area_nm2());
}
