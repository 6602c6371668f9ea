//! Places a fixture, builds the clock tree and routes both sides, then prints
//! per-layer wirelength, overflow and the buffers flipped to the other side.
//!
//! `cargo run --release --example place_and_route [fixture] [arch]`

use omni3d::flow::{implement, parse_arch, routing_style, FlowConfig};
use omni3d::layout::{hpwl, wirelength_by_layer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let design = args.next().unwrap_or_else(|| "adder16".into());
    let arch = match args.next() {
        Some(a) => parse_arch(&a).ok_or(format!("unknown architecture {a}"))?,
        None => omni3d::celllib::Architecture::Omni3d,
    };
    let imp = implement(&FlowConfig { design, arch, ..FlowConfig::default() })?;
    println!(
        "{} cells, core {:.1} um2, placed HPWL {:.1} um",
        imp.netlist.cells().len(),
        imp.floorplan.core_area_nm2() * 1e-6,
        hpwl(&imp.netlist, &imp.placement, routing_style(arch))? / 1000.0
    );
    println!("clock tree: {} levels", imp.clock_tree.levels.len());
    for w in wirelength_by_layer(&imp.routing) {
        println!("  {:<10} {:>10.1} um", w.layer, w.um);
    }
    println!(
        "routed {:.1} um, overflow {}, flipped clock buffers {}, flipped datapath buffers {}",
        imp.routing.total_length_nm() / 1000.0,
        imp.routing.overflow_total(),
        imp.clock_flips,
        imp.datapath_flips
    );
    Ok(())
}
