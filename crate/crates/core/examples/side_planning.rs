//! Groups cells that share input nets, assigns each group to the top- or
//! bottom-input flavor and reports the resulting balance.
//!
//! `cargo run --release --example side_planning [fixture]`

use omni3d::flow::{load_design, load_flow_library, FlowConfig};
use omni3d::netlist::{split_net_count, RoutingStyle};
use omni3d::sideplan::{assign_flavors, balance_report, cluster_cells, ClusterOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let design = std::env::args().nth(1).unwrap_or_else(|| "lfsr32".into());
    let cfg = FlowConfig { design, ..FlowConfig::default() };
    let lib = load_flow_library(&cfg)?;
    let mut netlist = load_design(&cfg, &lib)?;
    let opts = ClusterOptions::default();
    let clusters = cluster_cells(&netlist, &opts);
    println!("{} cells in {} clusters", netlist.cells().len(), clusters.len());
    for cl in clusters.iter().take(5) {
        let names: Vec<&str> = cl.members.iter().map(|&m| netlist.cell(m).name.as_str()).collect();
        println!("  cluster {} ({}): {}", cl.id, cl.size(), names.join(" "));
    }
    let a = assign_flavors(&clusters);
    a.apply(&mut netlist);
    println!("top-input {} / bottom-input {}", a.n_ti, a.n_bi);
    println!("split nets under double-side output routing: {}", split_net_count(&netlist, RoutingStyle::DoubleSideDo)?);
    println!("{}", balance_report(&netlist, &opts)?.to_json());
    Ok(())
}
