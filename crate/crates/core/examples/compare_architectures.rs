//! Sweeps one fixture on CFET, Omni 3D and Omni 3D without the intermediate
//! metal, then prints each minimum-EDP point relative to CFET.
//!
//! `cargo run --release --example compare_architectures [fixture]`

use omni3d::celllib::Architecture;
use omni3d::flow::{compare_architectures, comparison_csv, FlowConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let design = std::env::args().nth(1).unwrap_or_else(|| "adder16".into());
    let configs: Vec<FlowConfig> = [Architecture::Cfet, Architecture::Omni3d, Architecture::Omni3dNoIm]
        .into_iter()
        .map(|arch| FlowConfig { design: design.clone(), arch, ..FlowConfig::default() })
        .collect();
    let cmp = compare_architectures(&configs)?;
    print!("{}", comparison_csv(&cmp));
    for r in &cmp.rows {
        let b = r.row.breakdown;
        let e = r.row.energy_parts;
        println!(
            "{}: delay {:.1} ps (cell {:.1}, wire {:.1}, setup {:.1}, skew {:.1}), energy {:.1} fJ (int {:.1}, pin {:.1}, net {:.1}, leak {:.2}), wl {:.0} um, flips {}/{}",
            r.arch,
            r.row.achieved_delay,
            b.cell,
            b.wire,
            b.setup,
            b.skew,
            r.row.energy,
            e.internal,
            e.pin_switching,
            e.net_switching,
            e.leakage,
            r.row.wirelength_um,
            r.row.clock_flips,
            r.row.datapath_flips
        );
    }
    Ok(())
}
