//! Static timing, energy and area of one implemented block at a single period,
//! with the delay and energy split into their parts.
//!
//! `cargo run --release --example block_report [fixture] [period_ps]`

use omni3d::analysis::{area_report, delay_breakdown, energy, sta, AnalysisOptions};
use omni3d::celllib::Architecture;
use omni3d::flow::{implement, load_design, FlowConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let design = args.next().unwrap_or_else(|| "lfsr32".into());
    let period: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200.0);
    let cfg = FlowConfig { design, ..FlowConfig::default() };
    let imp = implement(&cfg)?;
    let d = imp.design();
    let opts = AnalysisOptions::default();
    let t = sta(&d, period, &opts)?;
    let b = delay_breakdown(&t);
    println!(
        "achieved {:.2} ps, worst slack {:.2}, skew {:.2}; cell {:.2} wire {:.2} setup {:.2} skew {:.2}",
        t.achieved_delay(),
        t.worst_slack,
        t.clock_skew,
        b.cell,
        b.wire,
        b.setup,
        b.skew
    );
    let e = energy(&d, period, &opts)?;
    println!(
        "energy {:.3} fJ: internal {:.3}, pin {:.3}, net {:.3}, leakage {:.4}",
        e.total(),
        e.internal,
        e.pin_switching,
        e.net_switching,
        e.leakage
    );
    let reference = load_design(&FlowConfig { arch: Architecture::Cfet, ..cfg.clone() }, &imp.library)?;
    let a = area_report((&imp.netlist, cfg.arch), (&reference, Architecture::Cfet), &imp.library)?;
    println!("cell area {:.2} um2, {:.3} of CFET", a.cell_area_um2, a.area_norm());
    Ok(())
}
