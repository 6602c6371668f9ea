//! Routing overflow as the top/bottom cell split moves from 1:8 toward a
//! clustered, balanced assignment, median over ten placement seeds.
//!
//! `cargo run --release --example congestion_vs_balance [fixture] [max_level] [utilization] [rrr_iterations]`

use omni3d::flow::{implement, AssignMode, FlowConfig};
use rayon::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let design = args.next().unwrap_or_else(|| "congested".into());
    let max_level: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let utilization: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.85);
    let rrr_iterations: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let modes = [
        ("1:8", AssignMode::Ratio(1.0 / 9.0)),
        ("1:3", AssignMode::Ratio(0.25)),
        ("1:2", AssignMode::Ratio(1.0 / 3.0)),
        ("balanced", AssignMode::Clustered),
    ];
    println!("split,median_overflow,overflows");
    for (name, mode) in modes {
        let mut ov: Vec<u64> = (0..10u64)
            .into_par_iter()
            .map(|seed| {
                let cfg = FlowConfig {
                    design: design.clone(),
                    assign: mode,
                    seed,
                    max_level,
                    utilization,
                    rrr_iterations,
                    flip_datapath: false,
                    ..FlowConfig::default()
                };
                implement(&cfg).map(|imp| imp.routing.overflow_total())
            })
            .collect::<Result<_, _>>()?;
        let all = ov.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
        ov.sort_unstable();
        println!("{name},{},{all}", (ov[4] + ov[5]) as f64 / 2.0);
    }
    Ok(())
}
