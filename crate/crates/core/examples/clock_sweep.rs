//! Implements a design once and evaluates timing and energy at each target
//! period, marking the valid row with the lowest energy-delay product.
//!
//! `cargo run --release --example clock_sweep [fixture] [config file]`

use omni3d::flow::{clock_sweep, flow_csv, load_config, FlowConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let design = args.next().unwrap_or_else(|| "adder16".into());
    let cfg = match args.next() {
        Some(path) => load_config(path.as_ref())?,
        None => FlowConfig::default(),
    };
    let (res, _) = clock_sweep(&FlowConfig { design, ..cfg })?;
    print!("{}", flow_csv(&res));
    match res.selected() {
        Some(r) => println!("min EDP at {:.0} ps: {:.2} ps, {:.3} fJ", r.period, r.achieved_delay, r.energy),
        None => println!("no valid period"),
    }
    Ok(())
}
