//! Ring-oscillator sweep over gate length, spacer, sheet count and supply for
//! every architecture, printing the energy-delay frontier and the min-EDP corner.
//!
//! `cargo run --release --example dtco_pareto`

use omni3d::celllib::Architecture;
use omni3d::dtco::{feasible_metrics, min_edp, pareto_frontier, sweep, DesignSpace, SurrogateCoefficients};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let coeff = SurrogateCoefficients::default();
    for arch in Architecture::ALL {
        let rows = sweep(&DesignSpace::default(), arch, &coeff);
        let pts = feasible_metrics(&rows);
        let front = pareto_frontier(&pts)?;
        let best = min_edp(&pts)?;
        println!("{arch}: {} of {} points feasible, {} on the frontier", pts.len(), rows.len(), front.len());
        for m in &front {
            let mark = if m.params == best.params { "  <- min EDP" } else { "" };
            println!("  {}  E {:.4} fJ  D {:.3} ps  EDP {:.4}{mark}", m.params, m.energy, m.delay, m.edp);
        }
    }
    Ok(())
}
