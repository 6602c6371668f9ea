//! Effective resistance and capacitance of the Omni 3D pin-access variants at
//! one device corner, relative to CFET and to single-side input/output.
//!
//! `cargo run --release --example pin_access_variants [lg sp sheets vdd_mv]`

use omni3d::celllib::Architecture;
use omni3d::dtco::{cfet_over_omni, variant_metrics, DeviceParams, SurrogateCoefficients};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a: Vec<u32> = std::env::args().skip(1).map(|s| s.parse()).collect::<Result<_, _>>()?;
    let (lg, sp, n, mv) = match a[..] {
        [lg, sp, n, mv] => (lg, sp, n, mv),
        _ => (14, 9, 1, 450),
    };
    let p = DeviceParams::new(Architecture::Omni3d, lg, sp, n, mv);
    let coeff = SurrogateCoefficients::default();
    println!("variant,r_vs_cfet,c_vs_sio");
    for r in variant_metrics(&p, &coeff)? {
        println!("{},{:.4},{:.4}", r.name, r.r_vs_cfet, r.c_vs_sio);
    }
    let [e, d, edp, r] = cfet_over_omni(&p, &coeff)?;
    println!("CFET over Omni: energy {e:.3}x, delay {d:.3}x, EDP {edp:.3}x; Omni/CFET resistance {r:.3}");
    Ok(())
}
