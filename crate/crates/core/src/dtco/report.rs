use std::fmt::Write;

use super::{DeviceMetrics, SweepRow, VariantRow};
use crate::svg::{xy_chart, Series};

/// One CSV row per design point, infeasible points included with empty metrics.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("arch,pattern,lg_nm,sp_gs_nm,n_sheets,vdd,contact_nm,feasibility,vt,r_eff_kohm,c_eff_ff,energy_fj,delay_ps,edp\n");
    for r in rows {
        let p = &r.params;
        let _ = write!(
            s,
            "{},{},{},{},{},{:.2},{},{}",
            p.arch,
            p.pattern,
            p.lg_nm,
            p.sp_gs_nm,
            p.n_sheets,
            p.vdd(),
            p.contact_length_nm(),
            r.feasibility
        );
        match &r.metrics {
            Some(m) => {
                let _ = writeln!(
                    s,
                    ",{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                    m.vt, m.r_eff, m.c_eff, m.energy, m.delay, m.edp
                );
            }
            None => s.push_str(",,,,,,\n"),
        }
    }
    s
}

pub fn variants_csv(rows: &[VariantRow]) -> String {
    let mut s = String::from("variant,r_eff_kohm,c_eff_ff,r_vs_cfet,c_vs_sio,energy_fj,delay_ps,edp\n");
    for r in rows {
        let m = &r.metrics;
        let _ = writeln!(
            s,
            "{},{:.6},{:.6},{:.4},{:.4},{:.6},{:.6},{:.6}",
            r.name, m.r_eff, m.c_eff, r.r_vs_cfet, r.c_vs_sio, m.energy, m.delay, m.edp
        );
    }
    s
}

/// Energy vs delay scatter per architecture with the frontier drawn and the minimum-EDP point marked.
pub fn pareto_svg(per_arch: &[(String, Vec<DeviceMetrics>, Vec<DeviceMetrics>, DeviceMetrics)]) -> String {
    let mut series = Vec::new();
    let labels: Vec<(String, String, String)> = per_arch
        .iter()
        .map(|(a, ..)| (format!("{a} points"), format!("{a} frontier"), format!("{a} min EDP")))
        .collect();
    for ((_, all, front, best), (l_all, l_front, l_best)) in per_arch.iter().zip(&labels) {
        let mut pts = Series::new(l_all, all.iter().map(|m| (m.delay, m.energy)).collect(), false);
        pts.hollow = vec![true; all.len()];
        series.push(pts);
        series.push(Series::new(l_front, front.iter().map(|m| (m.delay, m.energy)).collect(), true));
        series.push(Series::new(l_best, vec![(best.delay, best.energy)], false));
    }
    xy_chart("Energy vs delay", "delay per stage (ps)", "energy per stage (fJ)", &series)
}
