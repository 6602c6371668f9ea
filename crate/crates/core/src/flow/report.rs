use std::fmt::Write;

use super::{Comparison, FlowResult};
use crate::svg::{xy_chart, Series};

pub fn flow_csv(r: &FlowResult) -> String {
    let mut s = String::from(
        "design,arch,period_ps,achieved_delay_ps,avg_slack_ps,worst_slack_ps,skew_ps,energy_fj,edp_fj_ps,overflow,\
         wirelength_um,core_area_um2,cells,split_nets,clock_flips,datapath_flips,valid,selected\n",
    );
    for (i, row) in r.rows.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{:.1},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{},{:.3},{:.4},{},{},{},{},{},{}",
            r.design,
            r.arch,
            row.period,
            row.achieved_delay,
            row.avg_slack,
            row.worst_slack,
            row.skew,
            row.energy,
            row.edp,
            row.overflow,
            row.wirelength_um,
            row.core_area_um2,
            row.cells,
            row.split_nets,
            row.clock_flips,
            row.datapath_flips,
            row.valid,
            r.min_edp == Some(i)
        );
    }
    s
}

/// EDP and achieved delay against the target period; invalid rows are hollow.
pub fn flow_svg(results: &[FlowResult]) -> String {
    let labels: Vec<String> = results.iter().map(|r| format!("{} {}", r.design, r.arch)).collect();
    let series: Vec<Series> = results
        .iter()
        .zip(&labels)
        .map(|(r, l)| {
            let mut s = Series::new(l, r.rows.iter().map(|x| (x.period, x.edp)).collect(), true);
            s.hollow = r.rows.iter().map(|x| !x.valid).collect();
            s
        })
        .collect();
    xy_chart("EDP across target clock period", "target period (ps)", "EDP (fJ·ps)", &series)
}

pub fn comparison_csv(c: &Comparison) -> String {
    let mut s = String::from(
        "design,arch,valid,period_ps,edp_fj_ps,energy_fj,delay_ps,core_area_um2,cells,edp_benefit,energy_benefit,\
         delay_benefit,area_benefit,signal_layers_top,signal_layers_bottom,power_layers_top,power_layers_bottom\n",
    );
    for r in &c.rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.1},{:.4},{:.4},{:.4},{:.4},{},{:.4},{:.4},{:.4},{:.4},{},{},{},{}",
            c.design,
            r.arch,
            r.valid,
            r.row.period,
            r.row.edp,
            r.row.energy,
            r.row.achieved_delay,
            r.row.core_area_um2,
            r.row.cells,
            r.edp_benefit,
            r.energy_benefit,
            r.delay_benefit,
            r.area_benefit,
            r.signal_layers.0,
            r.signal_layers.1,
            r.power_layers.0,
            r.power_layers.1
        );
    }
    s
}
