use std::fmt::Write;

use super::{AreaReport, DelayBreakdown, EnergyResult, TimingResult};
use crate::layout::LayerWirelength;
use crate::svg::stacked_bars;

/// One row per endpoint, worst slack first.
pub fn timing_csv(t: &TimingResult) -> String {
    let mut s = String::from("endpoint,arrival_ps,required_ps,slack_ps,cell_ps,wire_ps,setup_ps,skew_ps,top\n");
    for (i, e) in t.endpoints.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{}",
            e.name,
            e.arrival,
            e.required,
            e.slack,
            e.path.cell,
            e.path.wire,
            e.path.setup,
            e.path.skew,
            i < t.top_k
        );
    }
    s
}

#[derive(serde::Serialize)]
struct TimingSummary<'a> {
    period_ps: f64,
    achieved_delay_ps: f64,
    avg_slack_ps: f64,
    worst_slack_ps: f64,
    clock_skew_ps: f64,
    endpoints: usize,
    top_k: usize,
    breakdown: DelayBreakdown,
    energy: Option<&'a EnergyResult>,
}

/// Summary figures of a timing run, with the energy alongside when given.
pub fn timing_json(t: &TimingResult, energy: Option<&EnergyResult>) -> String {
    let s = TimingSummary {
        period_ps: t.period,
        achieved_delay_ps: t.achieved_delay(),
        avg_slack_ps: t.avg_slack,
        worst_slack_ps: t.worst_slack,
        clock_skew_ps: t.clock_skew,
        endpoints: t.endpoints.len(),
        top_k: t.top_k,
        breakdown: super::delay_breakdown(t),
        energy,
    };
    serde_json::to_string_pretty(&s).expect("plain data serializes")
}

pub fn energy_csv(rows: &[(String, EnergyResult)]) -> String {
    let mut s = String::from("design,internal_fj,pin_switching_fj,net_switching_fj,leakage_fj,total_fj\n");
    for (name, e) in rows {
        let _ = writeln!(
            s,
            "{name},{:.4},{:.4},{:.4},{:.4},{:.4}",
            e.internal,
            e.pin_switching,
            e.net_switching,
            e.leakage,
            e.total()
        );
    }
    s
}

pub fn area_csv(r: &AreaReport) -> String {
    let mut s = String::from("master,count,reference_count,area_norm,reference_area_norm\n");
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.6},{:.6}",
            row.master, row.count, row.reference_count, row.area_norm, row.reference_area_norm
        );
    }
    let _ = writeln!(s, "total,,,{:.6},1.000000", r.area_norm());
    s
}

/// Normalized cell area per master: reference bar next to the design bar.
pub fn area_svg(r: &AreaReport, design: &str, reference: &str) -> String {
    let cats: Vec<&str> = r.rows.iter().map(|x| x.master.as_str()).collect();
    let groups = vec![
        (reference.to_string(), r.rows.iter().map(|x| x.reference_area_norm).collect()),
        (design.to_string(), r.rows.iter().map(|x| x.area_norm).collect()),
    ];
    stacked_bars("Normalized cell area", &groups, &cats)
}

/// Delay and energy composition per design as two stacked-bar charts.
pub fn breakdown_svg(rows: &[(String, DelayBreakdown, EnergyResult)]) -> (String, String) {
    let delay: Vec<(String, Vec<f64>)> =
        rows.iter().map(|(n, d, _)| (n.clone(), vec![d.cell, d.wire, d.setup, d.skew.max(0.0)])).collect();
    let energy: Vec<(String, Vec<f64>)> = rows
        .iter()
        .map(|(n, _, e)| (n.clone(), vec![e.internal, e.pin_switching, e.net_switching, e.leakage]))
        .collect();
    (
        stacked_bars("Delay breakdown (ps)", &delay, &["cell", "wire", "setup", "skew"]),
        stacked_bars("Energy breakdown (fJ)", &energy, &["internal", "pin switching", "net switching", "leakage"]),
    )
}

/// Wirelength per layer for each design, one stacked bar per design.
pub fn wirelength_svg(rows: &[(String, Vec<LayerWirelength>)]) -> String {
    let mut layers: Vec<String> = Vec::new();
    for (_, ws) in rows {
        for w in ws.iter().filter(|w| !w.combined) {
            if !layers.contains(&w.layer) {
                layers.push(w.layer.clone());
            }
        }
    }
    let groups: Vec<(String, Vec<f64>)> = rows
        .iter()
        .map(|(n, ws)| {
            let v = layers
                .iter()
                .map(|l| ws.iter().filter(|w| !w.combined && &w.layer == l).map(|w| w.um).sum())
                .collect();
            (n.clone(), v)
        })
        .collect();
    let cats: Vec<&str> = layers.iter().map(String::as_str).collect();
    stacked_bars("Wirelength per layer (µm)", &groups, &cats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{Endpoint, PathBreakdown};

    #[test]
    fn timing_csv_marks_top_rows() {
        let e = |n: &str, s: f64| Endpoint {
            name: n.into(),
            arrival: 10.0,
            required: 10.0 + s,
            slack: s,
            capture_insertion: 0.0,
            sequential: true,
            path: PathBreakdown { cell: 10.0, ..Default::default() },
        };
        let t = TimingResult {
            period: 50.0,
            endpoints: vec![e("a.D", 1.0), e("b.D", 2.0)],
            top_k: 1,
            avg_slack: 1.0,
            worst_slack: 1.0,
            clock_skew: 0.0,
        };
        let csv = timing_csv(&t);
        assert!(csv.lines().nth(1).unwrap().ends_with(",true"));
        assert!(csv.lines().nth(2).unwrap().ends_with(",false"));
        let json: serde_json::Value = serde_json::from_str(&timing_json(&t, None)).unwrap();
        assert_eq!(json["achieved_delay_ps"], 49.0);
    }
}
