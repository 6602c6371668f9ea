//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use omni3d::analysis::{elmore_delays, energy_from_loads, net_loads, AnalysisOptions, NetLoad};
use omni3d::celllib::{cell_area, Architecture, PinAccessPattern};
use omni3d::dtco::{
    cfet_over_omni, check_feasibility, default_library, enumerate_design_space, feasible_metrics, min_edp, sweep,
    variant_metrics, DesignSpace, DeviceParams, Feasibility, SurrogateCoefficients,
};
use omni3d::fixtures::{random_netlist, FIXTURES};
use omni3d::flow::{clock_sweep, compare_architectures, implement, AssignMode, FlowConfig};
use omni3d::layout::{wirelength_by_layer, Allow};
use omni3d::netlist::{split_net_count, NetKind, Netlist, RoutingStyle};
use omni3d::sideplan::{assign_flavors, cluster_cells, Cluster, ClusterOptions};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit_s, format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64()))
}

fn design_space() -> Outcome {
    let t = Instant::now();
    let c = SurrogateCoefficients::default();
    let mut dropped_total = 0;
    for arch in Architecture::ALL {
        let pts = enumerate_design_space(arch);
        check(pts.len() == 288, format!("{arch}: {} points", pts.len()))?;
        // independent scan: contact length is the gate pitch minus gate and two spacers
        let mut expect = BTreeSet::new();
        for lg in [14u32, 15, 16, 17] {
            for sp in [5u32, 7, 9] {
                if 42.0 - (lg as f64) - 2.0 * (sp as f64) < 10.0 {
                    for n in 1..=4 {
                        for v in [450, 500, 550, 600, 650, 700] {
                            expect.insert((lg, sp, n, v));
                        }
                    }
                }
            }
        }
        let got: BTreeSet<(u32, u32, u32, u32)> = pts
            .iter()
            .filter(|p| !check_feasibility(p, &c).is_ok())
            .map(|p| (p.lg_nm, p.sp_gs_nm, p.n_sheets, p.vdd_mv))
            .collect();
        check(got == expect, format!("{arch}: dropped {} points, formula drops {}", got.len(), expect.len()))?;
        check(
            pts.iter().filter(|p| !check_feasibility(p, &c).is_ok()).all(|p| check_feasibility(p, &c) == Feasibility::ContactTooShort),
            "a point failed for a reason other than contact length",
        )?;
        dropped_total = got.len();
    }
    within(t.elapsed(), 1.0)?;
    Ok(format!("288 points per architecture, {dropped_total} dropped by the contact-length scan"))
}

fn min_edp_corner() -> Outcome {
    let t = Instant::now();
    let c = SurrogateCoefficients::default();
    for arch in [Architecture::Cfet, Architecture::Omni3d] {
        let best = min_edp(&feasible_metrics(&sweep(&DesignSpace::default(), arch, &c))).map_err(|e| e.to_string())?;
        let p = best.params;
        check(
            (p.lg_nm, p.sp_gs_nm, p.n_sheets, p.vdd_mv) == (14, 9, 1, 450),
            format!("{arch}: min EDP at {p}"),
        )?;
    }
    let [e, d, edp, _] = cfet_over_omni(&DeviceParams::new(Architecture::Omni3d, 14, 9, 1, 450), &c).map_err(|e| e.to_string())?;
    check((edp - 1.30).abs() <= 0.05, format!("EDP ratio {edp:.4}"))?;
    check((e - 1.102).abs() <= 0.02, format!("energy ratio {e:.4}"))?;
    check((d - 1.156).abs() <= 0.02, format!("delay ratio {d:.4}"))?;
    within(t.elapsed(), 5.0)?;
    Ok(format!("(14, 9, 1, 0.45) for CFET and Omni; CFET/Omni EDP {edp:.3}x, energy {e:.3}x, delay {d:.3}x"))
}

fn variants() -> Outcome {
    let t = Instant::now();
    let rows = variant_metrics(&DeviceParams::new(Architecture::Omni3d, 14, 9, 1, 450), &SurrogateCoefficients::default())
        .map_err(|e| e.to_string())?;
    let get = |name: &str| rows.iter().find(|r| r.name == name).ok_or(format!("no {name} row"));
    let mut parts = Vec::new();
    for (name, target) in [("DO", 1.056), ("DI", 1.112), ("DIDO", 1.169), ("noIM", 0.956)] {
        let r = get(name)?;
        check((r.c_vs_sio - target).abs() <= 0.005, format!("Ceff {name} {:.4} vs {target}", r.c_vs_sio))?;
        parts.push(format!("{name} {:.3}", r.c_vs_sio));
    }
    let sio = get(PinAccessPattern::Sio.token())?;
    check((sio.r_vs_cfet - 0.95).abs() <= 0.02, format!("Reff ratio {:.4}", sio.r_vs_cfet))?;
    within(t.elapsed(), 1.0)?;
    Ok(format!("Ceff {}; Reff Omni/CFET {:.3}", parts.join(", "), sio.r_vs_cfet))
}

fn cell_areas() -> Outcome {
    let lib = default_library().map_err(|e| e.to_string())?;
    let m = |name: &str, arch| lib.any_master(name, arch).ok_or(format!("no {name} for {arch}"));
    for (arch, t, gp) in [(Architecture::Cfet, 4, 8), (Architecture::Omni3d, 3, 7), (Architecture::Omni3dNoIm, 3, 8)] {
        let mux = m("MUX2D1", arch)?;
        check((mux.height_tracks(), mux.width_gp) == (t, gp), format!("MUX on {arch}: {}T x {}GP", mux.height_tracks(), mux.width_gp))?;
    }
    for simple in ["INVD1", "ND2D1", "NR2D1"] {
        let r = cell_area(m(simple, Architecture::Omni3d)?) / cell_area(m(simple, Architecture::Cfet)?);
        check(r == 0.75, format!("{simple} ratio {r}"))?;
    }
    let dff = cell_area(m("DFFQD1", Architecture::Omni3d)?) / cell_area(m("DFFQD1", Architecture::Cfet)?);
    check((dff - 1.0 / 1.8).abs() <= 0.03, format!("DFF ratio {dff:.4}"))?;
    Ok(format!("MUX 4Tx8 / 3Tx7 / 3Tx8, simple cells 0.75, DFF {dff:.4} (1/{:.3})", 1.0 / dff))
}

/// Components of the sibling graph, built pairwise from the nets and closed transitively.
fn sibling_components(nl: &Netlist) -> BTreeSet<BTreeSet<String>> {
    let n = nl.cells().len();
    let mut adj = vec![vec![false; n]; n];
    for (i, row) in adj.iter_mut().enumerate() {
        row[i] = true;
    }
    for net in nl.nets() {
        if net.kind != NetKind::Signal {
            continue;
        }
        let loads: Vec<usize> = net.loads.iter().filter_map(|l| l.cell()).map(|c| c.0).collect();
        for &a in &loads {
            for &b in &loads {
                adj[a][b] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            if adj[i][k] {
                for j in 0..n {
                    if adj[k][j] {
                        adj[i][j] = true;
                    }
                }
            }
        }
    }
    (0..n).map(|i| (0..n).filter(|&j| adj[i][j]).map(|j| nl.cells()[j].name.clone()).collect()).collect()
}

fn clustering() -> Outcome {
    let t = Instant::now();
    let mut cases = 0;
    for seed in 0..250u64 {
        let n = 1 + (seed as usize % 12);
        let mut nl = random_netlist(n, seed);
        if nl.cells().len() > 12 {
            continue;
        }
        cases += 1;
        let clusters = cluster_cells(&nl, &ClusterOptions::default());
        let got: BTreeSet<BTreeSet<String>> = clusters
            .iter()
            .map(|c| c.members.iter().map(|&m| nl.cell(m).name.clone()).collect())
            .collect();
        check(got == sibling_components(&nl), format!("seed {seed}: partition differs from the sibling-graph components"))?;
        assign_flavors(&clusters).apply(&mut nl);
        let splits = split_net_count(&nl, RoutingStyle::DoubleSideDo).map_err(|e| e.to_string())?;
        check(splits == 0, format!("seed {seed}: {splits} split nets after assignment"))?;
    }
    check(cases >= 200, format!("only {cases} cases"))?;
    within(t.elapsed(), 10.0)?;
    Ok(format!("{cases} random netlists: partitions match, 0 split nets"))
}

/// The stated loop written out: walk clusters largest first, TI on even steps,
/// BI on odd steps, and hand everything after the half-way crossing to BI.
fn hand_assign(sizes: &[usize]) -> (usize, usize) {
    let mut idx: Vec<usize> = (0..sizes.len()).collect();
    idx.sort_by_key(|&i| (std::cmp::Reverse(sizes[i]), i));
    let total: usize = sizes.iter().sum();
    let (mut ti, mut bi) = (0, 0);
    let mut step = 0;
    let mut stopped = false;
    for i in idx {
        if stopped {
            bi += sizes[i];
            continue;
        }
        if step % 2 == 0 {
            ti += sizes[i];
            if ti * 2 > total {
                stopped = true;
            }
        } else {
            bi += sizes[i];
        }
        step += 1;
    }
    (ti, bi)
}

fn balance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..1000 {
        let k = rng.gen_range(1..=20);
        let sizes: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=15)).collect();
        let mut next = 0;
        let clusters: Vec<Cluster> = sizes
            .iter()
            .enumerate()
            .map(|(id, &s)| {
                let members = (next..next + s).map(omni3d::netlist::CellId).collect();
                next += s;
                Cluster { id, members }
            })
            .collect();
        let a = assign_flavors(&clusters);
        let max = *sizes.iter().max().unwrap();
        check(a.n_ti.abs_diff(a.n_bi) <= max, format!("case {case}: {sizes:?} gives {}:{}", a.n_ti, a.n_bi))?;
        check(hand_assign(&sizes) == (a.n_ti, a.n_bi), format!("case {case}: {sizes:?} differs from the hand loop"))?;
    }
    Ok("1000 multisets within the bound and equal to the hand-simulated loop".into())
}

fn routing_invariants() -> Outcome {
    let mut configs = Vec::new();
    for f in FIXTURES {
        for arch in [Architecture::Omni3d, Architecture::Cfet] {
            configs.push(FlowConfig { design: f.into(), arch, ..FlowConfig::default() });
        }
    }
    let nets: Vec<usize> = configs
        .par_iter()
        .map(|cfg| -> Result<usize, String> {
            let tag = format!("{} {}", cfg.design, cfg.arch);
            let imp = implement(cfg).map_err(|e| format!("{tag}: {e}"))?;
            let st = &imp.routing;
            if let Some(m8) = st.stack.io_layer() {
                check(st.segments_on(m8) == 0, format!("{tag}: wire on M8"))?;
            }
            for r in st.nets.values() {
                for n in &r.nodes {
                    if let Some(l) = n.layer {
                        let layer = st.stack.layer(l);
                        check(layer.side == Some(r.side) && layer.allow == Allow::Signal, format!("{tag}: net leaves its stack"))?;
                    }
                }
                check(r.length_nm() + 1e-6 >= r.hpwl_nm(), format!("{tag}: routed length below HPWL"))?;
            }
            let usage: u64 = st.grid.usage.iter().flatten().map(|&u| u as u64).sum();
            let edges: u64 = st.nets.values().map(|r| r.edges.len() as u64).sum();
            check(usage == edges, format!("{tag}: grid usage {usage} vs {edges} routed edges"))?;
            let per_layer: f64 = wirelength_by_layer(st).iter().filter(|w| !w.combined).map(|w| w.um).sum();
            let total = st.total_length_nm() / 1000.0;
            check((per_layer - total).abs() <= 1e-9 * total.max(1.0), format!("{tag}: {per_layer} um by layer vs {total} um by net"))?;
            let again = implement(cfg).map_err(|e| e.to_string())?;
            check(again.routing.fingerprint() == st.fingerprint(), format!("{tag}: routing hash differs between runs"))?;
            Ok(st.nets.len())
        })
        .collect::<Result<_, _>>()?;
    Ok(format!("{} fixtures x 2 architectures, {} routed nets", FIXTURES.len(), nets.iter().sum::<usize>()))
}

fn congestion_trend() -> Outcome {
    let modes = [
        ("1:8", AssignMode::Ratio(1.0 / 9.0)),
        ("1:3", AssignMode::Ratio(0.25)),
        ("1:2", AssignMode::Ratio(1.0 / 3.0)),
        ("balanced", AssignMode::Clustered),
    ];
    let mut medians = Vec::new();
    for (_, mode) in modes {
        let mut ov: Vec<u64> = (0..10u64)
            .into_par_iter()
            .map(|seed| {
                let cfg = FlowConfig {
                    design: "congested".into(),
                    assign: mode,
                    seed,
                    max_level: 3,
                    utilization: 0.85,
                    rrr_iterations: 0,
                    flip_datapath: false,
                    ..FlowConfig::default()
                };
                implement(&cfg).map(|imp| imp.routing.overflow_total()).map_err(|e| e.to_string())
            })
            .collect::<Result<_, _>>()?;
        ov.sort_unstable();
        medians.push((ov[4] + ov[5]) as f64 / 2.0);
    }
    let text: Vec<String> = modes.iter().zip(&medians).map(|((n, _), m)| format!("{n} {m}")).collect();
    check(medians.windows(2).all(|w| w[0] > w[1]), format!("medians not strictly decreasing: {}", text.join(", ")))?;
    Ok(format!("median overflow {}", text.join(" > ")))
}

/// First moments of the tree by nodal analysis.
fn moment_oracle(parent: &[Option<usize>], r: &[f64], c: &[f64]) -> Vec<f64> {
    let n = parent.len();
    let mut g = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        if let Some(p) = parent[i] {
            let y = 1.0 / r[i];
            g[(i, i)] += y;
            g[(p, p)] += y;
            g[(i, p)] -= y;
            g[(p, i)] -= y;
        }
    }
    let mut rhs = DVector::from_column_slice(c);
    for i in 0..n {
        if parent[i].is_none() {
            g.row_mut(i).fill(0.0);
            g[(i, i)] = 1.0;
            rhs[i] = 0.0;
        }
    }
    g.lu().solve(&rhs).expect("nonsingular").iter().copied().collect()
}

fn sta_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=20);
        let parent: Vec<Option<usize>> = (0..n).map(|i| if i == 0 { None } else { Some(rng.gen_range(0..i)) }).collect();
        let r: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..5.0)).collect();
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
        let t = elmore_delays(&parent, &r, &c);
        let m = moment_oracle(&parent, &r, &c);
        for i in 0..n {
            worst = worst.max((t[i] - m[i]).abs());
        }
    }
    check(worst <= 1e-9, format!("Elmore off by {worst:e}"))?;

    let cfg = FlowConfig { design: "lfsr32".into(), ..FlowConfig::default() };
    let imp = implement(&cfg).map_err(|e| e.to_string())?;
    let d = imp.design();
    let opts = AnalysisOptions::default();
    let loads = net_loads(&d, &opts).map_err(|e| e.to_string())?;
    let e = |d: &omni3d::analysis::Design, l: &[NetLoad], p: f64| energy_from_loads(d, l, p, &opts).map_err(|e| e.to_string());
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
    let base = e(&d, &loads, 200.0)?;
    let doubled: Vec<NetLoad> = loads.iter().map(|l| NetLoad { wire_c: 2.0 * l.wire_c, ..l.clone() }).collect();
    let lin = rel(e(&d, &doubled, 200.0)?.net_switching, 2.0 * base.net_switching);
    let leak = rel(e(&d, &loads, 400.0)?.leakage, 2.0 * base.leakage);
    let mut lib = imp.library.clone();
    let v = lib.vdd_of(cfg.arch);
    lib.vdd.insert(cfg.arch, 2.0 * v);
    let hot = omni3d::analysis::Design { library: &lib, ..d };
    let eh = e(&hot, &loads, 200.0)?;
    let quad = rel(eh.net_switching + eh.pin_switching, 4.0 * (base.net_switching + base.pin_switching));
    for (name, x) in [("wire-cap linearity", lin), ("leakage linearity", leak), ("supply quadratic", quad)] {
        check(x <= 1e-9, format!("{name} off by {x:e}"))?;
    }
    Ok(format!("100 trees, max Elmore error {worst:.1e}; energy checks within {:.1e}", lin.max(leak).max(quad)))
}

fn flow_end_to_end() -> Outcome {
    let t = Instant::now();
    let cfg = FlowConfig { design: "adder16".into(), ..FlowConfig::default() };
    let (res, _) = clock_sweep(&cfg).map_err(|e| e.to_string())?;
    // rows run loosest first; achieved delay must not rise as the target tightens
    check(
        res.rows.windows(2).all(|w| w[1].achieved_delay <= w[0].achieved_delay + 1e-9),
        "achieved delay rises as the target tightens",
    )?;
    let loose: Vec<f64> = res.rows.iter().take(3).map(|r| r.energy).collect();
    let lo = loose.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = loose.iter().copied().fold(0.0, f64::max);
    let var = (hi - lo) / lo;
    check(var < 0.05, format!("energy varies {:.2}% over the loosest periods", 100.0 * var))?;
    let sel = res.selected().ok_or("no valid row")?;
    check(sel.valid, "selected row is invalid")?;
    check(res.rows.iter().filter(|r| r.valid).all(|r| sel.edp <= r.edp), "selected row is not the minimum")?;
    let cmp = compare_architectures(&[
        FlowConfig { arch: Architecture::Cfet, ..cfg.clone() },
        FlowConfig { arch: Architecture::Omni3d, ..cfg.clone() },
    ])
    .map_err(|e| e.to_string())?;
    let omni = cmp.rows.iter().find(|r| r.arch == Architecture::Omni3d).ok_or("no Omni row")?;
    check(omni.edp_benefit > 1.0, format!("EDP ratio {:.3}", omni.edp_benefit))?;
    check(omni.area_benefit > 1.0, format!("area ratio {:.3}", omni.area_benefit))?;
    within(t.elapsed(), 300.0)?;
    Ok(format!(
        "{} periods, min EDP at {:.0} ps, loosest-3 energy spread {:.2}%, CFET-normalized EDP {:.2}x and area {:.2}x",
        res.rows.len(),
        sel.period,
        100.0 * var,
        omni.edp_benefit,
        omni.area_benefit
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("design space", design_space),
        ("min-EDP corner", min_edp_corner),
        ("variant ratios", variants),
        ("cell areas", cell_areas),
        ("clustering oracle", clustering),
        ("balance bound", balance),
        ("routing invariants", routing_invariants),
        ("congestion trend", congestion_trend),
        ("STA oracle", sta_oracle),
        ("flow end to end", flow_end_to_end),
    ];
    let mut failed = 0;
    let mut seen = BTreeMap::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match &r {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} ({secs:.2} s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} ({secs:.2} s)", i + 1);
            }
        }
        seen.insert(i + 1, r.is_ok());
    }
    println!("{} of {} criteria passed", seen.values().filter(|&&ok| ok).count(), seen.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
