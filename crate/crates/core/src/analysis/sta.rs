use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::{net_loads, AnalysisError, AnalysisOptions, Design, NetLoad};
use crate::netlist::{CellId, NetId, NetKind, PinRef};

/// Elmore delay of every node of an RC tree.
///
/// `r[i]` is the resistance from node `i` to its parent and `c[i]` the
/// capacitance lumped at node `i`; roots have `parent[i] == None` and are
/// driven ideally.
pub fn elmore_delays(parent: &[Option<usize>], r: &[f64], c: &[f64]) -> Vec<f64> {
    let n = parent.len();
    let mut children = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for (i, p) in parent.iter().enumerate() {
        match p {
            Some(p) => children[*p].push(i),
            None => queue.push_back(i),
        }
    }
    while let Some(i) = queue.pop_front() {
        order.push(i);
        queue.extend(children[i].iter().copied());
    }
    let mut down = c.to_vec();
    for &i in order.iter().rev() {
        if let Some(p) = parent[i] {
            down[p] += down[i];
        }
    }
    let mut t = vec![0.0; n];
    for &i in &order {
        if let Some(p) = parent[i] {
            t[i] = t[p] + r[i] * down[i];
        }
    }
    t
}

/// Stage-by-stage composition of one timing path, ps.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PathBreakdown {
    pub cell: f64,
    pub wire: f64,
    pub setup: f64,
    /// Launch minus capture clock insertion.
    pub skew: f64,
}

impl PathBreakdown {
    pub fn total(&self) -> f64 {
        self.cell + self.wire + self.setup + self.skew
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Endpoint {
    pub name: String,
    pub arrival: f64,
    pub required: f64,
    pub slack: f64,
    pub capture_insertion: f64,
    /// Captured by a flip-flop rather than an output port.
    pub sequential: bool,
    pub path: PathBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingResult {
    pub period: f64,
    /// Worst slack first.
    pub endpoints: Vec<Endpoint>,
    pub top_k: usize,
    pub avg_slack: f64,
    pub worst_slack: f64,
    /// Spread of capture insertion delay over the top endpoints.
    pub clock_skew: f64,
}

impl TimingResult {
    pub fn top(&self) -> &[Endpoint] {
        &self.endpoints[..self.top_k.min(self.endpoints.len())]
    }

    /// Clock period minus the average slack of the top endpoints.
    pub fn achieved_delay(&self) -> f64 {
        self.period - self.avg_slack
    }
}

/// Average path composition over the top endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DelayBreakdown {
    pub cell: f64,
    pub wire: f64,
    pub setup: f64,
    pub skew: f64,
}

impl DelayBreakdown {
    pub fn total(&self) -> f64 {
        self.cell + self.wire + self.setup + self.skew
    }

    /// Shares of cell, wire, setup and skew; all zero for an empty breakdown.
    pub fn fractions(&self) -> [f64; 4] {
        let t = self.total();
        if t == 0.0 {
            return [0.0; 4];
        }
        [self.cell / t, self.wire / t, self.setup / t, self.skew / t]
    }
}

pub fn delay_breakdown(t: &TimingResult) -> DelayBreakdown {
    let top = t.top();
    if top.is_empty() {
        return DelayBreakdown::default();
    }
    let n = top.len() as f64;
    let mut b = DelayBreakdown::default();
    for e in top {
        b.cell += e.path.cell / n;
        b.wire += e.path.wire / n;
        b.setup += e.path.setup / n;
        b.skew += e.path.skew / n;
    }
    b
}

/// Delay terms contributed by a net's driver.
struct Stage {
    /// Intrinsic delay plus driver resistance times pin load.
    cell: f64,
    /// Driver resistance times wire capacitance.
    wire: f64,
}

fn stage(d: &Design, net: NetId, load: &NetLoad) -> Result<Stage, AnalysisError> {
    match d.netlist.net(net).driver.cell() {
        Some(c) => {
            let m = d.master(c)?;
            Ok(Stage { cell: m.intrinsic_delay + m.r_drive * load.pin_c, wire: m.r_drive * load.wire_c })
        }
        None => Ok(Stage { cell: 0.0, wire: 0.0 }),
    }
}

/// Arrival at each flip-flop and clock-buffer clock input, from the clock ports.
fn clock_insertion(d: &Design, loads: &[NetLoad]) -> Result<BTreeMap<CellId, f64>, AnalysisError> {
    let nl = d.netlist;
    let mut arr: BTreeMap<CellId, f64> = BTreeMap::new();
    let mut pending: Vec<NetId> = nl.net_ids().filter(|&n| nl.net(n).kind == NetKind::Clock).collect();
    loop {
        let before = pending.len();
        let mut rest = Vec::new();
        for n in pending {
            let net = nl.net(n);
            let start = match net.driver.cell() {
                None => 0.0,
                Some(c) if nl.cell(c).is_clock_buffer => match arr.get(&c) {
                    Some(&t) => t,
                    None => {
                        rest.push(n);
                        continue;
                    }
                },
                Some(_) => 0.0,
            };
            let s = stage(d, n, &loads[n.0])?;
            for (k, l) in net.loads.iter().enumerate() {
                if let Some(c) = l.cell() {
                    arr.insert(c, start + s.cell + s.wire + loads[n.0].elmore[k]);
                }
            }
        }
        pending = rest;
        if pending.is_empty() || pending.len() == before {
            break;
        }
    }
    Ok(arr)
}

/// Clock arrival at every flip-flop, by cell name.
pub fn insertion_delays(d: &Design, opts: &AnalysisOptions) -> Result<Vec<(String, f64)>, AnalysisError> {
    let loads = net_loads(d, opts)?;
    let ins = clock_insertion(d, &loads)?;
    let mut v: Vec<(String, f64)> = ins
        .into_iter()
        .filter(|(c, _)| d.netlist.cell(*c).is_sequential)
        .map(|(c, t)| (d.netlist.cell(c).name.clone(), t))
        .collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(v)
}

/// Static timing of a routed block at clock period `period` (ps).
pub fn sta(d: &Design, period: f64, opts: &AnalysisOptions) -> Result<TimingResult, AnalysisError> {
    let loads = net_loads(d, opts)?;
    sta_with_loads(d, &loads, period, opts)
}

pub(crate) fn sta_with_loads(
    d: &Design,
    loads: &[NetLoad],
    period: f64,
    opts: &AnalysisOptions,
) -> Result<TimingResult, AnalysisError> {
    let nl = d.netlist;
    let ins = clock_insertion(d, loads)?;
    let stages: Vec<Stage> = nl.net_ids().map(|n| stage(d, n, &loads[n.0])).collect::<Result<_, _>>()?;
    let is_comb = |c: CellId| {
        let cell = nl.cell(c);
        !cell.is_sequential && !cell.is_clock_buffer
    };
    let data = |n: NetId| nl.net(n).kind == NetKind::Signal;

    // Input arrival of every cell, with the worst (net, load index) feeding it.
    let n_cells = nl.cells().len();
    let mut in_arr = vec![0.0f64; n_cells];
    let mut worst: Vec<Option<(NetId, usize)>> = vec![None; n_cells];
    let mut indeg = vec![0usize; n_cells];
    for c in nl.cell_ids() {
        if nl.cell(c).is_sequential {
            in_arr[c.0] = ins.get(&c).copied().unwrap_or(0.0);
        }
        if is_comb(c) {
            for n in nl.fanin_nets(c)? {
                if data(n) && nl.driver_cell(n).is_some_and(is_comb) {
                    indeg[c.0] += nl.net(n).loads.iter().filter(|l| l.cell() == Some(c)).count();
                }
            }
        }
    }
    let mut ready: VecDeque<CellId> = nl.cell_ids().filter(|&c| indeg[c.0] == 0).collect();
    let mut done = 0;
    let out_time = |in_arr: &[f64], n: NetId| match nl.net(n).driver.cell() {
        Some(c) => in_arr[c.0] + stages[n.0].cell,
        None => 0.0,
    };
    // Seed arrivals from ports and non-combinational drivers, then sweep in topological order.
    let relax = |c: CellId, in_arr: &mut Vec<f64>, worst: &mut Vec<Option<(NetId, usize)>>, n: NetId, k: usize, t: f64| {
        if worst[c.0].is_none() || t > in_arr[c.0] {
            in_arr[c.0] = t;
            worst[c.0] = Some((n, k));
        }
    };
    for n in nl.net_ids().filter(|&n| data(n)) {
        if nl.driver_cell(n).is_some_and(is_comb) {
            continue;
        }
        let t0 = out_time(&in_arr, n) + stages[n.0].wire;
        for (k, l) in nl.net(n).loads.iter().enumerate() {
            if let Some(c) = l.cell().filter(|&c| is_comb(c)) {
                relax(c, &mut in_arr, &mut worst, n, k, t0 + loads[n.0].elmore[k]);
            }
        }
    }
    while let Some(c) = ready.pop_front() {
        done += 1;
        if !is_comb(c) {
            continue;
        }
        for &n in nl.fanout_nets(c) {
            if !data(n) {
                continue;
            }
            let t0 = out_time(&in_arr, n) + stages[n.0].wire;
            for (k, l) in nl.net(n).loads.iter().enumerate() {
                if let Some(v) = l.cell().filter(|&v| is_comb(v)) {
                    relax(v, &mut in_arr, &mut worst, n, k, t0 + loads[n.0].elmore[k]);
                    indeg[v.0] -= 1;
                    if indeg[v.0] == 0 {
                        ready.push_back(v);
                    }
                }
            }
        }
    }
    if done < n_cells {
        let c = nl.cell_ids().find(|c| indeg[c.0] > 0).expect("unfinished cell");
        return Err(AnalysisError::CombinationalLoop(nl.cell(c).name.clone()));
    }

    let trace = |mut n: NetId, mut k: usize| {
        let mut p = PathBreakdown::default();
        loop {
            p.wire += stages[n.0].wire + loads[n.0].elmore[k];
            p.cell += stages[n.0].cell;
            match nl.net(n).driver.cell() {
                Some(c) if is_comb(c) => match worst[c.0] {
                    Some((m, j)) => (n, k) = (m, j),
                    None => return (p, 0.0),
                },
                Some(c) => return (p, ins.get(&c).copied().unwrap_or(0.0)),
                None => return (p, 0.0),
            }
        }
    };

    let mut endpoints = Vec::new();
    for n in nl.net_ids().filter(|&n| data(n)) {
        let t0 = out_time(&in_arr, n) + stages[n.0].wire;
        for (k, l) in nl.net(n).loads.iter().enumerate() {
            let (capture, setup, sequential) = match l {
                PinRef::Cell { cell, pin } => {
                    if !nl.cell(*cell).is_sequential {
                        continue;
                    }
                    let m = d.master(*cell)?;
                    if m.clock_pin.as_deref() == Some(pin.as_str()) {
                        continue;
                    }
                    (ins.get(cell).copied().unwrap_or(0.0), m.setup.unwrap_or(0.0), true)
                }
                PinRef::Port(_) => (0.0, 0.0, false),
            };
            let arrival = t0 + loads[n.0].elmore[k];
            let required = period + capture - setup;
            let (mut path, launch) = trace(n, k);
            path.setup = setup;
            path.skew = launch - capture;
            endpoints.push(Endpoint {
                name: nl.pin_name(l),
                arrival,
                required,
                slack: required - arrival,
                capture_insertion: capture,
                sequential,
                path,
            });
        }
    }
    endpoints.sort_by(|a, b| a.slack.total_cmp(&b.slack).then_with(|| a.name.cmp(&b.name)));
    let k = opts.top_k.min(endpoints.len());
    let top = &endpoints[..k];
    let avg_slack = if k == 0 { 0.0 } else { top.iter().map(|e| e.slack).sum::<f64>() / k as f64 };
    let seq: Vec<f64> = top.iter().filter(|e| e.sequential).map(|e| e.capture_insertion).collect();
    let clock_skew = if seq.is_empty() {
        0.0
    } else {
        seq.iter().copied().fold(f64::NEG_INFINITY, f64::max) - seq.iter().copied().fold(f64::INFINITY, f64::min)
    };
    Ok(TimingResult {
        period,
        worst_slack: endpoints.first().map_or(0.0, |e| e.slack),
        endpoints,
        top_k: k,
        avg_slack,
        clock_skew,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::celllib::Architecture;
    use crate::layout::{build_floorplan, cell_widths, global_route, seed_placement, LayerStack, RouteOptions};
    use crate::netlist::RoutingStyle;
    use crate::testlib::{library, parse};
    use proptest::prelude::*;

    // First moment of the impulse response by nodal analysis: G·m = C·1,
    // with each root tied to the ideal source.
    fn moment_oracle(parent: &[Option<usize>], r: &[f64], c: &[f64]) -> Vec<f64> {
        use nalgebra::{DMatrix, DVector};
        let n = parent.len();
        let mut g = DMatrix::<f64>::zeros(n, n);
        let mut roots = Vec::new();
        for i in 0..n {
            match parent[i] {
                Some(p) => {
                    let y = 1.0 / r[i];
                    g[(i, i)] += y;
                    g[(p, p)] += y;
                    g[(i, p)] -= y;
                    g[(p, i)] -= y;
                }
                None => roots.push(i),
            }
        }
        for &i in &roots {
            for j in 0..n {
                g[(i, j)] = 0.0;
            }
            g[(i, i)] = 1.0;
        }
        // a root's row pins its moment to zero
        let rhs = DVector::from_iterator(n, (0..n).map(|i| if roots.contains(&i) { 0.0 } else { c[i] }));
        let m = g.lu().solve(&rhs).expect("nonsingular");
        m.iter().copied().collect()
    }

    fn random_tree() -> impl Strategy<Value = (Vec<Option<usize>>, Vec<f64>, Vec<f64>)> {
        (2usize..=20).prop_flat_map(|n| {
            (
                proptest::collection::vec(any::<prop::sample::Index>(), n - 1),
                proptest::collection::vec(0.01f64..5.0, n),
                proptest::collection::vec(0.0f64..3.0, n),
            )
                .prop_map(move |(ix, r, c)| {
                    let mut parent = vec![None];
                    for (i, x) in ix.iter().enumerate() {
                        parent.push(Some(x.index(i + 1)));
                    }
                    (parent, r, c)
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn elmore_equals_first_moment((parent, r, c) in random_tree()) {
            let t = elmore_delays(&parent, &r, &c);
            let m = moment_oracle(&parent, &r, &c);
            for i in 0..parent.len() {
                prop_assert!((t[i] - m[i]).abs() <= 1e-9 * m[i].abs().max(1.0), "{} vs {}", t[i], m[i]);
            }
        }
    }

    #[test]
    fn two_segment_line() {
        // root - 1 - 2 with 1 kΩ each and 1 fF at the far end
        let t = elmore_delays(&[None, Some(0), Some(1)], &[0.0, 1.0, 1.0], &[0.0, 0.0, 1.0]);
        assert_eq!(t, vec![0.0, 1.0, 2.0]);
    }

    fn routed(text: &str) -> (crate::netlist::Netlist, crate::layout::RoutingState) {
        let lib = library();
        let nl = parse(text);
        let arch = Architecture::Omni3d;
        let fp = build_floorplan(&nl, &lib, arch, 0.6).unwrap();
        let w = cell_widths(&nl, &lib, arch).unwrap();
        let pl = seed_placement(&nl, &fp, &w, &[]).unwrap();
        let st = global_route(&nl, &pl, &fp, &LayerStack::omni(), RoutingStyle::DoubleSideDo, &RouteOptions::default()).unwrap();
        (nl, st)
    }

    #[test]
    fn register_to_register_path_decomposes() {
        let lib = library();
        let (nl, st) = routed(
            "port clk in top\ncell a DFFQD1 flavor=TI\ncell i INVD1 flavor=TI\ncell b DFFQD1 flavor=TI\n\
             net q a.Q i.I\nnet x i.ZN b.D\nnet clk clock clk a.CP b.CP\n",
        );
        let d = Design { netlist: &nl, routing: &st, library: &lib, arch: Architecture::Omni3d };
        let t = sta(&d, 200.0, &AnalysisOptions::default()).unwrap();
        assert_eq!(t.endpoints.len(), 1);
        let e = &t.endpoints[0];
        assert_eq!(e.name, "b.D");
        assert!((t.period - e.slack - e.path.total()).abs() < 1e-9);
        assert!((t.achieved_delay() - e.path.total()).abs() < 1e-9);
        let dff = d.master(nl.cell_id("a").unwrap()).unwrap();
        assert_eq!(e.path.setup, dff.setup.unwrap());
        assert!(e.path.cell > dff.intrinsic_delay);
        assert!(e.path.wire > 0.0);
        // slack moves one for one with the period
        let t2 = sta(&d, 300.0, &AnalysisOptions::default()).unwrap();
        assert!((t2.avg_slack - t.avg_slack - 100.0).abs() < 1e-9);
        assert!((t2.achieved_delay() - t.achieved_delay()).abs() < 1e-9);
        let b = delay_breakdown(&t);
        assert!((b.fractions().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverter_cell_delay_is_intrinsic_plus_rc() {
        let lib = library();
        let (nl, st) = routed("port a in top\nport z out either\ncell i INVD1 flavor=TI\ncell j INVD1 flavor=TI\nnet n1 a i.I\nnet n2 i.ZN j.I\nnet n3 j.ZN z\n");
        let d = Design { netlist: &nl, routing: &st, library: &lib, arch: Architecture::Omni3d };
        let loads = net_loads(&d, &AnalysisOptions::default()).unwrap();
        let n2 = nl.net_id("n2").unwrap();
        let m = d.master(nl.cell_id("i").unwrap()).unwrap();
        let cin = d.master(nl.cell_id("j").unwrap()).unwrap().cap_in[0];
        assert_eq!(loads[n2.0].pin_c, cin);
        let s = stage(&d, n2, &loads[n2.0]).unwrap();
        assert!((s.cell - (m.intrinsic_delay + m.r_drive * cin)).abs() < 1e-12);
        assert!((s.wire - m.r_drive * loads[n2.0].wire_c).abs() < 1e-12);
    }

    #[test]
    fn loop_is_reported() {
        let lib = library();
        let (nl, st) = routed("cell a INVD1 flavor=TI\ncell b INVD1 flavor=TI\nnet x a.ZN b.I\nnet y b.ZN a.I\n");
        let d = Design { netlist: &nl, routing: &st, library: &lib, arch: Architecture::Omni3d };
        assert!(matches!(sta(&d, 100.0, &AnalysisOptions::default()), Err(AnalysisError::CombinationalLoop(_))));
    }
}
