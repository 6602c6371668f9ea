use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::hash::{Hash, Hasher};

use super::{Dir, EdgeId, Floorplan, GcellGrid, LayerId, LayerStack, LayoutError, Placement};
use crate::netlist::{net_physical, NetId, NetKind, Netlist, PhysicalNet, PinRef, RoutingStyle, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteScope {
    All,
    /// Clock nets only, used to check the clock tree before the full route.
    ClockOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteOptions {
    /// Gcell size in sites and rows.
    pub gcell_sites: u32,
    pub gcell_rows: u32,
    /// Highest metal level available for signals.
    pub max_level: u32,
    pub rrr_iterations: usize,
    /// Extra cost per track of overflow a step would cause.
    pub overflow_penalty: f64,
    /// History cost added to an edge each time it ends a pass overflowed.
    pub history_increment: f64,
    /// Gcells added around the bounding box of a maze search.
    pub maze_margin: usize,
    pub scope: RouteScope,
}

impl Default for RouteOptions {
    fn default() -> Self {
        RouteOptions {
            gcell_sites: 10,
            gcell_rows: 10,
            max_level: 7,
            rrr_iterations: 8,
            overflow_penalty: 4.0,
            history_increment: 1.0,
            maze_margin: 3,
            scope: RouteScope::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StubKind {
    /// Block pin access through the middle layer.
    Port,
    /// A load reached from the other stack through the middle layer.
    Crossing,
}

/// A vertical connection through the I/O layer; carries no wirelength.
#[derive(Debug, Clone, PartialEq)]
pub struct Stub {
    pub pin: PinRef,
    pub kind: StubKind,
    pub layer: LayerId,
    pub xy: (f64, f64),
}

/// Node of a routed tree. Node 0 is the driver pin; parents precede children.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteNode {
    pub xy: (f64, f64),
    pub parent: Option<usize>,
    /// Layer of the wire to the parent.
    pub layer: Option<LayerId>,
    /// Length of the wire to the parent, nm.
    pub len_nm: f64,
    pub pin: Option<PinRef>,
}

/// Routed tree of one physical net.
#[derive(Debug, Clone, PartialEq)]
pub struct NetRoute {
    pub net: NetId,
    pub side: Side,
    pub driver: PinRef,
    pub loads: Vec<PinRef>,
    pub nodes: Vec<RouteNode>,
    pub stubs: Vec<Stub>,
    /// Gcell edges crossed and the layer used on each.
    pub edges: Vec<(EdgeId, LayerId)>,
}

impl NetRoute {
    pub fn length_nm(&self) -> f64 {
        self.nodes.iter().map(|n| n.len_nm).sum()
    }

    pub fn length_on(&self, layer: LayerId) -> f64 {
        self.nodes.iter().filter(|n| n.layer == Some(layer)).map(|n| n.len_nm).sum()
    }

    /// Half-perimeter of the pin bounding box, nm.
    pub fn hpwl_nm(&self) -> f64 {
        let pins: Vec<(f64, f64)> = self.nodes.iter().filter(|n| n.pin.is_some()).map(|n| n.xy).collect();
        bbox_hpwl(&pins)
    }

    pub fn node_of(&self, pin: &PinRef) -> Option<usize> {
        self.nodes.iter().position(|n| n.pin.as_ref() == Some(pin))
    }

    pub fn crossings(&self) -> impl Iterator<Item = &Stub> {
        self.stubs.iter().filter(|s| s.kind == StubKind::Crossing)
    }
}

fn bbox_hpwl(pts: &[(f64, f64)]) -> f64 {
    if pts.is_empty() {
        return 0.0;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    (x1 - x0) + (y1 - y0)
}

/// Global routing result on one or two stacks.
#[derive(Debug, Clone)]
pub struct RoutingState {
    pub stack: LayerStack,
    pub grid: GcellGrid,
    pub options: RouteOptions,
    pub style: RoutingStyle,
    /// Routed physical nets keyed by logical net and side.
    pub nets: BTreeMap<(NetId, Side), NetRoute>,
    history: [[Vec<f64>; 2]; 2],
    core: (f64, f64),
}

type Cell2 = (usize, usize);

fn si(side: Side) -> usize {
    match side {
        Side::Top => 0,
        Side::Bottom => 1,
    }
}

fn di(dir: Dir) -> usize {
    match dir {
        Dir::H => 0,
        Dir::V => 1,
    }
}

/// A physical net plus the loads it reaches through the middle layer.
struct RouteJob {
    phys: PhysicalNet,
    crossings: Vec<PinRef>,
}

/// Physical nets of one logical net as the router sees them.
///
/// Clock buffers on a clock net are reached from the net's trunk side, the
/// side most of its other loads sit on. A buffer whose input is on the other
/// side needs a crossing through the middle layer.
fn route_jobs(netlist: &Netlist, id: NetId, style: RoutingStyle) -> Result<Vec<RouteJob>, LayoutError> {
    let phys = net_physical(netlist, id, style)?;
    let net = netlist.net(id);
    if style == RoutingStyle::SingleSide || net.kind != NetKind::Clock {
        return Ok(phys.into_iter().map(|phys| RouteJob { phys, crossings: Vec::new() }).collect());
    }
    let mut count = [0usize; 2];
    let mut buffers = Vec::new();
    let mut rest: [Vec<PinRef>; 2] = Default::default();
    for p in phys {
        for l in p.loads {
            match l.cell() {
                Some(c) if netlist.cell(c).is_clock_buffer => buffers.push((l, p.side)),
                _ => {
                    count[si(p.side)] += 1;
                    rest[si(p.side)].push(l);
                }
            }
        }
    }
    let trunk = if count[1] > count[0] {
        Side::Bottom
    } else if count[0] > count[1] {
        Side::Top
    } else {
        match &net.driver {
            PinRef::Port(p) => netlist.port(*p).side.fixed().unwrap_or(Side::Top),
            _ => Side::Top,
        }
    };
    let mut crossings = Vec::new();
    for (l, side) in buffers {
        if side != trunk {
            crossings.push(l.clone());
        }
        rest[si(trunk)].push(l);
    }
    let mut jobs = Vec::new();
    for side in Side::BOTH {
        let mut loads = std::mem::take(&mut rest[si(side)]);
        if loads.is_empty() {
            continue;
        }
        loads.sort();
        jobs.push(RouteJob {
            phys: PhysicalNet { net: id, side, driver: net.driver.clone(), loads },
            crossings: if side == trunk { std::mem::take(&mut crossings) } else { Vec::new() },
        });
    }
    Ok(jobs)
}

/// Builds the gcell grid for a floorplan and routes every net.
pub fn global_route(
    netlist: &Netlist,
    placement: &Placement,
    fp: &Floorplan,
    stack: &LayerStack,
    style: RoutingStyle,
    options: &RouteOptions,
) -> Result<RoutingState, LayoutError> {
    let grid = GcellGrid::new(fp, stack, options.gcell_sites, options.gcell_rows, options.max_level);
    route_with_grid(netlist, placement, stack, grid, style, options)
}

/// Routes on a prepared grid, then rips up and reroutes nets on overflowed edges.
pub fn route_with_grid(
    netlist: &Netlist,
    placement: &Placement,
    stack: &LayerStack,
    grid: GcellGrid,
    style: RoutingStyle,
    options: &RouteOptions,
) -> Result<RoutingState, LayoutError> {
    let sides: &[Side] = match style {
        RoutingStyle::SingleSide => &[Side::Top],
        RoutingStyle::DoubleSideDo => &Side::BOTH,
    };
    for &s in sides {
        if grid.layers(s, Dir::H).is_empty() || grid.layers(s, Dir::V).is_empty() {
            return Err(LayoutError::NoSignalLayers(s));
        }
    }
    let history = [
        [vec![0.0; grid.edge_count(Dir::H)], vec![0.0; grid.edge_count(Dir::V)]],
        [vec![0.0; grid.edge_count(Dir::H)], vec![0.0; grid.edge_count(Dir::V)]],
    ];
    let mut st = RoutingState {
        stack: stack.clone(),
        core: (
            placement.n_sites() as f64 * placement.site_width_nm(),
            placement.n_rows() as f64 * placement.row_height_nm(),
        ),
        grid,
        options: options.clone(),
        style,
        nets: BTreeMap::new(),
        history,
    };
    for id in netlist.net_ids() {
        let kind = netlist.net(id).kind;
        if options.scope == RouteScope::ClockOnly && kind != NetKind::Clock {
            continue;
        }
        st.route_logical(netlist, placement, id, false)?;
    }
    st.rip_up_and_reroute(netlist, placement)?;
    Ok(st)
}

impl RoutingState {
    pub fn overflow_total(&self) -> u64 {
        self.grid.overflow_total()
    }

    /// Physical routes of one logical net, top first.
    pub fn routes_of(&self, net: NetId) -> impl Iterator<Item = &NetRoute> {
        Side::BOTH.into_iter().filter_map(move |s| self.nets.get(&(net, s)))
    }

    pub fn total_length_nm(&self) -> f64 {
        self.nets.values().map(NetRoute::length_nm).sum()
    }

    /// Routed length of a logical net over all its sides, nm.
    pub fn net_length_nm(&self, net: NetId) -> f64 {
        self.routes_of(net).map(NetRoute::length_nm).sum()
    }

    /// Crossing stubs on the fan-in clock net of each load pin.
    pub fn crossing_pins(&self) -> Vec<PinRef> {
        let mut v: Vec<PinRef> = self.nets.values().flat_map(|r| r.crossings().map(|s| s.pin.clone())).collect();
        v.sort();
        v
    }

    /// Wire segments (not stubs) on a layer.
    pub fn segments_on(&self, layer: LayerId) -> usize {
        self.nets.values().flat_map(|r| &r.nodes).filter(|n| n.layer == Some(layer) && n.len_nm > 0.0).count()
    }

    /// Stable hash of every route, for determinism checks.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for (k, r) in &self.nets {
            k.hash(&mut h);
            for n in &r.nodes {
                n.xy.0.to_bits().hash(&mut h);
                n.xy.1.to_bits().hash(&mut h);
                n.parent.hash(&mut h);
                n.layer.hash(&mut h);
                n.len_nm.to_bits().hash(&mut h);
                n.pin.hash(&mut h);
            }
            for s in &r.stubs {
                s.pin.hash(&mut h);
                s.kind.hash(&mut h);
            }
        }
        h.finish()
    }

    /// Removes every route of a logical net and returns them.
    pub fn take_net(&mut self, net: NetId) -> Vec<NetRoute> {
        let mut out = Vec::new();
        for s in Side::BOTH {
            if let Some(r) = self.nets.remove(&(net, s)) {
                for &(e, l) in &r.edges {
                    self.grid.usage[l.0][e.idx] -= 1;
                }
                out.push(r);
            }
        }
        out
    }

    /// Puts back routes removed by [`RoutingState::take_net`].
    pub fn restore(&mut self, routes: Vec<NetRoute>) {
        for r in routes {
            for &(e, l) in &r.edges {
                self.grid.usage[l.0][e.idx] += 1;
            }
            self.nets.insert((r.net, r.side), r);
        }
    }

    /// Rips up and reroutes one logical net against the current netlist flavors.
    pub fn reroute_net(&mut self, netlist: &Netlist, placement: &Placement, net: NetId) -> Result<(), LayoutError> {
        self.take_net(net);
        self.route_logical(netlist, placement, net, false)
    }

    fn route_logical(&mut self, netlist: &Netlist, pl: &Placement, id: NetId, maze: bool) -> Result<(), LayoutError> {
        for job in route_jobs(netlist, id, self.style)? {
            let r = self.route_job(netlist, pl, &job, maze)?;
            self.nets.insert((id, job.phys.side), r);
        }
        Ok(())
    }

    fn step_cost(&self, side: Side, e: EdgeId) -> f64 {
        let c = self.grid.cap2d(side, e);
        let u = self.grid.usage2d(side, e) + 1;
        let over = u.saturating_sub(c) as f64;
        1.0 + self.history[si(side)][di(e.dir)][e.idx] + self.options.overflow_penalty * over
    }

    fn overflows(&self, side: Side, e: EdgeId) -> bool {
        self.grid.usage2d(side, e) + 1 > self.grid.cap2d(side, e)
    }

    fn path_cost(&self, side: Side, path: &[Cell2]) -> (f64, bool) {
        let mut cost = 0.0;
        let mut over = false;
        for w in path.windows(2) {
            let e = self.grid.edge(w[0], w[1]);
            cost += self.step_cost(side, e);
            over |= self.overflows(side, e);
        }
        (cost, over)
    }

    /// Lowest-cost L or Z shape between two gcells.
    fn pattern(&self, side: Side, a: Cell2, b: Cell2) -> (Vec<Cell2>, bool) {
        let mut cands: Vec<Vec<Cell2>> = vec![hvh(a, b, b.0), vhv(a, b, b.1)];
        let (dx, dy) = (a.0.abs_diff(b.0), a.1.abs_diff(b.1));
        for k in 1..=3 {
            if dx > 1 && dx > k {
                let xm = if b.0 > a.0 { a.0 + dx * k / 4 } else { a.0 - dx * k / 4 };
                cands.push(hvh(a, b, xm));
            }
            if dy > 1 && dy > k {
                let ym = if b.1 > a.1 { a.1 + dy * k / 4 } else { a.1 - dy * k / 4 };
                cands.push(vhv(a, b, ym));
            }
        }
        let mut best: Option<(f64, bool, Vec<Cell2>)> = None;
        for p in cands {
            let (c, o) = self.path_cost(side, &p);
            if best.as_ref().is_none_or(|b| c < b.0) {
                best = Some((c, o, p));
            }
        }
        let (_, o, p) = best.expect("at least one candidate");
        (p, o)
    }

    /// Dijkstra from any tree gcell to `t` inside a window around them.
    fn maze(&self, side: Side, tree: &[Cell2], near: Cell2, t: Cell2) -> Vec<Cell2> {
        let g = &self.grid;
        let span = near.0.abs_diff(t.0) + near.1.abs_diff(t.1);
        let m = self.options.maze_margin + span / 2;
        let x0 = near.0.min(t.0).saturating_sub(m);
        let y0 = near.1.min(t.1).saturating_sub(m);
        let x1 = (near.0.max(t.0) + m).min(g.nx - 1);
        let y1 = (near.1.max(t.1) + m).min(g.ny - 1);
        let w = x1 - x0 + 1;
        let h = y1 - y0 + 1;
        let idx = |c: Cell2| (c.1 - y0) * w + (c.0 - x0);
        let mut dist = vec![f64::INFINITY; w * h];
        let mut prev: Vec<Option<Cell2>> = vec![None; w * h];
        let mut heap = BinaryHeap::new();
        for &s in tree {
            if (x0..=x1).contains(&s.0) && (y0..=y1).contains(&s.1) {
                dist[idx(s)] = 0.0;
                heap.push(Reverse((0u64, s.1, s.0)));
            }
        }
        while let Some(Reverse((d, y, x))) = heap.pop() {
            let c = (x, y);
            let d = f64::from_bits(d);
            if d > dist[idx(c)] {
                continue;
            }
            if c == t {
                break;
            }
            let mut nbrs = Vec::with_capacity(4);
            if x > x0 {
                nbrs.push((x - 1, y));
            }
            if x < x1 {
                nbrs.push((x + 1, y));
            }
            if y > y0 {
                nbrs.push((x, y - 1));
            }
            if y < y1 {
                nbrs.push((x, y + 1));
            }
            for n in nbrs {
                let nd = d + self.step_cost(side, g.edge(c, n));
                if nd < dist[idx(n)] {
                    dist[idx(n)] = nd;
                    prev[idx(n)] = Some(c);
                    heap.push(Reverse((nd.to_bits(), n.1, n.0)));
                }
            }
        }
        let mut path = vec![t];
        let mut c = t;
        while let Some(p) = prev[idx(c)] {
            path.push(p);
            c = p;
        }
        path.reverse();
        path
    }

    /// First layer in preference order with a free track, else the least overflowed.
    fn pick_layer(&self, side: Side, e: EdgeId, rank: usize) -> LayerId {
        let ls = self.grid.layers(side, e.dir);
        let r = rank.min(ls.len() - 1);
        let order = (r..ls.len()).chain((0..r).rev());
        let mut best: Option<(i64, LayerId)> = None;
        for k in order {
            let l = ls[k];
            let slack = self.grid.cap[l.0][e.idx] as i64 - self.grid.usage[l.0][e.idx] as i64;
            if slack > 0 {
                return l;
            }
            if best.is_none_or(|(b, _)| slack > b) {
                best = Some((slack, l));
            }
        }
        best.expect("side has layers in both directions").1
    }

    fn route_job(&mut self, netlist: &Netlist, pl: &Placement, job: &RouteJob, force_maze: bool) -> Result<NetRoute, LayoutError> {
        let side = job.phys.side;
        let pins: Vec<PinRef> = std::iter::once(job.phys.driver.clone()).chain(job.phys.loads.iter().cloned()).collect();
        let mut xy = Vec::with_capacity(pins.len());
        for p in &pins {
            let q = pl.pin_xy(p);
            let eps = 1e-6;
            if !(q.0 >= -eps && q.0 <= self.core.0 + eps && q.1 >= -eps && q.1 <= self.core.1 + eps) {
                return Err(LayoutError::UnroutablePin(netlist.pin_name(p)));
            }
            xy.push(q);
        }
        let gc: Vec<Cell2> = xy.iter().map(|&q| self.grid.gcell_of(q)).collect();
        let lowest = *self
            .stack
            .signal_layers(side, self.options.max_level)
            .first()
            .ok_or(LayoutError::NoSignalLayers(side))?;

        // longer nets prefer upper layers
        let span = {
            let (xs, ys): (Vec<usize>, Vec<usize>) = gc.iter().copied().unzip();
            xs.iter().max().unwrap() - xs.iter().min().unwrap() + ys.iter().max().unwrap() - ys.iter().min().unwrap()
        };
        let rank = match span {
            0..=4 => 0,
            5..=12 => 1,
            _ => 2,
        };

        let mut nodes = vec![RouteNode { xy: xy[0], parent: None, layer: None, len_nm: 0.0, pin: Some(pins[0].clone()) }];
        let mut at: HashMap<Cell2, usize> = HashMap::new();
        let mut tree: Vec<Cell2> = vec![gc[0]];
        let c0 = self.grid.center(gc[0]);
        nodes.push(RouteNode { xy: c0, parent: Some(0), layer: Some(lowest), len_nm: manhattan(xy[0], c0), pin: None });
        at.insert(gc[0], 1);
        let mut edges = Vec::new();

        // Prim order over load gcells
        let mut done = vec![false; pins.len()];
        done[0] = true;
        let mut dist: Vec<usize> = gc.iter().map(|&g| gdist(g, gc[0])).collect();
        let mut pin_at: Vec<Option<usize>> = vec![None; pins.len()];
        for _ in 1..pins.len() {
            let k = (1..pins.len()).filter(|&i| !done[i]).min_by_key(|&i| (dist[i], i)).unwrap();
            done[k] = true;
            let t = gc[k];
            if !at.contains_key(&t) {
                let near = *tree.iter().min_by_key(|&&g| (gdist(g, t), g.1, g.0)).unwrap();
                let (mut path, over) = if force_maze { (Vec::new(), true) } else { self.pattern(side, near, t) };
                if over {
                    path = self.maze(side, &tree, near, t);
                }
                // enter the path at its last tree gcell
                let start = path.iter().rposition(|g| at.contains_key(g)).unwrap_or(0);
                let path = &path[start..];
                for w in path.windows(2) {
                    let e = self.grid.edge(w[0], w[1]);
                    let l = self.pick_layer(side, e, rank);
                    self.grid.usage[l.0][e.idx] += 1;
                    edges.push((e, l));
                    let parent = at[&w[0]];
                    nodes.push(RouteNode {
                        xy: self.grid.center(w[1]),
                        parent: Some(parent),
                        layer: Some(l),
                        len_nm: self.grid.step_len(e.dir),
                        pin: None,
                    });
                    at.insert(w[1], nodes.len() - 1);
                    tree.push(w[1]);
                }
            }
            pin_at[k] = Some(at[&t]);
            for i in 1..pins.len() {
                if !done[i] {
                    dist[i] = dist[i].min(gdist(gc[i], t));
                }
            }
        }
        for k in 1..pins.len() {
            let g = pin_at[k].expect("every load attached");
            let c = nodes[g].xy;
            nodes.push(RouteNode { xy: xy[k], parent: Some(g), layer: Some(lowest), len_nm: manhattan(xy[k], c), pin: Some(pins[k].clone()) });
        }

        let mut stubs = Vec::new();
        if let Some(io) = self.stack.io_layer() {
            for (k, p) in pins.iter().enumerate() {
                if matches!(p, PinRef::Port(_)) {
                    stubs.push(Stub { pin: p.clone(), kind: StubKind::Port, layer: io, xy: xy[k] });
                }
            }
            for p in &job.crossings {
                let k = pins.iter().position(|q| q == p).expect("crossing is a load");
                stubs.push(Stub { pin: p.clone(), kind: StubKind::Crossing, layer: io, xy: xy[k] });
            }
        }
        Ok(NetRoute {
            net: job.phys.net,
            side,
            driver: job.phys.driver.clone(),
            loads: job.phys.loads.clone(),
            nodes,
            stubs,
            edges,
        })
    }

    fn overflowed_edges(&self) -> Vec<(Side, EdgeId)> {
        let mut v = Vec::new();
        for side in Side::BOTH {
            for dir in [Dir::H, Dir::V] {
                if self.grid.layers(side, dir).is_empty() {
                    continue;
                }
                for idx in 0..self.grid.edge_count(dir) {
                    let e = EdgeId { dir, idx };
                    if self.grid.usage2d(side, e) > self.grid.cap2d(side, e) {
                        v.push((side, e));
                    }
                }
            }
        }
        v
    }

    fn rip_up_and_reroute(&mut self, netlist: &Netlist, pl: &Placement) -> Result<(), LayoutError> {
        for _ in 0..self.options.rrr_iterations {
            let before = self.overflow_total();
            if before == 0 {
                break;
            }
            let hot = self.overflowed_edges();
            for &(side, e) in &hot {
                self.history[si(side)][di(e.dir)][e.idx] += self.options.history_increment;
            }
            let hot: std::collections::HashSet<(Side, EdgeId)> = hot.into_iter().collect();
            let victims: Vec<NetId> = {
                let mut v: Vec<NetId> = self
                    .nets
                    .values()
                    .filter(|r| r.edges.iter().any(|(e, _)| hot.contains(&(r.side, *e))))
                    .map(|r| r.net)
                    .collect();
                v.dedup();
                v
            };
            let snapshot = (self.grid.usage.clone(), self.nets.clone());
            for &n in &victims {
                self.take_net(n);
            }
            for &n in &victims {
                self.route_logical(netlist, pl, n, true)?;
            }
            if self.overflow_total() > before {
                self.grid.usage = snapshot.0;
                self.nets = snapshot.1;
            }
        }
        Ok(())
    }
}

fn manhattan(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs() + (a.1 - b.1).abs()
}

fn gdist(a: Cell2, b: Cell2) -> usize {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1)
}

fn walk(path: &mut Vec<Cell2>, to: Cell2) {
    let mut c = *path.last().unwrap();
    while c.0 != to.0 {
        c.0 = if to.0 > c.0 { c.0 + 1 } else { c.0 - 1 };
        path.push(c);
    }
    while c.1 != to.1 {
        c.1 = if to.1 > c.1 { c.1 + 1 } else { c.1 - 1 };
        path.push(c);
    }
}

/// Horizontal to `xm`, vertical to `b.1`, horizontal to `b.0`.
fn hvh(a: Cell2, b: Cell2, xm: usize) -> Vec<Cell2> {
    let mut p = vec![a];
    walk(&mut p, (xm, a.1));
    walk(&mut p, (xm, b.1));
    walk(&mut p, b);
    p
}

/// Vertical to `ym`, horizontal to `b.0`, vertical to `b.1`.
fn vhv(a: Cell2, b: Cell2, ym: usize) -> Vec<Cell2> {
    let mut p = vec![a];
    walk(&mut p, (a.0, ym));
    walk(&mut p, (b.0, ym));
    walk(&mut p, b);
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::celllib::Architecture;
    use crate::layout::{build_floorplan, cell_widths, seed_placement, Allow};
    use crate::testlib::{library, parse};

    fn setup(text: &str, arch: Architecture, util: f64) -> (Netlist, Placement, Floorplan) {
        let lib = library();
        let nl = parse(text);
        let fp = build_floorplan(&nl, &lib, arch, util).unwrap();
        let w = cell_widths(&nl, &lib, arch).unwrap();
        let pl = seed_placement(&nl, &fp, &w, &[]).unwrap();
        (nl, pl, fp)
    }

    #[test]
    fn pattern_shapes_are_connected_and_monotone() {
        for (a, b) in [((0, 0), (3, 2)), ((4, 1), (0, 5)), ((2, 2), (2, 2)), ((1, 3), (1, 0))] {
            for p in [hvh(a, b, b.0), vhv(a, b, b.1), hvh(a, b, a.0.min(b.0) + a.0.abs_diff(b.0) / 2)] {
                assert_eq!(p[0], a);
                assert_eq!(*p.last().unwrap(), b);
                assert_eq!(p.len(), gdist(a, b) + 1);
                assert!(p.windows(2).all(|w| gdist(w[0], w[1]) == 1));
            }
        }
    }

    #[test]
    fn same_gcell_pins_route_without_edges() {
        let (nl, pl, fp) = setup("cell a INVD1 flavor=TI\ncell b INVD1 flavor=TI\nnet n a.ZN b.I\n", Architecture::Omni3d, 0.6);
        let st = global_route(&nl, &pl, &fp, &LayerStack::omni(), RoutingStyle::DoubleSideDo, &RouteOptions::default()).unwrap();
        let r = &st.nets[&(NetId(0), Side::Top)];
        assert!(r.edges.is_empty());
        assert_eq!(st.overflow_total(), 0);
        assert!((r.length_nm() - manhattan(pl.cell_xy(crate::netlist::CellId(0)), pl.cell_xy(crate::netlist::CellId(1)))).abs() < 1e-6 || r.length_nm() >= r.hpwl_nm());
    }

    #[test]
    fn three_nets_through_a_one_track_column() {
        // three single-row nets crossing one column of horizontal edges with one track each
        let mut text = String::new();
        for i in 0..3 {
            text += &format!("port i{i} in top\nport o{i} out either\ncell u{i} INVD1 flavor=TI\nnet a{i} i{i} u{i}.I\nnet z{i} u{i}.ZN o{i}\n");
        }
        let (nl, pl, fp) = setup(&text, Architecture::Omni3d, 0.6);
        let stack = LayerStack::omni();
        let mut opts = RouteOptions { max_level: 3, gcell_sites: 2, gcell_rows: 10, ..Default::default() };
        opts.rrr_iterations = 4;
        let mut grid = GcellGrid::new(&fp, &stack, opts.gcell_sites, opts.gcell_rows, opts.max_level);
        assert_eq!(grid.ny, 1, "a single gcell row leaves no detour");
        for side in Side::BOTH {
            for idx in 0..grid.edge_count(Dir::H) {
                grid.set_capacity(side, EdgeId { dir: Dir::H, idx }, 1);
            }
        }
        let st = route_with_grid(&nl, &pl, &stack, grid.clone(), RoutingStyle::DoubleSideDo, &opts).unwrap();
        // brute force: each column edge carries every net whose x-span covers it
        let mut want = 0u64;
        for idx in 0..grid.edge_count(Dir::H) {
            let ((x, _), _) = grid.edge_ends(EdgeId { dir: Dir::H, idx });
            let mut k = 0u32;
            for r in st.nets.values() {
                let xs: Vec<usize> = r.nodes.iter().filter(|n| n.pin.is_some()).map(|n| grid.gcell_of(n.xy).0).collect();
                if (*xs.iter().min().unwrap()..*xs.iter().max().unwrap()).contains(&x) {
                    k += 1;
                }
            }
            want += k.saturating_sub(1) as u64;
        }
        assert_eq!(st.overflow_total(), want);
        assert!(want >= 2);
    }

    #[test]
    fn routes_stay_on_one_stack_and_conserve_length() {
        let lib = library();
        let mut nl = crate::testlib::two_chains(20);
        for (k, id) in nl.cell_ids().collect::<Vec<_>>().into_iter().enumerate() {
            nl.set_flavor(id, if k % 3 == 0 { crate::netlist::Flavor::Bi } else { crate::netlist::Flavor::Ti });
        }
        let fp = build_floorplan(&nl, &lib, Architecture::Omni3d, 0.7).unwrap();
        let w = cell_widths(&nl, &lib, Architecture::Omni3d).unwrap();
        let pl = seed_placement(&nl, &fp, &w, &[]).unwrap();
        let stack = LayerStack::omni();
        let st = global_route(&nl, &pl, &fp, &stack, RoutingStyle::DoubleSideDo, &RouteOptions::default()).unwrap();
        let mut by_layer = 0.0;
        for (i, l) in stack.layers.iter().enumerate() {
            let len: f64 = st.nets.values().map(|r| r.length_on(LayerId(i))).sum();
            if l.allow != Allow::Signal {
                assert_eq!(len, 0.0, "{}", l.name);
            }
            by_layer += len;
        }
        assert!((by_layer - st.total_length_nm()).abs() < 1e-6);
        for r in st.nets.values() {
            for n in &r.nodes {
                if let Some(l) = n.layer {
                    assert_eq!(stack.layer(l).side, Some(r.side));
                }
            }
            assert!(r.length_nm() + 1e-9 >= r.hpwl_nm());
            assert!(r.stubs.iter().all(|s| s.kind == StubKind::Port));
        }
        let again = global_route(&nl, &pl, &fp, &stack, RoutingStyle::DoubleSideDo, &RouteOptions::default()).unwrap();
        assert_eq!(st.fingerprint(), again.fingerprint());
    }

    #[test]
    fn take_and_restore_are_inverse() {
        let (nl, pl, fp) = setup(&crate::netlist::serialize_netlist(&crate::testlib::two_chains(8)), Architecture::Cfet, 0.7);
        let mut st = global_route(&nl, &pl, &fp, &LayerStack::cfet(), RoutingStyle::SingleSide, &RouteOptions::default()).unwrap();
        let usage = st.grid.usage.clone();
        let n = nl.net_ids().nth(3).unwrap();
        let taken = st.take_net(n);
        assert!(!taken.is_empty());
        st.restore(taken);
        assert_eq!(st.grid.usage, usage);
    }
}
