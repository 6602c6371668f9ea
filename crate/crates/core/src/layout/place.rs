use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Floorplan, LayoutError};
use crate::netlist::{derive_physical_nets, CellId, Netlist, PinRef, PortDir, RoutingStyle};
use crate::sideplan::Cluster;

/// Simulated-annealing schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealConfig {
    /// Geometric cooling factor per temperature step.
    pub cooling: f64,
    /// Moves attempted per cell at each temperature.
    pub moves_per_cell: usize,
    /// Stop once the temperature falls below this share of the start.
    pub final_temp_ratio: f64,
    /// Relative weight of the three moves: swap, relocate, cluster shift.
    pub move_mix: [f64; 3],
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig { cooling: 0.9, moves_per_cell: 8, final_temp_ratio: 2e-3, move_mix: [0.5, 0.3, 0.2] }
    }
}

/// Legal cell positions plus fixed port locations.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub row: Vec<u32>,
    pub site: Vec<u32>,
    pub width: Vec<u32>,
    pub port_xy: Vec<(f64, f64)>,
    n_rows: u32,
    n_sites: u32,
    row_h: f64,
    site_w: f64,
    /// Occupant of each site, row-major.
    occ: Vec<Option<CellId>>,
}

impl Placement {
    fn empty(netlist: &Netlist, fp: &Floorplan, widths: &[u32]) -> Self {
        let n = netlist.cells().len();
        Placement {
            row: vec![0; n],
            site: vec![0; n],
            width: widths.to_vec(),
            port_xy: port_positions(netlist, fp),
            n_rows: fp.n_rows,
            n_sites: fp.n_sites,
            row_h: fp.row_height_nm,
            site_w: fp.site_width_nm,
            occ: vec![None; (fp.n_rows * fp.n_sites) as usize],
        }
    }

    /// A placement at given `(row, site)` positions, checked for legality.
    pub fn fixed(netlist: &Netlist, fp: &Floorplan, widths: &[u32], at: &[(u32, u32)]) -> Result<Placement, LayoutError> {
        let mut pl = Placement::empty(netlist, fp, widths);
        for (i, &(r, s)) in at.iter().enumerate() {
            if !pl.fits(r, s, widths[i], None) {
                return Err(LayoutError::UtilizationInfeasible(format!("cell `{}` overlaps or leaves the core", netlist.cell(CellId(i)).name)));
            }
            pl.put(CellId(i), r, s);
        }
        Ok(pl)
    }

    fn idx(&self, row: u32, site: u32) -> usize {
        (row * self.n_sites + site) as usize
    }

    /// Cell center, nm.
    pub fn cell_xy(&self, c: CellId) -> (f64, f64) {
        let i = c.0;
        (
            (self.site[i] as f64 + self.width[i] as f64 / 2.0) * self.site_w,
            (self.row[i] as f64 + 0.5) * self.row_h,
        )
    }

    /// Pin location, nm. Cell pins sit at the cell center.
    pub fn pin_xy(&self, pin: &PinRef) -> (f64, f64) {
        match pin {
            PinRef::Cell { cell, .. } => self.cell_xy(*cell),
            PinRef::Port(p) => self.port_xy[p.0],
        }
    }

    pub fn n_rows(&self) -> u32 {
        self.n_rows
    }

    pub fn n_sites(&self) -> u32 {
        self.n_sites
    }

    pub fn site_width_nm(&self) -> f64 {
        self.site_w
    }

    pub fn row_height_nm(&self) -> f64 {
        self.row_h
    }

    fn fits(&self, row: u32, site: u32, w: u32, ignore: Option<CellId>) -> bool {
        if row >= self.n_rows || site + w > self.n_sites {
            return false;
        }
        (site..site + w).all(|s| match self.occ[self.idx(row, s)] {
            None => true,
            Some(c) => Some(c) == ignore,
        })
    }

    fn put(&mut self, c: CellId, row: u32, site: u32) {
        self.row[c.0] = row;
        self.site[c.0] = site;
        for s in site..site + self.width[c.0] {
            let i = self.idx(row, s);
            self.occ[i] = Some(c);
        }
    }

    fn lift(&mut self, c: CellId) {
        let (row, site) = (self.row[c.0], self.site[c.0]);
        for s in site..site + self.width[c.0] {
            let i = self.idx(row, s);
            self.occ[i] = None;
        }
    }

    /// Places a new cell at the free spot closest to `target` (nm) and returns its id.
    ///
    /// The cell id must be the next one in the netlist.
    pub fn insert_near(&mut self, c: CellId, width: u32, target: (f64, f64)) -> Result<(), LayoutError> {
        assert_eq!(c.0, self.row.len(), "cells are appended in id order");
        self.row.push(0);
        self.site.push(0);
        self.width.push(width);
        let tr = ((target.1 / self.row_h - 0.5).round().max(0.0) as u32).min(self.n_rows - 1);
        let ts = ((target.0 / self.site_w - width as f64 / 2.0).round().max(0.0) as i64).min(self.n_sites as i64);
        let mut best: Option<(f64, u32, u32)> = None;
        for row in 0..self.n_rows {
            let dy = (row as f64 - tr as f64).abs() * self.row_h;
            if let Some((d, ..)) = best {
                if dy > d {
                    continue;
                }
            }
            for site in 0..=self.n_sites.saturating_sub(width) {
                if self.fits(row, site, width, None) {
                    let d = dy + (site as f64 - ts as f64).abs() * self.site_w;
                    if best.is_none_or(|(bd, ..)| d < bd) {
                        best = Some((d, row, site));
                    }
                }
            }
        }
        let (_, row, site) = best.ok_or_else(|| LayoutError::UtilizationInfeasible("no room for an inserted cell".into()))?;
        self.put(c, row, site);
        Ok(())
    }

    /// Checks that no two cells overlap and every cell is inside the core.
    pub fn is_legal(&self) -> bool {
        let mut seen = vec![false; self.occ.len()];
        for i in 0..self.row.len() {
            if self.row[i] >= self.n_rows || self.site[i] + self.width[i] > self.n_sites {
                return false;
            }
            for s in self.site[i]..self.site[i] + self.width[i] {
                let k = self.idx(self.row[i], s);
                if seen[k] || self.occ[k] != Some(CellId(i)) {
                    return false;
                }
                seen[k] = true;
            }
        }
        true
    }
}

/// Inputs spread along the left edge, outputs along the right, in name order.
fn port_positions(netlist: &Netlist, fp: &Floorplan) -> Vec<(f64, f64)> {
    let mut xy = vec![(0.0, 0.0); netlist.ports().len()];
    for (dir, x) in [(PortDir::In, 0.0), (PortDir::Out, fp.width_nm())] {
        let mut ids: Vec<usize> = (0..netlist.ports().len()).filter(|&i| netlist.ports()[i].dir == dir).collect();
        ids.sort_by(|a, b| netlist.ports()[*a].name.cmp(&netlist.ports()[*b].name));
        let n = ids.len() as f64;
        for (k, i) in ids.into_iter().enumerate() {
            xy[i] = (x, fp.height_nm() * (k as f64 + 0.5) / n);
        }
    }
    xy
}

/// Packs cells row by row in the given order, serpentine, with whitespace spread evenly.
fn pack(netlist: &Netlist, fp: &Floorplan, widths: &[u32], order: &[CellId]) -> Result<Placement, LayoutError> {
    let mut pl = Placement::empty(netlist, fp, widths);
    let total: u64 = order.iter().map(|c| widths[c.0] as u64).sum();
    let target = total.div_ceil(fp.n_rows as u64).max(1);
    let mut rows: Vec<Vec<CellId>> = vec![Vec::new(); fp.n_rows as usize];
    let mut r = 0usize;
    let mut used = 0u64;
    for &c in order {
        let w = widths[c.0] as u64;
        if w > fp.n_sites as u64 {
            return Err(LayoutError::UtilizationInfeasible(format!("cell `{}` is wider than the core", netlist.cell(c).name)));
        }
        while used >= target && r + 1 < rows.len() || used + w > fp.n_sites as u64 {
            r += 1;
            used = 0;
            if r >= rows.len() {
                return Err(LayoutError::UtilizationInfeasible(format!("{total} sites of cells in {} rows of {}", fp.n_rows, fp.n_sites)));
            }
        }
        rows[r].push(c);
        used += w;
    }
    for (ri, cells) in rows.iter_mut().enumerate() {
        if ri % 2 == 1 {
            cells.reverse();
        }
        let used: u32 = cells.iter().map(|c| widths[c.0]).sum();
        let gaps = fp.n_sites - used;
        let m = cells.len() as u64;
        let mut x = 0u32;
        for (k, &c) in cells.iter().enumerate() {
            let gap_before = (gaps as u64 * (k as u64 + 1) / (m + 1)) as u32;
            let prev = (gaps as u64 * k as u64 / (m + 1)) as u32;
            x += gap_before - prev;
            pl.put(c, ri as u32, x);
            x += widths[c.0];
        }
    }
    Ok(pl)
}

/// Cluster order: biggest cluster first, members walked depth-first along shared nets.
fn cluster_order(netlist: &Netlist, clusters: &[Cluster]) -> Vec<CellId> {
    let mut cl: Vec<&Cluster> = clusters.iter().collect();
    cl.sort_by(|a, b| b.members.len().cmp(&a.members.len()).then(a.id.cmp(&b.id)));
    let mut seen = vec![false; netlist.cells().len()];
    let mut out = Vec::with_capacity(netlist.cells().len());
    for c in cl {
        let inside: std::collections::BTreeSet<CellId> = c.members.iter().copied().collect();
        for &start in &c.members {
            if seen[start.0] {
                continue;
            }
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                if seen[u.0] {
                    continue;
                }
                seen[u.0] = true;
                out.push(u);
                let mut next: Vec<CellId> = Vec::new();
                for &n in netlist.fanin_nets(u).unwrap_or_default().iter().chain(netlist.fanout_nets(u)) {
                    let net = netlist.net(n);
                    for p in std::iter::once(&net.driver).chain(&net.loads) {
                        if let Some(v) = p.cell() {
                            if inside.contains(&v) && !seen[v.0] {
                                next.push(v);
                            }
                        }
                    }
                }
                next.reverse();
                stack.extend(next);
            }
        }
    }
    // cells outside every cluster go last, in name order
    for id in netlist.sorted_cell_ids() {
        if !seen[id.0] {
            out.push(id);
        }
    }
    out
}

/// Initial placement: each cluster packed into one contiguous window.
pub fn seed_placement(
    netlist: &Netlist,
    fp: &Floorplan,
    widths: &[u32],
    clusters: &[Cluster],
) -> Result<Placement, LayoutError> {
    pack(netlist, fp, widths, &cluster_order(netlist, clusters))
}

/// A legal placement with cells in random order, for comparison.
pub fn random_placement(netlist: &Netlist, fp: &Floorplan, widths: &[u32], seed: u64) -> Result<Placement, LayoutError> {
    let mut order: Vec<CellId> = netlist.cell_ids().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    pack(netlist, fp, widths, &order)
}

/// Pin lists of the physical nets used as the placement objective.
fn placement_nets(netlist: &Netlist, style: RoutingStyle) -> Result<Vec<Vec<PinRef>>, LayoutError> {
    Ok(derive_physical_nets(netlist, style)?
        .into_iter()
        .map(|p| std::iter::once(p.driver).chain(p.loads).collect())
        .collect())
}

fn net_hpwl(pl: &Placement, pins: &[PinRef]) -> f64 {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pins {
        let (x, y) = pl.pin_xy(p);
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if pins.is_empty() {
        0.0
    } else {
        (x1 - x0) + (y1 - y0)
    }
}

/// Σ HPWL over the physical nets of the netlist, nm.
pub fn hpwl(netlist: &Netlist, pl: &Placement, style: RoutingStyle) -> Result<f64, LayoutError> {
    Ok(placement_nets(netlist, style)?.iter().map(|p| net_hpwl(pl, p)).sum())
}

struct Annealer<'a> {
    pl: Placement,
    nets: Vec<Vec<PinRef>>,
    cost: Vec<f64>,
    cell_nets: Vec<Vec<usize>>,
    cluster_of: Vec<Option<usize>>,
    clusters: &'a [Cluster],
    stamp: Vec<u64>,
    epoch: u64,
}

impl Annealer<'_> {
    fn touched(&mut self, cells: &[CellId]) -> Vec<usize> {
        self.epoch += 1;
        let mut v = Vec::new();
        for c in cells {
            for &n in &self.cell_nets[c.0] {
                if self.stamp[n] != self.epoch {
                    self.stamp[n] = self.epoch;
                    v.push(n);
                }
            }
        }
        v
    }

    /// Applies `mv`, returning the cost change and the previous positions for undo.
    fn delta(&mut self, cells: &[CellId], new_pos: &[(u32, u32)]) -> (f64, Vec<(u32, u32)>, Vec<usize>) {
        let nets = self.touched(cells);
        let before: f64 = nets.iter().map(|&n| self.cost[n]).sum();
        let old: Vec<(u32, u32)> = cells.iter().map(|c| (self.pl.row[c.0], self.pl.site[c.0])).collect();
        for &c in cells {
            self.pl.lift(c);
        }
        for (c, &(r, s)) in cells.iter().zip(new_pos) {
            self.pl.put(*c, r, s);
        }
        let mut after = 0.0;
        for &n in &nets {
            after += net_hpwl(&self.pl, &self.nets[n]);
        }
        (after - before, old, nets)
    }

    fn commit(&mut self, nets: &[usize]) {
        for &n in nets {
            self.cost[n] = net_hpwl(&self.pl, &self.nets[n]);
        }
    }

    fn undo(&mut self, cells: &[CellId], old: &[(u32, u32)]) {
        for &c in cells {
            self.pl.lift(c);
        }
        for (c, &(r, s)) in cells.iter().zip(old) {
            self.pl.put(*c, r, s);
        }
    }

    /// Proposes a move of `a` toward (row, site); returns the cells and their targets.
    fn propose(&self, a: CellId, row: u32, site: u32) -> Option<(Vec<CellId>, Vec<(u32, u32)>)> {
        let w = self.pl.width[a.0];
        if row >= self.pl.n_rows || site >= self.pl.n_sites {
            return None;
        }
        match self.pl.occ[self.pl.idx(row, site)] {
            Some(b) if b != a => {
                if self.pl.width[b.0] != w {
                    return None;
                }
                let pa = (self.pl.row[a.0], self.pl.site[a.0]);
                let pb = (self.pl.row[b.0], self.pl.site[b.0]);
                Some((vec![a, b], vec![pb, pa]))
            }
            Some(_) => None,
            None => {
                let start = site.min(self.pl.n_sites.saturating_sub(w));
                self.pl.fits(row, start, w, Some(a)).then(|| (vec![a], vec![(row, start)]))
            }
        }
    }
}

/// Cluster-seeded simulated annealing on Σ HPWL of physical nets.
pub fn place(
    netlist: &Netlist,
    fp: &Floorplan,
    widths: &[u32],
    clusters: &[Cluster],
    style: RoutingStyle,
    seed: u64,
    cfg: &AnnealConfig,
) -> Result<Placement, LayoutError> {
    let pl = seed_placement(netlist, fp, widths, clusters)?;
    let n = netlist.cells().len();
    if n <= 1 {
        return Ok(pl);
    }
    let nets = placement_nets(netlist, style)?;
    let mut cell_nets = vec![Vec::new(); n];
    for (i, pins) in nets.iter().enumerate() {
        for p in pins {
            if let Some(c) = p.cell() {
                if cell_nets[c.0].last() != Some(&i) {
                    cell_nets[c.0].push(i);
                }
            }
        }
    }
    let mut cluster_of = vec![None; n];
    for (k, c) in clusters.iter().enumerate() {
        for m in &c.members {
            cluster_of[m.0] = Some(k);
        }
    }
    let cost: Vec<f64> = nets.iter().map(|p| net_hpwl(&pl, p)).collect();
    let mut an = Annealer {
        pl,
        stamp: vec![0; nets.len()],
        nets,
        cost,
        cell_nets,
        cluster_of,
        clusters,
        epoch: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // starting temperature: mean uphill step of a few random probes
    let mut ups = Vec::new();
    for _ in 0..(4 * n).min(2000) {
        let a = CellId(rng.gen_range(0..n));
        let (r, s) = (rng.gen_range(0..fp.n_rows), rng.gen_range(0..fp.n_sites));
        if let Some((cells, pos)) = an.propose(a, r, s) {
            let (d, old, _) = an.delta(&cells, &pos);
            an.undo(&cells, &old);
            if d > 0.0 {
                ups.push(d);
            }
        }
    }
    let t0 = if ups.is_empty() { 1.0 } else { ups.iter().sum::<f64>() / ups.len() as f64 };
    let mut t = t0;
    let total_mix: f64 = cfg.move_mix.iter().sum();
    let mut radius_r = fp.n_rows as f64;
    let mut radius_s = fp.n_sites as f64;
    while t > t0 * cfg.final_temp_ratio {
        let mut accepted = 0usize;
        let tries = cfg.moves_per_cell * n;
        for _ in 0..tries {
            let a = CellId(rng.gen_range(0..n));
            let (ar, as_) = (an.pl.row[a.0] as f64, an.pl.site[a.0] as f64);
            let pick = rng.gen::<f64>() * total_mix;
            let (cr, cs, rr, rs) = if pick < cfg.move_mix[0] + cfg.move_mix[1] {
                (ar, as_, radius_r, radius_s)
            } else {
                // cluster shift: land next to a cluster mate
                let Some(k) = an.cluster_of[a.0] else { continue };
                let mates = &an.clusters[k].members;
                if mates.len() < 2 {
                    continue;
                }
                let m = mates[rng.gen_range(0..mates.len())];
                (an.pl.row[m.0] as f64, an.pl.site[m.0] as f64, 1.0, 3.0 + an.pl.width[m.0] as f64)
            };
            let r = (cr + rng.gen_range(-rr..=rr)).round();
            let s = (cs + rng.gen_range(-rs..=rs)).round();
            if r < 0.0 || s < 0.0 {
                continue;
            }
            let is_swap_only = pick < cfg.move_mix[0];
            let Some((cells, pos)) = an.propose(a, r as u32, s as u32) else { continue };
            if is_swap_only && cells.len() == 1 {
                continue;
            }
            let (d, old, nets) = an.delta(&cells, &pos);
            if d <= 0.0 || rng.gen::<f64>() < (-d / t).exp() {
                an.commit(&nets);
                accepted += 1;
            } else {
                an.undo(&cells, &old);
            }
        }
        // keep the window where roughly 40% of moves are accepted
        let rate = accepted as f64 / tries as f64;
        let scale = (1.0 - 0.44 + rate).clamp(0.5, 1.5);
        radius_r = (radius_r * scale).clamp(1.0, fp.n_rows as f64);
        radius_s = (radius_s * scale).clamp(2.0, fp.n_sites as f64);
        t *= cfg.cooling;
    }
    Ok(an.pl)
}
