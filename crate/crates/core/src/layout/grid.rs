use super::{Dir, Floorplan, LayerId, LayerStack};
use crate::netlist::Side;

/// A boundary between two neighbouring gcells.
///
/// Horizontal edges join `(x, y)` and `(x + 1, y)` and are crossed by
/// horizontal wires; vertical edges join `(x, y)` and `(x, y + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId {
    pub dir: Dir,
    pub idx: usize,
}

/// Per-layer track capacity and usage on a uniform gcell grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GcellGrid {
    pub nx: usize,
    pub ny: usize,
    /// Gcell width and height, nm.
    pub gw: f64,
    pub gh: f64,
    /// Per stack layer, indexed by edge; empty for layers that carry no signal.
    pub cap: Vec<Vec<u32>>,
    pub usage: Vec<Vec<u32>>,
    /// Signal layers per side and direction, lowest level first.
    layers: [[Vec<LayerId>; 2]; 2],
}

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

impl GcellGrid {
    /// Grid of `sites × rows` gcells over the floorplan, signal layers up to `max_level`.
    pub fn new(fp: &Floorplan, stack: &LayerStack, sites: u32, rows: u32, max_level: u32) -> Self {
        let nx = fp.n_sites.div_ceil(sites).max(1) as usize;
        let ny = fp.n_rows.div_ceil(rows).max(1) as usize;
        let gw = sites as f64 * fp.site_width_nm;
        let gh = rows as f64 * fp.row_height_nm;
        let mut g = GcellGrid {
            nx,
            ny,
            gw,
            gh,
            cap: vec![Vec::new(); stack.layers.len()],
            usage: vec![Vec::new(); stack.layers.len()],
            layers: Default::default(),
        };
        for side in Side::BOTH {
            for id in stack.signal_layers(side, max_level) {
                let l = stack.layer(id);
                // H wires cross an H edge, which is one gcell tall
                let tracks = match l.dir {
                    Dir::H => l.tracks(gh),
                    Dir::V => l.tracks(gw),
                };
                let n = g.edge_count(l.dir);
                g.cap[id.0] = vec![tracks; n];
                g.usage[id.0] = vec![0; n];
                g.layers[si(side)][di(l.dir)].push(id);
            }
        }
        g
    }

    pub fn edge_count(&self, dir: Dir) -> usize {
        match dir {
            Dir::H => self.ny * (self.nx - 1),
            Dir::V => (self.ny - 1) * self.nx,
        }
    }

    pub fn layers(&self, side: Side, dir: Dir) -> &[LayerId] {
        &self.layers[si(side)][di(dir)]
    }

    /// Gcell holding a point, clamped to the grid.
    pub fn gcell_of(&self, (x, y): (f64, f64)) -> (usize, usize) {
        let gx = ((x / self.gw).floor().max(0.0) as usize).min(self.nx - 1);
        let gy = ((y / self.gh).floor().max(0.0) as usize).min(self.ny - 1);
        (gx, gy)
    }

    pub fn center(&self, (gx, gy): (usize, usize)) -> (f64, f64) {
        ((gx as f64 + 0.5) * self.gw, (gy as f64 + 0.5) * self.gh)
    }

    /// Edge between two 4-neighbouring gcells.
    pub fn edge(&self, a: (usize, usize), b: (usize, usize)) -> EdgeId {
        if a.1 == b.1 {
            debug_assert_eq!(a.0.abs_diff(b.0), 1);
            EdgeId { dir: Dir::H, idx: a.1 * (self.nx - 1) + a.0.min(b.0) }
        } else {
            debug_assert!(a.0 == b.0 && a.1.abs_diff(b.1) == 1);
            EdgeId { dir: Dir::V, idx: a.1.min(b.1) * self.nx + a.0 }
        }
    }

    /// The two gcells an edge joins.
    pub fn edge_ends(&self, e: EdgeId) -> ((usize, usize), (usize, usize)) {
        match e.dir {
            Dir::H => {
                let (y, x) = (e.idx / (self.nx - 1), e.idx % (self.nx - 1));
                ((x, y), (x + 1, y))
            }
            Dir::V => {
                let (y, x) = (e.idx / self.nx, e.idx % self.nx);
                ((x, y), (x, y + 1))
            }
        }
    }

    pub fn step_len(&self, dir: Dir) -> f64 {
        match dir {
            Dir::H => self.gw,
            Dir::V => self.gh,
        }
    }

    /// Summed capacity over a side's layers for one edge.
    pub fn cap2d(&self, side: Side, e: EdgeId) -> u32 {
        self.layers(side, e.dir).iter().map(|l| self.cap[l.0][e.idx]).sum()
    }

    pub fn usage2d(&self, side: Side, e: EdgeId) -> u32 {
        self.layers(side, e.dir).iter().map(|l| self.usage[l.0][e.idx]).sum()
    }

    /// Σ max(0, usage − capacity) over every layer and edge.
    pub fn overflow_total(&self) -> u64 {
        self.cap
            .iter()
            .zip(&self.usage)
            .flat_map(|(c, u)| c.iter().zip(u))
            .map(|(&c, &u)| u.saturating_sub(c) as u64)
            .sum()
    }

    /// Overflow of one layer.
    pub fn layer_overflow(&self, l: LayerId) -> u64 {
        self.cap[l.0].iter().zip(&self.usage[l.0]).map(|(&c, &u)| u.saturating_sub(c) as u64).sum()
    }

    /// Per-gcell overflow of one side, summed over the gcell's right and upper edges.
    pub fn overflow_map(&self, side: Side) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.nx]; self.ny];
        for dir in [Dir::H, Dir::V] {
            for &l in self.layers(side, dir) {
                for idx in 0..self.edge_count(dir) {
                    let o = self.usage[l.0][idx].saturating_sub(self.cap[l.0][idx]);
                    if o > 0 {
                        let ((x, y), _) = self.edge_ends(EdgeId { dir, idx });
                        m[y][x] += o as f64;
                    }
                }
            }
        }
        m
    }

    /// Usage over capacity per gcell for one side, the worse of its two outgoing edges.
    pub fn utilization_map(&self, side: Side) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.nx]; self.ny];
        for dir in [Dir::H, Dir::V] {
            for idx in 0..self.edge_count(dir) {
                let e = EdgeId { dir, idx };
                let c = self.cap2d(side, e);
                if c > 0 {
                    let ((x, y), _) = self.edge_ends(e);
                    m[y][x] = f64::max(m[y][x], self.usage2d(side, e) as f64 / c as f64);
                }
            }
        }
        m
    }

    /// Overrides the capacity of every layer on one edge; for constructed test cases.
    pub fn set_capacity(&mut self, side: Side, e: EdgeId, per_layer: u32) {
        for l in self.layers[si(side)][di(e.dir)].clone() {
            self.cap[l.0][e.idx] = per_layer;
        }
    }
}
