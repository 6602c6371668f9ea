//! Generated mapped netlists used as benchmark blocks.
//!
//! Every fixture registers its primary inputs and outputs, so timing paths run
//! flop to flop. Cell masters come from the default cell skeleton.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::celllib::{parse_skeleton, DEFAULT_SKELETON};
use crate::netlist::{
    CellId, CellInstance, CellPins, Flavor, LogicalNet, NetKind, Netlist, PinRef, Port, PortDir, PortId, PortSide,
};

/// Pin lists of the default skeleton.
pub fn default_catalog() -> BTreeMap<String, CellPins> {
    parse_skeleton(DEFAULT_SKELETON).expect("shipped skeleton parses").catalog()
}

/// A driven signal under construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sig(usize);

/// Incremental netlist construction with generated names.
pub struct NetlistBuilder {
    catalog: BTreeMap<String, CellPins>,
    cells: Vec<CellInstance>,
    nets: Vec<LogicalNet>,
    ports: Vec<Port>,
    clock: Option<Sig>,
    n_inputs: usize,
}

impl Default for NetlistBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl NetlistBuilder {
    pub fn new() -> Self {
        NetlistBuilder { catalog: default_catalog(), cells: Vec::new(), nets: Vec::new(), ports: Vec::new(), clock: None, n_inputs: 0 }
    }

    fn pins(&self, master: &str) -> &CellPins {
        self.catalog.get(master).unwrap_or_else(|| panic!("unknown master {master}"))
    }

    /// Input port; sides alternate top and bottom in creation order.
    pub fn input(&mut self, name: &str) -> Sig {
        let side = if self.n_inputs.is_multiple_of(2) { PortSide::Top } else { PortSide::Bottom };
        self.n_inputs += 1;
        let p = PortId(self.ports.len());
        self.ports.push(Port { name: name.to_string(), dir: PortDir::In, side });
        self.nets.push(LogicalNet { name: name.to_string(), driver: PinRef::Port(p), loads: Vec::new(), kind: NetKind::Signal });
        Sig(self.nets.len() - 1)
    }

    /// Output port that attaches on whichever side its net lives.
    pub fn output(&mut self, name: &str, s: Sig) {
        let p = PortId(self.ports.len());
        self.ports.push(Port { name: name.to_string(), dir: PortDir::Out, side: PortSide::Either });
        self.nets[s.0].loads.push(PinRef::Port(p));
    }

    fn add_cell(&mut self, master: &str) -> CellId {
        let pins = self.pins(master).clone();
        let id = CellId(self.cells.len());
        self.cells.push(CellInstance {
            name: format!("u{}", id.0),
            master: master.to_string(),
            flavor: Flavor::Unassigned,
            is_sequential: pins.is_sequential,
            is_clock_buffer: pins.is_clock_buffer,
        });
        let out = pins.outputs[0].clone();
        self.nets.push(LogicalNet {
            name: format!("n{}", id.0),
            driver: PinRef::Cell { cell: id, pin: out },
            loads: Vec::new(),
            kind: NetKind::Signal,
        });
        id
    }

    /// Connects `s` to an input pin of a cell.
    pub fn connect(&mut self, cell: CellId, pin: &str, s: Sig) {
        self.nets[s.0].loads.push(PinRef::Cell { cell, pin: pin.to_string() });
    }

    /// Combinational gate with its data inputs in pin order.
    pub fn gate(&mut self, master: &str, ins: &[Sig]) -> Sig {
        let inputs = self.pins(master).inputs.clone();
        assert_eq!(inputs.len(), ins.len(), "{master} takes {} inputs", inputs.len());
        let id = self.add_cell(master);
        let out = Sig(self.nets.len() - 1);
        for (p, s) in inputs.iter().zip(ins) {
            self.connect(id, p, *s);
        }
        out
    }

    fn clock(&mut self) -> Sig {
        if let Some(c) = self.clock {
            return c;
        }
        let p = PortId(self.ports.len());
        self.ports.push(Port { name: "clk".into(), dir: PortDir::In, side: PortSide::Top });
        self.nets.push(LogicalNet { name: "clk".into(), driver: PinRef::Port(p), loads: Vec::new(), kind: NetKind::Clock });
        let s = Sig(self.nets.len() - 1);
        self.clock = Some(s);
        s
    }

    /// Flop with its D pin left open; returns the cell and its Q signal.
    pub fn dff_open(&mut self) -> (CellId, Sig) {
        let clk = self.clock();
        let id = self.add_cell("DFFQD1");
        let q = Sig(self.nets.len() - 1);
        self.nets[clk.0].loads.push(PinRef::Cell { cell: id, pin: "CP".into() });
        (id, q)
    }

    pub fn dff(&mut self, d: Sig) -> Sig {
        let (id, q) = self.dff_open();
        self.connect(id, "D", d);
        q
    }

    pub fn finish(self) -> Netlist {
        Netlist::from_parts(self.cells, self.nets, self.ports, &self.catalog).expect("generated netlist is well formed")
    }
}

/// Registered ripple-carry adder.
pub fn ripple_adder(bits: usize) -> Netlist {
    let mut b = NetlistBuilder::new();
    let xs: Vec<Sig> = (0..bits).map(|i| b.input(&format!("a{i}"))).collect();
    let ys: Vec<Sig> = (0..bits).map(|i| b.input(&format!("b{i}"))).collect();
    let cin = b.input("cin");
    let xs: Vec<Sig> = xs.into_iter().map(|s| b.dff(s)).collect();
    let ys: Vec<Sig> = ys.into_iter().map(|s| b.dff(s)).collect();
    let mut c = b.dff(cin);
    for i in 0..bits {
        let p = b.gate("XOR2D1", &[xs[i], ys[i]]);
        let s = b.gate("XOR2D1", &[p, c]);
        c = b.gate("MAJ3D1", &[xs[i], ys[i], c]);
        let q = b.dff(s);
        b.output(&format!("s{i}"), q);
    }
    let q = b.dff(c);
    b.output("cout", q);
    b.finish()
}

fn full_adder(b: &mut NetlistBuilder, x: Sig, y: Sig, z: Sig) -> (Sig, Sig) {
    let p = b.gate("XOR2D1", &[x, y]);
    let s = b.gate("XOR2D1", &[p, z]);
    let c = b.gate("MAJ3D1", &[x, y, z]);
    (s, c)
}

fn half_adder(b: &mut NetlistBuilder, x: Sig, y: Sig) -> (Sig, Sig) {
    (b.gate("XOR2D1", &[x, y]), b.gate("AN2D1", &[x, y]))
}

/// Registered carry-save array multiplier with a ripple final adder.
pub fn array_multiplier(bits: usize) -> Netlist {
    let mut b = NetlistBuilder::new();
    let xs: Vec<Sig> = (0..bits).map(|i| b.input(&format!("x{i}"))).collect();
    let ys: Vec<Sig> = (0..bits).map(|i| b.input(&format!("y{i}"))).collect();
    let xs: Vec<Sig> = xs.into_iter().map(|s| b.dff(s)).collect();
    let ys: Vec<Sig> = ys.into_iter().map(|s| b.dff(s)).collect();
    // column-wise bit heaps, reduced with full and half adders
    let mut cols: Vec<Vec<Sig>> = vec![Vec::new(); 2 * bits];
    for i in 0..bits {
        for j in 0..bits {
            let pp = b.gate("AN2D1", &[xs[i], ys[j]]);
            cols[i + j].push(pp);
        }
    }
    let mut k = 0;
    while k < cols.len() {
        while cols[k].len() > 1 {
            if cols[k].len() >= 3 {
                let (x, y, z) = (cols[k].remove(0), cols[k].remove(0), cols[k].remove(0));
                let (s, c) = full_adder(&mut b, x, y, z);
                cols[k].push(s);
                if k + 1 < cols.len() {
                    cols[k + 1].push(c);
                }
            } else {
                let (x, y) = (cols[k].remove(0), cols[k].remove(0));
                let (s, c) = half_adder(&mut b, x, y);
                cols[k].push(s);
                if k + 1 < cols.len() {
                    cols[k + 1].push(c);
                }
            }
        }
        k += 1;
    }
    for (i, c) in cols.into_iter().enumerate() {
        if let Some(&s) = c.first() {
            let q = b.dff(s);
            b.output(&format!("p{i}"), q);
        }
    }
    b.finish()
}

/// Fibonacci LFSR with XOR taps.
pub fn lfsr(bits: usize) -> Netlist {
    assert!(bits >= 4);
    let mut b = NetlistBuilder::new();
    let seed = b.input("load");
    let regs: Vec<(CellId, Sig)> = (0..bits).map(|_| b.dff_open()).collect();
    let taps = [bits - 1, bits - 2, bits / 2, 0];
    let mut fb = regs[taps[0]].1;
    for &t in &taps[1..] {
        fb = b.gate("XNR2D1", &[fb, regs[t].1]);
    }
    let fb = b.gate("MUX2D1", &[fb, seed, seed]);
    b.connect(regs[0].0, "D", fb);
    for i in 1..bits {
        b.connect(regs[i].0, "D", regs[i - 1].1);
    }
    for (i, r) in regs.iter().enumerate().step_by(4) {
        b.output(&format!("q{i}"), r.1);
    }
    b.finish()
}

/// One AES-like round on `bytes` registered state bytes: a random gate network
/// per byte, then an XOR mixing layer across neighbouring bytes, fed back.
pub fn crypto_round(bytes: usize, seed: u64) -> Netlist {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = NetlistBuilder::new();
    let key: Vec<Sig> = (0..8 * bytes).map(|i| b.input(&format!("k{i}"))).collect();
    let load = b.input("ld");
    let state: Vec<(CellId, Sig)> = (0..8 * bytes).map(|_| b.dff_open()).collect();
    let keyq: Vec<Sig> = key.into_iter().map(|k| b.dff(k)).collect();
    let mut sub: Vec<Sig> = Vec::with_capacity(8 * bytes);
    let two = ["XOR2D1", "ND2D1", "NR2D1", "XNR2D1"];
    let four = ["AOI22D1", "OAI22D1"];
    let three = ["AOI21D1", "OAI21D1", "MUX2D1", "MAJ3D1"];
    for byte in 0..bytes {
        let mut layer: Vec<Sig> = (0..8).map(|i| b.gate("XOR2D1", &[state[8 * byte + i].1, keyq[8 * byte + i]])).collect();
        for _ in 0..3 {
            let mut next = Vec::with_capacity(8);
            for i in 0..8 {
                let pick = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Sig> {
                    let mut v = vec![layer[i]];
                    while v.len() < n {
                        v.push(layer[rng.gen_range(0..8)]);
                    }
                    v
                };
                let s = match rng.gen_range(0..10) {
                    0..=3 => {
                        let m = *four.choose(&mut rng).unwrap();
                        let ins = pick(&mut rng, 4);
                        b.gate(m, &ins)
                    }
                    4..=6 => {
                        let m = *two.choose(&mut rng).unwrap();
                        let ins = pick(&mut rng, 2);
                        b.gate(m, &ins)
                    }
                    _ => {
                        let m = *three.choose(&mut rng).unwrap();
                        let ins = pick(&mut rng, 3);
                        b.gate(m, &ins)
                    }
                };
                next.push(s);
            }
            layer = next;
        }
        sub.extend(layer);
    }
    for i in 0..8 * bytes {
        let n = 8 * bytes;
        let a = b.gate("XOR2D1", &[sub[i], sub[(i + 8) % n]]);
        let m = b.gate("XOR2D1", &[a, sub[(i + 16) % n]]);
        let d = b.gate("MUX2D1", &[m, keyq[i], load]);
        b.connect(state[i].0, "D", d);
        if i % 8 == 0 {
            b.output(&format!("o{i}"), state[i].1);
        }
    }
    b.finish()
}

/// Replaces every AOI22 with an AND2 feeding an AOI21, as a library without
/// the interleaved metal would map it.
pub fn remap_aoi22(netlist: &Netlist) -> Netlist {
    let catalog = default_catalog();
    let mut cells: Vec<CellInstance> = netlist.cells().to_vec();
    let mut nets: Vec<LogicalNet> = netlist.nets().to_vec();
    let mut moved: BTreeMap<(CellId, String), PinRef> = BTreeMap::new();
    for id in netlist.sorted_cell_ids() {
        if cells[id.0].master != "AOI22D1" {
            continue;
        }
        let and = CellId(cells.len());
        cells.push(CellInstance {
            name: format!("{}_b", cells[id.0].name),
            master: "AN2D1".into(),
            flavor: cells[id.0].flavor,
            is_sequential: false,
            is_clock_buffer: false,
        });
        cells[id.0].master = "AOI21D1".into();
        moved.insert((id, "B1".into()), PinRef::Cell { cell: and, pin: "A1".into() });
        moved.insert((id, "B2".into()), PinRef::Cell { cell: and, pin: "A2".into() });
        nets.push(LogicalNet {
            name: format!("{}_bn", cells[id.0].name),
            driver: PinRef::Cell { cell: and, pin: "Z".into() },
            loads: vec![PinRef::Cell { cell: id, pin: "B".into() }],
            kind: NetKind::Signal,
        });
    }
    for n in &mut nets {
        for l in &mut n.loads {
            if let PinRef::Cell { cell, pin } = l {
                if let Some(to) = moved.get(&(*cell, pin.clone())) {
                    *l = to.clone();
                }
            }
        }
    }
    Netlist::from_parts(cells, nets, netlist.ports().to_vec(), &catalog).expect("remap keeps the netlist valid")
}

/// Random registered logic of about `n_cells` cells, for property tests.
pub fn random_netlist(n_cells: usize, seed: u64) -> Netlist {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = NetlistBuilder::new();
    let masters = ["INVD1", "BUFD1", "ND2D1", "NR2D1", "AN2D1", "XOR2D1", "AOI21D1", "AOI22D1", "MUX2D1", "DFFQD1"];
    let n_in = rng.gen_range(1..=3);
    let mut avail: Vec<Sig> = (0..n_in).map(|i| b.input(&format!("i{i}"))).collect();
    let mut made = 0;
    while made < n_cells {
        let m = masters[rng.gen_range(0..masters.len())];
        let s = if m == "DFFQD1" {
            let d = avail[rng.gen_range(0..avail.len())];
            b.dff(d)
        } else {
            let k = b.pins(m).inputs.len();
            let ins: Vec<Sig> = (0..k).map(|_| avail[rng.gen_range(0..avail.len())]).collect();
            b.gate(m, &ins)
        };
        avail.push(s);
        made += 1;
    }
    // a few outputs on the newest signals
    let n_out = rng.gen_range(1..=2).min(avail.len());
    for k in 0..n_out {
        let s = avail[avail.len() - 1 - k];
        b.output(&format!("o{k}"), s);
    }
    b.finish()
}

/// Names accepted by [`fixture`].
pub const FIXTURES: [&str; 6] = ["adder16", "mult8", "lfsr32", "crypto4", "crypto4_aoi21", "congested"];

/// Shipped fixture by name.
pub fn fixture(name: &str) -> Option<Netlist> {
    Some(match name {
        "adder16" => ripple_adder(16),
        "mult8" => array_multiplier(8),
        "lfsr32" => lfsr(32),
        "crypto4" => crypto_round(4, 7),
        "crypto4_aoi21" => remap_aoi22(&crypto_round(4, 7)),
        "congested" => array_multiplier(12),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{parse_netlist, serialize_netlist};

    #[test]
    fn fixtures_are_valid_and_reparse() {
        let cat = default_catalog();
        for name in FIXTURES {
            let nl = fixture(name).unwrap();
            assert!(!nl.is_empty(), "{name}");
            let again = parse_netlist(&serialize_netlist(&nl), &cat).unwrap();
            assert_eq!(again.cells().len(), nl.cells().len());
            assert_eq!(again.nets().len(), nl.nets().len());
        }
        assert!(fixture("nope").is_none());
    }

    #[test]
    fn adder_has_expected_cell_mix() {
        let nl = ripple_adder(16);
        let count = |m: &str| nl.cells().iter().filter(|c| c.master == m).count();
        assert_eq!(count("XOR2D1"), 32);
        assert_eq!(count("MAJ3D1"), 16);
        assert_eq!(count("DFFQD1"), 16 + 16 + 1 + 16 + 1);
    }

    #[test]
    fn remap_trades_aoi22_for_aoi21_pairs() {
        let base = crypto_round(2, 3);
        let re = remap_aoi22(&base);
        let count = |nl: &Netlist, m: &str| nl.cells().iter().filter(|c| c.master == m).count();
        let n22 = count(&base, "AOI22D1");
        assert!(n22 > 0);
        assert_eq!(count(&re, "AOI22D1"), 0);
        assert_eq!(count(&re, "AOI21D1"), count(&base, "AOI21D1") + n22);
        assert_eq!(count(&re, "AN2D1"), count(&base, "AN2D1") + n22);
    }

    #[test]
    fn random_netlists_are_deterministic() {
        let a = serialize_netlist(&random_netlist(12, 5));
        assert_eq!(a, serialize_netlist(&random_netlist(12, 5)));
        assert_ne!(a, serialize_netlist(&random_netlist(12, 6)));
    }
}
