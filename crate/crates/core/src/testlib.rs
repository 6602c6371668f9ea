//! Shared helpers for unit tests.

use std::sync::OnceLock;

use crate::celllib::CellLibrary;
use crate::fixtures::{default_catalog, NetlistBuilder};
use crate::netlist::{parse_netlist, Netlist};

pub use crate::fixtures::random_netlist;

pub fn library() -> CellLibrary {
    static LIB: OnceLock<CellLibrary> = OnceLock::new();
    LIB.get_or_init(|| crate::dtco::default_library().unwrap()).clone()
}

pub fn parse(text: &str) -> Netlist {
    parse_netlist(text, &default_catalog()).unwrap()
}

/// `n` inverters in series between an input and an output port.
pub fn inverter_chain(n: usize) -> Netlist {
    let mut b = NetlistBuilder::new();
    let mut s = b.input("a");
    for _ in 0..n {
        s = b.gate("INVD1", &[s]);
    }
    b.output("z", s);
    b.finish()
}

/// Two independent NAND chains, each tied together by its own select input
/// so that each chain is one sibling cluster.
pub fn two_chains(n: usize) -> Netlist {
    let mut b = NetlistBuilder::new();
    for k in 0..2 {
        let sel = b.input(&format!("s{k}"));
        let mut s = b.input(&format!("a{k}"));
        for _ in 0..n {
            s = b.gate("ND2D1", &[s, sel]);
        }
        b.output(&format!("z{k}"), s);
    }
    b.finish()
}
