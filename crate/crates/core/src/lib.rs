//! Physical design and device/technology co-optimization for double-side-routed
//! 3D logic.
//!
//! The crate follows a block implementation from device parameters to block
//! metrics: [`dtco`] sweeps device parameters and characterizes a cell library,
//! [`sideplan`] clusters the netlist and assigns top-in/bottom-in flavors,
//! [`layout`] places, builds the clock tree and routes on two mirrored metal
//! stacks, [`analysis`] reports timing, energy and area, and [`flow`] ties the
//! stages together and sweeps the clock period.

pub mod analysis;
pub mod celllib;
pub mod dtco;
pub mod fixtures;
pub mod flow;
pub mod layout;
pub mod netlist;
pub mod sideplan;

mod svg;
mod text;

#[cfg(test)]
mod testlib;
