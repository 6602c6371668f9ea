//! Floorplan, placement, clock tree and global routing on one or two metal stacks.
//!
//! Geometry is in nm. Rows are one cell height tall and sites one gate pitch
//! wide. Global routing works on gcells of a fixed number of sites and rows;
//! each routing layer contributes tracks along its preferred direction, and
//! a gcell edge overflows when more wires cross it than it has tracks.

mod cts;
mod floorplan;
mod grid;
mod place;
mod report;
mod route;
mod stack;

use thiserror::Error;

use crate::celllib::LibraryError;
use crate::netlist::NetlistError;

pub use cts::{cts, ClockTree, CtsOptions};
pub use floorplan::{build_floorplan, cell_widths, Floorplan};
pub use grid::{EdgeId, GcellGrid};
pub use place::{hpwl, place, random_placement, seed_placement, AnnealConfig, Placement};
pub use report::{congestion_svg, layer_um, placement_csv, placement_svg, routing_dump, wirelength_by_layer, wirelength_csv, LayerWirelength};
pub use route::{global_route, route_with_grid, NetRoute, RouteNode, RouteOptions, RouteScope, RoutingState, Stub, StubKind};
pub use stack::{parse_stack, serialize_stack, Allow, Dir, Layer, LayerId, LayerStack, CFET_STACK, OMNI_STACK};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("stack line {line}: {msg}")]
    Stack { line: usize, msg: String },
    #[error("cannot floorplan an empty netlist")]
    EmptyNetlist,
    #[error("utilization {0} outside (0.4, 0.95]")]
    Utilization(f64),
    #[error("cells do not fit: {0}")]
    UtilizationInfeasible(String),
    #[error("pin `{0}` lies outside the core")]
    UnroutablePin(String),
    #[error("stack has no signal layers on the {0} side")]
    NoSignalLayers(crate::netlist::Side),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Library(#[from] LibraryError),
}
