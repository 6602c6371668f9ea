//! End-to-end block implementation and clock-period sweeps.
//!
//! A run clusters and assigns flavors, places, builds the clock tree, routes
//! the clock and flips the clock buffers that would need the middle layer,
//! routes everything, flips detoured data-path buffers, then measures timing,
//! energy and area. None of the physical stages reads the target period, so a
//! sweep implements the block once and evaluates it at every period.

mod config;
mod report;

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    delay_breakdown, energy_from_loads, net_loads, sta_with_loads, AnalysisOptions, DelayBreakdown, Design, EnergyResult,
};
use crate::celllib::{load_library, parse_skeleton, Architecture, CellLibrary, DEFAULT_SKELETON};
use crate::dtco::{characterize_library, parse_coefficients, DeviceParams, SurrogateCoefficients};
use crate::layout::{
    build_floorplan, cell_widths, cts, global_route, parse_stack, place, wirelength_by_layer, AnnealConfig, ClockTree,
    CtsOptions, Floorplan, LayerStack, LayerWirelength, Placement, RouteOptions, RouteScope, RoutingState,
};
use crate::netlist::{parse_netlist, split_net_count, Flavor, Netlist, RoutingStyle};
use crate::sideplan::{
    assign_flavors, assign_random_ratio, assign_ratio, cluster_cells, flip_clock_buffers, flip_datapath_buffers, Cluster,
    ClusterOptions,
};

pub use config::{parse_arch, parse_config, AssignMode, FlowConfig};
pub use report::{comparison_csv, flow_csv, flow_svg};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("unknown design `{0}`")]
    UnknownDesign(String),
    #[error("{stage}: {msg}")]
    Stage { stage: &'static str, msg: String },
    #[error("compared runs use different designs: `{0}` and `{1}`")]
    MismatchedDesign(String, String),
}

fn stage<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> FlowError {
    move |e| FlowError::Stage { stage, msg: e.to_string() }
}

fn read(path: &Path) -> Result<String, FlowError> {
    std::fs::read_to_string(path).map_err(|e| FlowError::Io { path: path.display().to_string(), msg: e.to_string() })
}

/// Reads a config file; relative paths inside it resolve against its directory.
pub fn load_config(path: &Path) -> Result<FlowConfig, FlowError> {
    let cfg = parse_config(&read(path)?)?;
    Ok(cfg.relative_to(path.parent().unwrap_or(Path::new("."))))
}

pub fn routing_style(arch: Architecture) -> RoutingStyle {
    if arch.is_double_sided() {
        RoutingStyle::DoubleSideDo
    } else {
        RoutingStyle::SingleSide
    }
}

/// The library a config asks for: a library file, or a characterization of its device corner.
pub fn load_flow_library(cfg: &FlowConfig) -> Result<CellLibrary, FlowError> {
    if let Some(p) = &cfg.library {
        return load_library(&read(p)?).map_err(stage("library"));
    }
    let coeff = match &cfg.coefficients {
        Some(p) => parse_coefficients(&read(p)?).map_err(stage("coefficients"))?,
        None => SurrogateCoefficients::default(),
    };
    let skel = match &cfg.skeleton {
        Some(p) => parse_skeleton(&read(p)?),
        None => parse_skeleton(DEFAULT_SKELETON),
    }
    .map_err(stage("skeleton"))?;
    let (lg, sp, ns, mv) = cfg.device;
    characterize_library(&DeviceParams::new(cfg.arch, lg, sp, ns, mv), &coeff, &skel).map_err(stage("characterize"))
}

pub fn load_stack(cfg: &FlowConfig) -> Result<LayerStack, FlowError> {
    match &cfg.stack {
        Some(p) => parse_stack(&read(p)?).map_err(stage("stack")),
        None if cfg.arch.is_double_sided() => Ok(LayerStack::omni()),
        None => Ok(LayerStack::cfet()),
    }
}

pub fn load_design(cfg: &FlowConfig, library: &CellLibrary) -> Result<Netlist, FlowError> {
    let p = Path::new(&cfg.design);
    if p.is_file() {
        return parse_netlist(&read(p)?, library).map_err(stage("netlist"));
    }
    crate::fixtures::fixture(&cfg.design).ok_or_else(|| FlowError::UnknownDesign(cfg.design.clone()))
}

pub fn route_options(cfg: &FlowConfig) -> RouteOptions {
    RouteOptions {
        gcell_sites: cfg.gcell_sites,
        gcell_rows: cfg.gcell_rows,
        max_level: cfg.max_level,
        rrr_iterations: cfg.rrr_iterations,
        ..RouteOptions::default()
    }
}

pub fn analysis_options(cfg: &FlowConfig) -> AnalysisOptions {
    AnalysisOptions { activity: cfg.activity, top_k: cfg.top_k, ..AnalysisOptions::default() }
}

/// Clusters the netlist and assigns flavors as configured. Single-sided
/// architectures keep every cell top-in.
pub fn plan_sides(cfg: &FlowConfig, netlist: &mut Netlist) -> Result<Vec<Cluster>, FlowError> {
    let clusters = cluster_cells(netlist, &ClusterOptions::default());
    if !cfg.arch.is_double_sided() {
        for c in netlist.cell_ids().collect::<Vec<_>>() {
            netlist.set_flavor(c, Flavor::Ti);
        }
        return Ok(clusters);
    }
    match cfg.assign {
        AssignMode::Clustered => assign_flavors(&clusters).apply(netlist),
        AssignMode::Ratio(f) => assign_ratio(&clusters, f).map_err(stage("assign"))?.apply(netlist),
        AssignMode::Random(f) => assign_random_ratio(netlist, f, cfg.seed).map_err(stage("assign"))?,
    }
    Ok(clusters)
}

/// A placed, clock-synthesized and routed block.
pub struct Implementation {
    pub config: FlowConfig,
    pub library: CellLibrary,
    pub netlist: Netlist,
    pub clusters: Vec<Cluster>,
    pub floorplan: Floorplan,
    pub placement: Placement,
    pub clock_tree: ClockTree,
    pub routing: RoutingState,
    pub clock_flips: usize,
    pub datapath_flips: usize,
}

/// Runs every physical stage of the flow.
pub fn implement(cfg: &FlowConfig) -> Result<Implementation, FlowError> {
    cfg.validate()?;
    let library = load_flow_library(cfg)?;
    let netlist = load_design(cfg, &library)?;
    implement_with(cfg, library, netlist)
}

/// A placed block, before clock-tree synthesis.
pub struct Placed {
    pub library: CellLibrary,
    pub netlist: Netlist,
    pub clusters: Vec<Cluster>,
    pub floorplan: Floorplan,
    pub placement: Placement,
}

/// Side planning, floorplan and cluster-seeded annealing placement.
pub fn place_design(cfg: &FlowConfig, library: CellLibrary, mut netlist: Netlist) -> Result<Placed, FlowError> {
    let arch = cfg.arch;
    let clusters = plan_sides(cfg, &mut netlist)?;
    let floorplan = build_floorplan(&netlist, &library, arch, cfg.utilization).map_err(stage("floorplan"))?;
    let widths = cell_widths(&netlist, &library, arch).map_err(stage("floorplan"))?;
    let anneal = AnnealConfig { moves_per_cell: cfg.moves_per_cell, ..AnnealConfig::default() };
    let placement = place(&netlist, &floorplan, &widths, &clusters, routing_style(arch), cfg.seed, &anneal)
        .map_err(stage("place"))?;
    Ok(Placed { library, netlist, clusters, floorplan, placement })
}

impl Placed {
    /// Builds the clock tree into the netlist and placement. Single-sided
    /// architectures get top-in buffers.
    pub fn synthesize_clock(&mut self, cfg: &FlowConfig) -> Result<ClockTree, FlowError> {
        let opts = CtsOptions { max_fanout: cfg.max_fanout, seed: cfg.cts_seed };
        let tree = cts(&mut self.netlist, &mut self.placement, &self.library, cfg.arch, &opts).map_err(stage("cts"))?;
        if !cfg.arch.is_double_sided() {
            for b in tree.buffers() {
                self.netlist.set_flavor(b, Flavor::Ti);
            }
        }
        Ok(tree)
    }
}

/// [`implement`] with the library and netlist already loaded.
pub fn implement_with(cfg: &FlowConfig, library: CellLibrary, netlist: Netlist) -> Result<Implementation, FlowError> {
    let arch = cfg.arch;
    let style = routing_style(arch);
    let stack = load_stack(cfg)?;
    let mut placed = place_design(cfg, library, netlist)?;
    let clock_tree = placed.synthesize_clock(cfg)?;
    let Placed { library, mut netlist, clusters, floorplan, placement } = placed;
    let opts = route_options(cfg);
    let mut clock_flips = 0;
    if cfg.flip_clock && arch.is_double_sided() {
        let clock_opts = RouteOptions { scope: RouteScope::ClockOnly, ..opts.clone() };
        let mut clock = global_route(&netlist, &placement, &floorplan, &stack, style, &clock_opts).map_err(stage("route"))?;
        clock_flips = flip_clock_buffers(&mut netlist, &mut clock, &placement).map_err(stage("flip"))?;
    }
    let mut routing = global_route(&netlist, &placement, &floorplan, &stack, style, &opts).map_err(stage("route"))?;
    let mut datapath_flips = 0;
    if cfg.flip_datapath && arch.is_double_sided() {
        datapath_flips = flip_datapath_buffers(&mut netlist, &mut routing, &placement, &library, cfg.beta)
            .map_err(stage("flip"))?;
    }
    Ok(Implementation {
        config: cfg.clone(),
        library,
        netlist,
        clusters,
        floorplan,
        placement,
        clock_tree,
        routing,
        clock_flips,
        datapath_flips,
    })
}

/// Metrics of one implementation at one target period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowRow {
    pub period: f64,
    pub achieved_delay: f64,
    pub avg_slack: f64,
    pub worst_slack: f64,
    pub skew: f64,
    /// fJ per cycle.
    pub energy: f64,
    /// fJ·ps
    pub edp: f64,
    pub overflow: u64,
    pub wirelength_um: f64,
    pub cell_area_um2: f64,
    pub core_area_um2: f64,
    pub cells: usize,
    pub split_nets: usize,
    pub clock_flips: usize,
    pub datapath_flips: usize,
    pub valid: bool,
    pub breakdown: DelayBreakdown,
    pub energy_parts: EnergyResult,
}

impl Implementation {
    pub fn design(&self) -> Design<'_> {
        Design { netlist: &self.netlist, routing: &self.routing, library: &self.library, arch: self.config.arch }
    }

    /// Timing, energy and the validity gates at each period, in the given order.
    pub fn evaluate(&self, periods: &[f64]) -> Result<Vec<FlowRow>, FlowError> {
        let d = self.design();
        let opts = analysis_options(&self.config);
        let loads = net_loads(&d, &opts).map_err(stage("analysis"))?;
        let split_nets = split_net_count(&self.netlist, routing_style(self.config.arch)).map_err(stage("analysis"))?;
        let overflow = self.routing.overflow_total();
        let wirelength_um = self.routing.total_length_nm() / 1000.0;
        let cell_area_um2 = self.floorplan.cell_area_nm2 * 1e-6;
        let core_area_um2 = self.floorplan.width_nm() * self.floorplan.height_nm() * 1e-6;
        periods
            .par_iter()
            .map(|&period| {
                let t = sta_with_loads(&d, &loads, period, &opts).map_err(stage("sta"))?;
                let e = energy_from_loads(&d, &loads, period, &opts).map_err(stage("energy"))?;
                let achieved = t.achieved_delay();
                let c = &self.config;
                Ok(FlowRow {
                    period,
                    achieved_delay: achieved,
                    avg_slack: t.avg_slack,
                    worst_slack: t.worst_slack,
                    skew: t.clock_skew,
                    energy: e.total(),
                    edp: e.total() * achieved,
                    overflow,
                    wirelength_um,
                    cell_area_um2,
                    core_area_um2,
                    cells: self.netlist.cells().len(),
                    split_nets,
                    clock_flips: self.clock_flips,
                    datapath_flips: self.datapath_flips,
                    valid: overflow <= c.max_overflow && t.avg_slack >= c.min_slack && t.clock_skew <= c.max_skew,
                    breakdown: delay_breakdown(&t),
                    energy_parts: e,
                })
            })
            .collect()
    }

    pub fn wirelength(&self) -> Vec<LayerWirelength> {
        wirelength_by_layer(&self.routing)
    }
}

/// One flow run at a single target period.
pub fn run_flow(cfg: &FlowConfig, period: f64) -> Result<FlowRow, FlowError> {
    let imp = implement(cfg)?;
    Ok(imp.evaluate(&[period])?.remove(0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowResult {
    pub design: String,
    pub arch: Architecture,
    /// Loosest period first; invalid rows are kept.
    pub rows: Vec<FlowRow>,
    /// Index of the valid row with the smallest EDP.
    pub min_edp: Option<usize>,
}

impl FlowResult {
    pub fn selected(&self) -> Option<&FlowRow> {
        self.min_edp.map(|i| &self.rows[i])
    }
}

/// Valid row with the smallest EDP; the looser period wins a tie.
pub fn select_min_edp(rows: &[FlowRow]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, r) in rows.iter().enumerate() {
        if r.valid && best.is_none_or(|b| r.edp < rows[b].edp) {
            best = Some(i);
        }
    }
    best
}

/// Sweeps the configured periods over one implementation.
pub fn clock_sweep(cfg: &FlowConfig) -> Result<(FlowResult, Implementation), FlowError> {
    let imp = implement(cfg)?;
    let result = sweep_implementation(&imp)?;
    Ok((result, imp))
}

pub fn sweep_implementation(imp: &Implementation) -> Result<FlowResult, FlowError> {
    let rows = imp.evaluate(&imp.config.periods())?;
    Ok(FlowResult {
        design: imp.config.design.clone(),
        arch: imp.config.arch,
        min_edp: select_min_edp(&rows),
        rows,
    })
}

/// One architecture's selected point, with benefits over the reference run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub arch: Architecture,
    /// False when no swept period passed the gates; the smallest-EDP row stands in.
    pub valid: bool,
    pub row: FlowRow,
    /// Reference value over this run's value, so larger is better.
    pub edp_benefit: f64,
    pub energy_benefit: f64,
    pub delay_benefit: f64,
    pub area_benefit: f64,
    pub layers: Vec<LayerWirelength>,
    /// Signal layers carrying wire on the top and bottom stacks.
    pub signal_layers: (usize, usize),
    /// Power-only layers on the top and bottom stacks.
    pub power_layers: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub design: String,
    /// Architecture every benefit is relative to.
    pub reference: Architecture,
    pub rows: Vec<ComparisonRow>,
}

fn layer_counts(stack: &LayerStack, wl: &[LayerWirelength]) -> ((usize, usize), (usize, usize)) {
    use crate::layout::Allow;
    use crate::netlist::Side;
    let mut sig = (0, 0);
    let mut pwr = (0, 0);
    for l in &stack.layers {
        let slot = |t: &mut (usize, usize)| match l.side {
            Some(Side::Top) => t.0 += 1,
            Some(Side::Bottom) => t.1 += 1,
            None => {}
        };
        match l.allow {
            Allow::Signal if wl.iter().any(|w| !w.combined && w.layer == l.name && w.um > 0.0) => slot(&mut sig),
            Allow::Power => slot(&mut pwr),
            _ => {}
        }
    }
    (sig, pwr)
}

/// Sweeps every config and reports each selected point against the first CFET run, or the first run.
pub fn compare_architectures(configs: &[FlowConfig]) -> Result<Comparison, FlowError> {
    let first = configs.first().ok_or_else(|| FlowError::Config { line: 0, msg: "nothing to compare".into() })?;
    if let Some(c) = configs.iter().find(|c| c.design != first.design) {
        return Err(FlowError::MismatchedDesign(first.design.clone(), c.design.clone()));
    }
    let runs: Vec<(FlowResult, Implementation)> = configs.par_iter().map(clock_sweep).collect::<Result<_, _>>()?;
    let picked: Vec<(bool, &FlowRow)> = runs
        .iter()
        .map(|(r, _)| match r.selected() {
            Some(row) => (true, row),
            None => (false, r.rows.iter().min_by(|a, b| a.edp.total_cmp(&b.edp)).expect("a sweep has rows")),
        })
        .collect();
    let ref_idx = configs.iter().position(|c| c.arch == Architecture::Cfet).unwrap_or(0);
    let reference = picked[ref_idx].1;
    let rows = runs
        .iter()
        .zip(&picked)
        .map(|((_, imp), &(valid, row))| {
            let layers = imp.wirelength();
            let (signal_layers, power_layers) = layer_counts(&imp.routing.stack, &layers);
            ComparisonRow {
                arch: imp.config.arch,
                valid,
                row: row.clone(),
                edp_benefit: reference.edp / row.edp,
                energy_benefit: reference.energy / row.energy,
                delay_benefit: reference.achieved_delay / row.achieved_delay,
                area_benefit: reference.core_area_um2 / row.core_area_um2,
                layers,
                signal_layers,
                power_layers,
            }
        })
        .collect();
    Ok(Comparison { design: first.design.clone(), reference: configs[ref_idx].arch, rows })
}
