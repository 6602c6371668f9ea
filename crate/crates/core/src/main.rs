use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use omni3d::analysis::{
    area_csv, area_report, area_svg, breakdown_svg, energy, energy_csv, insertion_delays, sta, timing_csv, timing_json,
    wirelength_svg,
};
use omni3d::celllib::Architecture;
use omni3d::dtco::{
    feasible_metrics, min_edp, pareto_frontier, pareto_svg, parse_coefficients, sweep, sweep_csv, variant_metrics,
    variants_csv, DesignSpace, DeviceParams, SurrogateCoefficients,
};
use omni3d::flow::{
    analysis_options, clock_sweep, compare_architectures, comparison_csv, flow_csv, flow_svg, implement, load_config,
    load_design, load_flow_library, place_design, plan_sides, FlowConfig, FlowResult,
};
use omni3d::layout::{congestion_svg, placement_csv, placement_svg, routing_dump, wirelength_by_layer, wirelength_csv};
use omni3d::netlist::{serialize_netlist, Side};
use omni3d::sideplan::{balance_report, cluster_cells, ClusterOptions};

#[derive(Parser)]
#[command(name = "omni3d", about = "DTCO sweeps, side planning, place and route, and block flows for double-side-routed 3D logic")]
struct Cli {
    #[command(subcommand)]
    group: Group,
}

#[derive(Args, Clone)]
struct Common {
    /// key = value settings file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG figures.
    #[arg(long)]
    svg: bool,
}

#[derive(Subcommand)]
enum Group {
    #[command(subcommand)]
    Dtco(DtcoOp),
    #[command(subcommand)]
    Sideplan(SideplanOp),
    #[command(subcommand)]
    Pnr(PnrOp),
    #[command(subcommand)]
    Flow(FlowOp),
    #[command(subcommand)]
    Report(ReportOp),
}

#[derive(Subcommand)]
enum DtcoOp {
    /// Evaluate every device point of each architecture.
    Sweep(Common),
    /// Energy-delay frontier and minimum-EDP point per architecture.
    Pareto(Common),
    /// Pin-access variants at the configured device corner.
    Variants(Common),
}

#[derive(Subcommand)]
enum SideplanOp {
    /// Sibling clusters of the design.
    Cluster(Common),
    /// Assign flavors and write the updated netlist.
    Assign(Common),
    /// Flavor balance and split-net report after assignment.
    Report(Common),
}

#[derive(Subcommand)]
enum PnrOp {
    Place(Common),
    Cts(Common),
    Route(Common),
}

#[derive(Subcommand)]
enum FlowOp {
    /// One run at `period` (or the sweep's tightest period).
    Run(Common),
    /// Clock-period sweep with minimum-EDP selection.
    Sweep(Common),
    /// CFET, Omni 3D and Omni 3D without the intermediate metal on one design.
    Compare(Common),
}

#[derive(Subcommand)]
enum ReportOp {
    /// Timing, energy, area and wirelength reports of one implementation.
    Emit(Common),
}

struct Ctx {
    cfg: FlowConfig,
    out: PathBuf,
    svg: bool,
}

impl Ctx {
    fn new(c: &Common) -> Result<Self> {
        let mut cfg = match &c.config {
            Some(p) => load_config(p).with_context(|| format!("loading {}", p.display()))?,
            None => FlowConfig::default(),
        };
        if let Some(s) = c.seed {
            cfg.seed = s;
            cfg.cts_seed = s;
        }
        let out = c.out.clone().unwrap_or_else(|| cfg.out.clone());
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        Ok(Ctx { cfg, out, svg: c.svg })
    }

    fn write(&self, name: &str, body: &str) -> Result<()> {
        let p = self.out.join(name);
        fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
        println!("wrote {}", p.display());
        Ok(())
    }

    fn write_svg(&self, name: &str, body: impl FnOnce() -> String) -> Result<()> {
        if self.svg {
            self.write(name, &body())?;
        }
        Ok(())
    }

    fn coefficients(&self) -> Result<SurrogateCoefficients> {
        Ok(match &self.cfg.coefficients {
            Some(p) => parse_coefficients(&read(p)?)?,
            None => SurrogateCoefficients::default(),
        })
    }
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn dtco(op: DtcoOp) -> Result<()> {
    let (c, which) = match op {
        DtcoOp::Sweep(c) => (c, 0),
        DtcoOp::Pareto(c) => (c, 1),
        DtcoOp::Variants(c) => (c, 2),
    };
    let ctx = Ctx::new(&c)?;
    let coeff = ctx.coefficients()?;
    if which == 2 {
        let (lg, sp, n, mv) = ctx.cfg.device;
        let rows = variant_metrics(&DeviceParams::new(Architecture::Omni3d, lg, sp, n, mv), &coeff)?;
        return ctx.write("dtco_variants.csv", &variants_csv(&rows));
    }
    let mut all = Vec::new();
    let mut fronts = Vec::new();
    let mut csv = String::from("arch,lg_nm,sp_gs_nm,n_sheets,vdd_mv,energy_fj,delay_ps,edp,min_edp\n");
    for arch in Architecture::ALL {
        let rows = sweep(&DesignSpace::default(), arch, &coeff);
        let pts = feasible_metrics(&rows);
        let front = pareto_frontier(&pts)?;
        let best = min_edp(&pts)?;
        for m in &front {
            let p = m.params;
            csv += &format!(
                "{arch},{},{},{},{},{:.6},{:.6},{:.6},{}\n",
                p.lg_nm,
                p.sp_gs_nm,
                p.n_sheets,
                p.vdd_mv,
                m.energy,
                m.delay,
                m.edp,
                p == best.params
            );
        }
        fronts.push((arch.to_string(), pts, front, best));
        all.extend(rows);
    }
    if which == 0 {
        ctx.write("dtco_sweep.csv", &sweep_csv(&all))?;
    } else {
        ctx.write("dtco_pareto.csv", &csv)?;
    }
    ctx.write_svg("dtco_pareto.svg", || pareto_svg(&fronts))
}

fn sideplan(op: SideplanOp) -> Result<()> {
    let (c, which) = match op {
        SideplanOp::Cluster(c) => (c, 0),
        SideplanOp::Assign(c) => (c, 1),
        SideplanOp::Report(c) => (c, 2),
    };
    let ctx = Ctx::new(&c)?;
    let lib = load_flow_library(&ctx.cfg)?;
    let mut netlist = load_design(&ctx.cfg, &lib)?;
    if which == 0 {
        let clusters = cluster_cells(&netlist, &ClusterOptions::default());
        let mut csv = String::from("cluster,size,members\n");
        for cl in &clusters {
            let names: Vec<&str> = cl.members.iter().map(|&m| netlist.cell(m).name.as_str()).collect();
            csv += &format!("{},{},{}\n", cl.id, cl.size(), names.join(" "));
        }
        return ctx.write("clusters.csv", &csv);
    }
    plan_sides(&ctx.cfg, &mut netlist)?;
    let report = balance_report(&netlist, &ClusterOptions::default())?;
    if which == 1 {
        ctx.write("assigned.net", &serialize_netlist(&netlist))?;
    }
    ctx.write("balance.json", &report.to_json())?;
    ctx.write_svg("clusters.svg", || report.histogram_svg())
}

fn pnr(op: PnrOp) -> Result<()> {
    let (c, which) = match op {
        PnrOp::Place(c) => (c, 0),
        PnrOp::Cts(c) => (c, 1),
        PnrOp::Route(c) => (c, 2),
    };
    let ctx = Ctx::new(&c)?;
    if which < 2 {
        let lib = load_flow_library(&ctx.cfg)?;
        let netlist = load_design(&ctx.cfg, &lib)?;
        let mut placed = place_design(&ctx.cfg, lib, netlist)?;
        if which == 1 {
            let tree = placed.synthesize_clock(&ctx.cfg)?;
            let mut csv = String::from("level,buffer,flavor\n");
            for (i, lvl) in tree.levels.iter().enumerate() {
                for &b in lvl {
                    let cell = placed.netlist.cell(b);
                    csv += &format!("{i},{},{}\n", cell.name, cell.flavor);
                }
            }
            ctx.write("clock_tree.csv", &csv)?;
        }
        ctx.write("placement.csv", &placement_csv(&placed.netlist, &placed.placement))?;
        return ctx.write_svg("placement.svg", || placement_svg(&placed.netlist, &placed.placement));
    }
    let imp = implement(&ctx.cfg)?;
    let d = imp.design();
    let mut csv = String::from("sink,insertion_ps\n");
    for (n, t) in insertion_delays(&d, &analysis_options(&ctx.cfg))? {
        csv += &format!("{n},{t:.4}\n");
    }
    ctx.write("insertion.csv", &csv)?;
    ctx.write("routing.txt", &routing_dump(&imp.netlist, &imp.routing))?;
    ctx.write("wirelength.csv", &wirelength_csv(&wirelength_by_layer(&imp.routing)))?;
    println!("overflow {} wirelength {:.1} um", imp.routing.overflow_total(), imp.routing.total_length_nm() / 1000.0);
    ctx.write_svg("congestion_top.svg", || congestion_svg(&imp.routing, Side::Top))?;
    if imp.routing.stack.has_signal_side(Side::Bottom) {
        ctx.write_svg("congestion_bottom.svg", || congestion_svg(&imp.routing, Side::Bottom))?;
    }
    Ok(())
}

fn flow(op: FlowOp) -> Result<()> {
    match op {
        FlowOp::Run(c) => {
            let mut ctx = Ctx::new(&c)?;
            ctx.cfg.period_start = ctx.cfg.period_stop;
            let (res, _) = clock_sweep(&ctx.cfg)?;
            print!("{}", flow_csv(&res));
            ctx.write("flow_run.csv", &flow_csv(&res))
        }
        FlowOp::Sweep(c) => {
            let ctx = Ctx::new(&c)?;
            let (res, _) = clock_sweep(&ctx.cfg)?;
            print_selection(&res);
            ctx.write("flow_sweep.csv", &flow_csv(&res))?;
            ctx.write_svg("flow_sweep.svg", || flow_svg(std::slice::from_ref(&res)))
        }
        FlowOp::Compare(c) => {
            let ctx = Ctx::new(&c)?;
            let configs: Vec<FlowConfig> =
                Architecture::ALL.into_iter().map(|arch| FlowConfig { arch, ..ctx.cfg.clone() }).collect();
            let cmp = compare_architectures(&configs)?;
            print!("{}", comparison_csv(&cmp));
            ctx.write("compare.csv", &comparison_csv(&cmp))?;
            let names: Vec<String> = cmp.rows.iter().map(|r| r.arch.to_string()).collect();
            ctx.write_svg("compare_wirelength.svg", || {
                wirelength_svg(&names.iter().cloned().zip(cmp.rows.iter().map(|r| r.layers.clone())).collect::<Vec<_>>())
            })?;
            let rows: Vec<_> =
                names.iter().cloned().zip(&cmp.rows).map(|(n, r)| (n, r.row.breakdown, r.row.energy_parts)).collect();
            let (delay, energy) = breakdown_svg(&rows);
            ctx.write_svg("compare_delay.svg", || delay)?;
            ctx.write_svg("compare_energy.svg", || energy)
        }
    }
}

fn print_selection(res: &FlowResult) {
    match res.selected() {
        Some(r) => println!(
            "min EDP at {:.0} ps: delay {:.2} ps, energy {:.3} fJ, EDP {:.3} fJ·ps",
            r.period, r.achieved_delay, r.energy, r.edp
        ),
        None => println!("no valid period"),
    }
}

fn report(op: ReportOp) -> Result<()> {
    let ReportOp::Emit(c) = op;
    let ctx = Ctx::new(&c)?;
    let imp = implement(&ctx.cfg)?;
    let d = imp.design();
    let opts = analysis_options(&ctx.cfg);
    let period = ctx.cfg.period_stop;
    let t = sta(&d, period, &opts)?;
    let e = energy(&d, period, &opts)?;
    ctx.write("timing.csv", &timing_csv(&t))?;
    ctx.write("timing.json", &timing_json(&t, Some(&e)))?;
    let name = format!("{} {}", ctx.cfg.design, ctx.cfg.arch);
    ctx.write("energy.csv", &energy_csv(&[(name.clone(), e)]))?;
    // the same logical netlist on CFET is the area reference
    let lib = &imp.library;
    let original = load_design(&ctx.cfg, lib)?;
    let area = area_report((&original, ctx.cfg.arch), (&original, Architecture::Cfet), lib)?;
    ctx.write("area.csv", &area_csv(&area))?;
    let wl = wirelength_by_layer(&imp.routing);
    ctx.write("wirelength.csv", &wirelength_csv(&wl))?;
    ctx.write_svg("area.svg", || area_svg(&area, &ctx.cfg.arch.to_string(), "CFET"))?;
    ctx.write_svg("wirelength.svg", || wirelength_svg(&[(name.clone(), wl.clone())]))?;
    let (delay, en) = breakdown_svg(&[(name.clone(), omni3d::analysis::delay_breakdown(&t), e)]);
    ctx.write_svg("delay.svg", || delay)?;
    ctx.write_svg("energy.svg", || en)
}

fn main() -> Result<()> {
    match Cli::parse().group {
        Group::Dtco(op) => dtco(op),
        Group::Sideplan(op) => sideplan(op),
        Group::Pnr(op) => pnr(op),
        Group::Flow(op) => flow(op),
        Group::Report(op) => report(op),
    }
}
