//! Device design-space exploration.
//!
//! Every point of the device parameter grid is evaluated on a wire-loaded FO3
//! inverter ring oscillator through a closed-form surrogate: a contact plus
//! channel resistance with an overdrive penalty, additive capacitance terms,
//! and a threshold voltage retargeted so each FET leaks a fixed current.

mod characterize;
mod coeff;
mod pareto;
mod report;

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::celllib::{Architecture, PinAccessPattern};

pub use characterize::{characterize_library, default_library};
pub use coeff::{parse_coefficients, SurrogateCoefficients, DEFAULT_COEFFICIENTS};
pub use pareto::{min_edp, pareto_frontier};
pub use report::{pareto_svg, sweep_csv, variants_csv};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DtcoError {
    #[error("line {line}: {msg}")]
    Coefficients { line: usize, msg: String },
    #[error("coefficient `{0}` must be positive")]
    NonPositive(&'static str),
    #[error("design point {0} is infeasible ({1})")]
    Infeasible(DeviceParams, Feasibility),
    #[error("no design points to choose from")]
    Empty,
    #[error(transparent)]
    Library(#[from] crate::celllib::LibraryError),
}

/// Contacted gate pitch of the whole space, nm.
pub const CGP_NM: u32 = 42;
/// Shortest contact that survives the geometry filter, nm.
pub const MIN_CONTACT_NM: f64 = 10.0;
/// Fan-out of the ring-oscillator stage.
pub const RO_FANOUT: f64 = 3.0;

/// One device parameter tuple. Voltages are stored in mV so tuples order and hash exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DeviceParams {
    pub arch: Architecture,
    pub pattern: PinAccessPattern,
    pub lg_nm: u32,
    pub sp_gs_nm: u32,
    pub n_sheets: u32,
    pub vdd_mv: u32,
}

impl DeviceParams {
    pub fn new(arch: Architecture, lg_nm: u32, sp_gs_nm: u32, n_sheets: u32, vdd_mv: u32) -> Self {
        DeviceParams { arch, pattern: PinAccessPattern::Sio, lg_nm, sp_gs_nm, n_sheets, vdd_mv }
    }

    pub fn vdd(&self) -> f64 {
        self.vdd_mv as f64 / 1000.0
    }

    pub fn cgp_nm(&self) -> u32 {
        CGP_NM
    }

    pub fn gate_cut_nm(&self) -> f64 {
        9.0
    }

    pub fn gate_ext_nm(&self) -> f64 {
        8.5
    }

    pub fn sd_ext_nm(&self) -> f64 {
        0.0
    }

    pub fn m1_pitch_nm(&self) -> f64 {
        18.0
    }

    pub fn m1_width_nm(&self) -> f64 {
        9.0
    }

    pub fn w_ch_nm(&self) -> f64 {
        self.arch.channel_width_nm()
    }

    /// S/D-to-tall-via space; CFET only.
    pub fn sd_via_space_nm(&self) -> Option<f64> {
        (self.arch == Architecture::Cfet).then_some(9.0)
    }

    /// S/D-to-buried-rail space; CFET only.
    pub fn sd_bpr_space_nm(&self) -> Option<f64> {
        (self.arch == Architecture::Cfet).then_some(3.0)
    }

    pub fn w_eff_nm(&self) -> f64 {
        self.n_sheets as f64 * self.w_ch_nm()
    }

    /// `CGP − Lg − 2·sp_gs`, nm.
    pub fn contact_length_nm(&self) -> f64 {
        self.cgp_nm() as f64 - self.lg_nm as f64 - 2.0 * self.sp_gs_nm as f64
    }

    fn key(&self) -> (Architecture, PinAccessPattern, u32, u32, u32, u32) {
        (self.arch, self.pattern, self.lg_nm, self.sp_gs_nm, self.n_sheets, self.vdd_mv)
    }

    pub fn with_arch(self, arch: Architecture) -> Self {
        DeviceParams { arch, ..self }
    }

    pub fn with_pattern(self, pattern: PinAccessPattern) -> Self {
        DeviceParams { pattern, ..self }
    }
}

impl Ord for DeviceParams {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for DeviceParams {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DeviceParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{} lg={} sp={} n={} vdd={:.2}",
            self.arch,
            self.pattern,
            self.lg_nm,
            self.sp_gs_nm,
            self.n_sheets,
            self.vdd()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feasibility {
    Ok,
    ContactTooShort,
    LeakageUnmeetable,
}

impl Feasibility {
    pub fn is_ok(self) -> bool {
        self == Feasibility::Ok
    }

    pub fn token(self) -> &'static str {
        match self {
            Feasibility::Ok => "ok",
            Feasibility::ContactTooShort => "contact_too_short",
            Feasibility::LeakageUnmeetable => "leakage_unmeetable",
        }
    }
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Parameter domains of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpace {
    pub lg_nm: Vec<u32>,
    pub sp_gs_nm: Vec<u32>,
    pub n_sheets: Vec<u32>,
    pub vdd_mv: Vec<u32>,
}

impl Default for DesignSpace {
    fn default() -> Self {
        DesignSpace {
            lg_nm: vec![14, 15, 16, 17],
            sp_gs_nm: vec![5, 7, 9],
            n_sheets: vec![1, 2, 3, 4],
            vdd_mv: vec![450, 500, 550, 600, 650, 700],
        }
    }
}

impl DesignSpace {
    /// Full Cartesian product for one architecture, sorted and deduplicated.
    pub fn enumerate(&self, arch: Architecture) -> Vec<DeviceParams> {
        let mut out = Vec::with_capacity(
            self.lg_nm.len() * self.sp_gs_nm.len() * self.n_sheets.len() * self.vdd_mv.len(),
        );
        for &lg in &self.lg_nm {
            for &sp in &self.sp_gs_nm {
                for &n in &self.n_sheets {
                    for &v in &self.vdd_mv {
                        out.push(DeviceParams::new(arch, lg, sp, n, v));
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

/// The default grid for `arch`: 4 gate lengths × 3 spacers × 4 sheet counts × 6 supplies.
pub fn enumerate_design_space(arch: Architecture) -> Vec<DeviceParams> {
    DesignSpace::default().enumerate(arch)
}

/// Threshold voltage that sets the off current per FET to the target, V.
///
/// Solves `i0·W_eff·10^(−vt/ss) = I_target` in closed form.
pub fn retarget_vt(p: &DeviceParams, c: &SurrogateCoefficients) -> Result<f64, DtcoError> {
    if c.i0_leak <= 0.0 {
        return Err(DtcoError::NonPositive("i0_leak"));
    }
    if c.ss_mv_dec <= 0.0 {
        return Err(DtcoError::NonPositive("ss_mv_dec"));
    }
    if c.i_leak_target <= 0.0 {
        return Err(DtcoError::NonPositive("i_leak_target"));
    }
    let ss = c.ss_mv_dec / 1000.0;
    Ok(ss * (c.i0_leak * p.w_eff_nm() / c.i_leak_target).log10())
}

/// Geometry and leakage filter.
pub fn check_feasibility(p: &DeviceParams, c: &SurrogateCoefficients) -> Feasibility {
    if p.contact_length_nm() < MIN_CONTACT_NM {
        return Feasibility::ContactTooShort;
    }
    match retarget_vt(p, c) {
        Ok(vt) if vt < p.vdd() => Feasibility::Ok,
        _ => Feasibility::LeakageUnmeetable,
    }
}

/// Per-stage electrical quantities of one device point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceMetrics {
    pub params: DeviceParams,
    /// kΩ
    pub r_eff: f64,
    /// fF per stage
    pub c_eff: f64,
    /// fF, one INV input
    pub c_in: f64,
    /// fF, one INV output
    pub c_out: f64,
    /// fJ per stage
    pub energy: f64,
    /// ps per stage
    pub delay: f64,
    pub edp: f64,
    pub vt: f64,
}

/// INV input and output capacitance, fF, including pattern deltas.
pub fn inverter_caps(p: &DeviceParams, c: &SurrogateCoefficients) -> (f64, f64) {
    let w = p.w_eff_nm();
    let lg = p.lg_nm as f64;
    let im = if p.arch.has_im() { 1.0 } else { 0.0 };
    let cfet = if p.arch == Architecture::Cfet { 1.0 } else { 0.0 };
    let (din, dout) = p.pattern.cap_deltas();
    let cin = c.c_gate_aerial * lg * w + c.c_par_gs * w / p.sp_gs_nm as f64 + c.c_im_in * im;
    let cout = c.c_sd_out * w + c.c_im_out * im + c.c_tall_via * cfet;
    (cin * (1.0 + din), cout * (1.0 + dout))
}

/// INV drive resistance at the retargeted threshold, kΩ.
pub fn inverter_resistance(p: &DeviceParams, c: &SurrogateCoefficients, vt: f64) -> f64 {
    let w = p.w_eff_nm();
    let base = (c.r_contact + c.r_channel_per_lg * p.lg_nm as f64) / w;
    let overdrive = (p.vdd() - vt).powf(c.overdrive_alpha);
    let tall_via = if p.arch == Architecture::Cfet { c.r_tall_via } else { 0.0 };
    (base / overdrive + tall_via) / 1000.0
}

/// Wire-loaded FO3 ring-oscillator stage metrics for a feasible point.
pub fn ro_metrics(p: &DeviceParams, c: &SurrogateCoefficients) -> Result<DeviceMetrics, DtcoError> {
    let feas = check_feasibility(p, c);
    if !feas.is_ok() {
        return Err(DtcoError::Infeasible(*p, feas));
    }
    let vt = retarget_vt(p, c)?;
    let r_eff = inverter_resistance(p, c, vt);
    let (c_in, c_out) = inverter_caps(p, c);
    let c_eff = (1.0 + RO_FANOUT) * c_in + c_out + c.c_wire_per_um * c.wire_load_um;
    let energy = c_eff * p.vdd() * p.vdd();
    let delay = 0.69 * r_eff * c_eff;
    Ok(DeviceMetrics { params: *p, r_eff, c_eff, c_in, c_out, energy, delay, edp: energy * delay, vt })
}

/// One row of a sweep: the point, why it was kept or dropped, and its metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: DeviceParams,
    pub feasibility: Feasibility,
    pub metrics: Option<DeviceMetrics>,
}

/// Evaluates every point of `space` in parallel; rows come back in parameter order.
pub fn sweep(space: &DesignSpace, arch: Architecture, c: &SurrogateCoefficients) -> Vec<SweepRow> {
    let points = space.enumerate(arch);
    let mut rows: Vec<SweepRow> = points
        .par_iter()
        .map(|p| {
            let feasibility = check_feasibility(p, c);
            SweepRow { params: *p, feasibility, metrics: ro_metrics(p, c).ok() }
        })
        .collect();
    rows.sort_by_key(|r| r.params);
    rows
}

/// Metrics of the feasible rows.
pub fn feasible_metrics(rows: &[SweepRow]) -> Vec<DeviceMetrics> {
    rows.iter().filter_map(|r| r.metrics).collect()
}

/// One row of the variant comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantRow {
    pub name: String,
    pub metrics: DeviceMetrics,
    /// r_eff over CFET r_eff at the same corner
    pub r_vs_cfet: f64,
    /// c_eff over the SIO c_eff with IM
    pub c_vs_sio: f64,
}

/// Reff/Ceff of the Omni 3D pin-access variants and the no-IM cell at one corner.
pub fn variant_metrics(
    base: &DeviceParams,
    c: &SurrogateCoefficients,
) -> Result<Vec<VariantRow>, DtcoError> {
    let omni = base.with_arch(Architecture::Omni3d).with_pattern(PinAccessPattern::Sio);
    let cfet = ro_metrics(&base.with_arch(Architecture::Cfet).with_pattern(PinAccessPattern::Sio), c)?;
    let sio = ro_metrics(&omni, c)?;
    let mut variants: Vec<(String, DeviceParams)> = PinAccessPattern::ALL
        .iter()
        .map(|&pat| (pat.token().to_string(), omni.with_pattern(pat)))
        .collect();
    variants.push(("noIM".to_string(), omni.with_arch(Architecture::Omni3dNoIm)));
    variants
        .into_iter()
        .map(|(name, p)| {
            let m = ro_metrics(&p, c)?;
            Ok(VariantRow { name, r_vs_cfet: m.r_eff / cfet.r_eff, c_vs_sio: m.c_eff / sio.c_eff, metrics: m })
        })
        .collect()
}

/// CFET-over-Omni ratios at one corner: (energy, delay, edp, Omni r_eff / CFET r_eff).
pub fn cfet_over_omni(p: &DeviceParams, c: &SurrogateCoefficients) -> Result<[f64; 4], DtcoError> {
    let cf = ro_metrics(&p.with_arch(Architecture::Cfet), c)?;
    let om = ro_metrics(&p.with_arch(Architecture::Omni3d), c)?;
    Ok([cf.energy / om.energy, cf.delay / om.delay, cf.edp / om.edp, om.r_eff / cf.r_eff])
}
