use std::path::{Path, PathBuf};

use super::FlowError;
use crate::celllib::Architecture;
use crate::text::split_comment;

/// How cell flavors are chosen before placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AssignMode {
    /// Clusters alternate flavors until the top side holds half the cells.
    Clustered,
    /// Clusters are assigned greedily toward a top-side share.
    Ratio(f64),
    /// Every cell draws its flavor independently with the given top-side share.
    Random(f64),
}

/// Everything one flow run reads, as parsed from a `key = value` file.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    /// Fixture name or netlist file.
    pub design: String,
    pub arch: Architecture,
    /// Characterized library file; built from `device` when absent.
    pub library: Option<PathBuf>,
    pub skeleton: Option<PathBuf>,
    pub coefficients: Option<PathBuf>,
    pub stack: Option<PathBuf>,
    /// Lg, gate-spacer, sheet count and supply in mV of the characterized corner.
    pub device: (u32, u32, u32, u32),
    pub utilization: f64,
    /// Clock sweep from `period_start` down to `period_stop`, ps.
    pub period_start: f64,
    pub period_stop: f64,
    pub period_step: f64,
    pub max_overflow: u64,
    pub min_slack: f64,
    pub max_skew: f64,
    pub seed: u64,
    pub cts_seed: u64,
    pub assign: AssignMode,
    pub beta: f64,
    pub flip_clock: bool,
    pub flip_datapath: bool,
    pub max_fanout: usize,
    pub max_level: u32,
    pub gcell_sites: u32,
    pub gcell_rows: u32,
    pub rrr_iterations: usize,
    pub moves_per_cell: usize,
    pub activity: f64,
    pub top_k: usize,
    pub out: PathBuf,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            design: "adder16".into(),
            arch: Architecture::Omni3d,
            library: None,
            skeleton: None,
            coefficients: None,
            stack: None,
            device: (14, 9, 1, 450),
            utilization: 0.6,
            period_start: 300.0,
            period_stop: 100.0,
            period_step: 20.0,
            max_overflow: 300,
            min_slack: -50.0,
            max_skew: 10.0,
            seed: 1,
            cts_seed: 1,
            assign: AssignMode::Clustered,
            beta: 1.2,
            flip_clock: true,
            flip_datapath: true,
            max_fanout: 8,
            max_level: 7,
            gcell_sites: 10,
            gcell_rows: 10,
            rrr_iterations: 8,
            moves_per_cell: 8,
            activity: 0.1,
            top_k: 100,
            out: PathBuf::from("out"),
        }
    }
}

pub fn parse_arch(s: &str) -> Option<Architecture> {
    match s.to_ascii_lowercase().as_str() {
        "cfet" => Some(Architecture::Cfet),
        "omni" | "omni3d" => Some(Architecture::Omni3d),
        "noim" | "omni_noim" | "omni3d_noim" => Some(Architecture::Omni3dNoIm),
        _ => None,
    }
}

impl FlowConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("bad number `{v}`"))
        }
        fn flag(v: &str) -> Result<bool, String> {
            match v {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(format!("bad flag `{v}`")),
            }
        }
        match key {
            "design" => self.design = value.to_string(),
            "arch" => self.arch = parse_arch(value).ok_or_else(|| format!("unknown architecture `{value}`"))?,
            "library" => self.library = Some(value.into()),
            "skeleton" => self.skeleton = Some(value.into()),
            "coefficients" => self.coefficients = Some(value.into()),
            "stack" => self.stack = Some(value.into()),
            "device" => {
                let v: Vec<u32> = value.split(',').map(|x| num(x.trim())).collect::<Result<_, _>>()?;
                let [a, b, c, d] = v[..] else { return Err("device needs lg,spacer,sheets,vdd_mv".into()) };
                self.device = (a, b, c, d);
            }
            "utilization" => self.utilization = num(value)?,
            "period_start" => self.period_start = num(value)?,
            "period_stop" => self.period_stop = num(value)?,
            "period_step" => self.period_step = num(value)?,
            "period" => {
                let p = num(value)?;
                self.period_start = p;
                self.period_stop = p;
            }
            "max_overflow" => self.max_overflow = num(value)?,
            "min_slack" => self.min_slack = num(value)?,
            "max_skew" => self.max_skew = num(value)?,
            "seed" => self.seed = num(value)?,
            "cts_seed" => self.cts_seed = num(value)?,
            "assign" => {
                let (mode, frac) = match value.split_once(':') {
                    Some((m, f)) => (m, Some(num::<f64>(f)?)),
                    None => (value, None),
                };
                self.assign = match (mode, frac) {
                    ("clustered", None) => AssignMode::Clustered,
                    ("ratio", Some(f)) => AssignMode::Ratio(f),
                    ("random", f) => AssignMode::Random(f.unwrap_or(0.5)),
                    _ => return Err(format!("bad assignment `{value}`")),
                };
            }
            "beta" => self.beta = num(value)?,
            "flip_clock" => self.flip_clock = flag(value)?,
            "flip_datapath" => self.flip_datapath = flag(value)?,
            "max_fanout" => self.max_fanout = num(value)?,
            "max_level" => self.max_level = num(value)?,
            "gcell_sites" => self.gcell_sites = num(value)?,
            "gcell_rows" => self.gcell_rows = num(value)?,
            "rrr_iterations" => self.rrr_iterations = num(value)?,
            "moves_per_cell" => self.moves_per_cell = num(value)?,
            "activity" => self.activity = num(value)?,
            "top_k" => self.top_k = num(value)?,
            "out" => self.out = value.into(),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Checks ranges that single settings cannot.
    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |msg: &str| Err(FlowError::Config { line: 0, msg: msg.to_string() });
        if !(self.period_step > 0.0) || !self.period_step.is_finite() {
            return bad("period_step must be positive");
        }
        if !(self.period_stop > 0.0) || !(self.period_start >= self.period_stop) || !self.period_start.is_finite() {
            return bad("sweep must run from a larger start down to a positive stop");
        }
        if !self.min_slack.is_finite() || !self.max_skew.is_finite() {
            return bad("gates must be finite");
        }
        if !(self.utilization > 0.4 && self.utilization <= 0.95) {
            return bad("utilization must lie in (0.4, 0.95]");
        }
        if !(0.0..=1.0).contains(&self.activity) {
            return bad("activity must lie in [0, 1]");
        }
        if self.max_fanout < 2 || self.top_k == 0 {
            return bad("max_fanout must be at least 2 and top_k positive");
        }
        Ok(())
    }

    /// Target periods, loosest first.
    pub fn periods(&self) -> Vec<f64> {
        let n = ((self.period_start - self.period_stop) / self.period_step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.period_start - i as f64 * self.period_step).collect()
    }

    /// Resolves relative file paths against `dir`.
    pub fn relative_to(mut self, dir: &Path) -> Self {
        for p in [&mut self.library, &mut self.skeleton, &mut self.coefficients, &mut self.stack].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        let d = dir.join(&self.design);
        if d.is_file() {
            self.design = d.to_string_lossy().into_owned();
        }
        self
    }
}

/// Parses a config file on top of the defaults. Blank lines and `#` comments are ignored.
pub fn parse_config(text: &str) -> Result<FlowConfig, FlowError> {
    let mut cfg = FlowConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let (content, _) = split_comment(raw);
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| FlowError::Config { line: i + 1, msg };
        let (k, v) = content.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
        cfg.set(k.trim(), v.trim()).map_err(err)?;
    }
    cfg.validate()?;
    Ok(cfg)
}
