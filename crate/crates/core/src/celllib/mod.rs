//! Standard-cell library model.
//!
//! A master is one cell archetype for one architecture variant, pin-access
//! pattern and flavor. Geometry is tracks × gate pitches; electrical values
//! come from device characterization (see [`crate::dtco::characterize_library`]).

mod file;
mod skeleton;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::netlist::{CellPins, Flavor, MasterCatalog, Side};

pub use file::{load_library, serialize_library};
pub use skeleton::{parse_skeleton, CellTemplate, LibrarySkeleton, DEFAULT_SKELETON};

/// Contacted gate pitch, nm.
pub const CGP_NM: f64 = 42.0;
/// M1 pitch, which sets the track height, nm.
pub const TRACK_PITCH_NM: f64 = 18.0;

/// Relative tolerance for pattern-capacitance deltas at load time.
pub const PATTERN_DELTA_TOL: f64 = 0.005;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LibraryError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown architecture `{name}`")]
    UnknownArchitecture { line: usize, name: String },
    #[error("line {line}: negative capacitance on `{cell}`")]
    NegativeCapacitance { line: usize, cell: String },
    #[error("`{cell}` ({arch}, {pattern}) has no {flavor} counterpart")]
    MissingCounterpart { cell: String, arch: Architecture, pattern: PinAccessPattern, flavor: Flavor },
    #[error("`{cell}` ({arch}, {pattern}, {flavor}): {what} is {got:.4}x its SIO sibling, expected {expected:.4}x")]
    PatternDelta {
        cell: String,
        arch: Architecture,
        pattern: PinAccessPattern,
        flavor: Flavor,
        what: &'static str,
        expected: f64,
        got: f64,
    },
    #[error("cell `{0}` is missing from the library")]
    MissingCell(String),
    #[error("skeleton entry `{cell}` lacks `{key}`")]
    MissingScaleFactor { cell: String, key: &'static str },
    #[error("`{cell}` pin lists differ between variants")]
    InconsistentPins { cell: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PdnStyle {
    /// Both rails on the back side (buried rails + BSPDN).
    Backside,
    /// Vdd on the bottom side, Vss on the top side.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum Architecture {
    Cfet,
    Omni3d,
    Omni3dNoIm,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::Cfet, Architecture::Omni3d, Architecture::Omni3dNoIm];

    pub fn track_height(self) -> u32 {
        match self {
            Architecture::Cfet => 4,
            Architecture::Omni3d | Architecture::Omni3dNoIm => 3,
        }
    }

    pub fn has_im(self) -> bool {
        self == Architecture::Omni3d
    }

    pub fn pdn_style(self) -> PdnStyle {
        match self {
            Architecture::Cfet => PdnStyle::Backside,
            _ => PdnStyle::Split,
        }
    }

    pub fn is_double_sided(self) -> bool {
        self != Architecture::Cfet
    }

    /// Channel width, nm: CFET is limited by the tall-via spacing.
    pub fn channel_width_nm(self) -> f64 {
        match self {
            Architecture::Cfet => 27.0,
            _ => 28.0,
        }
    }

    pub fn row_height_nm(self) -> f64 {
        self.track_height() as f64 * TRACK_PITCH_NM
    }

    pub fn token(self) -> &'static str {
        match self {
            Architecture::Cfet => "CFET",
            Architecture::Omni3d => "OMNI",
            Architecture::Omni3dNoIm => "OMNI_NOIM",
        }
    }

    /// Patterns a library ships for this architecture.
    pub fn patterns(self) -> &'static [PinAccessPattern] {
        match self {
            Architecture::Cfet => &[PinAccessPattern::Sio],
            _ => &PinAccessPattern::ALL,
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "CFET" | "cfet" => Ok(Architecture::Cfet),
            "OMNI" | "omni" | "Omni3D" | "omni3d" => Ok(Architecture::Omni3d),
            "OMNI_NOIM" | "omni_noim" | "Omni3D_noIM" | "noim" => Ok(Architecture::Omni3dNoIm),
            _ => Err(s.to_string()),
        }
    }
}

/// Which sides carry input and output pins.
///
/// A TI SIO cell takes its input on top and drives its output on the bottom;
/// BI is the mirror image. DI adds an input on the output side, DO adds an
/// output on the input side, DIDO does both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PinAccessPattern {
    Sio,
    Di,
    Do,
    Dido,
}

impl PinAccessPattern {
    pub const ALL: [PinAccessPattern; 4] =
        [PinAccessPattern::Sio, PinAccessPattern::Di, PinAccessPattern::Do, PinAccessPattern::Dido];

    fn flavor_side(flavor: Flavor) -> Side {
        flavor.input_side().unwrap_or(Side::Top)
    }

    pub fn input_sides(self, flavor: Flavor) -> Vec<Side> {
        let s = Self::flavor_side(flavor);
        match self {
            PinAccessPattern::Sio | PinAccessPattern::Do => vec![s],
            PinAccessPattern::Di | PinAccessPattern::Dido => vec![Side::Top, Side::Bottom],
        }
    }

    pub fn output_sides(self, flavor: Flavor) -> Vec<Side> {
        let s = Self::flavor_side(flavor);
        match self {
            PinAccessPattern::Sio | PinAccessPattern::Di => vec![s.opposite()],
            PinAccessPattern::Do | PinAccessPattern::Dido => vec![Side::Top, Side::Bottom],
        }
    }

    /// Fractional (input, output) pin-capacitance increase over SIO.
    pub fn cap_deltas(self) -> (f64, f64) {
        const DO: (f64, f64) = (0.042, 0.158);
        const DI: (f64, f64) = (0.218, 0.058);
        match self {
            PinAccessPattern::Sio => (0.0, 0.0),
            PinAccessPattern::Do => DO,
            PinAccessPattern::Di => DI,
            PinAccessPattern::Dido => (DO.0 + DI.0, DO.1 + DI.1),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            PinAccessPattern::Sio => "SIO",
            PinAccessPattern::Di => "DI",
            PinAccessPattern::Do => "DO",
            PinAccessPattern::Dido => "DIDO",
        }
    }
}

impl fmt::Display for PinAccessPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for PinAccessPattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SIO" => Ok(PinAccessPattern::Sio),
            "DI" => Ok(PinAccessPattern::Di),
            "DO" => Ok(PinAccessPattern::Do),
            "DIDO" => Ok(PinAccessPattern::Dido),
            _ => Err(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellMaster {
    pub name: String,
    pub arch: Architecture,
    pub pattern: PinAccessPattern,
    pub flavor: Flavor,
    pub width_gp: u32,
    pub input_pins: Vec<String>,
    pub output_pins: Vec<String>,
    /// fF, one entry per input pin.
    pub cap_in: Vec<f64>,
    /// fF
    pub cap_out: f64,
    /// kΩ
    pub r_drive: f64,
    /// fJ per output toggle
    pub e_internal: f64,
    /// ps
    pub intrinsic_delay: f64,
    pub clock_pin: Option<String>,
    /// ps, sequential masters only
    pub setup: Option<f64>,
    /// nA, whole cell
    pub leakage_na: f64,
    pub is_clock_buffer: bool,
}

impl CellMaster {
    pub fn height_tracks(&self) -> u32 {
        self.arch.track_height()
    }

    pub fn width_nm(&self) -> f64 {
        self.width_gp as f64 * CGP_NM
    }

    pub fn height_nm(&self) -> f64 {
        self.height_tracks() as f64 * TRACK_PITCH_NM
    }

    pub fn cap_in_of(&self, pin: &str) -> Option<f64> {
        self.input_pins.iter().position(|p| p == pin).map(|i| self.cap_in[i])
    }

    /// Σ input caps + output cap, fF.
    pub fn cap_total(&self) -> f64 {
        self.cap_in.iter().sum::<f64>() + self.cap_out
    }
}

/// Cell footprint area in nm²: `width_gp·CGP × tracks·pitch`.
pub fn cell_area(master: &CellMaster) -> f64 {
    master.width_nm() * master.height_nm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MasterKey {
    pub arch: Architecture,
    pub pattern: PinAccessPattern,
    pub flavor: Flavor,
}

#[derive(Debug, Clone, Default)]
pub struct CellLibrary {
    masters: BTreeMap<(String, MasterKey), CellMaster>,
    pins: BTreeMap<String, CellPins>,
    pub cgp_nm: f64,
    pub track_pitch_nm: f64,
    pub version: String,
    /// Supply the masters of each architecture were characterized at, V.
    pub vdd: BTreeMap<Architecture, f64>,
}

impl MasterCatalog for CellLibrary {
    fn cell_pins(&self, master: &str) -> Option<&CellPins> {
        self.pins.get(master)
    }
}

impl CellLibrary {
    pub fn new(version: impl Into<String>) -> Self {
        CellLibrary {
            cgp_nm: CGP_NM,
            track_pitch_nm: TRACK_PITCH_NM,
            version: version.into(),
            ..Default::default()
        }
    }

    pub fn insert(&mut self, m: CellMaster) {
        self.pins.entry(m.name.clone()).or_insert_with(|| CellPins {
            inputs: m.input_pins.clone(),
            outputs: m.output_pins.clone(),
            clock: m.clock_pin.clone(),
            is_sequential: m.clock_pin.is_some(),
            is_clock_buffer: m.is_clock_buffer,
        });
        let key = MasterKey { arch: m.arch, pattern: m.pattern, flavor: m.flavor };
        self.masters.insert((m.name.clone(), key), m);
    }

    pub fn masters(&self) -> impl Iterator<Item = &CellMaster> {
        self.masters.values()
    }

    pub fn len(&self) -> usize {
        self.masters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masters.is_empty()
    }

    pub fn cell_names(&self) -> impl Iterator<Item = &str> {
        self.pins.keys().map(|s| s.as_str())
    }

    pub fn master(
        &self,
        name: &str,
        arch: Architecture,
        pattern: PinAccessPattern,
        flavor: Flavor,
    ) -> Option<&CellMaster> {
        self.masters.get(&(name.to_string(), MasterKey { arch, pattern, flavor }))
    }

    /// Any flavor/pattern of `name` for `arch`; width and pins do not depend on either.
    pub fn any_master(&self, name: &str, arch: Architecture) -> Option<&CellMaster> {
        self.masters.iter().find(|((n, k), _)| n == name && k.arch == arch).map(|(_, m)| m)
    }

    pub fn vdd_of(&self, arch: Architecture) -> f64 {
        self.vdd.get(&arch).copied().unwrap_or(0.45)
    }

    /// A clock-buffer master name, if the library has one.
    pub fn clock_buffer_name(&self) -> Option<&str> {
        self.pins.iter().find(|(_, p)| p.is_clock_buffer).map(|(n, _)| n.as_str())
    }

    /// Checks the flavor-counterpart and pattern-delta invariants.
    pub fn validate(&self) -> Result<(), LibraryError> {
        for ((name, key), m) in &self.masters {
            if m.flavor == Flavor::Unassigned {
                return Err(LibraryError::Syntax { line: 0, msg: format!("`{name}` has no flavor") });
            }
            let other = MasterKey { flavor: key.flavor.flipped(), ..*key };
            if !self.masters.contains_key(&(name.clone(), other)) {
                return Err(LibraryError::MissingCounterpart {
                    cell: name.clone(),
                    arch: key.arch,
                    pattern: key.pattern,
                    flavor: other.flavor,
                });
            }
            let pins = &self.pins[name];
            if pins.inputs != m.input_pins || pins.outputs != m.output_pins {
                return Err(LibraryError::InconsistentPins { cell: name.clone() });
            }
            if key.pattern == PinAccessPattern::Sio {
                continue;
            }
            let sio_key = MasterKey { pattern: PinAccessPattern::Sio, ..*key };
            let Some(sio) = self.masters.get(&(name.clone(), sio_key)) else { continue };
            let (din, dout) = key.pattern.cap_deltas();
            let delta_err = |what, expected: f64, got: f64| LibraryError::PatternDelta {
                cell: name.clone(),
                arch: key.arch,
                pattern: key.pattern,
                flavor: key.flavor,
                what,
                expected,
                got,
            };
            for (c, s) in m.cap_in.iter().zip(&sio.cap_in) {
                if *s > 0.0 {
                    let got = c / s;
                    if (got / (1.0 + din) - 1.0).abs() > PATTERN_DELTA_TOL {
                        return Err(delta_err("cap_in", 1.0 + din, got));
                    }
                }
            }
            if sio.cap_out > 0.0 {
                let got = m.cap_out / sio.cap_out;
                if (got / (1.0 + dout) - 1.0).abs() > PATTERN_DELTA_TOL {
                    return Err(delta_err("cap_out", 1.0 + dout, got));
                }
            }
        }
        Ok(())
    }

    /// Area of `cell` in `arch_a` over its area in `arch_b`.
    pub fn area_ratio(
        &self,
        cell: &str,
        arch_a: Architecture,
        arch_b: Architecture,
    ) -> Result<f64, LibraryError> {
        let a = self.any_master(cell, arch_a).ok_or_else(|| LibraryError::MissingCell(cell.into()))?;
        let b = self.any_master(cell, arch_b).ok_or_else(|| LibraryError::MissingCell(cell.into()))?;
        Ok(cell_area(a) / cell_area(b))
    }
}
