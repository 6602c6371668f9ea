use std::fmt;

use super::LayoutError;
use crate::netlist::Side;
use crate::text::{fields, num, split_comment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Allow {
    /// Signal and clock routing.
    Signal,
    Power,
    /// Block pins only.
    Io,
}

impl Allow {
    fn token(self) -> &'static str {
        match self {
            Allow::Signal => "sig",
            Allow::Power => "pwr",
            Allow::Io => "io",
        }
    }
}

/// Index of a layer in its stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LayerId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    pub pitch_nm: f64,
    pub width_nm: f64,
    /// Ω/sq
    pub rsq: f64,
    /// fF/µm
    pub cap_ff_per_um: f64,
    pub dir: Dir,
    pub allow: Allow,
    /// Share of tracks taken by the power grid.
    pub pdn: f64,
    /// `None` for the middle I/O layer.
    pub side: Option<Side>,
    /// Metal level, 1 for M1.
    pub level: u32,
}

impl Layer {
    /// kΩ per µm of wire.
    pub fn r_kohm_per_um(&self) -> f64 {
        self.rsq * 1000.0 / self.width_nm / 1000.0
    }

    /// Routing tracks across `span_nm` after the power-grid share is removed.
    pub fn tracks(&self, span_nm: f64) -> u32 {
        ((span_nm / self.pitch_nm).floor() * (1.0 - self.pdn)).floor().max(0.0) as u32
    }
}

/// Layers in physical order, top of the extraction order first.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub layers: Vec<Layer>,
}

pub const OMNI_STACK: &str = include_str!("../../data/omni.stack");
pub const CFET_STACK: &str = include_str!("../../data/cfet.stack");

impl LayerStack {
    pub fn omni() -> Self {
        parse_stack(OMNI_STACK).expect("shipped stack parses")
    }

    pub fn cfet() -> Self {
        parse_stack(CFET_STACK).expect("shipped stack parses")
    }

    pub fn layer(&self, id: LayerId) -> &Layer {
        &self.layers[id.0]
    }

    pub fn find(&self, name: &str) -> Option<LayerId> {
        self.layers.iter().position(|l| l.name == name).map(LayerId)
    }

    /// Signal layers of one side up to `max_level`, lowest level first.
    pub fn signal_layers(&self, side: Side, max_level: u32) -> Vec<LayerId> {
        let mut v: Vec<LayerId> = (0..self.layers.len())
            .map(LayerId)
            .filter(|&id| {
                let l = self.layer(id);
                l.side == Some(side) && l.allow == Allow::Signal && l.level <= max_level
            })
            .collect();
        v.sort_by_key(|id| self.layer(*id).level);
        v
    }

    pub fn io_layer(&self) -> Option<LayerId> {
        self.layers.iter().position(|l| l.allow == Allow::Io).map(LayerId)
    }

    pub fn has_signal_side(&self, side: Side) -> bool {
        !self.signal_layers(side, u32::MAX).is_empty()
    }

    pub fn max_signal_level(&self) -> u32 {
        self.layers.iter().filter(|l| l.allow == Allow::Signal).map(|l| l.level).max().unwrap_or(0)
    }
}

fn side_and_level(name: &str) -> (Option<Side>, Option<u32>) {
    let (side, rest) = if let Some(r) = name.strip_prefix("TM") {
        (Some(Side::Top), r)
    } else if let Some(r) = name.strip_prefix("BM") {
        (Some(Side::Bottom), r)
    } else if let Some(r) = name.strip_prefix('M') {
        (None, r)
    } else {
        (None, "")
    };
    (side, rest.parse().ok())
}

/// Parses a stack file:
/// `layer <name> pitch=<nm> width=<nm> rsq=<Ω/sq> cap=<fF/µm> dir=<H|V> allow=<sig|pwr|io> [pdn=<share>]`.
///
/// Names are `TM<k>`, `BM<k>` or `M<k>`; only the prefix-free layer may be `io`,
/// and no side may route signals on a layer that is not prefixed.
pub fn parse_stack(text: &str) -> Result<LayerStack, LayoutError> {
    let mut layers: Vec<Layer> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let (content, _) = split_comment(raw);
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| LayoutError::Stack { line, msg };
        let f = fields(content);
        if f.words.len() != 2 || f.words[0] != "layer" {
            return Err(err("expected `layer <name> key=value ...`".into()));
        }
        let name = f.words[1].to_string();
        if layers.iter().any(|l| l.name == name) {
            return Err(err(format!("duplicate layer `{name}`")));
        }
        let (side, level) = side_and_level(&name);
        let level = level.ok_or_else(|| err(format!("cannot read a metal level from `{name}`")))?;
        let float = |k: &str| -> Result<f64, LayoutError> {
            let v = f.kv.get(k).ok_or_else(|| LayoutError::Stack { line, msg: format!("missing `{k}=`") })?;
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x >= 0.0)
                .ok_or_else(|| LayoutError::Stack { line, msg: format!("bad `{k}`: {v}") })
        };
        let dir = match f.kv.get("dir").copied() {
            Some("H") => Dir::H,
            Some("V") => Dir::V,
            _ => return Err(err("`dir=` must be H or V".into())),
        };
        let allow = match f.kv.get("allow").copied() {
            Some("sig") => Allow::Signal,
            Some("pwr") => Allow::Power,
            Some("io") => Allow::Io,
            _ => return Err(err("`allow=` must be sig, pwr or io".into())),
        };
        if side.is_none() && allow == Allow::Signal {
            return Err(err(format!("`{name}` sits between the stacks and cannot carry signals")));
        }
        let pdn = if f.kv.contains_key("pdn") { float("pdn")? } else { 0.0 };
        if pdn >= 1.0 {
            return Err(err("`pdn` must be below 1".into()));
        }
        let pitch_nm = float("pitch")?;
        let width_nm = float("width")?;
        if pitch_nm <= 0.0 || width_nm <= 0.0 {
            return Err(err("pitch and width must be positive".into()));
        }
        layers.push(Layer {
            name,
            pitch_nm,
            width_nm,
            rsq: float("rsq")?,
            cap_ff_per_um: float("cap")?,
            dir,
            allow,
            pdn,
            side,
            level,
        });
    }
    Ok(LayerStack { layers })
}

pub fn serialize_stack(stack: &LayerStack) -> String {
    let mut s = String::new();
    for l in &stack.layers {
        s.push_str(&format!(
            "layer {} pitch={} width={} rsq={} cap={} dir={} allow={} pdn={}\n",
            l.name,
            num(l.pitch_nm),
            num(l.width_nm),
            num(l.rsq),
            num(l.cap_ff_per_um),
            l.dir,
            l.allow.token(),
            num(l.pdn)
        ));
    }
    s
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dir::H => "H",
            Dir::V => "V",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omni_stacks_mirror_each_other() {
        let s = LayerStack::omni();
        let top = s.signal_layers(Side::Top, 7);
        let bot = s.signal_layers(Side::Bottom, 7);
        assert_eq!(top.len(), 6);
        assert_eq!(bot.len(), 6);
        for (t, b) in top.iter().zip(&bot) {
            let (t, b) = (s.layer(*t), s.layer(*b));
            assert_eq!((t.pitch_nm, t.width_nm, t.rsq, t.cap_ff_per_um, t.dir, t.pdn), (b.pitch_nm, b.width_nm, b.rsq, b.cap_ff_per_um, b.dir, b.pdn));
        }
        let m8 = s.layer(s.io_layer().unwrap());
        assert_eq!(m8.name, "M8");
        assert_eq!(m8.allow, Allow::Io);
    }

    #[test]
    fn pdn_rises_from_6_to_15_percent() {
        let s = LayerStack::omni();
        for side in Side::BOTH {
            let pdn: Vec<f64> = s.signal_layers(side, 7).iter().map(|l| s.layer(*l).pdn).collect();
            assert_eq!(pdn.first(), Some(&0.06));
            assert_eq!(pdn.last(), Some(&0.15));
            assert!(pdn.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn cfet_routes_on_top_only() {
        let s = LayerStack::cfet();
        assert!(s.has_signal_side(Side::Top));
        assert!(!s.has_signal_side(Side::Bottom));
        assert!(s.io_layer().is_none());
        assert!(s.layers.iter().filter(|l| l.side == Some(Side::Bottom)).all(|l| l.allow == Allow::Power));
    }

    #[test]
    fn tracks_and_resistance() {
        let s = LayerStack::omni();
        let m2 = s.layer(s.find("TM2").unwrap());
        // 540 nm / 20 nm = 27 tracks, 6% to power
        assert_eq!(m2.tracks(540.0), 25);
        assert!((m2.r_kohm_per_um() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_signal_on_middle_layer() {
        let e = parse_stack("layer M8 pitch=80 width=40 rsq=3 cap=0.2 dir=H allow=sig\n").unwrap_err();
        assert!(matches!(e, LayoutError::Stack { line: 1, .. }));
        let again = parse_stack(&serialize_stack(&LayerStack::omni())).unwrap();
        assert_eq!(again, LayerStack::omni());
    }
}
