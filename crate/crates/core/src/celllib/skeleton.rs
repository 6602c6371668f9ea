use super::*;
use crate::text::{fields, parse_pin_spec, split_comment};

/// The skeleton shipped with the crate: 20 cells.
pub const DEFAULT_SKELETON: &str = include_str!("../../data/cells.skel");

/// One cell of a library skeleton: footprint and scale factors, no electrical values.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTemplate {
    pub name: String,
    pub pins: CellPins,
    /// Width in gate pitches per architecture.
    pub width_gp: BTreeMap<Architecture, u32>,
    pub rfac: Option<f64>,
    pub cinfac: Option<f64>,
    pub coutfac: Option<f64>,
    pub efac: Option<f64>,
    pub tfac: Option<f64>,
    pub fets: Option<f64>,
    pub setupfac: Option<f64>,
    /// Source note from the trailing comment.
    pub note: String,
}

impl CellTemplate {
    /// Reads a factor, failing with the key name when it is absent.
    pub fn factor(&self, key: &'static str) -> Result<f64, LibraryError> {
        let v = match key {
            "rfac" => self.rfac,
            "cinfac" => self.cinfac,
            "coutfac" => self.coutfac,
            "efac" => self.efac,
            "tfac" => self.tfac,
            "fets" => self.fets,
            "setupfac" => self.setupfac,
            _ => None,
        };
        v.ok_or_else(|| LibraryError::MissingScaleFactor { cell: self.name.clone(), key })
    }

    pub fn is_assumed(&self) -> bool {
        self.note.contains("assumed")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LibrarySkeleton {
    pub cells: Vec<CellTemplate>,
}

impl LibrarySkeleton {
    pub fn get(&self, name: &str) -> Option<&CellTemplate> {
        self.cells.iter().find(|c| c.name == name)
    }

    pub fn catalog(&self) -> BTreeMap<String, CellPins> {
        self.cells.iter().map(|c| (c.name.clone(), c.pins.clone())).collect()
    }
}

/// Parses a skeleton file.
///
/// `cell <name> pins=in:..;out:.. gp_cfet=<n> gp_omni=<n> gp_noim=<n> rfac= cinfac= coutfac= efac= tfac= fets= [clk=<pin> setupfac=] [role=clkbuf] # note`
///
/// Scale factors may be omitted here; characterization reports the gap.
pub fn parse_skeleton(text: &str) -> Result<LibrarySkeleton, LibraryError> {
    let mut cells: Vec<CellTemplate> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let (content, note) = split_comment(raw);
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| LibraryError::Syntax { line, msg };
        let f = fields(content);
        if f.words.first() != Some(&"cell") || f.words.len() != 2 {
            return Err(err("expected `cell <name> key=value ...`".into()));
        }
        let name = f.words[1].to_string();
        if cells.iter().any(|c| c.name == name) {
            return Err(err(format!("duplicate cell `{name}`")));
        }
        let (inputs, outputs) = f
            .kv
            .get("pins")
            .and_then(|s| parse_pin_spec(s))
            .ok_or_else(|| err("missing or bad `pins=`".into()))?;
        let clock = f.kv.get("clk").map(|s| s.to_string());
        if let Some(c) = &clock {
            if !inputs.contains(c) {
                return Err(err(format!("clock pin `{c}` is not an input")));
            }
        }
        let is_clock_buffer = match f.kv.get("role") {
            None => false,
            Some(&"clkbuf") => true,
            Some(r) => return Err(err(format!("unknown role `{r}`"))),
        };
        let mut width_gp = BTreeMap::new();
        for (key, arch) in [
            ("gp_cfet", Architecture::Cfet),
            ("gp_omni", Architecture::Omni3d),
            ("gp_noim", Architecture::Omni3dNoIm),
        ] {
            let w: u32 = f
                .kv
                .get(key)
                .ok_or_else(|| err(format!("missing `{key}=`")))?
                .parse()
                .map_err(|_| err(format!("bad `{key}`")))?;
            if w == 0 {
                return Err(err(format!("`{key}` must be ≥ 1")));
            }
            width_gp.insert(arch, w);
        }
        let opt = |key: &str| -> Result<Option<f64>, LibraryError> {
            match f.kv.get(key) {
                None => Ok(None),
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| *x >= 0.0 && x.is_finite())
                    .map(Some)
                    .ok_or_else(|| LibraryError::Syntax { line, msg: format!("bad `{key}`: {v}") }),
            }
        };
        cells.push(CellTemplate {
            pins: CellPins {
                inputs,
                outputs,
                is_sequential: clock.is_some(),
                clock,
                is_clock_buffer,
            },
            name,
            width_gp,
            rfac: opt("rfac")?,
            cinfac: opt("cinfac")?,
            coutfac: opt("coutfac")?,
            efac: opt("efac")?,
            tfac: opt("tfac")?,
            fets: opt("fets")?,
            setupfac: opt("setupfac")?,
            note: note.unwrap_or("").to_string(),
        });
    }
    Ok(LibrarySkeleton { cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_skeleton_has_twenty_cells() {
        let sk = parse_skeleton(DEFAULT_SKELETON).unwrap();
        assert_eq!(sk.cells.len(), 20);
        let dff = sk.get("DFFQD1").unwrap();
        assert_eq!(dff.pins.clock.as_deref(), Some("CP"));
        assert!(dff.pins.is_sequential);
        assert!(sk.get("CKBD1").unwrap().pins.is_clock_buffer);
        assert!(sk.get("BUFD1").unwrap().is_assumed());
        assert!(!sk.get("MUX2D1").unwrap().is_assumed());
    }

    #[test]
    fn shipped_widths_follow_the_im_pattern() {
        let sk = parse_skeleton(DEFAULT_SKELETON).unwrap();
        for c in &sk.cells {
            let w = |a| c.width_gp[&a];
            // removing the IM never makes a cell narrower
            assert!(w(Architecture::Omni3dNoIm) >= w(Architecture::Omni3d), "{}", c.name);
            if c.is_assumed() {
                assert_eq!(w(Architecture::Cfet), w(Architecture::Omni3d), "{}", c.name);
            }
        }
        for n in ["DFFQD1", "XOR2D1", "MUX2D1"] {
            let c = sk.get(n).unwrap();
            assert!(c.width_gp[&Architecture::Omni3d] < c.width_gp[&Architecture::Cfet]);
        }
    }

    #[test]
    fn missing_factor_is_reported_by_key() {
        let sk = parse_skeleton("cell X pins=in:A;out:Z gp_cfet=1 gp_omni=1 gp_noim=1 rfac=1\n").unwrap();
        let err = sk.cells[0].factor("cinfac").unwrap_err();
        assert_eq!(err, LibraryError::MissingScaleFactor { cell: "X".into(), key: "cinfac" });
    }

    #[test]
    fn rejects_duplicates_and_zero_width() {
        let dup = "cell X pins=in:A;out:Z gp_cfet=1 gp_omni=1 gp_noim=1\ncell X pins=in:A;out:Z gp_cfet=1 gp_omni=1 gp_noim=1\n";
        assert!(matches!(parse_skeleton(dup), Err(LibraryError::Syntax { line: 2, .. })));
        let zero = "cell X pins=in:A;out:Z gp_cfet=0 gp_omni=1 gp_noim=1\n";
        assert!(parse_skeleton(zero).is_err());
    }
}
