use super::DtcoError;
use crate::text::split_comment;

/// Coefficients shipped with the crate.
pub const DEFAULT_COEFFICIENTS: &str = include_str!("../../data/surrogate.coef");

/// Surrogate device-model coefficients. Units follow the coefficient file.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateCoefficients {
    /// Ω·nm
    pub r_contact: f64,
    /// Ω·nm per nm of gate length
    pub r_channel_per_lg: f64,
    /// Ω, CFET only
    pub r_tall_via: f64,
    pub overdrive_alpha: f64,
    /// fF/nm²
    pub c_gate_aerial: f64,
    /// fF·nm
    pub c_par_gs: f64,
    /// fF/nm
    pub c_sd_out: f64,
    /// fF
    pub c_im_in: f64,
    /// fF
    pub c_im_out: f64,
    /// fF, CFET only
    pub c_tall_via: f64,
    /// fF/µm
    pub c_wire_per_um: f64,
    /// µm
    pub wire_load_um: f64,
    /// A/nm
    pub i0_leak: f64,
    pub ss_mv_dec: f64,
    /// A per FET
    pub i_leak_target: f64,
    pub leak_off_fraction: f64,
}

impl Default for SurrogateCoefficients {
    fn default() -> Self {
        parse_coefficients(DEFAULT_COEFFICIENTS).expect("shipped coefficients parse")
    }
}

/// Parses `key = value  # provenance` lines. Every key is required exactly once.
pub fn parse_coefficients(text: &str) -> Result<SurrogateCoefficients, DtcoError> {
    let mut c = SurrogateCoefficients {
        r_contact: f64::NAN,
        r_channel_per_lg: f64::NAN,
        r_tall_via: f64::NAN,
        overdrive_alpha: f64::NAN,
        c_gate_aerial: f64::NAN,
        c_par_gs: f64::NAN,
        c_sd_out: f64::NAN,
        c_im_in: f64::NAN,
        c_im_out: f64::NAN,
        c_tall_via: f64::NAN,
        c_wire_per_um: f64::NAN,
        wire_load_um: f64::NAN,
        i0_leak: f64::NAN,
        ss_mv_dec: f64::NAN,
        i_leak_target: f64::NAN,
        leak_off_fraction: f64::NAN,
    };
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let (content, _) = split_comment(raw);
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| DtcoError::Coefficients { line, msg };
        let (k, v) = content.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
        let (k, v) = (k.trim(), v.trim());
        let x: f64 = v.parse().map_err(|_| err(format!("bad number `{v}`")))?;
        if !x.is_finite() || x < 0.0 {
            return Err(err(format!("`{k}` must be finite and non-negative")));
        }
        let slot = match k {
            "r_contact" => &mut c.r_contact,
            "r_channel_per_lg" => &mut c.r_channel_per_lg,
            "r_tall_via" => &mut c.r_tall_via,
            "overdrive_alpha" => &mut c.overdrive_alpha,
            "c_gate_aerial" => &mut c.c_gate_aerial,
            "c_par_gs" => &mut c.c_par_gs,
            "c_sd_out" => &mut c.c_sd_out,
            "c_im_in" => &mut c.c_im_in,
            "c_im_out" => &mut c.c_im_out,
            "c_tall_via" => &mut c.c_tall_via,
            "c_wire_per_um" => &mut c.c_wire_per_um,
            "wire_load_um" => &mut c.wire_load_um,
            "i0_leak" => &mut c.i0_leak,
            "ss_mv_dec" => &mut c.ss_mv_dec,
            "i_leak_target" => &mut c.i_leak_target,
            "leak_off_fraction" => &mut c.leak_off_fraction,
            _ => return Err(err(format!("unknown coefficient `{k}`"))),
        };
        if !slot.is_nan() {
            return Err(err(format!("`{k}` given twice")));
        }
        *slot = x;
    }
    let all = [
        ("r_contact", c.r_contact),
        ("r_channel_per_lg", c.r_channel_per_lg),
        ("r_tall_via", c.r_tall_via),
        ("overdrive_alpha", c.overdrive_alpha),
        ("c_gate_aerial", c.c_gate_aerial),
        ("c_par_gs", c.c_par_gs),
        ("c_sd_out", c.c_sd_out),
        ("c_im_in", c.c_im_in),
        ("c_im_out", c.c_im_out),
        ("c_tall_via", c.c_tall_via),
        ("c_wire_per_um", c.c_wire_per_um),
        ("wire_load_um", c.wire_load_um),
        ("i0_leak", c.i0_leak),
        ("ss_mv_dec", c.ss_mv_dec),
        ("i_leak_target", c.i_leak_target),
        ("leak_off_fraction", c.leak_off_fraction),
    ];
    if let Some((k, _)) = all.iter().find(|(_, v)| v.is_nan()) {
        return Err(DtcoError::Coefficients { line: last_line, msg: format!("missing `{k}`") });
    }
    Ok(c)
}
