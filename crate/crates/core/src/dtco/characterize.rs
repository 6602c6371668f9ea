use super::*;
use crate::celllib::{CellLibrary, CellMaster, LibrarySkeleton};
use crate::netlist::Flavor;

/// Builds a full library from one device corner.
///
/// The corner's geometry and supply are evaluated for every architecture. Each
/// cell scales the inverter values by its skeleton factors; pattern deltas ride
/// on the inverter capacitances, so every non-SIO master keeps the exact SIO ratio.
pub fn characterize_library(
    point: &DeviceParams,
    coeff: &SurrogateCoefficients,
    skeleton: &LibrarySkeleton,
) -> Result<CellLibrary, DtcoError> {
    let mut lib = CellLibrary::new(format!(
        "lg{}-sp{}-n{}-vdd{}",
        point.lg_nm, point.sp_gs_nm, point.n_sheets, point.vdd_mv
    ));
    let leak_per_fet_na = coeff.i_leak_target * 1e9 * coeff.leak_off_fraction;
    for arch in Architecture::ALL {
        let sio = point.with_arch(arch).with_pattern(PinAccessPattern::Sio);
        let vt = retarget_vt(&sio, coeff)?;
        let r = inverter_resistance(&sio, coeff, vt);
        let (_, cout_sio) = inverter_caps(&sio, coeff);
        let vdd = sio.vdd();
        lib.vdd.insert(arch, vdd);
        let e_base = cout_sio * vdd * vdd;
        for &pattern in arch.patterns() {
            let (cin, cout) = inverter_caps(&sio.with_pattern(pattern), coeff);
            let tint_base = 0.69 * r * cout;
            for t in &skeleton.cells {
                let fets = t.factor("fets")?;
                let setup = if t.pins.is_sequential {
                    Some(t.factor("setupfac")? * 0.69 * r * cout_sio)
                } else {
                    None
                };
                let width_gp = *t
                    .width_gp
                    .get(&arch)
                    .ok_or(crate::celllib::LibraryError::MissingScaleFactor { cell: t.name.clone(), key: "width" })?;
                for flavor in [Flavor::Ti, Flavor::Bi] {
                    lib.insert(CellMaster {
                        name: t.name.clone(),
                        arch,
                        pattern,
                        flavor,
                        width_gp,
                        input_pins: t.pins.inputs.clone(),
                        output_pins: t.pins.outputs.clone(),
                        cap_in: vec![t.factor("cinfac")? * cin; t.pins.inputs.len()],
                        cap_out: t.factor("coutfac")? * cout,
                        r_drive: t.factor("rfac")? * r,
                        e_internal: t.factor("efac")? * e_base,
                        intrinsic_delay: t.factor("tfac")? * tint_base,
                        clock_pin: t.pins.clock.clone(),
                        setup,
                        leakage_na: fets * leak_per_fet_na,
                        is_clock_buffer: t.pins.is_clock_buffer,
                    });
                }
            }
        }
    }
    lib.validate()?;
    Ok(lib)
}

/// The library at the shipped minimum-EDP corner with default coefficients and skeleton.
pub fn default_library() -> Result<CellLibrary, DtcoError> {
    let skeleton = crate::celllib::parse_skeleton(crate::celllib::DEFAULT_SKELETON)?;
    characterize_library(&DeviceParams::new(Architecture::Omni3d, 14, 9, 1, 450), &SurrogateCoefficients::default(), &skeleton)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::celllib::{parse_skeleton, DEFAULT_SKELETON};

    fn lib() -> CellLibrary {
        let p = DeviceParams::new(Architecture::Omni3d, 14, 9, 1, 450);
        characterize_library(&p, &SurrogateCoefficients::default(), &parse_skeleton(DEFAULT_SKELETON).unwrap()).unwrap()
    }

    #[test]
    fn inverter_anchors_to_ro_resistance() {
        let c = SurrogateCoefficients::default();
        let lib = lib();
        for arch in Architecture::ALL {
            let p = DeviceParams::new(arch, 14, 9, 1, 450);
            let m = ro_metrics(&p, &c).unwrap();
            let inv = lib.master("INVD1", arch, PinAccessPattern::Sio, Flavor::Ti).unwrap();
            assert_eq!(inv.r_drive, m.r_eff);
            assert_eq!(inv.cap_in[0], m.c_in);
        }
    }

    #[test]
    fn do_inverter_input_is_4p2_percent_higher() {
        let lib = lib();
        let a = Architecture::Omni3d;
        let sio = lib.master("INVD1", a, PinAccessPattern::Sio, Flavor::Bi).unwrap();
        let dop = lib.master("INVD1", a, PinAccessPattern::Do, Flavor::Bi).unwrap();
        assert!((dop.cap_in[0] / sio.cap_in[0] - 1.042).abs() < 1e-12);
        assert!((dop.cap_out / sio.cap_out - 1.158).abs() < 1e-12);
    }

    #[test]
    fn nand_resistance_follows_skeleton_factor() {
        let sk = parse_skeleton(DEFAULT_SKELETON).unwrap();
        let lib = lib();
        let rfac = sk.get("ND2D1").unwrap().rfac.unwrap();
        for arch in Architecture::ALL {
            let inv = lib.master("INVD1", arch, PinAccessPattern::Sio, Flavor::Ti).unwrap();
            let nd2 = lib.master("ND2D1", arch, PinAccessPattern::Sio, Flavor::Ti).unwrap();
            assert!((nd2.r_drive - rfac * inv.r_drive).abs() < 1e-12);
        }
        assert_eq!(rfac, 2.0);
    }

    #[test]
    fn full_library_shape() {
        let lib = lib();
        // 20 cells, both flavors: CFET ships SIO only, Omni variants all four patterns
        assert_eq!(lib.len(), 20 * 2 * (1 + 4 + 4));
        assert_eq!(lib.cell_names().count(), 20);
        let dff = lib.master("DFFQD1", Architecture::Cfet, PinAccessPattern::Sio, Flavor::Ti).unwrap();
        assert!(dff.setup.unwrap() > 0.0);
        assert_eq!(lib.clock_buffer_name(), Some("CKBD1"));
    }

    #[test]
    fn pattern_capacitance_ordering_per_cell() {
        let lib = lib();
        for name in lib.cell_names().map(str::to_string).collect::<Vec<_>>() {
            for arch in [Architecture::Omni3d, Architecture::Omni3dNoIm] {
                let tot = |p| lib.master(&name, arch, p, Flavor::Ti).unwrap().cap_total();
                let sio = tot(PinAccessPattern::Sio);
                let d_do = tot(PinAccessPattern::Do) - sio;
                let d_di = tot(PinAccessPattern::Di) - sio;
                if sio > 0.0 {
                    assert!(d_do > 0.0 && d_di > 0.0 || lib.any_master(&name, arch).unwrap().input_pins.is_empty());
                    let dido = tot(PinAccessPattern::Dido);
                    assert!((dido / (sio + d_do + d_di) - 1.0).abs() < 0.005, "{name}");
                }
            }
        }
    }

    #[test]
    fn missing_factor_surfaces() {
        let sk = parse_skeleton("cell X pins=in:A;out:Z gp_cfet=1 gp_omni=1 gp_noim=1 rfac=1 cinfac=1 coutfac=1 efac=1 fets=2\n").unwrap();
        let p = DeviceParams::new(Architecture::Omni3d, 14, 9, 1, 450);
        let err = characterize_library(&p, &SurrogateCoefficients::default(), &sk).unwrap_err();
        assert!(matches!(err, DtcoError::Library(crate::celllib::LibraryError::MissingScaleFactor { key: "tfac", .. })));
    }
}
