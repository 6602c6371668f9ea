use super::LayoutError;
use crate::celllib::{cell_area, Architecture, CellLibrary, LibraryError};
use crate::netlist::Netlist;

/// Core outline and site grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Floorplan {
    pub arch: Architecture,
    pub row_height_nm: f64,
    pub site_width_nm: f64,
    pub n_rows: u32,
    pub n_sites: u32,
    pub utilization: f64,
    /// Σ cell footprint areas, nm².
    pub cell_area_nm2: f64,
}

impl Floorplan {
    /// Target core area, `Σ cell area / utilization`, nm².
    pub fn core_area_nm2(&self) -> f64 {
        self.cell_area_nm2 / self.utilization
    }

    pub fn width_nm(&self) -> f64 {
        self.n_sites as f64 * self.site_width_nm
    }

    pub fn height_nm(&self) -> f64 {
        self.n_rows as f64 * self.row_height_nm
    }

    pub fn contains(&self, (x, y): (f64, f64)) -> bool {
        (0.0..=self.width_nm()).contains(&x) && (0.0..=self.height_nm()).contains(&y)
    }
}

/// Width in sites of every cell for `arch`.
pub fn cell_widths(netlist: &Netlist, library: &CellLibrary, arch: Architecture) -> Result<Vec<u32>, LibraryError> {
    netlist
        .cells()
        .iter()
        .map(|c| {
            library
                .any_master(&c.master, arch)
                .map(|m| m.width_gp)
                .ok_or_else(|| LibraryError::MissingCell(c.master.clone()))
        })
        .collect()
}

/// Sizes a roughly square core for the netlist at the given utilization.
///
/// The site grid covers the target core area; rows are one cell height.
pub fn build_floorplan(
    netlist: &Netlist,
    library: &CellLibrary,
    arch: Architecture,
    utilization: f64,
) -> Result<Floorplan, LayoutError> {
    if !(utilization > 0.4 && utilization <= 0.95) {
        return Err(LayoutError::Utilization(utilization));
    }
    if netlist.is_empty() {
        return Err(LayoutError::EmptyNetlist);
    }
    let mut area = 0.0;
    let mut widest = 0;
    for c in netlist.cells() {
        let m = library.any_master(&c.master, arch).ok_or_else(|| LibraryError::MissingCell(c.master.clone()))?;
        area += cell_area(m);
        widest = widest.max(m.width_gp);
    }
    let row_h = arch.row_height_nm();
    let site_w = library.cgp_nm;
    let target = area / utilization;
    let n_rows = ((target.sqrt() / row_h).round() as u32).max(1);
    let n_sites = ((target / (n_rows as f64 * row_h) / site_w).ceil() as u32).max(widest);
    Ok(Floorplan {
        arch,
        row_height_nm: row_h,
        site_width_nm: site_w,
        n_rows,
        n_sites,
        utilization,
        cell_area_nm2: area,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testlib::{inverter_chain, library};

    #[test]
    fn core_area_is_cell_area_over_utilization() {
        let lib = library();
        let nl = inverter_chain(100);
        let fp = build_floorplan(&nl, &lib, Architecture::Omni3d, 0.85).unwrap();
        let inv = lib.any_master("INVD1", Architecture::Omni3d).unwrap();
        let want = 100.0 * (inv.width_gp as f64 * 42.0 * 54.0) / 0.85;
        assert!((fp.core_area_nm2() - want).abs() < 1e-6);
        // the site grid covers the target without a whole extra row of slack
        let grid = fp.width_nm() * fp.height_nm();
        assert!(grid >= want && grid < want + fp.height_nm() * 42.0 + 1e-6);
        let aspect = fp.width_nm() / fp.height_nm();
        assert!((0.7..1.4).contains(&aspect), "{aspect}");
    }

    #[test]
    fn cfet_over_omni_area_is_cell_area_ratio() {
        let lib = library();
        let nl = inverter_chain(50);
        let a = build_floorplan(&nl, &lib, Architecture::Omni3d, 0.8).unwrap();
        let b = build_floorplan(&nl, &lib, Architecture::Cfet, 0.8).unwrap();
        assert!((a.core_area_nm2() / b.core_area_nm2() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_utilization_and_empty() {
        let lib = library();
        let nl = inverter_chain(3);
        assert!(matches!(build_floorplan(&nl, &lib, Architecture::Cfet, 0.3), Err(LayoutError::Utilization(_))));
        assert!(matches!(build_floorplan(&nl, &lib, Architecture::Cfet, 1.0), Err(LayoutError::Utilization(_))));
        let empty = Netlist::default();
        assert!(matches!(build_floorplan(&empty, &lib, Architecture::Cfet, 0.8), Err(LayoutError::EmptyNetlist)));
    }
}
