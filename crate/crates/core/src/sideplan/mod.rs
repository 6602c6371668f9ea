//! Side planning for double-side routing.
//!
//! Drivers expose their output on both sides, so a net stays on one stack
//! exactly when all of its loads share an input side. Cells that load a common
//! net are siblings; closing that relation gives clusters that must share a
//! flavor. Clusters are then split between top-in and bottom-in to balance the
//! two routing stacks.

mod flip;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::layout::LayoutError;
use crate::netlist::{split_net_count, CellId, Flavor, NetKind, Netlist, NetlistError, RoutingStyle};

pub use flip::{flip_clock_buffers, flip_datapath_buffers};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SideplanError {
    #[error("detour threshold must exceed 1, got {0}")]
    Beta(f64),
    #[error("TI fraction must lie in [0, 1], got {0}")]
    Fraction(f64),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

/// Cells that must share a flavor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub id: usize,
    /// Members in name order.
    pub members: Vec<CellId>,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusterOptions {
    /// Treat loads of clock nets as siblings too. Off by default, which keeps
    /// every flop from landing in one cluster through the clock.
    pub include_clock: bool,
}

fn follows(kind: NetKind, opts: &ClusterOptions) -> bool {
    match kind {
        NetKind::Signal => true,
        NetKind::Clock => opts.include_clock,
        NetKind::Power => false,
    }
}

/// Load cells of `u`'s fan-in nets, the sibling set of `u`.
pub fn sibling_cells(netlist: &Netlist, u: CellId, opts: &ClusterOptions) -> Vec<CellId> {
    let mut out = Vec::new();
    for n in netlist.fanin_nets(u).unwrap_or_default() {
        if !follows(netlist.net(n).kind, opts) {
            continue;
        }
        for p in &netlist.net(n).loads {
            if let Some(c) = p.cell() {
                if c != u {
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Partitions all cells into sibling clusters.
///
/// Seeds are taken in cell-name order and each cluster is grown depth-first
/// with an explicit worklist, so cluster ids and contents do not depend on the
/// order cells were declared in.
pub fn cluster_cells(netlist: &Netlist, opts: &ClusterOptions) -> Vec<Cluster> {
    let n = netlist.cells().len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut clusters = Vec::new();
    for seed in netlist.sorted_cell_ids() {
        if owner[seed.0].is_some() {
            continue;
        }
        let id = clusters.len();
        let mut members = Vec::new();
        let mut work = vec![seed];
        while let Some(u) = work.pop() {
            if owner[u.0].is_some() {
                continue;
            }
            owner[u.0] = Some(id);
            members.push(u);
            for v in sibling_cells(netlist, u, opts) {
                if owner[v.0].is_none() {
                    work.push(v);
                }
            }
        }
        members.sort_by(|a, b| netlist.cell(*a).name.cmp(&netlist.cell(*b).name));
        clusters.push(Cluster { id, members });
    }
    clusters
}

/// Flavor per cluster and per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FlavorAssignment {
    pub cluster_flavor: BTreeMap<usize, Flavor>,
    pub cell_flavor: BTreeMap<CellId, Flavor>,
    pub n_ti: usize,
    pub n_bi: usize,
}

impl FlavorAssignment {
    fn from_clusters(clusters: &[Cluster], flavor_of: impl Fn(usize) -> Flavor) -> Self {
        let mut a = FlavorAssignment { cluster_flavor: BTreeMap::new(), cell_flavor: BTreeMap::new(), n_ti: 0, n_bi: 0 };
        for (k, c) in clusters.iter().enumerate() {
            let f = flavor_of(k);
            a.cluster_flavor.insert(c.id, f);
            for &m in &c.members {
                a.cell_flavor.insert(m, f);
            }
            match f {
                Flavor::Ti => a.n_ti += c.size(),
                _ => a.n_bi += c.size(),
            }
        }
        a
    }

    /// Writes the cell flavors into the netlist.
    pub fn apply(&self, netlist: &mut Netlist) {
        for (&c, &f) in &self.cell_flavor {
            netlist.set_flavor(c, f);
        }
    }
}

/// Clusters by size, largest first, ties by id.
fn by_size(clusters: &[Cluster]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..clusters.len()).collect();
    order.sort_by(|&a, &b| clusters[b].size().cmp(&clusters[a].size()).then(clusters[a].id.cmp(&clusters[b].id)));
    order
}

/// Alternates clusters, largest first, between TI and BI until TI holds more
/// than half of the cells; every remaining cluster goes to BI.
pub fn assign_flavors(clusters: &[Cluster]) -> FlavorAssignment {
    let total: usize = clusters.iter().map(Cluster::size).sum();
    let mut flavor = vec![Flavor::Bi; clusters.len()];
    let mut cum_ti = 0;
    let mut next = Flavor::Ti;
    for k in by_size(clusters) {
        if 2 * cum_ti > total {
            break;
        }
        flavor[k] = next;
        if next == Flavor::Ti {
            cum_ti += clusters[k].size();
        }
        next = next.flipped();
    }
    FlavorAssignment::from_clusters(clusters, |k| flavor[k])
}

/// Cluster-preserving assignment that aims for a given share of TI cells.
///
/// Clusters are visited largest first; each goes to whichever flavor keeps
/// the running TI share closest to the target.
pub fn assign_ratio(clusters: &[Cluster], ti_fraction: f64) -> Result<FlavorAssignment, SideplanError> {
    if !(0.0..=1.0).contains(&ti_fraction) {
        return Err(SideplanError::Fraction(ti_fraction));
    }
    let mut flavor = vec![Flavor::Bi; clusters.len()];
    let (mut seen, mut ti) = (0.0, 0.0);
    for k in by_size(clusters) {
        let s = clusters[k].size() as f64;
        seen += s;
        let want = ti_fraction * seen;
        if ((ti + s) - want).abs() < (ti - want).abs() {
            flavor[k] = Flavor::Ti;
            ti += s;
        }
    }
    Ok(FlavorAssignment::from_clusters(clusters, |k| flavor[k]))
}

/// Per-cell random flavors ignoring clusters, TI with probability `ti_fraction`.
pub fn assign_random_ratio(netlist: &mut Netlist, ti_fraction: f64, seed: u64) -> Result<(), SideplanError> {
    if !(0.0..=1.0).contains(&ti_fraction) {
        return Err(SideplanError::Fraction(ti_fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for c in netlist.sorted_cell_ids() {
        let f = if rng.gen::<f64>() < ti_fraction { Flavor::Ti } else { Flavor::Bi };
        netlist.set_flavor(c, f);
    }
    Ok(())
}

/// Flavor balance of a netlist.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    pub n_ti: usize,
    pub n_bi: usize,
    /// Cluster sizes, largest first.
    pub clusters: Vec<usize>,
    pub split_nets: usize,
}

impl BalanceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Size histogram: (cluster size, number of clusters), ascending size.
    pub fn histogram(&self) -> Vec<(usize, usize)> {
        let mut h: BTreeMap<usize, usize> = BTreeMap::new();
        for &s in &self.clusters {
            *h.entry(s).or_default() += 1;
        }
        h.into_iter().collect()
    }

    /// Cluster-size histogram as a bar chart.
    pub fn histogram_svg(&self) -> String {
        let groups: Vec<(String, Vec<f64>)> =
            self.histogram().into_iter().map(|(size, n)| (size.to_string(), vec![n as f64])).collect();
        crate::svg::stacked_bars("Clusters per size", &groups, &["clusters"])
    }
}

pub fn balance_report(netlist: &Netlist, opts: &ClusterOptions) -> Result<BalanceReport, SideplanError> {
    let (mut n_ti, mut n_bi) = (0, 0);
    for c in netlist.cells() {
        match c.flavor {
            Flavor::Ti => n_ti += 1,
            Flavor::Bi => n_bi += 1,
            Flavor::Unassigned => return Err(NetlistError::UnassignedFlavor(c.name.clone()).into()),
        }
    }
    let mut clusters: Vec<usize> = cluster_cells(netlist, opts).iter().map(Cluster::size).collect();
    clusters.sort_unstable_by(|a, b| b.cmp(a));
    let split_nets = split_net_count(netlist, RoutingStyle::DoubleSideDo)?;
    Ok(BalanceReport { n_ti, n_bi, clusters, split_nets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testlib::{parse, random_netlist};
    use proptest::prelude::*;

    fn sized(sizes: &[usize]) -> Vec<Cluster> {
        let mut next = 0;
        sizes
            .iter()
            .enumerate()
            .map(|(id, &s)| {
                let members = (next..next + s).map(CellId).collect();
                next += s;
                Cluster { id, members }
            })
            .collect()
    }

    #[test]
    fn shared_input_nets_merge_fanout_sets() {
        // two nets sharing a NAND: all loads of both nets become one cluster
        let nl = parse(
            "port a in top\nport b in top\n\
             cell i1 INVD1\ncell i2 INVD1\ncell x INVD1\ncell y INVD1\ncell n ND2D1\n\
             net na a i1.I x.I\nnet nb b i2.I y.I\n\
             net p i1.ZN n.A1\nnet q i2.ZN n.A2\n",
        );
        let cl = cluster_cells(&nl, &ClusterOptions::default());
        let name = |c: &Cluster| c.members.iter().map(|m| nl.cell(*m).name.clone()).collect::<Vec<_>>();
        let names: Vec<Vec<String>> = cl.iter().map(name).collect();
        assert!(names.contains(&vec!["i1".to_string(), "x".to_string()]));
        assert!(names.contains(&vec!["i2".to_string(), "y".to_string()]));
        assert!(names.contains(&vec!["n".to_string()]));
        // a second load on p pulls the NAND's siblings together
        let nl = parse(
            "port a in top\ncell i1 INVD1\ncell i2 INVD1\ncell n ND2D1\ncell m INVD1\n\
             net na a i1.I i2.I\nnet p i1.ZN n.A1 m.I\nnet q i2.ZN n.A2\n",
        );
        let cl = cluster_cells(&nl, &ClusterOptions::default());
        assert_eq!(cl.len(), 2);
        assert!(cl.iter().any(|c| c.size() == 2 && c.members.iter().all(|m| ["m", "n"].contains(&nl.cell(*m).name.as_str()))));
    }

    #[test]
    fn chain_gives_singletons() {
        let nl = crate::testlib::inverter_chain(3);
        let cl = cluster_cells(&nl, &ClusterOptions::default());
        assert_eq!(cl.len(), 3);
        assert!(cl.iter().all(|c| c.size() == 1));
    }

    #[test]
    fn clock_loads_only_join_when_asked() {
        let nl = parse(
            "port clk in top\nport d in top\ncell f1 DFFQD1\ncell f2 DFFQD1\n\
             net dn d f1.D\nnet q f1.Q f2.D\nnet c clock clk f1.CP f2.CP\n",
        );
        assert_eq!(cluster_cells(&nl, &ClusterOptions::default()).len(), 2);
        assert_eq!(cluster_cells(&nl, &ClusterOptions { include_clock: true }).len(), 1);
    }

    #[test]
    fn assignment_follows_the_stated_loop() {
        let a = assign_flavors(&sized(&[5, 3, 3, 2, 1]));
        assert_eq!((a.n_ti, a.n_bi), (8, 6));
        assert_eq!(a.cluster_flavor[&0], Flavor::Ti);
        assert_eq!(a.cluster_flavor[&1], Flavor::Bi);
        assert_eq!(a.cluster_flavor[&2], Flavor::Ti);
        assert_eq!(a.cluster_flavor[&3], Flavor::Bi);
        assert_eq!(a.cluster_flavor[&4], Flavor::Bi);
        let one = assign_flavors(&sized(&[7]));
        assert_eq!((one.n_ti, one.n_bi), (7, 0));
        let two = assign_flavors(&sized(&[4, 4]));
        assert_eq!((two.n_ti, two.n_bi), (4, 4));
        assert_eq!(assign_flavors(&[]).n_ti, 0);
    }

    #[test]
    fn ratio_assignment_hits_targets() {
        let cl = sized(&[1; 90]);
        let a = assign_ratio(&cl, 1.0 / 9.0).unwrap();
        assert_eq!((a.n_ti, a.n_bi), (10, 80));
        assert!(assign_ratio(&cl, 1.5).is_err());
    }

    #[test]
    fn empty_netlist_report() {
        let r = balance_report(&Netlist::default(), &ClusterOptions::default()).unwrap();
        assert_eq!((r.n_ti, r.n_bi, r.split_nets), (0, 0, 0));
        assert!(r.to_json().contains("\"split_nets\": 0"));
    }

    proptest! {
        #[test]
        fn assignment_removes_every_split(seed in 0u64..10_000, n in 1usize..40) {
            let mut nl = random_netlist(n, seed);
            let cl = cluster_cells(&nl, &ClusterOptions::default());
            assign_flavors(&cl).apply(&mut nl);
            let r = balance_report(&nl, &ClusterOptions::default()).unwrap();
            prop_assert_eq!(r.split_nets, 0);
            prop_assert!(r.n_ti.abs_diff(r.n_bi) <= r.clusters[0]);
        }

        #[test]
        fn clusters_partition_and_close(seed in 0u64..10_000, n in 1usize..40) {
            let nl = random_netlist(n, seed);
            let opts = ClusterOptions::default();
            let cl = cluster_cells(&nl, &opts);
            let mut owner = vec![usize::MAX; nl.cells().len()];
            for c in &cl {
                for m in &c.members {
                    prop_assert_eq!(owner[m.0], usize::MAX);
                    owner[m.0] = c.id;
                }
            }
            prop_assert!(owner.iter().all(|&o| o != usize::MAX));
            for u in nl.cell_ids() {
                for v in sibling_cells(&nl, u, &opts) {
                    prop_assert_eq!(owner[u.0], owner[v.0]);
                }
            }
            // idempotent
            prop_assert_eq!(cluster_cells(&nl, &opts), cl);
        }
    }
}
