use super::*;

/// How logical nets map onto the routing stacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutingStyle {
    /// Single-side routing: every net lives on the top stack (CFET).
    SingleSide,
    /// Double-side routing with DO masters: drivers expose an output on both
    /// sides, each load is reached on its flavor's input side.
    DoubleSideDo,
}

/// The part of a logical net routed on one side.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalNet {
    pub net: NetId,
    pub side: Side,
    pub driver: PinRef,
    pub loads: Vec<PinRef>,
}

/// Splits every non-power logical net into one physical net per side that has loads.
///
/// Output ports declared `either` join whichever side already has loads (top
/// when both or none do). Results are ordered by net name, then side.
pub fn derive_physical_nets(
    netlist: &Netlist,
    style: RoutingStyle,
) -> Result<Vec<PhysicalNet>, NetlistError> {
    let mut out = Vec::new();
    for id in netlist.sorted_net_ids() {
        out.extend(net_physical(netlist, id, style)?);
    }
    Ok(out)
}

/// Physical nets of one logical net, top side first.
pub fn net_physical(
    netlist: &Netlist,
    id: NetId,
    style: RoutingStyle,
) -> Result<Vec<PhysicalNet>, NetlistError> {
    let net = netlist.net(id);
    if net.kind == NetKind::Power || net.loads.is_empty() {
        return Ok(Vec::new());
    }
    let mut top = Vec::new();
    let mut bottom = Vec::new();
    let mut floating = Vec::new();
    for l in &net.loads {
        match load_side(netlist, l, style)? {
            Some(Side::Top) => top.push(l.clone()),
            Some(Side::Bottom) => bottom.push(l.clone()),
            None => floating.push(l.clone()),
        }
    }
    if !floating.is_empty() {
        if bottom.is_empty() || !top.is_empty() {
            top.extend(floating);
        } else {
            bottom.extend(floating);
        }
    }
    let mut out = Vec::new();
    for (side, loads) in [(Side::Top, top), (Side::Bottom, bottom)] {
        if !loads.is_empty() {
            out.push(PhysicalNet { net: id, side, driver: net.driver.clone(), loads });
        }
    }
    Ok(out)
}

/// Side a load pin is reached on, `None` for ports that may attach on either side.
pub fn load_side(
    netlist: &Netlist,
    pin: &PinRef,
    style: RoutingStyle,
) -> Result<Option<Side>, NetlistError> {
    if style == RoutingStyle::SingleSide {
        return Ok(Some(Side::Top));
    }
    match pin {
        PinRef::Cell { cell, .. } => {
            let c = netlist.cell(*cell);
            c.flavor
                .input_side()
                .map(Some)
                .ok_or_else(|| NetlistError::UnassignedFlavor(c.name.clone()))
        }
        PinRef::Port(p) => Ok(netlist.port(*p).side.fixed()),
    }
}

/// Number of signal nets realized as two physical nets.
pub fn split_net_count(netlist: &Netlist, style: RoutingStyle) -> Result<usize, NetlistError> {
    let phys = derive_physical_nets(netlist, style)?;
    let mut count = 0;
    for w in phys.windows(2) {
        if w[0].net == w[1].net && netlist.net(w[0].net).kind == NetKind::Signal {
            count += 1;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;

    fn catalog() -> BTreeMap<String, CellPins> {
        let mut m = BTreeMap::new();
        m.insert(
            "INVD1".to_string(),
            CellPins {
                inputs: vec!["I".into()],
                outputs: vec!["ZN".into()],
                clock: None,
                is_sequential: false,
                is_clock_buffer: false,
            },
        );
        m
    }

    fn fragment(l1: &str, l2: &str) -> Netlist {
        let text = format!(
            "cell d INVD1 flavor=BI\ncell l1 INVD1 flavor={l1}\ncell l2 INVD1 flavor={l2}\nnet n1 d.ZN l1.I l2.I\n"
        );
        parse_netlist(&text, &catalog()).unwrap()
    }

    #[test]
    fn mixed_loads_split_in_two() {
        let nl = fragment("TI", "BI");
        let phys = derive_physical_nets(&nl, RoutingStyle::DoubleSideDo).unwrap();
        assert_eq!(phys.len(), 2);
        assert_eq!(phys[0].side, Side::Top);
        assert_eq!(phys[1].side, Side::Bottom);
        assert_eq!(split_net_count(&nl, RoutingStyle::DoubleSideDo).unwrap(), 1);
    }

    #[test]
    fn same_side_loads_stay_united() {
        let nl = fragment("BI", "BI");
        let phys = derive_physical_nets(&nl, RoutingStyle::DoubleSideDo).unwrap();
        assert_eq!(phys.len(), 1);
        assert_eq!(phys[0].side, Side::Bottom);
        assert_eq!(phys[0].loads.len(), 2);
        assert_eq!(split_net_count(&nl, RoutingStyle::DoubleSideDo).unwrap(), 0);
    }

    #[test]
    fn single_side_style_ignores_flavors() {
        let nl = fragment("TI", "BI");
        let phys = derive_physical_nets(&nl, RoutingStyle::SingleSide).unwrap();
        assert_eq!(phys.len(), 1);
        assert_eq!(phys[0].side, Side::Top);
    }

    #[test]
    fn unloaded_net_has_no_physical_net() {
        let nl = parse_netlist("cell d INVD1 flavor=TI\nnet n d.ZN\n", &catalog()).unwrap();
        assert!(derive_physical_nets(&nl, RoutingStyle::DoubleSideDo).unwrap().is_empty());
    }

    #[test]
    fn unassigned_flavor_is_rejected() {
        let nl = parse_netlist(
            "cell d INVD1 flavor=TI\ncell l INVD1\nnet n d.ZN l.I\n",
            &catalog(),
        )
        .unwrap();
        assert_eq!(
            derive_physical_nets(&nl, RoutingStyle::DoubleSideDo).unwrap_err(),
            NetlistError::UnassignedFlavor("l".into())
        );
    }

    #[test]
    fn ports_attach_on_declared_side() {
        let text = "\
port zt out top
port zb out bottom
port ze out either
cell d INVD1 flavor=TI
cell e INVD1 flavor=TI
net n d.ZN zb ze
net m e.ZN zt
";
        let nl = parse_netlist(text, &catalog()).unwrap();
        let phys = derive_physical_nets(&nl, RoutingStyle::DoubleSideDo).unwrap();
        let n = nl.net_id("n").unwrap();
        let of_n: Vec<_> = phys.iter().filter(|p| p.net == n).collect();
        // the floating port joins the bottom side, which already has a load
        assert_eq!(of_n.len(), 1);
        assert_eq!(of_n[0].side, Side::Bottom);
        assert_eq!(of_n[0].loads.len(), 2);
        let m = nl.net_id("m").unwrap();
        assert_eq!(phys.iter().find(|p| p.net == m).unwrap().side, Side::Top);
    }
}
