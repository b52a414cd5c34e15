// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::{Capacitor, NetId, Netlist, NetlistError, Transistor};

/// Depth-first search over subcircuit references. Returns the name of a
/// subcircuit that (transitively) instantiates itself.
pub(super) fn check_recursion(root: &Netlist) -> Result<(), String> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Visiting,
        Done,
    }
    fn visit(
        root: &Netlist,
        name: &str,
        marks: &mut BTreeMap<String, Mark>,
    ) -> Result<(), String> {
        match marks.get(name) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Visiting) => return Err(name.to_string()),
            None => {}
        }
        let Some(sub) = root.subcircuit(name) else {
            return Ok(());
        };
        marks.insert(name.to_string(), Mark::Visiting);
        for inst in &sub.body.instances {
            visit(root, &inst.subckt, marks)?;
        }
        marks.insert(name.to_string(), Mark::Done);
        Ok(())
    }
    let mut marks = BTreeMap::new();
    for sub in &root.subcircuits {
        visit(root, &sub.name, &mut marks)?;
    }
    Ok(())
}

/// Count `per_scope` over the whole expansion tree. Assumes no recursion.
pub(super) fn expanded_count(root: &Netlist, per_scope: &dyn Fn(&Netlist) -> u64) -> u64 {
    fn go(
        root: &Netlist,
        scope: &Netlist,
        per_scope: &dyn Fn(&Netlist) -> u64,
        memo: &mut BTreeMap<String, u64>,
    ) -> u64 {
        let mut total = per_scope(scope);
        for inst in &scope.instances {
            let count = if let Some(c) = memo.get(&inst.subckt) {
                *c
            } else {
                let c = root
                    .subcircuit(&inst.subckt)
                    .map(|s| go(root, &s.body, per_scope, memo))
                    .unwrap_or(0);
                memo.insert(inst.subckt.clone(), c);
                c
            };
            total = total.saturating_add(count);
        }
        total
    }
    go(root, root, per_scope, &mut BTreeMap::new())
}

fn expand(
    root: &Netlist,
    scope: &Netlist,
    prefix: &str,
    bindings: &BTreeMap<NetId, NetId>,
    out: &mut Netlist,
) -> Result<(), NetlistError> {
    let map = |out: &mut Netlist, id: NetId| -> NetId {
        if let Some(bound) = bindings.get(&id) {
            return *bound;
        }
        let net = &scope.nets[id.index()];
        if net.kind.is_rail() || prefix.is_empty() {
            out.net(&net.name)
        } else {
            out.net(&format!("{prefix}{}", net.name))
        }
    };
    for t in &scope.transistors {
        let renamed = Transistor {
            name: format!("{prefix}{}", t.name),
            drain: map(out, t.drain),
            gate: map(out, t.gate),
            source: map(out, t.source),
            body: map(out, t.body),
            ..t.clone()
        };
        out.transistors.push(renamed);
    }
    for c in &scope.capacitors {
        let renamed = Capacitor {
            name: format!("{prefix}{}", c.name),
            net_a: map(out, c.net_a),
            net_b: map(out, c.net_b),
            value_ff: c.value_ff,
        };
        out.capacitors.push(renamed);
    }
    for inst in &scope.instances {
        let sub = root
            .subcircuit(&inst.subckt)
            .ok_or_else(|| NetlistError::UnknownSubcircuit {
                line: 0,
                name: inst.subckt.clone(),
            })?;
        if sub.ports.len() != inst.connections.len() {
            return Err(NetlistError::ArityMismatch {
                line: 0,
                instance: inst.name.clone(),
                expected: sub.ports.len(),
                found: inst.connections.len(),
            });
        }
        let inner: BTreeMap<NetId, NetId> = sub
            .ports
            .iter()
            .zip(&inst.connections)
            .map(|(port, outer)| (*port, map(out, *outer)))
            .collect();
        let child_prefix = format!("{prefix}{}.", inst.name.to_lowercase());
        expand(root, &sub.body, &child_prefix, &inner, out)?;
    }
    Ok(())
}

pub(super) fn flatten(root: &Netlist) -> Result<Netlist, NetlistError> {
    check_recursion(root).map_err(|name| NetlistError::RecursiveSubcircuit { line: 0, name })?;
    let mut out = Netlist::new();
    // Keep top-level net numbering stable.
    for net in &root.nets {
        out.net(&net.name);
    }
    for (id, kind) in root.declared_ports() {
        let new = out.find_net(root.net_name(id)).expect("copied above");
        out.declare(new, kind);
    }
    expand(root, root, "", &BTreeMap::new(), &mut out)?;
    out.subcircuits = root.subcircuits.clone();
    out.classify(root.cnode_default_ff());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use crate::netlist::parse_netlist;

    const INV_SUBCKT: &str = ".subckt inv a y\nM1 y a vdd vdd PMOS W=600n L=180n\nM2 y a gnd gnd NMOS W=600n L=180n\n.ends inv\n";

    #[test]
    fn no_instances_is_identity() {
        let n = parse_netlist("M1 q d vdd vdd PMOS W=600n L=180n\nM2 q d gnd gnd NMOS W=600n L=180n").unwrap();
        assert_eq!(n.flatten().unwrap(), n);
    }

    #[test]
    fn single_instance_expands_with_prefix() {
        let text = format!("{INV_SUBCKT}X1 in out inv\n");
        let n = parse_netlist(&text).unwrap();
        let flat = n.flatten().unwrap();
        assert!(flat.is_flat());
        assert_eq!(flat.transistors.len(), 2);
        assert_eq!(flat.transistors[0].name, "x1.M1");
        assert_eq!(flat.net_name(flat.transistors[0].gate), "in");
        assert_eq!(flat.net_name(flat.transistors[0].drain), "out");
        assert_eq!(flat.transistors[0].source, flat.supply());
    }

    #[test]
    fn internal_nets_are_prefixed() {
        let text = format!(
            "{INV_SUBCKT}.subckt buf a y\nX1 a mid inv\nX2 mid y inv\n.ends\nXb in out buf\nXc out z buf\n"
        );
        let n = parse_netlist(&text).unwrap();
        assert_eq!(n.expanded_transistor_count(), 8);
        let flat = n.flatten().unwrap();
        assert_eq!(flat.transistors.len(), 8);
        assert!(flat.find_net("xb.mid").is_some());
        assert!(flat.find_net("xc.mid").is_some());
        assert!(flat.find_transistor("xb.x2.M2").is_some());
        // 1 fF per terminal survives flattening: xb.mid has 2 drains + 2 gates.
        let mid = flat.find_net("xb.mid").unwrap();
        assert_eq!(flat.nets[mid.index()].lumped_capacitance_ff, 4.0);
    }
}
