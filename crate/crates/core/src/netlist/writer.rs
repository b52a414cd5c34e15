// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use super::{Drive, NetKind, Netlist};

const HEADER: &str = "* detffsim netlist\n";

fn body_cards(n: &Netlist, out: &mut String) {
    let mut transistors: Vec<_> = n.transistors.iter().collect();
    transistors.sort_by(|a, b| a.name.cmp(&b.name));
    for t in transistors {
        let _ = write!(
            out,
            "{} {} {} {} {} {} W={}n L={}n",
            t.name,
            n.net_name(t.drain),
            n.net_name(t.gate),
            n.net_name(t.source),
            n.net_name(t.body),
            t.kind.card_name(),
            t.width_nm,
            t.length_nm,
        );
        if t.drive == Drive::Weak {
            out.push_str(" WEAK");
        }
        out.push('\n');
    }
    let mut capacitors: Vec<_> = n.capacitors.iter().collect();
    capacitors.sort_by(|a, b| a.name.cmp(&b.name));
    for c in capacitors {
        let _ = writeln!(
            out,
            "{} {} {} {}f",
            c.name,
            n.net_name(c.net_a),
            n.net_name(c.net_b),
            c.value_ff
        );
    }
    let mut instances: Vec<_> = n.instances.iter().collect();
    instances.sort_by(|a, b| a.name.cmp(&b.name));
    for inst in instances {
        out.push_str(&inst.name);
        for c in &inst.connections {
            out.push(' ');
            out.push_str(n.net_name(*c));
        }
        let _ = writeln!(out, " {}", inst.subckt);
    }
}

/// Canonical card text. Subcircuits come first, then port declarations,
/// then devices; every group is sorted by name so output depends only on
/// the netlist's structure.
pub fn serialize_netlist(n: &Netlist) -> String {
    let mut out = String::from(HEADER);
    let mut subs: Vec<_> = n.subcircuits.iter().collect();
    subs.sort_by(|a, b| a.name.cmp(&b.name));
    for sub in subs {
        out.push_str(".subckt ");
        out.push_str(&sub.name);
        for p in &sub.ports {
            out.push(' ');
            out.push_str(sub.body.net_name(*p));
        }
        out.push('\n');
        body_cards(&sub.body, &mut out);
        let _ = writeln!(out, ".ends {}", sub.name);
    }
    for (kind, card) in [(NetKind::Input, ".input"), (NetKind::Output, ".output")] {
        let mut names: Vec<&str> = n
            .nets
            .iter()
            .filter(|net| net.kind == kind)
            .map(|net| net.name.as_str())
            .collect();
        if names.is_empty() {
            continue;
        }
        names.sort_unstable();
        let _ = writeln!(out, "{card} {}", names.join(" "));
    }
    body_cards(n, &mut out);
    out
}
