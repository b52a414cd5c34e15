// SPDX-License-Identifier: Apache-2.0

//! Transistor-level netlists: data model, validation, and the SPICE-subset
//! card format.
//!
//! Card grammar (one card per line, `*` starts a comment line):
//!
//! ```text
//! M<name> <drain> <gate> <source> <body> <NMOS|PMOS> W=<len> L=<len> [WEAK]
//! C<name> <net_a> <net_b> <cap>
//! X<name> <net>... <subckt>
//! .subckt <name> <port>...
//! .ends [<name>]
//! .input <net>...
//! .output <net>...
//! .end
//! ```
//!
//! Net names are case-insensitive and stored lower-case. `vdd` and `gnd` are
//! global supply and ground in every scope.

mod flatten;
mod parser;
mod writer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use parser::{parse_netlist, parse_netlist_with, ParseOptions};
pub use writer::serialize_netlist;

/// Per-terminal capacitance added to every net unless configured otherwise.
pub const DEFAULT_CNODE_FF: f64 = 1.0;
/// Narrowest legal gate width when sizing validation is on.
pub const MIN_GATE_WIDTH_NM: f64 = 600.0;
/// Widest legal gate width when sizing validation is on.
pub const MAX_GATE_WIDTH_NM: f64 = 1200.0;
/// Drawn channel length of the 180 nm process.
pub const CHANNEL_LENGTH_NM: f64 = 180.0;

pub const SUPPLY_NET: &str = "vdd";
pub const GROUND_NET: &str = "gnd";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NetId(pub u32);

impl NetId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviceKind {
    Nmos,
    Pmos,
}

impl DeviceKind {
    pub fn card_name(self) -> &'static str {
        match self {
            DeviceKind::Nmos => "NMOS",
            DeviceKind::Pmos => "PMOS",
        }
    }
}

/// Drive strength a device contributes when it conducts. Keeper inverters in
/// latches are `Weak` so the write path always wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Drive {
    #[default]
    Strong,
    Weak,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transistor {
    pub name: String,
    pub kind: DeviceKind,
    pub drain: NetId,
    pub gate: NetId,
    pub source: NetId,
    pub body: NetId,
    pub width_nm: f64,
    pub length_nm: f64,
    pub drive: Drive,
}

impl Transistor {
    /// Length-over-width ratio used to scale on-resistance.
    pub fn aspect(&self) -> f64 {
        self.length_nm / self.width_nm
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Capacitor {
    pub name: String,
    pub net_a: NetId,
    pub net_b: NetId,
    pub value_ff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NetKind {
    Supply,
    Ground,
    Input,
    Output,
    Internal,
}

impl NetKind {
    pub fn is_rail(self) -> bool {
        matches!(self, NetKind::Supply | NetKind::Ground)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub id: NetId,
    pub name: String,
    pub kind: NetKind,
    pub lumped_capacitance_ff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub subckt: String,
    pub connections: Vec<NetId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subcircuit {
    pub name: String,
    /// Port nets, in declaration order, as ids in `body`.
    pub ports: Vec<NetId>,
    pub body: Netlist,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Netlist {
    pub nets: Vec<Net>,
    pub transistors: Vec<Transistor>,
    pub capacitors: Vec<Capacitor>,
    pub subcircuits: Vec<Subcircuit>,
    pub instances: Vec<Instance>,
    by_name: BTreeMap<String, NetId>,
    /// Nets explicitly marked by `.input` / `.output` cards.
    declared: BTreeMap<NetId, NetKind>,
    /// Per-terminal capacitance last used to fill `lumped_capacitance_ff`.
    cnode_ff: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetlistError {
    #[error("line {line}, column {column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: unknown card `{card}`")]
    UnknownCard { line: usize, card: String },
    #[error("line {line}: dangling net `{net}` ({context})")]
    DanglingNet {
        line: usize,
        net: String,
        context: String,
    },
    #[error("line {line}: recursive subcircuit `{name}`")]
    RecursiveSubcircuit { line: usize, name: String },
    #[error(
        "line {line}: device `{device}` has W={width_nm}nm L={length_nm}nm, \
         outside W in [600,1200]nm with L=180nm"
    )]
    BadSizing {
        line: usize,
        device: String,
        width_nm: f64,
        length_nm: f64,
    },
    #[error("line {line}: unknown subcircuit `{name}`")]
    UnknownSubcircuit { line: usize, name: String },
    #[error("line {line}: instance `{instance}` binds {found} nets, subcircuit expects {expected}")]
    ArityMismatch {
        line: usize,
        instance: String,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: duplicate name `{name}`")]
    DuplicateName { line: usize, name: String },
}

impl NetlistError {
    /// Source line the error refers to (0 for programmatically built netlists).
    pub fn line(&self) -> usize {
        match self {
            NetlistError::Syntax { line, .. }
            | NetlistError::UnknownCard { line, .. }
            | NetlistError::DanglingNet { line, .. }
            | NetlistError::RecursiveSubcircuit { line, .. }
            | NetlistError::BadSizing { line, .. }
            | NetlistError::UnknownSubcircuit { line, .. }
            | NetlistError::ArityMismatch { line, .. }
            | NetlistError::DuplicateName { line, .. } => *line,
        }
    }
}

pub fn canonical_net_name(name: &str) -> String {
    name.to_lowercase()
}

pub fn sizing_ok(width_nm: f64, length_nm: f64) -> bool {
    (MIN_GATE_WIDTH_NM..=MAX_GATE_WIDTH_NM).contains(&width_nm) && length_nm == CHANNEL_LENGTH_NM
}

impl Netlist {
    /// Empty netlist holding only the global rails.
    pub fn new() -> Self {
        let mut n = Netlist {
            cnode_ff: DEFAULT_CNODE_FF,
            ..Netlist::default()
        };
        n.net(SUPPLY_NET);
        n.net(GROUND_NET);
        n
    }

    pub fn supply(&self) -> NetId {
        self.by_name[SUPPLY_NET]
    }

    pub fn ground(&self) -> NetId {
        self.by_name[GROUND_NET]
    }

    /// Look up or create a net by (case-insensitive) name.
    pub fn net(&mut self, name: &str) -> NetId {
        let canon = canonical_net_name(name);
        if let Some(id) = self.by_name.get(&canon) {
            return *id;
        }
        let id = NetId(self.nets.len() as u32);
        let kind = match canon.as_str() {
            SUPPLY_NET => NetKind::Supply,
            GROUND_NET => NetKind::Ground,
            _ => NetKind::Internal,
        };
        self.nets.push(Net {
            id,
            name: canon.clone(),
            kind,
            lumped_capacitance_ff: 0.0,
        });
        self.by_name.insert(canon, id);
        id
    }

    pub fn find_net(&self, name: &str) -> Option<NetId> {
        self.by_name.get(&canonical_net_name(name)).copied()
    }

    pub fn net_name(&self, id: NetId) -> &str {
        &self.nets[id.index()].name
    }

    pub fn kind(&self, id: NetId) -> NetKind {
        self.nets[id.index()].kind
    }

    /// Mark a net as a primary input or output. Rails cannot be re-declared.
    pub fn declare(&mut self, id: NetId, kind: NetKind) {
        if !self.nets[id.index()].kind.is_rail() {
            self.declared.insert(id, kind);
            self.nets[id.index()].kind = kind;
        }
    }

    pub fn declared_ports(&self) -> impl Iterator<Item = (NetId, NetKind)> + '_ {
        self.declared.iter().map(|(id, kind)| (*id, *kind))
    }

    pub fn inputs(&self) -> impl Iterator<Item = NetId> + '_ {
        self.nets
            .iter()
            .filter(|n| n.kind == NetKind::Input)
            .map(|n| n.id)
    }

    pub fn add_transistor(&mut self, t: Transistor) {
        self.transistors.push(t);
    }

    pub fn add_capacitor(&mut self, name: &str, a: NetId, b: NetId, value_ff: f64) {
        self.capacitors.push(Capacitor {
            name: name.to_string(),
            net_a: a,
            net_b: b,
            value_ff,
        });
    }

    pub fn find_transistor(&self, name: &str) -> Option<&Transistor> {
        self.transistors.iter().find(|t| t.name == name)
    }

    pub fn subcircuit(&self, name: &str) -> Option<&Subcircuit> {
        let canon = canonical_net_name(name);
        self.subcircuits.iter().find(|s| s.name == canon)
    }

    pub fn is_flat(&self) -> bool {
        self.instances.is_empty()
    }

    /// Assign kinds to undeclared nets and recompute lumped capacitance.
    ///
    /// An undeclared non-rail net that touches only gate terminals has no
    /// driver inside the netlist and is treated as a primary input.
    pub fn classify(&mut self, cnode_default_ff: f64) {
        let mut channel = vec![false; self.nets.len()];
        let mut gated = vec![false; self.nets.len()];
        for t in &self.transistors {
            channel[t.drain.index()] = true;
            channel[t.source.index()] = true;
            gated[t.gate.index()] = true;
        }
        for inst in &self.instances {
            for c in &inst.connections {
                channel[c.index()] = true;
            }
        }
        for net in &mut self.nets {
            if net.kind.is_rail() {
                continue;
            }
            net.kind = match self.declared.get(&net.id) {
                Some(kind) => *kind,
                None if gated[net.id.index()] && !channel[net.id.index()] => NetKind::Input,
                None => NetKind::Internal,
            };
        }
        self.recompute_capacitance(cnode_default_ff);
    }

    /// Lumped capacitance of every net: attached capacitor values plus
    /// `cnode_default_ff` per transistor gate/drain/source terminal.
    pub fn lumped_capacitances(&self, cnode_default_ff: f64) -> Vec<f64> {
        let mut caps = vec![0.0; self.nets.len()];
        for t in &self.transistors {
            for net in [t.drain, t.gate, t.source] {
                caps[net.index()] += cnode_default_ff;
            }
        }
        for c in &self.capacitors {
            caps[c.net_a.index()] += c.value_ff;
            if c.net_b != c.net_a {
                caps[c.net_b.index()] += c.value_ff;
            }
        }
        caps
    }

    pub fn cnode_default_ff(&self) -> f64 {
        self.cnode_ff
    }

    pub fn recompute_capacitance(&mut self, cnode_default_ff: f64) {
        self.cnode_ff = cnode_default_ff;
        let caps = self.lumped_capacitances(cnode_default_ff);
        for (net, c) in self.nets.iter_mut().zip(caps) {
            net.lumped_capacitance_ff = c;
        }
    }

    /// Check references, subcircuit arity and recursion, and (optionally)
    /// device sizing. Errors carry line 0 since there is no source text.
    pub fn validate(&self, check_sizing: bool) -> Result<(), NetlistError> {
        self.validate_scope(self, check_sizing)?;
        for sub in &self.subcircuits {
            sub.body.validate_scope(self, check_sizing)?;
        }
        flatten::check_recursion(self).map_err(|name| NetlistError::RecursiveSubcircuit { line: 0, name })
    }

    fn validate_scope(&self, root: &Netlist, check_sizing: bool) -> Result<(), NetlistError> {
        let n = self.nets.len();
        let dangling = |id: NetId, what: &str| -> Result<(), NetlistError> {
            if id.index() >= n {
                Err(NetlistError::DanglingNet {
                    line: 0,
                    net: format!("#{}", id.0),
                    context: what.to_string(),
                })
            } else {
                Ok(())
            }
        };
        for t in &self.transistors {
            for id in [t.drain, t.gate, t.source, t.body] {
                dangling(id, &t.name)?;
            }
            if !(t.width_nm > 0.0 && t.length_nm > 0.0) {
                return Err(NetlistError::BadSizing {
                    line: 0,
                    device: t.name.clone(),
                    width_nm: t.width_nm,
                    length_nm: t.length_nm,
                });
            }
            if check_sizing && !sizing_ok(t.width_nm, t.length_nm) {
                return Err(NetlistError::BadSizing {
                    line: 0,
                    device: t.name.clone(),
                    width_nm: t.width_nm,
                    length_nm: t.length_nm,
                });
            }
        }
        for c in &self.capacitors {
            dangling(c.net_a, &c.name)?;
            dangling(c.net_b, &c.name)?;
        }
        for inst in &self.instances {
            for id in &inst.connections {
                dangling(*id, &inst.name)?;
            }
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
        }
        Ok(())
    }

    /// Number of transistors after full expansion, saturating on overflow.
    pub fn expanded_transistor_count(&self) -> u64 {
        flatten::expanded_count(self, &|s: &Netlist| s.transistors.len() as u64)
    }

    pub fn expanded_capacitor_count(&self) -> u64 {
        flatten::expanded_count(self, &|s: &Netlist| s.capacitors.len() as u64)
    }

    /// Inline every subcircuit instance. Internal nets and devices of an
    /// instance are renamed `<instance>.<name>`; rails stay global.
    pub fn flatten(&self) -> Result<Netlist, NetlistError> {
        flatten::flatten(self)
    }

    /// Copy with nets ordered by name (rails first) and devices by name, so
    /// that two structurally identical netlists compare equal. Net kinds are
    /// kept; whether a kind came from a port card or from inference is not.
    pub fn canonical(&self) -> Netlist {
        let mut out = Netlist::new();
        let mut names: Vec<&Net> = self.nets.iter().collect();
        names.sort_by(|a, b| a.name.cmp(&b.name));
        for net in names {
            out.net(&net.name);
        }
        let idmap: Vec<NetId> = self.nets.iter().map(|n| out.by_name[&n.name]).collect();
        let map = |id: NetId| idmap[id.index()];
        let mut transistors: Vec<Transistor> = self
            .transistors
            .iter()
            .map(|t| Transistor {
                drain: map(t.drain),
                gate: map(t.gate),
                source: map(t.source),
                body: map(t.body),
                ..t.clone()
            })
            .collect();
        transistors.sort_by(|a, b| a.name.cmp(&b.name));
        let mut capacitors: Vec<Capacitor> = self
            .capacitors
            .iter()
            .map(|c| Capacitor {
                net_a: map(c.net_a),
                net_b: map(c.net_b),
                ..c.clone()
            })
            .collect();
        capacitors.sort_by(|a, b| a.name.cmp(&b.name));
        let mut instances: Vec<Instance> = self
            .instances
            .iter()
            .map(|i| Instance {
                connections: i.connections.iter().map(|c| map(*c)).collect(),
                ..i.clone()
            })
            .collect();
        instances.sort_by(|a, b| a.name.cmp(&b.name));
        let mut subcircuits: Vec<Subcircuit> = self
            .subcircuits
            .iter()
            .map(|s| {
                let body = s.body.canonical();
                let ports = s
                    .ports
                    .iter()
                    .map(|p| body.by_name[&s.body.nets[p.index()].name])
                    .collect();
                Subcircuit {
                    name: s.name.clone(),
                    ports,
                    body,
                }
            })
            .collect();
        subcircuits.sort_by(|a, b| a.name.cmp(&b.name));
        out.transistors = transistors;
        out.capacitors = capacitors;
        out.instances = instances;
        out.subcircuits = subcircuits;
        out.cnode_ff = self.cnode_ff;
        for net in &self.nets {
            let id = map(net.id);
            out.nets[id.index()].kind = net.kind;
            out.nets[id.index()].lumped_capacitance_ff = net.lumped_capacitance_ff;
        }
        out
    }

    /// Equality up to net numbering and device order.
    pub fn structurally_eq(&self, other: &Netlist) -> bool {
        self.canonical() == other.canonical()
    }
}

/// Number of transistors whose gate terminal lies in `clock_nets`.
pub fn count_clocked_transistors(n: &Netlist, clock_nets: &BTreeSet<NetId>) -> usize {
    n.transistors
        .iter()
        .filter(|t| clock_nets.contains(&t.gate))
        .count()
}

/// `seeds` plus every net driven by a static inverter whose input is already
/// in the set, repeated to a fixed point (e.g. CLK -> CLKB).
pub fn inverter_closure(n: &Netlist, seeds: &[NetId]) -> BTreeSet<NetId> {
    let mut set: BTreeSet<NetId> = seeds.iter().copied().collect();
    let vdd = n.supply();
    let gnd = n.ground();
    loop {
        let mut grew = false;
        for p in n.transistors.iter().filter(|t| t.kind == DeviceKind::Pmos) {
            if !set.contains(&p.gate) || p.source != vdd {
                continue;
            }
            let paired = n.transistors.iter().any(|q| {
                q.kind == DeviceKind::Nmos && q.gate == p.gate && q.drain == p.drain && q.source == gnd
            });
            if paired && set.insert(p.drain) {
                grew = true;
            }
        }
        if !grew {
            return set;
        }
    }
}

impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_netlist(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inverter(input: &str) -> Netlist {
        parse_netlist(&format!(
            "M1 q {input} vdd vdd PMOS W=600n L=180n\nM2 q {input} gnd gnd NMOS W=600n L=180n\n"
        ))
        .unwrap()
    }

    #[test]
    fn clocked_count_on_inverter() {
        let n = inverter("d");
        let clk = BTreeSet::new();
        assert_eq!(count_clocked_transistors(&n, &clk), 0);
        let n = inverter("clk");
        let clk: BTreeSet<_> = [n.find_net("clk").unwrap()].into_iter().collect();
        assert_eq!(count_clocked_transistors(&n, &clk), 2);
    }

    #[test]
    fn inverter_closure_follows_clock_inverter() {
        let n = inverter("clk");
        let clk = n.find_net("clk").unwrap();
        let q = n.find_net("q").unwrap();
        assert_eq!(inverter_closure(&n, &[clk]), [clk, q].into_iter().collect());
    }

    #[test]
    fn gate_only_nets_become_inputs() {
        let n = inverter("d");
        assert_eq!(n.kind(n.find_net("d").unwrap()), NetKind::Input);
        assert_eq!(n.kind(n.find_net("q").unwrap()), NetKind::Internal);
        assert_eq!(n.kind(n.supply()), NetKind::Supply);
        assert_eq!(n.kind(n.ground()), NetKind::Ground);
    }

    #[test]
    fn capacitance_counts_terminals_and_caps() {
        let mut n = inverter("d");
        let q = n.find_net("q").unwrap();
        let gnd = n.ground();
        n.add_capacitor("Cl", q, gnd, 21.0);
        n.recompute_capacitance(1.0);
        assert_eq!(n.nets[q.index()].lumped_capacitance_ff, 23.0);
        let d = n.find_net("d").unwrap();
        assert_eq!(n.nets[d.index()].lumped_capacitance_ff, 2.0);
    }

    #[test]
    fn validate_catches_out_of_range_ids() {
        let mut n = inverter("d");
        n.transistors[0].gate = NetId(99);
        assert!(matches!(n.validate(false), Err(NetlistError::DanglingNet { .. })));
    }
}
