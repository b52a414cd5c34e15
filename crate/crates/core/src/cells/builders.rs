// SPDX-License-Identifier: Apache-2.0

use super::CellError;
use crate::netlist::{DeviceKind, Drive, NetId, NetKind, Netlist, Transistor, CHANNEL_LENGTH_NM, MIN_GATE_WIDTH_NM};

/// Incremental netlist construction with sequential device names `M1`,
/// `M2`, ... in build order. Every device uses the minimum legal sizing.
#[derive(Debug, Clone)]
pub struct CellBuilder {
    netlist: Netlist,
    next: usize,
}

impl Default for CellBuilder {
    fn default() -> Self {
        Self::new()
    }
}

fn distinct(role: &'static str, nets: &[NetId], n: &Netlist) -> Result<(), CellError> {
    for (i, a) in nets.iter().enumerate() {
        if nets[..i].contains(a) {
            return Err(CellError::DuplicateNet {
                role,
                net: n.net_name(*a).to_string(),
            });
        }
    }
    Ok(())
}

impl CellBuilder {
    pub fn new() -> Self {
        CellBuilder {
            netlist: Netlist::new(),
            next: 1,
        }
    }

    pub fn net(&mut self, name: &str) -> NetId {
        self.netlist.net(name)
    }

    pub fn supply(&self) -> NetId {
        self.netlist.supply()
    }

    pub fn ground(&self) -> NetId {
        self.netlist.ground()
    }

    pub fn declare(&mut self, id: NetId, kind: NetKind) {
        self.netlist.declare(id, kind);
    }

    pub fn netlist(&self) -> &Netlist {
        &self.netlist
    }

    fn device(&mut self, kind: DeviceKind, drain: NetId, gate: NetId, source: NetId, drive: Drive) -> String {
        let name = format!("M{}", self.next);
        self.next += 1;
        let body = match kind {
            DeviceKind::Nmos => self.netlist.ground(),
            DeviceKind::Pmos => self.netlist.supply(),
        };
        self.netlist.add_transistor(Transistor {
            name: name.clone(),
            kind,
            drain,
            gate,
            source,
            body,
            width_nm: MIN_GATE_WIDTH_NM,
            length_nm: CHANNEL_LENGTH_NM,
            drive,
        });
        name
    }

    /// Static inverter: PMOS pull-up, then NMOS pull-down.
    pub fn inverter(&mut self, input: NetId, output: NetId, drive: Drive) -> Result<[String; 2], CellError> {
        let (vdd, gnd) = (self.supply(), self.ground());
        distinct("inverter", &[input, output, vdd, gnd], &self.netlist)?;
        let p = self.device(DeviceKind::Pmos, output, input, vdd, drive);
        let n = self.device(DeviceKind::Nmos, output, input, gnd, drive);
        Ok([p, n])
    }

    /// Transmission gate between `a` and `b`, on when `ctrl` is One:
    /// NMOS gated by `ctrl`, then PMOS gated by `ctrl_bar`.
    pub fn transmission_gate(
        &mut self,
        a: NetId,
        b: NetId,
        ctrl: NetId,
        ctrl_bar: NetId,
    ) -> Result<[String; 2], CellError> {
        distinct("transmission gate", &[a, b, ctrl, ctrl_bar], &self.netlist)?;
        let n = self.device(DeviceKind::Nmos, b, ctrl, a, Drive::Strong);
        let p = self.device(DeviceKind::Pmos, b, ctrl_bar, a, Drive::Strong);
        Ok([n, p])
    }

    /// Two-device mux with both gates on `sel_bar`: the PMOS passes `in0`
    /// when `sel_bar` is Zero, the NMOS passes `in1` when it is One.
    pub fn mux2(&mut self, in0: NetId, in1: NetId, sel_bar: NetId, out: NetId) -> Result<[String; 2], CellError> {
        distinct("mux2", &[in0, in1, sel_bar, out], &self.netlist)?;
        let p = self.device(DeviceKind::Pmos, out, sel_bar, in0, Drive::Strong);
        let n = self.device(DeviceKind::Nmos, out, sel_bar, in1, Drive::Strong);
        Ok([p, n])
    }

    /// Classify nets and return the finished netlist.
    pub fn finish(mut self) -> Netlist {
        let cnode = crate::netlist::DEFAULT_CNODE_FF;
        self.netlist.classify(cnode);
        self.netlist
    }
}

/// Standalone inverter `input -> output`.
pub fn build_inverter(input: &str, output: &str, drive: Drive) -> Result<Netlist, CellError> {
    let mut b = CellBuilder::new();
    let (i, o) = (b.net(input), b.net(output));
    b.inverter(i, o, drive)?;
    b.declare(i, NetKind::Input);
    b.declare(o, NetKind::Output);
    Ok(b.finish())
}

/// Standalone transmission gate; all four terminals are inputs except `b`.
pub fn build_transmission_gate(a: &str, b: &str, ctrl: &str, ctrl_bar: &str) -> Result<Netlist, CellError> {
    let mut cb = CellBuilder::new();
    let ids = [cb.net(a), cb.net(b), cb.net(ctrl), cb.net(ctrl_bar)];
    cb.transmission_gate(ids[0], ids[1], ids[2], ids[3])?;
    for id in [ids[0], ids[2], ids[3]] {
        cb.declare(id, NetKind::Input);
    }
    cb.declare(ids[1], NetKind::Output);
    Ok(cb.finish())
}

/// Standalone two-device mux.
pub fn build_mux2(in0: &str, in1: &str, sel_bar: &str, out: &str) -> Result<Netlist, CellError> {
    let mut b = CellBuilder::new();
    let ids = [b.net(in0), b.net(in1), b.net(sel_bar), b.net(out)];
    b.mux2(ids[0], ids[1], ids[2], ids[3])?;
    for id in &ids[..3] {
        b.declare(*id, NetKind::Input);
    }
    b.declare(ids[3], NetKind::Output);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{partition_components, solve_component, LogicValue, SignalState};

    fn states_for(n: &Netlist, assign: &[(&str, LogicValue)]) -> Vec<SignalState> {
        n.nets
            .iter()
            .map(|net| match net.kind {
                NetKind::Supply => SignalState::strong(LogicValue::One),
                NetKind::Ground => SignalState::strong(LogicValue::Zero),
                _ => assign
                    .iter()
                    .find(|(name, _)| *name == net.name)
                    .map(|(_, v)| SignalState::strong(*v))
                    .unwrap_or(SignalState::stored(LogicValue::X)),
            })
            .collect()
    }

    fn solve_net(n: &Netlist, states: &[SignalState], net: &str) -> SignalState {
        let p = partition_components(n);
        let id = n.find_net(net).unwrap();
        let comp = &p.components[p.component_of[id.index()].unwrap()];
        let sol = solve_component(n, comp, states).unwrap();
        sol.states[comp.local_index(id).unwrap()]
    }

    #[test]
    fn inverter_has_two_devices_and_inverts() {
        let n = build_inverter("a", "y", Drive::Strong).unwrap();
        assert_eq!(n.transistors.len(), 2);
        for v in [LogicValue::Zero, LogicValue::One] {
            let s = states_for(&n, &[("a", v)]);
            assert_eq!(solve_net(&n, &s, "y"), SignalState::strong(!v));
        }
        let weak = build_inverter("a", "y", Drive::Weak).unwrap();
        assert!(weak.transistors.iter().all(|t| t.drive == Drive::Weak));
    }

    #[test]
    fn transmission_gate_passes_when_on() {
        let n = build_transmission_gate("a", "b", "c", "cb").unwrap();
        assert_eq!(n.transistors.len(), 2);
        for v in [LogicValue::Zero, LogicValue::One] {
            let s = states_for(&n, &[("a", v), ("c", LogicValue::One), ("cb", LogicValue::Zero)]);
            assert_eq!(solve_net(&n, &s, "b").value, v);
        }
    }

    #[test]
    fn mux2_truth_table() {
        use LogicValue::*;
        let n = build_mux2("i0", "i1", "sb", "o").unwrap();
        assert_eq!(n.transistors.len(), 2);
        assert_eq!(n.transistors.iter().filter(|t| t.kind == DeviceKind::Pmos).count(), 1);
        for i0 in [Zero, One] {
            for i1 in [Zero, One] {
                for sb in [Zero, One] {
                    let s = states_for(&n, &[("i0", i0), ("i1", i1), ("sb", sb)]);
                    let expect = if sb == Zero { i0 } else { i1 };
                    assert_eq!(solve_net(&n, &s, "o"), SignalState::strong(expect), "{i0} {i1} {sb}");
                }
            }
        }
    }

    #[test]
    fn duplicate_nets_rejected() {
        assert!(matches!(
            build_inverter("a", "a", Drive::Strong),
            Err(CellError::DuplicateNet { .. })
        ));
        assert!(build_transmission_gate("a", "b", "a", "c").is_err());
        assert!(build_mux2("i", "i", "s", "o").is_err());
        assert!(build_inverter("vdd", "y", Drive::Strong).is_err());
    }
}
