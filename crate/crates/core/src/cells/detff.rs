// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use super::builders::CellBuilder;
use super::{Cell, CellPorts};
use crate::netlist::{count_clocked_transistors, inverter_closure, Drive, NetKind};

/// Devices in the proposed flip-flop as built here.
pub const PROPOSED_DETFF_TRANSISTORS: usize = 18;
/// Devices gated by CLK or CLKB.
pub const PROPOSED_DETFF_CLOCKED: usize = 8;
/// Channel-connected components of the flat netlist: CLKB, each latch
/// input node, the keeper/mux/latch-output group, and Q.
pub const PROPOSED_DETFF_COMPONENTS: usize = 5;

/// Static dual-edge flip-flop: two transmission-gate latches of opposite
/// transparency in parallel, a two-device mux selecting the holding latch,
/// and an output inverter.
///
/// | devices  | function                                               |
/// |----------|--------------------------------------------------------|
/// | M1, M2   | clock inverter, `clk -> clkb`                          |
/// | M3, M4   | negative-latch TG `d -> ln_a`, on while CLK is low     |
/// | M5, M6   | positive-latch TG `d -> lp_a`, on while CLK is high    |
/// | M7, M8   | negative latch forward inverter `ln_a -> ln_b`         |
/// | M9, M10  | negative latch keeper `ln_b -> ln_a` (weak)            |
/// | M11, M12 | positive latch forward inverter `lp_a -> lp_b`         |
/// | M13, M14 | positive latch keeper `lp_b -> lp_a` (weak)            |
/// | M15, M16 | output inverter `mx -> q`                              |
/// | M17      | mux PMOS, passes `ln_b` while CLKB is low              |
/// | M18      | mux NMOS, passes `lp_b` while CLKB is high             |
pub fn build_proposed_detff() -> Cell {
    let mut b = CellBuilder::new();
    let d = b.net("d");
    let clk = b.net("clk");
    let q = b.net("q");
    let clkb = b.net("clkb");
    let ln_a = b.net("ln_a");
    let ln_b = b.net("ln_b");
    let lp_a = b.net("lp_a");
    let lp_b = b.net("lp_b");
    let mx = b.net("mx");
    let build = |b: &mut CellBuilder| -> Result<(), super::CellError> {
        b.inverter(clk, clkb, Drive::Strong)?;
        b.transmission_gate(d, ln_a, clkb, clk)?;
        b.transmission_gate(d, lp_a, clk, clkb)?;
        b.inverter(ln_a, ln_b, Drive::Strong)?;
        b.inverter(ln_b, ln_a, Drive::Weak)?;
        b.inverter(lp_a, lp_b, Drive::Strong)?;
        b.inverter(lp_b, lp_a, Drive::Weak)?;
        b.inverter(mx, q, Drive::Strong)?;
        b.mux2(ln_b, lp_b, clkb, mx)?;
        Ok(())
    };
    build(&mut b).expect("fixed topology uses distinct nets");
    b.declare(d, NetKind::Input);
    b.declare(clk, NetKind::Input);
    b.declare(q, NetKind::Output);
    let ports = CellPorts {
        data_in: d,
        clock: clk,
        out: q,
        supply: b.supply(),
        ground: b.ground(),
    };
    let netlist = b.finish();
    let clocked = clocked_manifest(&netlist, &ports);
    Cell {
        name: "detff_proposed".into(),
        netlist,
        ports: Some(ports),
        clocked,
    }
}

/// Names of devices gated by the clock or any inverted copy of it.
pub fn clocked_manifest(n: &crate::netlist::Netlist, ports: &CellPorts) -> Vec<String> {
    let clocks: BTreeSet<_> = inverter_closure(n, &[ports.clock]);
    let names: Vec<String> = n
        .transistors
        .iter()
        .filter(|t| clocks.contains(&t.gate))
        .map(|t| t.name.clone())
        .collect();
    debug_assert_eq!(names.len(), count_clocked_transistors(n, &clocks));
    names
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{conduction, partition_components, Conduction, LogicValue};

    #[test]
    fn counts_are_regression_constants() {
        let cell = build_proposed_detff();
        let n = &cell.netlist;
        assert_eq!(n.transistors.len(), PROPOSED_DETFF_TRANSISTORS);
        assert_eq!(cell.clocked.len(), PROPOSED_DETFF_CLOCKED);
        let ports = cell.ports.unwrap();
        let clocks = inverter_closure(n, &[ports.clock]);
        assert_eq!(count_clocked_transistors(n, &clocks), cell.clocked.len());
        assert_eq!(
            cell.clocked,
            ["M1", "M2", "M3", "M4", "M5", "M6", "M17", "M18"]
        );
        assert_eq!(partition_components(n).components.len(), PROPOSED_DETFF_COMPONENTS);
        n.validate(true).unwrap();
    }

    #[test]
    fn ports_are_distinct() {
        let p = build_proposed_detff().ports.unwrap();
        let set: BTreeSet<_> = [p.data_in, p.clock, p.out, p.supply, p.ground].into_iter().collect();
        assert_eq!(set.len(), 5);
    }

    #[test]
    fn keepers_are_weak() {
        let cell = build_proposed_detff();
        let weak: Vec<&str> = cell
            .netlist
            .transistors
            .iter()
            .filter(|t| t.drive == Drive::Weak)
            .map(|t| t.name.as_str())
            .collect();
        assert_eq!(weak, ["M9", "M10", "M13", "M14"]);
    }

    #[test]
    fn conduction_follows_clock_level() {
        let cell = build_proposed_detff();
        let n = &cell.netlist;
        let labels = ["M3", "M4", "M5", "M6", "M17", "M18"];
        let on_set = |clk: LogicValue| -> BTreeSet<&str> {
            labels
                .iter()
                .copied()
                .filter(|l| {
                    let t = n.find_transistor(l).unwrap();
                    let gate = match n.net_name(t.gate) {
                        "clk" => clk,
                        "clkb" => !clk,
                        other => panic!("{l} gated by {other}"),
                    };
                    conduction(t.kind, gate) == Conduction::On
                })
                .collect()
        };
        assert_eq!(on_set(LogicValue::Zero), ["M3", "M4", "M18"].into_iter().collect());
        assert_eq!(on_set(LogicValue::One), ["M5", "M6", "M17"].into_iter().collect());
    }
}
