// SPDX-License-Identifier: Apache-2.0

//! Built-in transistor cells and behavioral golden models.

mod behavioral;
mod builders;
mod detff;

pub use behavioral::{
    behavioral_detff, behavioral_pulse_generator, behavioral_setff, count_pulses, square_clock_edges, EdgeKind,
    Sample, SampleStream, Waveform,
};
pub use builders::{build_inverter, build_mux2, build_transmission_gate, CellBuilder};
pub use detff::{
    build_proposed_detff, clocked_manifest, PROPOSED_DETFF_CLOCKED, PROPOSED_DETFF_COMPONENTS,
    PROPOSED_DETFF_TRANSISTORS,
};

use crate::netlist::{Drive, NetId, NetKind, Netlist};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CellError {
    #[error("{role}: net `{net}` used for two terminals")]
    DuplicateNet { role: &'static str, net: String },
    #[error("pulse width {width_ps} ps overlaps edges {min_spacing_ps} ps apart")]
    PulseOverlap { width_ps: u64, min_spacing_ps: u64 },
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
}

/// Port nets of a sequential cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellPorts {
    pub data_in: NetId,
    pub clock: NetId,
    pub out: NetId,
    pub supply: NetId,
    pub ground: NetId,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub name: String,
    pub netlist: Netlist,
    /// Present on sequential cells.
    pub ports: Option<CellPorts>,
    /// Devices gated by the clock or its inverted copies.
    pub clocked: Vec<String>,
}

pub const CELL_NAMES: [&str; 4] = ["detff_proposed", "inverter", "tg_latch", "mux2"];

/// Level-sensitive latch, transparent while `clk` is One: local clock
/// inverter, transmission gate, forward inverter with weak keeper, and an
/// output inverter so `q` follows `d`.
pub fn build_tg_latch() -> Cell {
    let mut b = CellBuilder::new();
    let d = b.net("d");
    let clk = b.net("clk");
    let q = b.net("q");
    let clkb = b.net("clkb");
    let a = b.net("a");
    let ab = b.net("ab");
    let build = |b: &mut CellBuilder| -> Result<(), CellError> {
        b.inverter(clk, clkb, Drive::Strong)?;
        b.transmission_gate(d, a, clk, clkb)?;
        b.inverter(a, ab, Drive::Strong)?;
        b.inverter(ab, a, Drive::Weak)?;
        b.inverter(ab, q, Drive::Strong)?;
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
        name: "tg_latch".into(),
        netlist,
        ports: Some(ports),
        clocked,
    }
}

/// Look up a built-in cell by name.
pub fn cell_by_name(name: &str) -> Result<Cell, CellError> {
    let plain = |name: &str, netlist: Netlist| Cell {
        name: name.into(),
        netlist,
        ports: None,
        clocked: Vec::new(),
    };
    match name {
        "detff_proposed" => Ok(build_proposed_detff()),
        "tg_latch" => Ok(build_tg_latch()),
        "inverter" => Ok(plain(name, build_inverter("a", "y", Drive::Strong)?)),
        "mux2" => Ok(plain(name, build_mux2("in0", "in1", "sel_bar", "out")?)),
        other => Err(CellError::UnknownCell(other.to_string())),
    }
}
