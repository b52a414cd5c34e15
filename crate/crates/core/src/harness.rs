// SPDX-License-Identifier: Apache-2.0

//! Built-in testbenches, oracle verification and characterization.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cells::{behavioral_detff, behavioral_setff, Cell, CellError, EdgeKind, SampleStream, Waveform};
use crate::engine::{run, vcd_excerpt, EngineError, LogicValue, SimConfig, Stimulus, Trace};
use crate::metrics::{
    dynamic_power_with, measure_clk_to_q, pdp_fj, total_power, CellMetrics, ClkToQ, MetricsError, PowerParams,
    Window,
};
use crate::netlist::{inverter_closure, NetId, Netlist};
use crate::units::{parse_quantity, Quantity};

pub const PATTERN_BITS: &str = "1111010110010000";
pub const PATTERN_BIT_PS: u64 = 7500;
pub const DEFAULT_CLOCK_HZ: f64 = 125e6;
pub const DEFAULT_LOAD_FF: f64 = 21.0;
pub const DEFAULT_DURATION_PS: u64 = 120_000;
/// Clock periods excluded from measurements while the cell settles.
pub const SETTLE_PERIODS: u64 = 2;
pub const TESTBENCH_NAMES: [&str; 2] = ["paper-sec3", "const-d"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Cell(#[from] CellError),
    #[error("cell `{0}` has no D/CLK/Q ports")]
    NotSequential(String),
    #[error("unknown testbench `{0}`")]
    UnknownTestbench(String),
    #[error("invalid clock frequency `{0}`")]
    InvalidFrequency(String),
}

/// Clocked stimulus for a sequential cell: a data waveform, a 50%-duty
/// clock that is high at time 0, a load on Q and a run length.
#[derive(Debug, Clone, PartialEq)]
pub struct Testbench {
    pub name: String,
    pub d: Waveform,
    pub clock_period_ps: u64,
    pub duty_pct: f64,
    pub duration_ps: u64,
    pub load_ff: f64,
    pub vdd: f64,
}

/// Period in picoseconds for a frequency given as text (`125MHz`).
pub fn period_from_freq(text: &str) -> Result<u64, HarnessError> {
    let hz = parse_quantity(text, Quantity::Frequency).map_err(|_| HarnessError::InvalidFrequency(text.into()))?;
    if hz.is_nan() || hz <= 0.0 {
        return Err(HarnessError::InvalidFrequency(text.into()));
    }
    let period = (1e12 / hz).round();
    if !(2.0..=1e15).contains(&period) {
        return Err(HarnessError::InvalidFrequency(text.into()));
    }
    Ok(period as u64)
}

/// Look up a built-in testbench, optionally at another clock period.
///
/// - `paper-sec3`: D = 1111010110010000 at 7.5 ns per bit, 125 MHz clock,
///   120 ns, 21 fF on Q, 1.8 V.
/// - `const-d`: the same bench with D held at One.
pub fn builtin_testbench(name: &str, period_ps: Option<u64>) -> Result<Testbench, HarnessError> {
    let bits: Vec<bool> = PATTERN_BITS.chars().map(|c| c == '1').collect();
    let d = match name {
        "paper-sec3" => Waveform::from_bits(&bits, PATTERN_BIT_PS),
        "const-d" => Waveform::constant(LogicValue::One),
        other => return Err(HarnessError::UnknownTestbench(other.into())),
    };
    Ok(Testbench {
        name: name.into(),
        d,
        clock_period_ps: period_ps.unwrap_or((1e12 / DEFAULT_CLOCK_HZ) as u64),
        duty_pct: 50.0,
        duration_ps: DEFAULT_DURATION_PS,
        load_ff: DEFAULT_LOAD_FF,
        vdd: 1.8,
    })
}

impl Testbench {
    pub fn settle_ps(&self) -> u64 {
        SETTLE_PERIODS * self.clock_period_ps
    }

    pub fn config(&self) -> SimConfig {
        SimConfig {
            vdd: self.vdd,
            duration_ps: self.duration_ps,
            ..SimConfig::default()
        }
    }

    pub fn stimulus(&self, d_net: &str, clk_net: &str) -> Stimulus {
        let mut s = Stimulus::new();
        s.clock(clk_net, self.clock_period_ps, self.duty_pct, 0);
        for &(t, v) in &self.d.changes {
            if t <= self.duration_ps {
                s.at(t, d_net, v);
            }
        }
        s
    }

    /// Clock edges in `[0, duration)`.
    pub fn edges(&self) -> Vec<(u64, EdgeKind)> {
        let high = (self.clock_period_ps as f64 * self.duty_pct / 100.0).round() as u64;
        let mut out = Vec::new();
        let mut rise = 0;
        while rise < self.duration_ps {
            out.push((rise, EdgeKind::Rising));
            if rise + high < self.duration_ps {
                out.push((rise + high, EdgeKind::Falling));
            }
            rise += self.clock_period_ps;
        }
        out
    }
}

/// Port names and netlist of a sequential cell with a load on Q.
pub struct Prepared {
    pub netlist: Netlist,
    pub d: String,
    pub clk: String,
    pub q: String,
    pub clock_nets: Vec<NetId>,
}

pub fn prepare(cell: &Cell, load_ff: f64) -> Result<Prepared, HarnessError> {
    let ports = cell.ports.ok_or_else(|| HarnessError::NotSequential(cell.name.clone()))?;
    let mut netlist = cell.netlist.clone();
    if load_ff > 0.0 {
        let gnd = netlist.ground();
        netlist.add_capacitor("Cload", ports.out, gnd, load_ff);
        let cnode = netlist.cnode_default_ff();
        netlist.recompute_capacitance(cnode);
    }
    let clock_nets = inverter_closure(&netlist, &[ports.clock]).into_iter().collect();
    Ok(Prepared {
        d: netlist.net_name(ports.data_in).to_string(),
        clk: netlist.net_name(ports.clock).to_string(),
        q: netlist.net_name(ports.out).to_string(),
        netlist,
        clock_nets,
    })
}

/// Q sampled just before each following edge (or at the end of the run).
pub fn sample_q(trace: &Trace, q: &str, edges: &[(u64, EdgeKind)], end_ps: u64) -> Vec<LogicValue> {
    let qi = trace.net_index(q).expect("q is in the trace");
    edges
        .iter()
        .enumerate()
        .map(|(k, _)| {
            let next = edges.get(k + 1).map(|e| e.0).unwrap_or(end_ps);
            trace.value_at(qi, next.saturating_sub(1))
        })
        .collect()
}

/// Result of running a testbench and comparing Q with the dual-edge oracle.
#[derive(Debug, Clone)]
pub struct BenchRun {
    pub trace: Trace,
    pub edges: Vec<(u64, EdgeKind)>,
    pub q: Vec<LogicValue>,
    pub oracle: SampleStream,
    /// Edges inside the settling window, where X is tolerated.
    pub preamble_edges: usize,
}

impl BenchRun {
    pub fn q_string(&self) -> String {
        self.q.iter().map(|v| v.as_char()).collect()
    }

    /// Index of the first edge whose settled Q disagrees with the oracle.
    /// Inside the preamble only X is excused.
    pub fn first_mismatch(&self) -> Option<usize> {
        self.q.iter().zip(&self.oracle.samples).enumerate().find_map(|(k, (got, s))| {
            let excused = k < self.preamble_edges && *got == LogicValue::X;
            (!excused && *got != s.q).then_some(k)
        })
    }
}

pub fn run_testbench(cell: &Cell, tb: &Testbench) -> Result<BenchRun, HarnessError> {
    let prep = prepare(cell, tb.load_ff)?;
    let stim = tb.stimulus(&prep.d, &prep.clk);
    let trace = run(&prep.netlist, &stim, &tb.config())?;
    let edges = tb.edges();
    let q = sample_q(&trace, &prep.q, &edges, tb.duration_ps);
    let oracle = behavioral_detff(&tb.d, &edges);
    let settle = tb.settle_ps();
    Ok(BenchRun {
        preamble_edges: edges.iter().filter(|e| e.0 < settle).count(),
        trace,
        edges,
        q,
        oracle,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oracle {
    Setff,
    Detff,
}

impl Oracle {
    pub fn from_name(name: &str) -> Option<Oracle> {
        match name {
            "setff" => Some(Oracle::Setff),
            "detff" => Some(Oracle::Detff),
            _ => None,
        }
    }

    fn stream(self, d: &Waveform, edges: &[(u64, EdgeKind)]) -> SampleStream {
        match self {
            Oracle::Setff => behavioral_setff(d, edges),
            Oracle::Detff => behavioral_detff(d, edges),
        }
    }
}

/// Clocking used by [`verify_random`] and [`verify_exhaustive`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyTiming {
    pub period_ps: u64,
    /// Edges driven with D = 0 before checked data starts.
    pub preamble_edges: usize,
}

impl Default for VerifyTiming {
    fn default() -> Self {
        VerifyTiming {
            period_ps: 8000,
            preamble_edges: 2 * SETTLE_PERIODS as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    /// Index among the checked (post-preamble) edges.
    pub edge_index: usize,
    pub edge_time_ps: u64,
    pub edge: EdgeKind,
    pub expected: LogicValue,
    pub got: LogicValue,
    pub vcd_excerpt: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub sequences: usize,
    pub edges_checked: usize,
    pub mismatch: Option<Mismatch>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Drive `bits` (one per edge after the preamble) and compare settled Q with
/// the oracle. D changes a quarter period after the previous edge.
pub fn check_sequence(
    cell: &Cell,
    oracle: Oracle,
    bits: &[bool],
    timing: VerifyTiming,
) -> Result<Option<Mismatch>, HarnessError> {
    let prep = prepare(cell, DEFAULT_LOAD_FF)?;
    let half = timing.period_ps / 2;
    let quarter = timing.period_ps / 4;
    let total_edges = timing.preamble_edges + bits.len();
    let duration = (total_edges as u64 + 1) * half;
    let mut d = Waveform {
        changes: vec![(0, LogicValue::Zero)],
    };
    for (i, b) in bits.iter().enumerate() {
        let j = (timing.preamble_edges + i) as u64;
        let t = if j == 0 { 0 } else { (j - 1) * half + quarter };
        let v = LogicValue::from_bool(*b);
        if t == 0 {
            d.changes[0].1 = v;
        } else if d.changes.last().map(|c| c.1) != Some(v) {
            d.changes.push((t, v));
        }
    }
    let edges: Vec<(u64, EdgeKind)> = (0..total_edges as u64)
        .map(|j| (j * half, if j % 2 == 0 { EdgeKind::Rising } else { EdgeKind::Falling }))
        .collect();
    let mut stim = Stimulus::new();
    stim.clock(&prep.clk, timing.period_ps, 50.0, 0);
    for &(t, v) in &d.changes {
        stim.at(t, &prep.d, v);
    }
    let cfg = SimConfig {
        duration_ps: duration,
        ..SimConfig::default()
    };
    let trace = run(&prep.netlist, &stim, &cfg)?;
    let got = sample_q(&trace, &prep.q, &edges, duration);
    let expect = oracle.stream(&d, &edges);
    for k in timing.preamble_edges..total_edges {
        let want = expect.samples[k].q;
        if got[k] != want {
            let (t, edge) = edges[k];
            let nets = [prep.d.as_str(), prep.clk.as_str(), prep.q.as_str()];
            return Ok(Some(Mismatch {
                edge_index: k - timing.preamble_edges,
                edge_time_ps: t,
                edge,
                expected: want,
                got: got[k],
                vcd_excerpt: vcd_excerpt(&trace, &nets, t.saturating_sub(timing.period_ps), t + timing.period_ps),
            }));
        }
    }
    Ok(None)
}

/// Seeded random D over `cycles` edges.
pub fn verify_random(cell: &Cell, oracle: Oracle, cycles: usize, seed: u64) -> Result<VerifyReport, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits: Vec<bool> = (0..cycles).map(|_| rng.gen()).collect();
    let mismatch = check_sequence(cell, oracle, &bits, VerifyTiming::default())?;
    Ok(VerifyReport {
        sequences: 1,
        edges_checked: cycles,
        mismatch,
    })
}

/// Every D sequence of length `edges`; stops at the first mismatch.
pub fn verify_exhaustive(cell: &Cell, oracle: Oracle, edges: u32) -> Result<VerifyReport, HarnessError> {
    let count = 1usize << edges;
    for code in 0..count {
        let bits: Vec<bool> = (0..edges).map(|i| code >> i & 1 == 1).collect();
        if let Some(m) = check_sequence(cell, oracle, &bits, VerifyTiming::default())? {
            return Ok(VerifyReport {
                sequences: code + 1,
                edges_checked: (code + 1) * edges as usize,
                mismatch: Some(m),
            });
        }
    }
    Ok(VerifyReport {
        sequences: count,
        edges_checked: count * edges as usize,
        mismatch: None,
    })
}

/// Power split by net group, in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBreakdown {
    /// CLK and its inverted copies.
    pub clock_network_w: f64,
    /// Every other net.
    pub data_path_w: f64,
    /// Short-circuit and leakage terms.
    pub constant_w: f64,
    pub total_w: f64,
}

#[derive(Debug, Clone)]
pub struct Characterization {
    pub cell: String,
    pub testbench: String,
    pub window: Window,
    pub power: PowerBreakdown,
    pub data_path_toggles: u64,
    pub clk_to_q: Result<ClkToQ, MetricsError>,
    pub transistor_count: usize,
    pub clocked_transistor_count: usize,
    pub trace: Trace,
}

impl Characterization {
    /// Table row; fails when Q never switched after settling.
    pub fn metrics(&self) -> Result<CellMetrics, MetricsError> {
        let delay = self.clk_to_q.clone()?.min_ps as f64;
        let power_uw = self.power.total_w * 1e6;
        Ok(CellMetrics {
            avg_power_uw: power_uw,
            min_clk_to_q_ps: delay,
            pdp_fj: pdp_fj(power_uw, delay),
            transistor_count: self.transistor_count,
            clocked_transistor_count: Some(self.clocked_transistor_count),
            layout_area_um2: None,
        })
    }
}

/// Run `tb` on `cell` and measure power over `[settle, duration)` and
/// clk-to-Q after settling.
pub fn characterize(
    cell: &Cell,
    tb: &Testbench,
    i_sc: f64,
    i_leakage: f64,
) -> Result<Characterization, HarnessError> {
    characterize_with(cell, tb, i_sc, i_leakage, BTreeMap::new())
}

/// [`characterize`] with per-net activity factors (transitions per clock
/// cycle) replacing recorded toggles in the switching power.
pub fn characterize_with(
    cell: &Cell,
    tb: &Testbench,
    i_sc: f64,
    i_leakage: f64,
    activity_overrides: BTreeMap<String, f64>,
) -> Result<Characterization, HarnessError> {
    let params = PowerParams {
        vdd: tb.vdd,
        i_sc,
        i_leakage,
        activity_overrides,
    };
    let prep = prepare(cell, tb.load_ff)?;
    let stim = tb.stimulus(&prep.d, &prep.clk);
    let trace = run(&prep.netlist, &stim, &tb.config())?;
    let window = Window::new(tb.settle_ps(), tb.duration_ps);
    let clock: Vec<usize> = prep.clock_nets.iter().map(|n| n.index()).collect();
    let data: Vec<usize> = prep
        .netlist
        .nets
        .iter()
        .filter(|n| !n.kind.is_rail() && !prep.clock_nets.contains(&n.id))
        .map(|n| n.id.index())
        .collect();
    let period = tb.clock_period_ps;
    let clock_w = dynamic_power_with(&trace, &prep.netlist, &params, window, period, &clock)?;
    let data_w = dynamic_power_with(&trace, &prep.netlist, &params, window, period, &data)?;
    let total = total_power(clock_w + data_w, &params);
    let data_path_toggles = data
        .iter()
        .map(|&i| trace.toggles_in(i, window.start_ps, window.end_ps))
        .sum();
    let clk_to_q = measure_clk_to_q(&trace, &prep.clk, &prep.q, tb.settle_ps());
    Ok(Characterization {
        cell: cell.name.clone(),
        testbench: tb.name.clone(),
        window,
        power: PowerBreakdown {
            clock_network_w: clock_w,
            data_path_w: data_w,
            constant_w: (i_sc + i_leakage) * tb.vdd,
            total_w: total,
        },
        data_path_toggles,
        clk_to_q,
        transistor_count: prep.netlist.transistors.len(),
        clocked_transistor_count: cell.clocked.len(),
        trace,
    })
}
