// SPDX-License-Identifier: Apache-2.0

//! Power, clk-to-Q delay, power-delay product and design comparisons.
//!
//! Power follows the usual three-term model: switching power from recorded
//! toggles, plus constant short-circuit and leakage currents times the
//! supply. Each full-swing toggle of a net with lumped capacitance `C`
//! dissipates `C * Vdd^2 / 2`.

mod report;

pub use report::{
    build_comparison, parse_rows, published_rows, render_csv, render_rows_csv, render_text, Comparison,
    Improvement, RowRecord, ROWS_HEADER,
};

use std::collections::BTreeMap;

use crate::engine::Trace;
use crate::netlist::Netlist;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("measurement window [{start_ps}, {end_ps}) ps is empty")]
    EmptyWindow { start_ps: u64, end_ps: u64 },
    #[error("output `{net}` never switches after {after_ps} ps")]
    NoTransitions { net: String, after_ps: u64 },
    #[error("baseline value is zero")]
    ZeroBaseline,
    #[error("unknown net `{0}`")]
    UnknownNet(String),
    #[error("rows line {line}: {message}")]
    Rows { line: u64, message: String },
    #[error("invalid power parameter {name}: {reason}")]
    InvalidParams { name: String, reason: &'static str },
}

/// Supply, constant-current terms and optional activity factors of the
/// power model.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerParams {
    pub vdd: f64,
    /// Short-circuit current, amperes.
    pub i_sc: f64,
    /// Leakage current, amperes.
    pub i_leakage: f64,
    /// Full-swing transitions per clock cycle, by net name. Listed nets use
    /// this instead of their recorded toggles.
    pub activity_overrides: BTreeMap<String, f64>,
}

impl PowerParams {
    pub fn new(vdd: f64) -> Self {
        PowerParams {
            vdd,
            i_sc: 0.0,
            i_leakage: 0.0,
            activity_overrides: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        let bad = |name: &str, reason| {
            Err(MetricsError::InvalidParams {
                name: name.to_string(),
                reason,
            })
        };
        if !(self.vdd > 0.0 && self.vdd.is_finite()) {
            return bad("vdd", "must be positive");
        }
        for (name, v) in [("i_sc", self.i_sc), ("i_leakage", self.i_leakage)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(name, "must be non-negative");
            }
        }
        for (net, p) in &self.activity_overrides {
            if !(*p >= 0.0 && p.is_finite()) {
                return bad(net, "activity must be non-negative");
            }
        }
        Ok(())
    }
}

/// Half-open time window in picoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start_ps: u64,
    pub end_ps: u64,
}

impl Window {
    pub fn new(start_ps: u64, end_ps: u64) -> Self {
        Window { start_ps, end_ps }
    }

    fn check(self) -> Result<f64, MetricsError> {
        if self.end_ps <= self.start_ps {
            return Err(MetricsError::EmptyWindow {
                start_ps: self.start_ps,
                end_ps: self.end_ps,
            });
        }
        Ok((self.end_ps - self.start_ps) as f64 * 1e-12)
    }
}

/// Switching power in watts over `window`, summed over `nets` (trace
/// indices, which match netlist net ids).
pub fn dynamic_power_of(
    trace: &Trace,
    n: &Netlist,
    vdd: f64,
    window: Window,
    nets: &[usize],
) -> Result<f64, MetricsError> {
    let seconds = window.check()?;
    let energy: f64 = nets
        .iter()
        .map(|&i| {
            let toggles = trace.toggles_in(i, window.start_ps, window.end_ps) as f64;
            toggles * 0.5 * n.nets[i].lumped_capacitance_ff * 1e-15 * vdd * vdd
        })
        .sum();
    Ok(energy / seconds)
}

/// [`dynamic_power_of`] with activity overrides: an overridden net
/// contributes `p_t * C * Vdd^2 / 2` per clock period of `clock_period_ps`.
pub fn dynamic_power_with(
    trace: &Trace,
    n: &Netlist,
    params: &PowerParams,
    window: Window,
    clock_period_ps: u64,
    nets: &[usize],
) -> Result<f64, MetricsError> {
    params.validate()?;
    if let Some(net) = params.activity_overrides.keys().find(|k| trace.net_index(k).is_none()) {
        return Err(MetricsError::UnknownNet(net.clone()));
    }
    let seconds = window.check()?;
    let period_s = clock_period_ps as f64 * 1e-12;
    if !params.activity_overrides.is_empty() && period_s <= 0.0 {
        return Err(MetricsError::InvalidParams {
            name: "clock_period".into(),
            reason: "must be positive",
        });
    }
    let vdd = params.vdd;
    let power: f64 = nets
        .iter()
        .map(|&i| {
            let half_cv2 = 0.5 * n.nets[i].lumped_capacitance_ff * 1e-15 * vdd * vdd;
            match params.activity_overrides.get(&trace.names[i]) {
                Some(p_t) => p_t * half_cv2 / period_s,
                None => trace.toggles_in(i, window.start_ps, window.end_ps) as f64 * half_cv2 / seconds,
            }
        })
        .sum();
    Ok(power)
}

/// Switching power in watts over `window`, summed over every net.
pub fn dynamic_power(trace: &Trace, n: &Netlist, vdd: f64, window: Window) -> Result<f64, MetricsError> {
    let all: Vec<usize> = (0..trace.names.len()).collect();
    dynamic_power_of(trace, n, vdd, window, &all)
}

pub fn total_power(p_dyn: f64, params: &PowerParams) -> f64 {
    p_dyn + params.i_sc * params.vdd + params.i_leakage * params.vdd
}

/// Power-delay product in joules.
pub fn pdp(avg_power_w: f64, delay_s: f64) -> f64 {
    avg_power_w * delay_s
}

/// Relative change in percent, signed so that a better `new` is positive.
pub fn improvement_pct(base: f64, new: f64, lower_is_better: bool) -> Result<f64, MetricsError> {
    if base == 0.0 {
        return Err(MetricsError::ZeroBaseline);
    }
    Ok(if lower_is_better {
        (base - new) / base * 100.0
    } else {
        (new - base) / base * 100.0
    })
}

/// Clock-to-output delays measured on a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ClkToQ {
    pub min_ps: u64,
    pub max_ps: u64,
    /// `(edge time, delay)` for every edge followed by a Q transition.
    pub per_edge: Vec<(u64, u64)>,
}

/// For each clock edge at or after `settle_ps`, the delay to the first
/// full-swing Q transition before the next edge.
pub fn measure_clk_to_q(trace: &Trace, clk: &str, q: &str, settle_ps: u64) -> Result<ClkToQ, MetricsError> {
    let ci = trace.net_index(clk).ok_or_else(|| MetricsError::UnknownNet(clk.into()))?;
    let qi = trace.net_index(q).ok_or_else(|| MetricsError::UnknownNet(q.into()))?;
    let edges: Vec<u64> = trace
        .transitions(ci)
        .into_iter()
        .filter(|t| t.from.is_full_swing(t.to))
        .map(|t| t.time_ps)
        .filter(|t| *t >= settle_ps)
        .collect();
    let q_moves: Vec<u64> = trace
        .transitions(qi)
        .into_iter()
        .filter(|t| t.from.is_full_swing(t.to))
        .map(|t| t.time_ps)
        .collect();
    let mut per_edge = Vec::new();
    for (k, &edge) in edges.iter().enumerate() {
        let next = edges.get(k + 1).copied().unwrap_or(u64::MAX);
        let first = q_moves.partition_point(|t| *t <= edge);
        if let Some(&t) = q_moves.get(first) {
            if t < next {
                per_edge.push((edge, t - edge));
            }
        }
    }
    if per_edge.is_empty() {
        return Err(MetricsError::NoTransitions {
            net: q.into(),
            after_ps: settle_ps,
        });
    }
    Ok(ClkToQ {
        min_ps: per_edge.iter().map(|e| e.1).min().unwrap_or(0),
        max_ps: per_edge.iter().map(|e| e.1).max().unwrap_or(0),
        per_edge,
    })
}

/// Figures of merit for one design.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMetrics {
    pub avg_power_uw: f64,
    pub min_clk_to_q_ps: f64,
    pub pdp_fj: f64,
    pub transistor_count: usize,
    pub clocked_transistor_count: Option<usize>,
    pub layout_area_um2: Option<f64>,
}

impl CellMetrics {
    /// Metrics with PDP derived from power and delay.
    pub fn from_measurements(avg_power_uw: f64, min_clk_to_q_ps: f64, transistor_count: usize) -> Self {
        CellMetrics {
            avg_power_uw,
            min_clk_to_q_ps,
            pdp_fj: pdp_fj(avg_power_uw, min_clk_to_q_ps),
            transistor_count,
            clocked_transistor_count: None,
            layout_area_um2: None,
        }
    }
}

/// PDP in femtojoules from microwatts and picoseconds.
pub fn pdp_fj(avg_power_uw: f64, delay_ps: f64) -> f64 {
    pdp(avg_power_uw * 1e-6, delay_ps * 1e-12) * 1e15
}
