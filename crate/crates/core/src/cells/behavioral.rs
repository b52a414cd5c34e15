// SPDX-License-Identifier: Apache-2.0

use super::CellError;
use crate::engine::LogicValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Rising,
    Falling,
}

/// Piecewise-constant logic waveform. The value before the first change
/// is X.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Waveform {
    pub changes: Vec<(u64, LogicValue)>,
}

impl Waveform {
    pub fn constant(v: LogicValue) -> Self {
        Waveform { changes: vec![(0, v)] }
    }

    /// One bit per `bit_ps`, starting at time 0.
    pub fn from_bits(bits: &[bool], bit_ps: u64) -> Self {
        Waveform {
            changes: bits
                .iter()
                .enumerate()
                .map(|(i, b)| (i as u64 * bit_ps, LogicValue::from_bool(*b)))
                .collect(),
        }
    }

    /// Value at `t`; a change at exactly `t` is already visible.
    pub fn value_at(&self, t: u64) -> LogicValue {
        let idx = self.changes.partition_point(|c| c.0 <= t);
        if idx == 0 {
            LogicValue::X
        } else {
            self.changes[idx - 1].1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sample {
    pub time_ps: u64,
    pub edge: EdgeKind,
    pub d: LogicValue,
    pub q: LogicValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SampleStream {
    pub samples: Vec<Sample>,
}

impl SampleStream {
    pub fn q_values(&self) -> Vec<LogicValue> {
        self.samples.iter().map(|s| s.q).collect()
    }

    /// Q values as a string of `0`, `1` and `x`.
    pub fn q_string(&self) -> String {
        self.samples.iter().map(|s| s.q.as_char()).collect()
    }
}

fn check_increasing(edges: &[(u64, EdgeKind)]) {
    assert!(
        edges.windows(2).all(|w| w[0].0 < w[1].0),
        "clock edges must be strictly increasing"
    );
}

/// Ideal rising-edge flip-flop. Q starts at X, takes D at each rising edge
/// and holds across falling edges.
///
/// # Panics
/// If edge times are not strictly increasing.
pub fn behavioral_setff(d: &Waveform, edges: &[(u64, EdgeKind)]) -> SampleStream {
    check_increasing(edges);
    let mut q = LogicValue::X;
    let samples = edges
        .iter()
        .map(|&(t, edge)| {
            let dv = d.value_at(t);
            if edge == EdgeKind::Rising {
                q = dv;
            }
            Sample { time_ps: t, edge, d: dv, q }
        })
        .collect();
    SampleStream { samples }
}

/// Ideal dual-edge flip-flop: Q takes D at every edge.
///
/// # Panics
/// If edge times are not strictly increasing.
pub fn behavioral_detff(d: &Waveform, edges: &[(u64, EdgeKind)]) -> SampleStream {
    check_increasing(edges);
    let samples = edges
        .iter()
        .map(|&(t, edge)| {
            let dv = d.value_at(t);
            Sample { time_ps: t, edge, d: dv, q: dv }
        })
        .collect();
    SampleStream { samples }
}

/// Clock edges of a square wave that is high at time 0 with the given
/// period and 50% duty, over `[0, until)`.
pub fn square_clock_edges(period_ps: u64, until: u64) -> Vec<(u64, EdgeKind)> {
    let half = period_ps / 2;
    (0..)
        .map(|k| k * half)
        .take_while(|t| *t < until)
        .enumerate()
        .map(|(k, t)| (t, if k % 2 == 0 { EdgeKind::Rising } else { EdgeKind::Falling }))
        .collect()
}

/// Narrow One pulses of `width_ps` starting at every clock edge.
pub fn behavioral_pulse_generator(edges: &[u64], width_ps: u64) -> Result<Waveform, CellError> {
    let min_spacing = edges.windows(2).map(|w| w[1].saturating_sub(w[0])).min();
    if let Some(spacing) = min_spacing {
        if width_ps.saturating_mul(2) >= spacing {
            return Err(CellError::PulseOverlap {
                width_ps,
                min_spacing_ps: spacing,
            });
        }
    }
    let mut changes = Vec::new();
    if edges.first().is_none_or(|&t| t > 0) {
        changes.push((0, LogicValue::Zero));
    }
    for &t in edges {
        changes.push((t, LogicValue::One));
        changes.push((t + width_ps, LogicValue::Zero));
    }
    Ok(Waveform { changes })
}

/// Number of One pulses in a waveform.
pub fn count_pulses(w: &Waveform) -> usize {
    let mut prev = LogicValue::X;
    let mut count = 0;
    for &(_, v) in &w.changes {
        if v == LogicValue::One && prev != LogicValue::One {
            count += 1;
        }
        prev = v;
    }
    count
}
