// SPDX-License-Identifier: Apache-2.0

use super::signal::{LogicValue, SignalState};

/// A value change on one net.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub time_ps: u64,
    pub from: LogicValue,
    pub to: LogicValue,
}

/// Recorded simulation result. Every net has an entry at time 0 followed by
/// one entry per state change, with strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub resolution_ps: u64,
    pub end_ps: u64,
    pub names: Vec<String>,
    pub waveforms: Vec<Vec<(u64, SignalState)>>,
    /// Zero<->One value changes per net.
    pub toggle_counts: Vec<u64>,
    pub final_states: Vec<SignalState>,
}

impl Trace {
    /// Build a trace from waveforms, deriving toggle counts and final states.
    pub fn from_waveforms(
        resolution_ps: u64,
        end_ps: u64,
        names: Vec<String>,
        waveforms: Vec<Vec<(u64, SignalState)>>,
    ) -> Trace {
        let toggle_counts = waveforms
            .iter()
            .map(|w| {
                w.windows(2)
                    .filter(|p| p[0].1.value.is_full_swing(p[1].1.value))
                    .count() as u64
            })
            .collect();
        let final_states = waveforms
            .iter()
            .map(|w| w.last().map(|e| e.1).unwrap_or(SignalState::stored(LogicValue::X)))
            .collect();
        Trace {
            resolution_ps,
            end_ps,
            names,
            waveforms,
            toggle_counts,
            final_states,
        }
    }

    pub fn net_index(&self, name: &str) -> Option<usize> {
        let name = name.to_ascii_lowercase();
        self.names.iter().position(|n| *n == name)
    }

    /// State in force at `t` (the last entry at or before `t`).
    pub fn state_at(&self, net: usize, t: u64) -> SignalState {
        let w = &self.waveforms[net];
        let idx = w.partition_point(|e| e.0 <= t);
        if idx == 0 {
            SignalState::stored(LogicValue::X)
        } else {
            w[idx - 1].1
        }
    }

    pub fn value_at(&self, net: usize, t: u64) -> LogicValue {
        self.state_at(net, t).value
    }

    /// Value changes (ignoring strength-only changes), in time order.
    pub fn transitions(&self, net: usize) -> Vec<Transition> {
        self.waveforms[net]
            .windows(2)
            .filter(|p| p[0].1.value != p[1].1.value)
            .map(|p| Transition {
                time_ps: p[1].0,
                from: p[0].1.value,
                to: p[1].1.value,
            })
            .collect()
    }

    /// Zero<->One changes with time in `[start, end)`.
    pub fn toggles_in(&self, net: usize, start: u64, end: u64) -> u64 {
        self.transitions(net)
            .iter()
            .filter(|t| t.time_ps >= start && t.time_ps < end && t.from.is_full_swing(t.to))
            .count() as u64
    }

    /// Recount toggles from the waveforms and compare with the stored counts.
    pub fn toggles_consistent(&self) -> bool {
        self.waveforms.iter().zip(&self.toggle_counts).all(|(w, &c)| {
            w.windows(2).filter(|p| p[0].1.value.is_full_swing(p[1].1.value)).count() as u64 == c
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Strength;

    fn s(v: LogicValue) -> SignalState {
        SignalState::strong(v)
    }

    #[test]
    fn toggles_skip_x() {
        use LogicValue::*;
        let w = vec![(0, SignalState::stored(X)), (5, s(One)), (9, s(Zero)), (12, s(X)), (20, s(One)), (30, s(Zero))];
        let t = Trace::from_waveforms(1, 40, vec!["n".into()], vec![w]);
        assert_eq!(t.toggle_counts, vec![2]);
        assert!(t.toggles_consistent());
        assert_eq!(t.toggles_in(0, 0, 10), 1);
        assert_eq!(t.toggles_in(0, 10, 40), 1);
        assert_eq!(t.value_at(0, 4), X);
        assert_eq!(t.value_at(0, 5), One);
        assert_eq!(t.final_states, vec![s(Zero)]);
        assert_eq!(t.transitions(0).len(), 5);
    }

    #[test]
    fn strength_changes_are_not_transitions() {
        use LogicValue::*;
        let w = vec![(0, s(One)), (5, SignalState::new(One, Strength::Stored))];
        let t = Trace::from_waveforms(1, 10, vec!["n".into()], vec![w]);
        assert!(t.transitions(0).is_empty());
        assert_eq!(t.toggle_counts, vec![0]);
    }
}
