// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::signal::LogicValue;
use super::EngineError;
use crate::netlist::{canonical_net_name, NetKind, Netlist};
use crate::units::parse_time_ps;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StimEvent {
    pub time_ps: u64,
    pub net: String,
    pub value: LogicValue,
}

/// Periodic input: high for `duty_pct` percent of each period starting at
/// `phase_ps + k * period_ps`, extended periodically before `phase_ps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClockSpec {
    pub net: String,
    pub period_ps: u64,
    pub duty_pct: f64,
    pub phase_ps: u64,
}

impl ClockSpec {
    pub fn high_ps(&self) -> u64 {
        (self.period_ps as f64 * self.duty_pct / 100.0).round() as u64
    }

    fn check(&self) -> Result<(), EngineError> {
        let bad = |reason: &str| {
            Err(EngineError::InvalidClock {
                net: self.net.clone(),
                reason: reason.to_string(),
            })
        };
        if self.period_ps == 0 {
            return bad("period must be positive");
        }
        if !(self.duty_pct > 0.0 && self.duty_pct < 100.0) {
            return bad("duty must be strictly between 0 and 100");
        }
        let high = self.high_ps();
        if high == 0 || high >= self.period_ps {
            return bad("duty rounds to a constant level");
        }
        Ok(())
    }

    fn offset(&self, t: u64) -> u64 {
        let p = self.period_ps as i128;
        (t as i128 - self.phase_ps as i128).rem_euclid(p) as u64
    }

    pub fn value_at(&self, t: u64) -> LogicValue {
        LogicValue::from_bool(self.offset(t) < self.high_ps())
    }

    /// Level changes in `(0, until]`, ascending.
    pub fn edges(&self, until: u64) -> Vec<(u64, LogicValue)> {
        let mut out = Vec::new();
        if self.period_ps == 0 {
            return out;
        }
        let high = self.high_ps();
        let p = self.period_ps;
        let phase = self.phase_ps % p;
        // First rise at or before time 0 in the periodic extension.
        let mut rise = phase as i128 - p as i128;
        while rise <= until as i128 {
            for (t, v) in [(rise, LogicValue::One), (rise + high as i128, LogicValue::Zero)] {
                if t > 0 && t <= until as i128 {
                    out.push((t as u64, v));
                }
            }
            rise += p as i128;
        }
        out
    }

    /// Times of rising edges in `[0, until]`, including a rise at 0.
    pub fn rising_edges(&self, until: u64) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::new();
        if self.value_at(0) == LogicValue::One && self.offset(0) == 0 {
            out.push(0);
        }
        out.extend(self.edges(until).into_iter().filter(|e| e.1 == LogicValue::One).map(|e| e.0));
        out
    }

    /// Times of both edges in `[0, until]`, including an edge at 0.
    pub fn all_edges(&self, until: u64) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::new();
        let off = self.offset(0);
        if off == 0 || off == self.high_ps() {
            out.push(0);
        }
        out.extend(self.edges(until).into_iter().map(|e| e.0));
        out
    }
}

/// Input waveforms for one simulation. Net names are case-insensitive.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Stimulus {
    pub events: Vec<StimEvent>,
    pub clocks: Vec<ClockSpec>,
    /// Starting values for internal nets, held at `Stored` strength.
    pub init: Vec<(String, LogicValue)>,
}

impl Stimulus {
    pub fn new() -> Self {
        Stimulus::default()
    }

    pub fn at(&mut self, time_ps: u64, net: &str, value: LogicValue) -> &mut Self {
        self.events.push(StimEvent {
            time_ps,
            net: canonical_net_name(net),
            value,
        });
        self
    }

    pub fn clock(&mut self, net: &str, period_ps: u64, duty_pct: f64, phase_ps: u64) -> &mut Self {
        self.clocks.push(ClockSpec {
            net: canonical_net_name(net),
            period_ps,
            duty_pct,
            phase_ps,
        });
        self
    }

    pub fn init(&mut self, net: &str, value: LogicValue) -> &mut Self {
        self.init.push((canonical_net_name(net), value));
        self
    }

    pub fn driven_nets(&self) -> BTreeSet<String> {
        self.events
            .iter()
            .map(|e| e.net.clone())
            .chain(self.clocks.iter().map(|c| c.net.clone()))
            .collect()
    }

    /// Value at time 0. The first explicit event is extended back to 0;
    /// several events at 0 resolve to the last one.
    pub fn initial_value(&self, net: &str) -> Option<LogicValue> {
        if let Some(c) = self.clocks.iter().find(|c| c.net == net) {
            return Some(c.value_at(0));
        }
        let mut first = None;
        for e in self.events.iter().filter(|e| e.net == net) {
            if e.time_ps == 0 || first.is_none() {
                first = Some(e.value);
            }
        }
        first
    }

    /// Every level assignment after time 0 up to `until`, ordered by time
    /// and then by insertion (explicit events before clocks).
    pub fn expand(&self, until: u64) -> Vec<StimEvent> {
        let mut out: Vec<StimEvent> = self
            .events
            .iter()
            .filter(|e| e.time_ps > 0 && e.time_ps <= until)
            .cloned()
            .collect();
        for c in &self.clocks {
            out.extend(c.edges(until).into_iter().map(|(t, v)| StimEvent {
                time_ps: t,
                net: c.net.clone(),
                value: v,
            }));
        }
        out.sort_by_key(|e| e.time_ps);
        out
    }

    /// Check the stimulus against a netlist and a simulation length.
    pub fn validate(&self, n: &Netlist, duration_ps: u64) -> Result<(), EngineError> {
        let mut last: BTreeMap<&str, u64> = BTreeMap::new();
        for e in &self.events {
            let id = n.find_net(&e.net).ok_or_else(|| EngineError::UnknownNet { net: e.net.clone() })?;
            if n.kind(id) != NetKind::Input {
                return Err(EngineError::NotAnInput { net: e.net.clone() });
            }
            if e.time_ps > duration_ps {
                return Err(EngineError::StimulusAfterDuration {
                    time_ps: e.time_ps,
                    duration_ps,
                });
            }
            if let Some(prev) = last.insert(&e.net, e.time_ps) {
                if e.time_ps < prev {
                    return Err(EngineError::NonMonotonicStimulus {
                        net: e.net.clone(),
                        time_ps: e.time_ps,
                    });
                }
            }
        }
        let mut clocked = BTreeSet::new();
        for c in &self.clocks {
            let id = n.find_net(&c.net).ok_or_else(|| EngineError::UnknownNet { net: c.net.clone() })?;
            if n.kind(id) != NetKind::Input {
                return Err(EngineError::NotAnInput { net: c.net.clone() });
            }
            c.check()?;
            if !clocked.insert(c.net.as_str()) || last.contains_key(c.net.as_str()) {
                return Err(EngineError::ConflictingStimulus { net: c.net.clone() });
            }
        }
        for (net, _) in &self.init {
            let id = n.find_net(net).ok_or_else(|| EngineError::UnknownNet { net: net.clone() })?;
            if n.kind(id).is_rail() || n.kind(id) == NetKind::Input {
                return Err(EngineError::InvalidConfig {
                    key: format!("init {net}"),
                    reason: "only internal and output nets take an initial value".into(),
                });
            }
        }
        let driven = self.driven_nets();
        for id in n.inputs() {
            let name = n.net_name(id);
            if !driven.contains(name) {
                return Err(EngineError::UncoveredInput { net: name.to_string() });
            }
        }
        Ok(())
    }
}

fn fmt_duty(d: f64) -> String {
    format!("{d}")
}

impl fmt::Display for Stimulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (net, v) in &self.init {
            writeln!(f, "init {net} = {v}")?;
        }
        for c in &self.clocks {
            writeln!(
                f,
                "clock {} period {}ps duty {} phase {}ps",
                c.net,
                c.period_ps,
                fmt_duty(c.duty_pct),
                c.phase_ps
            )?;
        }
        for e in &self.events {
            writeln!(f, "at {}ps {} = {}", e.time_ps, e.net, e.value)?;
        }
        Ok(())
    }
}

fn parse_value(tok: &str) -> Option<LogicValue> {
    let mut chars = tok.chars();
    let c = chars.next()?;
    if chars.next().is_some() {
        return None;
    }
    LogicValue::from_char(c)
}

/// Parse the stimulus text format:
///
/// ```text
/// at <time> <net> = <0|1|x>
/// clock <net> period <time> duty <pct> [phase <time>]
/// init <net> = <0|1|x>
/// ```
///
/// `#` starts a comment. Times take engineering suffixes; a bare number is
/// picoseconds.
pub fn parse_stimulus(text: &str) -> Result<Stimulus, EngineError> {
    let mut stim = Stimulus::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| EngineError::StimulusSyntax {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").replace('=', " = ");
        let toks: Vec<&str> = line.split_whitespace().collect();
        let Some(head) = toks.first() else {
            continue;
        };
        let time = |tok: &str| parse_time_ps(tok).map_err(|e| err(e.to_string()));
        let value = |tok: &str| parse_value(tok).ok_or_else(|| err(format!("expected 0, 1 or x, found `{tok}`")));
        match head.to_ascii_lowercase().as_str() {
            "at" => {
                let [_, t, net, "=", v] = toks[..] else {
                    return Err(err("expected `at <time> <net> = <value>`".into()));
                };
                stim.at(time(t)?, net, value(v)?);
            }
            "init" => {
                let [_, net, "=", v] = toks[..] else {
                    return Err(err("expected `init <net> = <value>`".into()));
                };
                stim.init(net, value(v)?);
            }
            "clock" => {
                if toks.len() != 6 && toks.len() != 8 {
                    return Err(err("expected `clock <net> period <time> duty <pct> [phase <time>]`".into()));
                }
                if !toks[2].eq_ignore_ascii_case("period") || !toks[4].eq_ignore_ascii_case("duty") {
                    return Err(err("expected `period` and `duty` keywords".into()));
                }
                let period = time(toks[3])?;
                let duty: f64 = toks[5]
                    .trim_end_matches('%')
                    .parse()
                    .map_err(|_| err(format!("bad duty `{}`", toks[5])))?;
                let phase = if toks.len() == 8 {
                    if !toks[6].eq_ignore_ascii_case("phase") {
                        return Err(err(format!("unexpected `{}`", toks[6])));
                    }
                    time(toks[7])?
                } else {
                    0
                };
                let spec = ClockSpec {
                    net: canonical_net_name(toks[1]),
                    period_ps: period,
                    duty_pct: duty,
                    phase_ps: phase,
                };
                spec.check().map_err(|e| err(e.to_string()))?;
                stim.clocks.push(spec);
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }
    Ok(stim)
}
