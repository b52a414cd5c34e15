// SPDX-License-Identifier: Apache-2.0

//! Steady-state resolution of one channel-connected component.
//!
//! Signals are resolved one strength level at a time, strongest first. At
//! each level the still-unresolved nets are grouped through conducting
//! devices able to carry that strength; a group takes the join of every
//! signal of exactly that strength entering it. Nets resolved at a higher
//! level act as sources for lower levels, which is what lets a strong write
//! path override a weak keeper. Whatever is left at the end keeps its
//! previous value at `Stored` strength.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::partition::{is_boundary, Component};
use super::signal::{LogicValue, SignalState, Strength};
use super::EngineError;
use crate::netlist::{DeviceKind, Netlist, Transistor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conduction {
    On,
    Off,
    Unknown,
}

/// Switch model: NMOS conducts on gate One, PMOS on gate Zero, X is unknown.
pub fn conduction(kind: DeviceKind, gate: LogicValue) -> Conduction {
    match (kind, gate) {
        (_, LogicValue::X) => Conduction::Unknown,
        (DeviceKind::Nmos, LogicValue::One) | (DeviceKind::Pmos, LogicValue::Zero) => Conduction::On,
        _ => Conduction::Off,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// New state of each member net, aligned with `Component::nets`.
    pub states: Vec<SignalState>,
    /// Largest number of sweeps any strength level needed to settle.
    pub iterations: usize,
    /// Devices treated as conducting, aligned with `Component::transistors`.
    /// With unknown gates this is the pessimistic all-on assumption.
    pub conducting: Vec<bool>,
}

fn join(a: Option<LogicValue>, b: LogicValue) -> Option<LogicValue> {
    Some(match a {
        None => b,
        Some(v) if v == b => v,
        Some(_) => LogicValue::X,
    })
}

struct Edge {
    a: Endpoint,
    b: Endpoint,
    drive: Strength,
}

#[derive(Clone, Copy)]
enum Endpoint {
    Member(usize),
    Boundary(usize),
}

fn endpoint(comp: &Component, n: &Netlist, net: crate::netlist::NetId) -> Endpoint {
    match comp.local_index(net) {
        Some(i) => Endpoint::Member(i),
        None => {
            debug_assert!(is_boundary(n.kind(net)));
            Endpoint::Boundary(net.index())
        }
    }
}

fn solve_levels(
    n: &Netlist,
    comp: &Component,
    states: &[SignalState],
    on: &[bool],
) -> Result<(Vec<SignalState>, usize), EngineError> {
    let k = comp.nets.len();
    let edges: Vec<Edge> = comp
        .transistors
        .iter()
        .zip(on)
        .filter(|(_, on)| **on)
        .map(|(ti, _)| {
            let t: &Transistor = &n.transistors[*ti];
            Edge {
                a: endpoint(comp, n, t.drain),
                b: endpoint(comp, n, t.source),
                drive: t.drive.into(),
            }
        })
        .collect();
    let mut resolved: Vec<Option<SignalState>> = vec![None; k];
    let mut max_sweeps = 0;
    for level in [Strength::Strong, Strength::Weak, Strength::Stored] {
        let mut value: Vec<Option<LogicValue>> = vec![None; k];
        let carries = |e: &Edge| level == Strength::Stored || e.drive >= level;
        let source = |ep: Endpoint, resolved: &[Option<SignalState>]| -> Option<SignalState> {
            match ep {
                Endpoint::Boundary(net) => Some(states[net]),
                Endpoint::Member(i) => resolved[i],
            }
        };
        if level == Strength::Stored {
            for (i, v) in value.iter_mut().enumerate() {
                if resolved[i].is_none() {
                    *v = Some(states[comp.nets[i].index()].value);
                }
            }
        }
        for e in edges.iter().filter(|e| carries(e)) {
            for (from, to) in [(e.a, e.b), (e.b, e.a)] {
                let Endpoint::Member(t) = to else { continue };
                if resolved[t].is_some() {
                    continue;
                }
                if let Some(sig) = source(from, &resolved) {
                    let seen = SignalState::new(sig.value, sig.strength.min(e.drive));
                    if seen.strength == level {
                        value[t] = join(value[t], seen.value);
                    }
                }
            }
        }
        let unresolved = resolved.iter().filter(|r| r.is_none()).count();
        let mut sweeps = 0;
        loop {
            sweeps += 1;
            if sweeps > unresolved.max(1) {
                return Err(EngineError::NoConvergence {
                    nets: k,
                    sweeps,
                });
            }
            let mut changed = false;
            for e in edges.iter().filter(|e| carries(e)) {
                let (Endpoint::Member(a), Endpoint::Member(b)) = (e.a, e.b) else {
                    continue;
                };
                if resolved[a].is_some() || resolved[b].is_some() {
                    continue;
                }
                for (from, to) in [(a, b), (b, a)] {
                    if let Some(v) = value[from] {
                        let joined = join(value[to], v);
                        if joined != value[to] {
                            value[to] = joined;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        max_sweeps = max_sweeps.max(sweeps);
        for i in 0..k {
            if resolved[i].is_none() {
                if let Some(v) = value[i] {
                    resolved[i] = Some(SignalState::new(v, level));
                }
            }
        }
    }
    let states = resolved
        .into_iter()
        .map(|r| r.expect("stored level resolves every net"))
        .collect();
    Ok((states, max_sweeps))
}

/// Resolve the member nets of `comp`. `states` holds the current state of
/// every net in the netlist: gate nets and boundary nets are read as drivers,
/// member nets as the charge retained from before.
///
/// An unknown gate makes its device's conduction unknown; the component is
/// solved with all such devices off and again with them on, and a net keeps
/// a definite value only where both agree.
pub fn solve_component(n: &Netlist, comp: &Component, states: &[SignalState]) -> Result<Solution, EngineError> {
    let modes: Vec<Conduction> = comp
        .transistors
        .iter()
        .map(|ti| {
            let t = &n.transistors[*ti];
            conduction(t.kind, states[t.gate.index()].value)
        })
        .collect();
    let optimistic: Vec<bool> = modes.iter().map(|m| *m != Conduction::Off).collect();
    if !modes.contains(&Conduction::Unknown) {
        let (states, iterations) = solve_levels(n, comp, states, &optimistic)?;
        return Ok(Solution {
            states,
            iterations,
            conducting: optimistic,
        });
    }
    let pessimistic: Vec<bool> = modes.iter().map(|m| *m == Conduction::On).collect();
    let (off, it_off) = solve_levels(n, comp, states, &pessimistic)?;
    let (on, it_on) = solve_levels(n, comp, states, &optimistic)?;
    let merged = off
        .iter()
        .zip(&on)
        .map(|(a, b)| {
            if a.value == b.value {
                SignalState::new(a.value, a.strength.min(b.strength))
            } else {
                SignalState::new(LogicValue::X, a.strength.max(b.strength))
            }
        })
        .collect();
    Ok(Solution {
        states: merged,
        iterations: it_off.max(it_on),
        conducting: optimistic,
    })
}

impl Solution {
    /// Effective resistance (ohms) of the lowest-resistance conducting path
    /// from a driver to each member net. Series devices add; each device
    /// contributes `r_on * L / W` for its kind. Only paths whose nets all
    /// carry the member's final value count. Nets with no such path get 0.
    pub fn drive_resistance(
        &self,
        n: &Netlist,
        comp: &Component,
        states: &[SignalState],
        r_on_nmos: f64,
        r_on_pmos: f64,
    ) -> Vec<f64> {
        let k = comp.nets.len();
        let mut adj: Vec<Vec<(Endpoint, f64, Strength)>> = vec![Vec::new(); k];
        let mut seeds: Vec<(usize, f64, Strength, LogicValue)> = Vec::new();
        for (ti, on) in comp.transistors.iter().zip(&self.conducting) {
            if !*on {
                continue;
            }
            let t = &n.transistors[*ti];
            let r = match t.kind {
                DeviceKind::Nmos => r_on_nmos,
                DeviceKind::Pmos => r_on_pmos,
            } * t.aspect();
            let drive: Strength = t.drive.into();
            let a = endpoint(comp, n, t.drain);
            let b = endpoint(comp, n, t.source);
            match (a, b) {
                (Endpoint::Member(x), Endpoint::Member(y)) => {
                    adj[x].push((Endpoint::Member(y), r, drive));
                    adj[y].push((Endpoint::Member(x), r, drive));
                }
                (Endpoint::Member(x), Endpoint::Boundary(net))
                | (Endpoint::Boundary(net), Endpoint::Member(x)) => {
                    seeds.push((x, r, drive, states[net].value));
                }
                _ => {}
            }
        }
        let mut best = vec![f64::INFINITY; k];
        for target in [LogicValue::Zero, LogicValue::One, LogicValue::X] {
            let admits = |i: usize| self.states[i].value == target;
            let mut dist = vec![f64::INFINITY; k];
            let mut heap = BinaryHeap::new();
            for &(x, r, drive, v) in &seeds {
                let value_ok = target == LogicValue::X || v == target;
                if value_ok && admits(x) && drive >= self.states[x].strength.min(Strength::Weak) && r < dist[x] {
                    dist[x] = r;
                    heap.push(Reverse((OrdF64(r), x)));
                }
            }
            while let Some(Reverse((OrdF64(d), x))) = heap.pop() {
                if d > dist[x] {
                    continue;
                }
                for &(to, r, drive) in &adj[x] {
                    let Endpoint::Member(y) = to else { continue };
                    if !admits(y) || drive < self.states[y].strength.min(Strength::Weak) {
                        continue;
                    }
                    let nd = d + r;
                    if nd < dist[y] {
                        dist[y] = nd;
                        heap.push(Reverse((OrdF64(nd), y)));
                    }
                }
            }
            for i in 0..k {
                if admits(i) {
                    best[i] = dist[i];
                }
            }
        }
        best.into_iter()
            .map(|r| if r.is_finite() { r } else { 0.0 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct OrdF64(f64);

impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
