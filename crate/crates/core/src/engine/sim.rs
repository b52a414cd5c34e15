// SPDX-License-Identifier: Apache-2.0

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use super::config::SimConfig;
use super::partition::{partition_components, Partition};
use super::signal::{LogicValue, SignalState};
use super::solve::solve_component;
use super::stimulus::Stimulus;
use super::trace::Trace;
use super::EngineError;
use crate::netlist::{NetKind, Netlist};

/// RC delay in picoseconds for `r_ohm` and `c_ff`, rounded to whole
/// resolution ticks and never less than one tick.
pub fn delay_ps(r_ohm: f64, c_ff: f64, resolution_ps: u64) -> u64 {
    let raw = r_ohm * c_ff / 1000.0;
    let ticks = (raw / resolution_ps as f64).round().max(1.0);
    ticks as u64 * resolution_ps
}

/// Counters gathered during one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    pub evaluations: u64,
    pub events_applied: u64,
    /// Largest sweep count reported by any component solve.
    pub max_solve_iterations: usize,
    /// Size of the component that produced `max_solve_iterations`.
    pub max_solve_component_nets: usize,
}

struct Sim<'a> {
    n: &'a Netlist,
    cfg: &'a SimConfig,
    part: Partition,
    caps: Vec<f64>,
    state: Vec<SignalState>,
    waveforms: Vec<Vec<(u64, SignalState)>>,
    queue: BinaryHeap<Reverse<(u64, usize, u64)>>,
    pending: Vec<Option<(u64, SignalState)>>,
    seq: u64,
    evals_since_stimulus: Vec<usize>,
    stats: RunStats,
}

impl Sim<'_> {
    fn record(&mut self, net: usize, t: u64, s: SignalState) {
        let w = &mut self.waveforms[net];
        match w.last_mut() {
            Some(last) if last.0 == t => {
                last.1 = s;
                if w.len() >= 2 && w[w.len() - 2].1 == s {
                    w.pop();
                }
            }
            _ => w.push((t, s)),
        }
    }

    fn evaluate(&mut self, ci: usize, t: u64) -> Result<(), EngineError> {
        self.evals_since_stimulus[ci] += 1;
        let comp = &self.part.components[ci];
        if self.evals_since_stimulus[ci] > self.cfg.oscillation_bound {
            return Err(EngineError::OscillationDetected {
                component: ci,
                first_net: self.n.net_name(comp.nets[0]).to_string(),
                evaluations: self.evals_since_stimulus[ci],
                time_ps: t,
            });
        }
        self.stats.evaluations += 1;
        let sol = solve_component(self.n, comp, &self.state)?;
        if sol.iterations > self.stats.max_solve_iterations {
            self.stats.max_solve_iterations = sol.iterations;
            self.stats.max_solve_component_nets = comp.nets.len();
        }
        let r = sol.drive_resistance(self.n, comp, &self.state, self.cfg.r_on_nmos, self.cfg.r_on_pmos);
        for (local, net) in comp.nets.iter().enumerate() {
            let idx = net.index();
            let target = sol.states[local];
            if let Some((_, pending)) = self.pending[idx] {
                if pending == target {
                    continue;
                }
                self.pending[idx] = None;
            }
            if target == self.state[idx] {
                continue;
            }
            self.seq += 1;
            let at = t + delay_ps(r[local], self.caps[idx], self.cfg.resolution_ps);
            self.pending[idx] = Some((self.seq, target));
            self.queue.push(Reverse((at, idx, self.seq)));
        }
        Ok(())
    }
}

/// Simulate `n` under `stim` for `cfg.duration_ps`.
pub fn run(n: &Netlist, stim: &Stimulus, cfg: &SimConfig) -> Result<Trace, EngineError> {
    run_with_stats(n, stim, cfg).map(|(t, _)| t)
}

/// [`run`], also returning evaluation counters.
pub fn run_with_stats(n: &Netlist, stim: &Stimulus, cfg: &SimConfig) -> Result<(Trace, RunStats), EngineError> {
    if !n.is_flat() {
        return Err(EngineError::NotFlat);
    }
    cfg.validate()?;
    stim.validate(n, cfg.duration_ps)?;
    let count = n.nets.len();
    let part = partition_components(n);
    let mut channel_fanout: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (ci, comp) in part.components.iter().enumerate() {
        for b in &comp.boundary {
            channel_fanout[b.index()].push(ci);
        }
    }
    let mut state = Vec::with_capacity(count);
    for net in &n.nets {
        let s = match net.kind {
            NetKind::Supply => SignalState::strong(LogicValue::One),
            NetKind::Ground => SignalState::strong(LogicValue::Zero),
            NetKind::Input => SignalState::strong(stim.initial_value(&net.name).expect("validated coverage")),
            _ => {
                let init = stim.init.iter().rev().find(|(name, _)| *name == net.name);
                SignalState::stored(init.map(|i| i.1).unwrap_or(LogicValue::X))
            }
        };
        state.push(s);
    }
    let mut events: Vec<(u64, usize, LogicValue)> = stim
        .expand(cfg.duration_ps)
        .into_iter()
        .map(|e| {
            let id = n.find_net(&e.net).expect("validated net");
            (e.time_ps, id.index(), e.value)
        })
        .collect();
    events.sort_by_key(|e| (e.0, e.1));
    let ncomp = part.components.len();
    let mut sim = Sim {
        n,
        cfg,
        caps: n.lumped_capacitances(cfg.cnode_default_ff),
        waveforms: state.iter().map(|s| vec![(0, *s)]).collect(),
        state,
        part,
        queue: BinaryHeap::new(),
        pending: vec![None; count],
        seq: 0,
        evals_since_stimulus: vec![0; ncomp],
        stats: RunStats::default(),
    };
    for ci in 0..ncomp {
        sim.evaluate(ci, 0)?;
    }
    let mut next_stim = 0;
    loop {
        let stim_t = events.get(next_stim).map(|e| e.0);
        let queue_t = sim.queue.peek().map(|Reverse(e)| e.0);
        let t = match (stim_t, queue_t) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => break,
        };
        if t > cfg.duration_ps {
            break;
        }
        let mut changed: BTreeSet<usize> = BTreeSet::new();
        if stim_t == Some(t) {
            sim.evals_since_stimulus.iter_mut().for_each(|c| *c = 0);
            while let Some(&(et, net, v)) = events.get(next_stim) {
                if et != t {
                    break;
                }
                next_stim += 1;
                let s = SignalState::strong(v);
                if sim.state[net] != s {
                    sim.state[net] = s;
                    sim.record(net, t, s);
                    changed.insert(net);
                    sim.stats.events_applied += 1;
                }
            }
        }
        while let Some(&Reverse((et, net, seq))) = sim.queue.peek() {
            if et != t {
                break;
            }
            sim.queue.pop();
            match sim.pending[net] {
                Some((p, target)) if p == seq => {
                    sim.pending[net] = None;
                    if sim.state[net] != target {
                        sim.state[net] = target;
                        sim.record(net, t, target);
                        changed.insert(net);
                        sim.stats.events_applied += 1;
                    }
                }
                _ => {}
            }
        }
        let mut affected: BTreeSet<usize> = BTreeSet::new();
        for &net in &changed {
            affected.extend(sim.part.gate_fanout[net].iter().copied());
            affected.extend(channel_fanout[net].iter().copied());
            if let Some(c) = sim.part.component_of[net] {
                affected.insert(c);
            }
        }
        for ci in affected {
            sim.evaluate(ci, t)?;
        }
    }
    let names = n.nets.iter().map(|net| net.name.clone()).collect();
    let stats = sim.stats;
    Ok((
        Trace::from_waveforms(cfg.resolution_ps, cfg.duration_ps, names, sim.waveforms),
        stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;

    #[test]
    fn delay_rounds_to_ticks() {
        assert_eq!(delay_ps(3000.0, 2.0, 1), 6);
        assert_eq!(delay_ps(0.0, 5.0, 1), 1);
        assert_eq!(delay_ps(3000.0, 2.0, 10), 10);
        assert_eq!(delay_ps(3000.0, 23.0, 1), 69);
        assert_eq!(delay_ps(3000.0, 23.0, 20), 60);
    }

    #[test]
    fn rejects_hierarchical_netlist() {
        let n = parse_netlist(".subckt b a y\nM1 y a gnd gnd NMOS W=600n L=180n\n.ends\nX1 p q b\n").unwrap();
        let stim = Stimulus::new();
        assert_eq!(run(&n, &stim, &SimConfig::default()), Err(EngineError::NotFlat));
    }
}
