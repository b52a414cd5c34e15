// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use crate::netlist::{NetId, NetKind, Netlist};

/// A channel-connected component: nets joined through transistor
/// source/drain terminals, bounded by supply rails and primary inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Member nets, ascending.
    pub nets: Vec<NetId>,
    /// Rails and inputs touched by the member transistors, ascending.
    pub boundary: Vec<NetId>,
    /// Indices into `Netlist::transistors` of devices whose channel touches a
    /// member net.
    pub transistors: Vec<usize>,
}

impl Component {
    pub fn local_index(&self, net: NetId) -> Option<usize> {
        self.nets.binary_search(&net).ok()
    }
}

#[derive(Debug, Clone)]
pub struct Partition {
    pub components: Vec<Component>,
    /// Component owning each net; `None` for rails and inputs.
    pub component_of: Vec<Option<usize>>,
    /// Components containing a transistor gated by each net, ascending.
    pub gate_fanout: Vec<Vec<usize>>,
}

/// Nets that drive a component from outside: supplies and primary inputs.
pub fn is_boundary(kind: NetKind) -> bool {
    matches!(kind, NetKind::Supply | NetKind::Ground | NetKind::Input)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Split a flat netlist into channel-connected components. Gate terminals
/// never join components, and boundary nets never merge two components.
/// Every non-boundary net lands in exactly one component; components are
/// ordered by their lowest net id.
pub fn partition_components(n: &Netlist) -> Partition {
    let count = n.nets.len();
    let boundary: Vec<bool> = n.nets.iter().map(|net| is_boundary(net.kind)).collect();
    let mut parent: Vec<usize> = (0..count).collect();
    for t in &n.transistors {
        let (a, b) = (t.drain.index(), t.source.index());
        if !boundary[a] && !boundary[b] {
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            if ra != rb {
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                parent[hi] = lo;
            }
        }
    }
    let mut by_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut components: Vec<Component> = Vec::new();
    let mut component_of = vec![None; count];
    for net in 0..count {
        if boundary[net] {
            continue;
        }
        let root = find(&mut parent, net);
        let idx = *by_root.entry(root).or_insert_with(|| {
            components.push(Component {
                nets: Vec::new(),
                boundary: Vec::new(),
                transistors: Vec::new(),
            });
            components.len() - 1
        });
        components[idx].nets.push(NetId(net as u32));
        component_of[net] = Some(idx);
    }
    let mut gate_fanout = vec![Vec::new(); count];
    for (ti, t) in n.transistors.iter().enumerate() {
        let owner = component_of[t.drain.index()].or(component_of[t.source.index()]);
        let Some(c) = owner else {
            continue;
        };
        let comp = &mut components[c];
        comp.transistors.push(ti);
        for end in [t.drain, t.source] {
            if boundary[end.index()] && !comp.boundary.contains(&end) {
                comp.boundary.push(end);
            }
        }
        let fan = &mut gate_fanout[t.gate.index()];
        if !fan.contains(&c) {
            fan.push(c);
        }
    }
    for comp in &mut components {
        comp.boundary.sort_unstable();
    }
    for fan in &mut gate_fanout {
        fan.sort_unstable();
    }
    Partition {
        components,
        component_of,
        gate_fanout,
    }
}
