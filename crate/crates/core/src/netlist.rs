//! Small-signal gm-C netlists built from 4-port transconductors.
//!
//! A [`Transconductor`] senses `v_plus − v_minus` and pushes the current
//! `gm·(v_plus − v_minus)` into `out_src`, drawing the same current out of
//! `out_snk`. Tying the sink to ground gives the familiar 3-port OTA; tying
//! both output ports to the plates of a capacitor models a transistor whose
//! channel current circulates through that capacitor.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::Scalar;

/// Node index; `0` is AC ground.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const GROUND: NodeId = NodeId(0);

    pub fn is_ground(self) -> bool {
        self.0 == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transconductor<T> {
    pub v_plus: NodeId,
    pub v_minus: NodeId,
    pub out_src: NodeId,
    pub out_snk: NodeId,
    pub gm: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Capacitor<T> {
    pub a: NodeId,
    pub b: NodeId,
    pub c: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conductance<T> {
    pub a: NodeId,
    pub b: NodeId,
    pub g: T,
}

/// Ideal source forcing `v(node) = value · excitation` with respect to ground.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VoltageSource<T> {
    pub node: NodeId,
    pub value: T,
}

/// What a probe label reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Probe {
    Node(NodeId),
    /// `v(a) − v(b)`.
    Differential(NodeId, NodeId),
    /// Output current `gm·(v_plus − v_minus)` of the transconductor at this index.
    Current(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GmCNetlist<T> {
    node_names: Vec<String>,
    transconductors: Vec<Transconductor<T>>,
    capacitors: Vec<Capacitor<T>>,
    conductances: Vec<Conductance<T>>,
    sources: Vec<VoltageSource<T>>,
    probes: BTreeMap<String, Probe>,
}

impl<T: Scalar> GmCNetlist<T> {
    /// Number of nodes including ground.
    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn node_name(&self, node: NodeId) -> &str {
        &self.node_names[node.0]
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.node_names.iter().position(|n| n == name).map(NodeId)
    }

    /// The node driven by the unit input source.
    pub fn input_node(&self) -> NodeId {
        self.sources[0].node
    }

    pub fn transconductors(&self) -> &[Transconductor<T>] {
        &self.transconductors
    }

    pub fn capacitors(&self) -> &[Capacitor<T>] {
        &self.capacitors
    }

    pub fn conductances(&self) -> &[Conductance<T>] {
        &self.conductances
    }

    pub fn sources(&self) -> &[VoltageSource<T>] {
        &self.sources
    }

    pub fn probes(&self) -> &BTreeMap<String, Probe> {
        &self.probes
    }

    pub fn probe(&self, label: &str) -> Result<Probe> {
        self.probes.get(label).copied().ok_or_else(|| Error::UnknownProbe {
            label: label.to_owned(),
            available: self.probe_labels().join(", "),
        })
    }

    pub fn probe_labels(&self) -> Vec<String> {
        self.probes.keys().cloned().collect()
    }
}

/// Incremental netlist construction; [`NetlistBuilder::build`] enforces
/// the netlist invariants.
#[derive(Clone, Debug)]
pub struct NetlistBuilder<T> {
    net: GmCNetlist<T>,
}

impl<T: Scalar> Default for NetlistBuilder<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> NetlistBuilder<T> {
    pub fn new() -> Self {
        Self {
            net: GmCNetlist {
                node_names: vec!["GND".to_owned()],
                transconductors: Vec::new(),
                capacitors: Vec::new(),
                conductances: Vec::new(),
                sources: Vec::new(),
                probes: BTreeMap::new(),
            },
        }
    }

    pub fn node(&mut self, name: &str) -> NodeId {
        self.net.node_names.push(name.to_owned());
        NodeId(self.net.node_names.len() - 1)
    }

    /// Unit input source. Must be the first source added.
    pub fn input(&mut self, node: NodeId) -> &mut Self {
        self.source(node, T::one())
    }

    pub fn source(&mut self, node: NodeId, value: T) -> &mut Self {
        self.net.sources.push(VoltageSource { node, value });
        self
    }

    /// Adds a transconductor and returns its index (for current probes).
    pub fn gm(&mut self, v_plus: NodeId, v_minus: NodeId, out_src: NodeId, out_snk: NodeId, gm: T) -> usize {
        self.net.transconductors.push(Transconductor {
            v_plus,
            v_minus,
            out_src,
            out_snk,
            gm,
        });
        self.net.transconductors.len() - 1
    }

    pub fn cap(&mut self, a: NodeId, b: NodeId, c: T) -> &mut Self {
        self.net.capacitors.push(Capacitor { a, b, c });
        self
    }

    pub fn conductance(&mut self, a: NodeId, b: NodeId, g: T) -> &mut Self {
        self.net.conductances.push(Conductance { a, b, g });
        self
    }

    pub fn probe(&mut self, label: &str, probe: Probe) -> &mut Self {
        self.net.probes.insert(label.to_owned(), probe);
        self
    }

    pub fn build(self) -> Result<GmCNetlist<T>> {
        let net = self.net;
        let n = net.node_names.len();
        let bad = |msg: String| Err(Error::InvalidNetlist(msg));
        let exists = |id: NodeId| id.0 < n;

        let Some(first) = net.sources.first() else {
            return bad("no input source".into());
        };
        if first.node.is_ground() || first.value != T::one() {
            return bad("input must be a unit source on a non-ground node".into());
        }
        for (i, s) in net.sources.iter().enumerate() {
            if !exists(s.node) || s.node.is_ground() {
                return bad(format!("source {i} drives an invalid node {}", s.node.0));
            }
            if net.sources[..i].iter().any(|o| o.node == s.node) {
                return bad(format!("node {} is driven twice", s.node.0));
            }
        }
        for (i, t) in net.transconductors.iter().enumerate() {
            if !(t.gm > T::zero() && t.gm.is_finite()) {
                return bad(format!("transconductor {i} has gm = {}", t.gm));
            }
            if ![t.v_plus, t.v_minus, t.out_src, t.out_snk].into_iter().all(exists) {
                return bad(format!("transconductor {i} references a missing node"));
            }
        }
        for (i, c) in net.capacitors.iter().enumerate() {
            if !(c.c > T::zero() && c.c.is_finite()) {
                return bad(format!("capacitor {i} has c = {}", c.c));
            }
            if c.a == c.b || !exists(c.a) || !exists(c.b) {
                return bad(format!("capacitor {i} has invalid terminals"));
            }
        }
        for (i, g) in net.conductances.iter().enumerate() {
            if !(g.g >= T::zero() && g.g.is_finite()) {
                return bad(format!("conductance {i} has g = {}", g.g));
            }
            if g.a == g.b || !exists(g.a) || !exists(g.b) {
                return bad(format!("conductance {i} has invalid terminals"));
            }
        }

        let mut touched = vec![false; n];
        for t in &net.transconductors {
            for id in [t.v_plus, t.v_minus, t.out_src, t.out_snk] {
                touched[id.0] = true;
            }
        }
        for c in &net.capacitors {
            touched[c.a.0] = true;
            touched[c.b.0] = true;
        }
        for g in &net.conductances {
            touched[g.a.0] = true;
            touched[g.b.0] = true;
        }
        for s in &net.sources {
            touched[s.node.0] = true;
        }
        if let Some(k) = (1..n).find(|&k| !touched[k]) {
            return bad(format!("node {k} ({}) is floating", net.node_names[k]));
        }

        for (label, p) in &net.probes {
            let ok = match *p {
                Probe::Node(a) => exists(a),
                Probe::Differential(a, b) => exists(a) && exists(b),
                Probe::Current(i) => i < net.transconductors.len(),
            };
            if !ok {
                return bad(format!("probe `{label}` references a missing node or element"));
            }
        }
        Ok(net)
    }
}
