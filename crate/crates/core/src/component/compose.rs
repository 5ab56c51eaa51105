//! Composition: wiring components together and checking the syntactic
//! interface of every wire.
//!
//! A channel is named after its producer's output port and has exactly one
//! producer. Consumers may read it under a different input-port name. Input
//! ports left unwired become external inputs of the composite; output ports
//! without consumers become external outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::algo::toposort;
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::message::MsgType;
use crate::term::Atom;

use super::{Causality, ComponentSpec, SpecError};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortRef {
    pub component: String,
    pub port: String,
}

impl PortRef {
    pub fn new(component: &str, port: &str) -> PortRef {
        PortRef { component: component.to_string(), port: port.to_string() }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.component, self.port)
    }
}

/// One `producer -> consumer` line of a wiring.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Connection {
    pub producer: PortRef,
    pub consumer: PortRef,
}

impl Connection {
    pub fn new(producer: (&str, &str), consumer: (&str, &str)) -> Connection {
        Connection { producer: PortRef::new(producer.0, producer.1), consumer: PortRef::new(consumer.0, consumer.1) }
    }
}

impl fmt::Display for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.producer, self.consumer)
    }
}

/// A channel of the composite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wire {
    pub name: String,
    pub ty: MsgType,
    pub producer: PortRef,
    pub consumers: Vec<PortRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterfaceError {
    #[error("duplicate component {0}")]
    DuplicateComponent(String),
    #[error("component {component}: {source}")]
    InvalidSpec { component: String, source: SpecError },
    #[error("wire {wire}: unknown component {component}")]
    UnknownComponent { wire: Connection, component: String },
    #[error("wire {wire}: {port} is not an output port")]
    NotAnOutput { wire: Connection, port: PortRef },
    #[error("wire {wire}: {port} is not an input port")]
    NotAnInput { wire: Connection, port: PortRef },
    #[error("wire {wire}: type {producer} does not match {consumer}")]
    TypeMismatch { wire: Connection, producer: MsgType, consumer: MsgType },
    #[error("wire {wire}: {port} already fed by {existing}")]
    TwoProducers { wire: Connection, port: PortRef, existing: PortRef },
    #[error("channel {channel} has two producers: {first} and {second}")]
    DuplicateChannel { channel: String, first: PortRef, second: PortRef },
    #[error("weakly causal components {} form a same-time cycle through {}", .components.join(", "), join(.wires))]
    CausalityCycle { components: Vec<String>, wires: Vec<Connection> },
}

fn join(wires: &[Connection]) -> String {
    wires.iter().map(Connection::to_string).collect::<Vec<_>>().join(", ")
}

/// Per-wire verdict of an interface check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireCheck {
    pub connection: Connection,
    pub producer_ty: Option<MsgType>,
    pub consumer_ty: Option<MsgType>,
    pub error: Option<InterfaceError>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InterfaceReport {
    pub wires: Vec<WireCheck>,
    /// All errors, per-wire ones included.
    pub errors: Vec<InterfaceError>,
}

impl InterfaceReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Checks every connection for matching names, directions and type tags,
/// and that every channel has a single producer.
pub fn check_interfaces(parts: &[ComponentSpec], connections: &[Connection]) -> InterfaceReport {
    let mut report = InterfaceReport::default();
    let mut by_name: BTreeMap<&str, &ComponentSpec> = BTreeMap::new();
    for p in parts {
        if by_name.insert(&p.name, p).is_some() {
            report.errors.push(InterfaceError::DuplicateComponent(p.name.clone()));
        }
        if let Err(source) = p.validate() {
            report.errors.push(InterfaceError::InvalidSpec { component: p.name.clone(), source });
        }
    }

    let mut fed: BTreeMap<&PortRef, &PortRef> = BTreeMap::new();
    for c in connections {
        let producer = by_name.get(c.producer.component.as_str());
        let consumer = by_name.get(c.consumer.component.as_str());
        let producer_ty = producer.and_then(|p| p.output_port(&c.producer.port)).map(|p| p.ty);
        let consumer_ty = consumer.and_then(|p| p.input_port(&c.consumer.port)).map(|p| p.ty);
        let error = if producer.is_none() {
            Some(InterfaceError::UnknownComponent { wire: c.clone(), component: c.producer.component.clone() })
        } else if consumer.is_none() {
            Some(InterfaceError::UnknownComponent { wire: c.clone(), component: c.consumer.component.clone() })
        } else if producer_ty.is_none() {
            Some(InterfaceError::NotAnOutput { wire: c.clone(), port: c.producer.clone() })
        } else if consumer_ty.is_none() {
            Some(InterfaceError::NotAnInput { wire: c.clone(), port: c.consumer.clone() })
        } else if producer_ty != consumer_ty {
            Some(InterfaceError::TypeMismatch {
                wire: c.clone(),
                producer: producer_ty.unwrap_or(MsgType::Expression),
                consumer: consumer_ty.unwrap_or(MsgType::Expression),
            })
        } else if let Some(existing) = fed.get(&c.consumer) {
            Some(InterfaceError::TwoProducers {
                wire: c.clone(),
                port: c.consumer.clone(),
                existing: (*existing).clone(),
            })
        } else {
            fed.insert(&c.consumer, &c.producer);
            None
        };
        if let Some(e) = &error {
            report.errors.push(e.clone());
        }
        report.wires.push(WireCheck { connection: c.clone(), producer_ty, consumer_ty, error });
    }

    // Channel names come from producer ports and must be unique.
    let mut channels: BTreeMap<&str, &PortRef> = BTreeMap::new();
    let mut producers: BTreeSet<PortRef> = BTreeSet::new();
    for p in parts {
        for port in &p.outputs {
            producers.insert(PortRef::new(&p.name, &port.name));
        }
    }
    for producer in &producers {
        match channels.get(producer.port.as_str()) {
            Some(first) if *first != producer => {
                report.errors.push(InterfaceError::DuplicateChannel {
                    channel: producer.port.clone(),
                    first: (*first).clone(),
                    second: producer.clone(),
                });
            }
            _ => {
                channels.insert(&producer.port, producer);
            }
        }
    }

    if let Err(e) = weak_order(parts, connections) {
        if let InterfaceError::CausalityCycle { wires, .. } = &e {
            for w in report.wires.iter_mut().filter(|w| w.error.is_none() && wires.contains(&w.connection)) {
                w.error = Some(e.clone());
            }
        }
        report.errors.push(e);
    }
    report
}

/// Indices of the weakly causal parts in same-time dataflow order.
#[allow(clippy::result_large_err)]
fn weak_order(parts: &[ComponentSpec], connections: &[Connection]) -> Result<Vec<usize>, InterfaceError> {
    let mut graph = DiGraph::<usize, ()>::new();
    let mut nodes = BTreeMap::new();
    for (i, p) in parts.iter().enumerate() {
        if p.causality == Causality::Weak {
            nodes.insert(p.name.as_str(), graph.add_node(i));
        }
    }
    for c in connections {
        if let (Some(a), Some(b)) = (nodes.get(c.producer.component.as_str()), nodes.get(c.consumer.component.as_str()))
        {
            graph.update_edge(*a, *b, ());
        }
    }
    match toposort(&graph, None) {
        Ok(order) => Ok(order.into_iter().map(|n| graph[n]).collect()),
        Err(cycle) => {
            let start = graph[cycle.node_id()];
            let mut names: Vec<String> = nodes.keys().map(|s| s.to_string()).collect();
            names.retain(|n| {
                petgraph::algo::has_path_connecting(&graph, nodes[n.as_str()], cycle.node_id(), None)
                    && petgraph::algo::has_path_connecting(&graph, cycle.node_id(), nodes[n.as_str()], None)
            });
            if names.is_empty() {
                names.push(parts[start].name.clone());
            }
            let wires = connections
                .iter()
                .filter(|c| names.contains(&c.producer.component) && names.contains(&c.consumer.component))
                .cloned()
                .collect();
            Err(InterfaceError::CausalityCycle { components: names, wires })
        }
    }
}

/// `C = C_1 ⊗ ... ⊗ C_n`.
#[derive(Debug, Clone)]
pub struct Composite {
    parts: Vec<ComponentSpec>,
    connections: Vec<Connection>,
    wires: BTreeMap<String, Wire>,
    /// input port -> channel name
    feeds: BTreeMap<PortRef, String>,
    weak_order: Vec<usize>,
}

/// Builds the composite, rejecting any interface error.
#[allow(clippy::result_large_err)]
pub fn compose(parts: Vec<ComponentSpec>, connections: Vec<Connection>) -> Result<Composite, InterfaceError> {
    let report = check_interfaces(&parts, &connections);
    if let Some(e) = report.errors.into_iter().next() {
        return Err(e);
    }
    let weak_order = weak_order(&parts, &connections)?;

    let mut wires = BTreeMap::new();
    for p in &parts {
        for port in &p.outputs {
            wires.insert(
                port.name.clone(),
                Wire {
                    name: port.name.clone(),
                    ty: port.ty,
                    producer: PortRef::new(&p.name, &port.name),
                    consumers: Vec::new(),
                },
            );
        }
    }
    let mut feeds = BTreeMap::new();
    for c in &connections {
        if let Some(w) = wires.get_mut(&c.producer.port) {
            w.consumers.push(c.consumer.clone());
        }
        feeds.insert(c.consumer.clone(), c.producer.port.clone());
    }
    Ok(Composite { parts, connections, wires, feeds, weak_order })
}

impl Composite {
    pub fn parts(&self) -> &[ComponentSpec] {
        &self.parts
    }

    pub fn part(&self, name: &str) -> Option<&ComponentSpec> {
        self.parts.iter().find(|p| p.name == name)
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    /// Every channel, wired or external output.
    pub fn wires(&self) -> impl Iterator<Item = &Wire> {
        self.wires.values()
    }

    pub fn wire(&self, name: &str) -> Option<&Wire> {
        self.wires.get(name)
    }

    /// Channel feeding an input port, if wired.
    pub fn feed(&self, component: &str, port: &str) -> Option<&str> {
        self.feeds.get(&PortRef::new(component, port)).map(String::as_str)
    }

    /// Weakly causal parts in dataflow order, then strongly causal ones.
    pub fn schedule(&self) -> Vec<usize> {
        let mut order = self.weak_order.clone();
        order.extend(self.parts.iter().enumerate().filter(|(_, p)| p.causality == Causality::Strong).map(|(i, _)| i));
        order
    }

    /// `i_C`: unwired input ports.
    pub fn external_inputs(&self) -> BTreeSet<String> {
        self.parts
            .iter()
            .flat_map(|p| p.inputs.iter().map(move |port| (p, port)))
            .filter(|(p, port)| !self.feeds.contains_key(&PortRef::new(&p.name, &port.name)))
            .map(|(_, port)| port.name.clone())
            .collect()
    }

    /// `o_C`: output ports nobody consumes.
    pub fn external_outputs(&self) -> BTreeSet<String> {
        self.wires.values().filter(|w| w.consumers.is_empty()).map(|w| w.name.clone()).collect()
    }

    /// `K_C`: union of the parts' private keys.
    pub fn private_keys(&self) -> BTreeSet<Atom> {
        self.parts.iter().flat_map(|p| p.private_keys.iter().cloned()).collect()
    }

    /// `S_C`: union of the parts' unguessable values.
    pub fn unguessable(&self) -> BTreeSet<Atom> {
        self.parts.iter().flat_map(|p| p.unguessable.iter().cloned()).collect()
    }

    pub fn ks(&self) -> BTreeSet<Atom> {
        self.private_keys().union(&self.unguessable()).cloned().collect()
    }
}

/// Outcome of the key/secret composition properties and the external channel
/// property, each checked literally on a concrete composite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KsReport {
    /// Properties (1) to (6), in order.
    pub properties: [bool; 6],
}

impl KsReport {
    pub fn all_hold(&self) -> bool {
        self.properties.iter().all(|p| *p)
    }
}

pub fn ks_union_check(c: &Composite) -> KsReport {
    let k_c = c.private_keys();
    let s_c = c.unguessable();
    let ks_c = c.ks();
    let parts = c.parts();

    let p1 = k_c.iter().all(|xb| parts.iter().any(|p| p.private_keys.contains(xb)));
    let p2 = s_c.iter().all(|xb| parts.iter().any(|p| p.unguessable.contains(xb)));
    let p3 = parts.iter().all(|p| p.private_keys.iter().all(|xb| k_c.contains(xb)));
    let p4 = parts.iter().all(|p| p.unguessable.iter().all(|xb| s_c.contains(xb)));

    let mut universe: BTreeSet<Atom> = parts.iter().flat_map(|p| p.ks()).collect();
    for p in parts {
        for e in &p.local_secrets {
            for item in e.items() {
                universe.extend(item.atoms());
            }
        }
    }
    universe.insert(Atom::secret("__fresh_probe"));
    universe.insert(Atom::symmetric_key("__fresh_probe_key"));
    let p5 = universe.iter().all(|xb| parts.iter().any(|p| p.ks().contains(xb)) || !ks_c.contains(xb));

    let inputs: BTreeSet<&str> = parts.iter().flat_map(|p| p.inputs.iter().map(|x| x.name.as_str())).collect();
    let outputs: BTreeSet<&str> = parts.iter().flat_map(|p| p.outputs.iter().map(|x| x.name.as_str())).collect();
    let p6 = c.external_inputs().iter().all(|x| inputs.contains(x.as_str()))
        && c.external_outputs().iter().all(|x| outputs.contains(x.as_str()));

    KsReport { properties: [p1, p2, p3, p4, p5, p6] }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(name: &str, causality: Causality, ins: &[(&str, MsgType)], outs: &[(&str, MsgType)]) -> ComponentSpec {
        let mut p = ComponentSpec::new(name, causality);
        for (n, ty) in ins {
            p = p.input(n, *ty);
        }
        for (n, ty) in outs {
            p = p.output(n, *ty);
        }
        p
    }

    #[test]
    fn type_clash_names_the_wire() {
        let a = part("A", Causality::Strong, &[], &[("resp", MsgType::Expression)]);
        let b = part("B", Causality::Strong, &[("abortC", MsgType::Event)], &[]);
        let err = compose(vec![a, b], vec![Connection::new(("A", "resp"), ("B", "abortC"))]).unwrap_err();
        assert!(matches!(err, InterfaceError::TypeMismatch { .. }));
        assert!(err.to_string().contains("A.resp -> B.abortC"));
    }

    #[test]
    fn single_producer_per_port_and_channel() {
        let a = part("A", Causality::Strong, &[], &[("x", MsgType::Event)]);
        let b = part("B", Causality::Strong, &[], &[("y", MsgType::Event)]);
        let c = part("C", Causality::Strong, &[("in", MsgType::Event)], &[]);
        let err = compose(
            vec![a.clone(), b, c.clone()],
            vec![Connection::new(("A", "x"), ("C", "in")), Connection::new(("B", "y"), ("C", "in"))],
        )
        .unwrap_err();
        assert!(matches!(err, InterfaceError::TwoProducers { .. }));

        let a2 = part("A2", Causality::Strong, &[], &[("x", MsgType::Event)]);
        let err = compose(vec![a, a2, c], vec![]).unwrap_err();
        assert!(matches!(err, InterfaceError::DuplicateChannel { .. }));
    }

    #[test]
    fn dangling_and_direction_errors() {
        let a = part("A", Causality::Strong, &[("i", MsgType::Event)], &[("o", MsgType::Event)]);
        let err = compose(vec![a.clone()], vec![Connection::new(("Z", "o"), ("A", "i"))]).unwrap_err();
        assert!(matches!(err, InterfaceError::UnknownComponent { .. }));
        let err = compose(vec![a.clone()], vec![Connection::new(("A", "i"), ("A", "i"))]).unwrap_err();
        assert!(matches!(err, InterfaceError::NotAnOutput { .. }));
        let err = compose(vec![a], vec![Connection::new(("A", "o"), ("A", "o"))]).unwrap_err();
        assert!(matches!(err, InterfaceError::NotAnInput { .. }));
    }

    #[test]
    fn weak_cycles_are_rejected_strong_loops_are_not() {
        let w = part("W", Causality::Weak, &[("i", MsgType::Event)], &[("o", MsgType::Event)]);
        let err = compose(vec![w], vec![Connection::new(("W", "o"), ("W", "i"))]).unwrap_err();
        assert_eq!(
            err,
            InterfaceError::CausalityCycle {
                components: vec!["W".into()],
                wires: vec![Connection::new(("W", "o"), ("W", "i"))]
            }
        );
        let s = part("S", Causality::Strong, &[("i", MsgType::Event)], &[("o", MsgType::Event)]);
        assert!(compose(vec![s], vec![Connection::new(("S", "o"), ("S", "i"))]).is_ok());
    }

    #[test]
    fn external_channels_and_ks_union() {
        let k = Atom::symmetric_key("k");
        let n = Atom::secret("n");
        let a = part("A", Causality::Strong, &[("in", MsgType::Event)], &[("mid", MsgType::Event)]).keys([k.clone()]);
        let b = part("B", Causality::Weak, &[("mid", MsgType::Event)], &[("out", MsgType::Event)]).secrets([n.clone()]);
        let c = compose(vec![a, b], vec![Connection::new(("A", "mid"), ("B", "mid"))]).unwrap();
        assert_eq!(c.external_inputs(), BTreeSet::from(["in".to_string()]));
        assert_eq!(c.external_outputs(), BTreeSet::from(["out".to_string()]));
        assert_eq!(c.ks(), BTreeSet::from([k, n]));
        assert!(ks_union_check(&c).all_hold());
        assert_eq!(c.schedule(), vec![1, 0]);
    }

    #[test]
    fn single_part_composite_has_the_parts_ks() {
        let k = Atom::symmetric_key("k");
        let a = part("A", Causality::Strong, &[], &[]).keys([k.clone()]);
        let c = compose(vec![a.clone()], vec![]).unwrap();
        assert_eq!(c.ks(), a.ks());
    }
}
