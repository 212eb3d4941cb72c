//! Linear AC circuit description.
//!
//! A [`Netlist`] is a flat list of named nodes, two-terminal and controlled
//! elements, mutual inductive couplings, ground-referenced ports and noise
//! sources. Terminals reference nodes by name so that a netlist read from
//! JSON can carry (and [`validate`] can report) references to nodes that do
//! not exist. The serde representation of [`Netlist`] is the JSON netlist
//! schema consumed by the command-line tool.
//!
//! Sign conventions follow SPICE:
//! - a current source or noise injection on nodes `[p, n]` draws current out
//!   of `p` and delivers it into `n`;
//! - a VCCS with nodes `[op, on, cp, cn]` carries `gm * (v(cp) - v(cn))` from
//!   `op` to `on` through the element;
//! - inductor and voltage-source branch currents flow from the first terminal
//!   to the second through the element.

mod models;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use models::{
    build_first_stage_model, build_first_stage_model_with, build_gain_model, build_two_stage_model,
    build_two_stage_model_with, DesignParams, ModelOptions, INTERSTAGE_CAPACITANCE,
};

/// Name of the ground node.
pub const GROUND: &str = "0";

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Resistor,
    Capacitor,
    Inductor,
    Vccs,
    Vsource,
    Isource,
}

impl ElementKind {
    /// Number of node terminals the element carries.
    pub fn terminal_count(self) -> usize {
        match self {
            ElementKind::Vccs => 4,
            _ => 2,
        }
    }

    pub fn is_passive(self) -> bool {
        matches!(
            self,
            ElementKind::Resistor | ElementKind::Capacitor | ElementKind::Inductor
        )
    }

    pub fn is_independent_source(self) -> bool {
        matches!(self, ElementKind::Vsource | ElementKind::Isource)
    }

    /// Whether the element carries an explicit branch-current unknown.
    pub fn has_branch_current(self) -> bool {
        matches!(self, ElementKind::Inductor | ElementKind::Vsource)
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ElementKind::Resistor => "resistor",
            ElementKind::Capacitor => "capacitor",
            ElementKind::Inductor => "inductor",
            ElementKind::Vccs => "vccs",
            ElementKind::Vsource => "vsource",
            ElementKind::Isource => "isource",
        };
        f.write_str(s)
    }
}

/// A circuit element. `value` is in ohms, farads, henries, siemens, volts or
/// amperes depending on `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub kind: ElementKind,
    pub name: String,
    pub nodes: Vec<String>,
    pub value: f64,
}

impl Element {
    /// The pair of nodes current flows between (the output pair for a VCCS).
    pub fn current_pair(&self) -> Option<(&str, &str)> {
        match self.nodes.as_slice() {
            [a, b, ..] => Some((a.as_str(), b.as_str())),
            _ => None,
        }
    }
}

/// Magnetic coupling between two inductors; `M = k * sqrt(La * Lb)`.
///
/// Both inductors are dotted at their first terminal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutualCoupling {
    pub a: String,
    pub b: String,
    pub k: f64,
}

/// Ground-referenced port.
///
/// `termination` is the resistance (ohms) the port sees from its source or
/// load outside the network. It is stamped as a resistor to ground by driven
/// and noise analyses and left out of port-parameter extraction, where the
/// reference impedance takes its place. A termination of zero is an ideal
/// short.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Port {
    pub name: String,
    pub node: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub termination: Option<f64>,
}

/// Where a noise current is injected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoisePlacement {
    /// In parallel with an element (the output pair of a VCCS).
    Element { element: String },
    /// Standalone current source between two nodes, `[p, n]`.
    Injection { nodes: [String; 2] },
}

/// Power spectral density model of a noise current, A²/Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PsdModel {
    White {
        value: f64,
    },
    /// `4 kB T / R`
    Thermal {
        resistance: f64,
        temperature: f64,
    },
    /// `4 kB T gamma eta gm`
    Channel {
        gamma: f64,
        eta: f64,
        gm: f64,
        temperature: f64,
    },
}

impl PsdModel {
    pub fn psd(&self) -> f64 {
        match *self {
            PsdModel::White { value } => value,
            PsdModel::Thermal {
                resistance,
                temperature,
            } => 4.0 * BOLTZMANN * temperature / resistance,
            PsdModel::Channel {
                gamma,
                eta,
                gm,
                temperature,
            } => 4.0 * BOLTZMANN * temperature * gamma * eta * gm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSource {
    pub name: String,
    #[serde(flatten)]
    pub placement: NoisePlacement,
    pub psd: PsdModel,
    /// Marks the noise of the signal source; the noise factor is referred to it.
    #[serde(default)]
    pub input: bool,
}

/// Immutable linear circuit.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Netlist {
    nodes: Vec<String>,
    #[serde(default)]
    elements: Vec<Element>,
    #[serde(default)]
    couplings: Vec<MutualCoupling>,
    #[serde(default)]
    ports: Vec<Port>,
    #[serde(default)]
    noise_sources: Vec<NoiseSource>,
}

impl Netlist {
    pub fn builder() -> NetlistBuilder {
        NetlistBuilder::default()
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("netlist serializes")
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn couplings(&self) -> &[MutualCoupling] {
        &self.couplings
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn noise_sources(&self) -> &[NoiseSource] {
        &self.noise_sources
    }

    pub fn element(&self, name: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.name == name)
    }

    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn noise_source(&self, name: &str) -> Option<&NoiseSource> {
        self.noise_sources.iter().find(|s| s.name == name)
    }

    /// Mutual inductance of a coupling, in henries.
    pub fn mutual_inductance(&self, coupling: &MutualCoupling) -> Option<f64> {
        let la = self.element(&coupling.a)?.value;
        let lb = self.element(&coupling.b)?.value;
        Some(coupling.k * (la * lb).sqrt())
    }

    /// The node pair `[p, n]` a noise source injects between.
    pub fn noise_injection(&self, source: &NoiseSource) -> Option<(String, String)> {
        match &source.placement {
            NoisePlacement::Element { element } => {
                let (a, b) = self.element(element)?.current_pair()?;
                Some((a.to_string(), b.to_string()))
            }
            NoisePlacement::Injection { nodes: [p, n] } => Some((p.clone(), n.clone())),
        }
    }

    /// Copy of the netlist with one coupling removed, or unchanged when absent.
    pub fn without_coupling(&self, a: &str, b: &str) -> Netlist {
        let mut out = self.clone();
        out.couplings
            .retain(|c| !((c.a == a && c.b == b) || (c.a == b && c.b == a)));
        out
    }

    /// Copy of the netlist with a coupling added.
    pub fn with_coupling(&self, a: &str, b: &str, k: f64) -> Netlist {
        let mut out = self.clone();
        out.couplings.push(MutualCoupling {
            a: a.to_string(),
            b: b.to_string(),
            k,
        });
        out
    }

    /// Copy of the netlist keeping only the noise sources `keep` accepts.
    pub fn filter_noise_sources(&self, mut keep: impl FnMut(&NoiseSource) -> bool) -> Netlist {
        let mut out = self.clone();
        out.noise_sources.retain(|s| keep(s));
        out
    }

    /// Copy of the netlist with a noise source's PSD multiplied by `factor`.
    pub fn with_scaled_noise(&self, name: &str, factor: f64) -> Netlist {
        let mut out = self.clone();
        for s in out.noise_sources.iter_mut().filter(|s| s.name == name) {
            s.psd = PsdModel::White {
                value: s.psd.psd() * factor,
            };
        }
        out
    }
}

/// Incremental construction of a [`Netlist`]. Nodes are created on first use.
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    netlist: Netlist,
    known: HashSet<String>,
}

impl NetlistBuilder {
    fn touch(&mut self, node: &str) {
        if self.known.insert(node.to_string()) {
            self.netlist.nodes.push(node.to_string());
        }
    }

    pub fn node(mut self, name: &str) -> Self {
        self.touch(name);
        self
    }

    pub fn element(mut self, kind: ElementKind, name: &str, nodes: &[&str], value: f64) -> Self {
        for n in nodes {
            self.touch(n);
        }
        self.netlist.elements.push(Element {
            kind,
            name: name.to_string(),
            nodes: nodes.iter().map(|n| n.to_string()).collect(),
            value,
        });
        self
    }

    pub fn resistor(self, name: &str, a: &str, b: &str, ohms: f64) -> Self {
        self.element(ElementKind::Resistor, name, &[a, b], ohms)
    }

    pub fn capacitor(self, name: &str, a: &str, b: &str, farads: f64) -> Self {
        self.element(ElementKind::Capacitor, name, &[a, b], farads)
    }

    pub fn inductor(self, name: &str, a: &str, b: &str, henries: f64) -> Self {
        self.element(ElementKind::Inductor, name, &[a, b], henries)
    }

    /// `gm * (v(cp) - v(cn))` flowing from `op` to `on` through the element.
    pub fn vccs(self, name: &str, op: &str, on: &str, cp: &str, cn: &str, gm: f64) -> Self {
        self.element(ElementKind::Vccs, name, &[op, on, cp, cn], gm)
    }

    pub fn vsource(self, name: &str, p: &str, n: &str, volts: f64) -> Self {
        self.element(ElementKind::Vsource, name, &[p, n], volts)
    }

    pub fn isource(self, name: &str, p: &str, n: &str, amperes: f64) -> Self {
        self.element(ElementKind::Isource, name, &[p, n], amperes)
    }

    pub fn coupling(mut self, a: &str, b: &str, k: f64) -> Self {
        self.netlist.couplings.push(MutualCoupling {
            a: a.to_string(),
            b: b.to_string(),
            k,
        });
        self
    }

    /// Adds a ground-referenced port; declares ground if needed.
    pub fn port(mut self, name: &str, node: &str, termination: Option<f64>) -> Self {
        self.touch(GROUND);
        self.touch(node);
        self.netlist.ports.push(Port {
            name: name.to_string(),
            node: node.to_string(),
            termination,
        });
        self
    }

    pub fn noise(mut self, name: &str, placement: NoisePlacement, psd: PsdModel, input: bool) -> Self {
        if let NoisePlacement::Injection { nodes } = &placement {
            for n in nodes {
                self.touch(n);
            }
        }
        self.netlist.noise_sources.push(NoiseSource {
            name: name.to_string(),
            placement,
            psd,
            input,
        });
        self
    }

    pub fn element_noise(self, name: &str, element: &str, psd: PsdModel, input: bool) -> Self {
        self.noise(
            name,
            NoisePlacement::Element {
                element: element.to_string(),
            },
            psd,
            input,
        )
    }

    pub fn injected_noise(self, name: &str, p: &str, n: &str, psd: PsdModel, input: bool) -> Self {
        self.noise(
            name,
            NoisePlacement::Injection {
                nodes: [p.to_string(), n.to_string()],
            },
            psd,
            input,
        )
    }

    pub fn build(mut self) -> Netlist {
        // Ground first keeps the node list stable regardless of insertion order.
        if let Some(pos) = self.netlist.nodes.iter().position(|n| n == GROUND) {
            let g = self.netlist.nodes.remove(pos);
            self.netlist.nodes.insert(0, g);
        }
        self.netlist
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    MissingGround,
    UnreferencedGround,
    DuplicateNode,
    DuplicateName,
    DanglingTerminal,
    TerminalCount,
    BadValue,
    CouplingOutOfRange,
    CouplingTarget,
    DuplicatePort,
    BadNoiseSource,
    Disconnected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    fn new(kind: DiagnosticKind, message: impl Into<String>) -> Self {
        Diagnostic {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Checks every structural invariant of a netlist. An empty result means the
/// netlist is well formed and every node has a path to ground.
pub fn validate(netlist: &Netlist) -> Vec<Diagnostic> {
    use DiagnosticKind::*;

    let mut diags = Vec::new();
    let mut nodes = HashSet::new();
    for n in &netlist.nodes {
        if !nodes.insert(n.as_str()) {
            diags.push(Diagnostic::new(DuplicateNode, format!("node `{n}` declared twice")));
        }
    }
    if !nodes.contains(GROUND) {
        diags.push(Diagnostic::new(
            MissingGround,
            format!("ground node `{GROUND}` is not declared"),
        ));
    }

    let mut names = HashSet::new();
    let mut dangling = false;
    let mut check_node = |diags: &mut Vec<Diagnostic>, owner: &str, node: &str| {
        if !nodes.contains(node) {
            dangling = true;
            diags.push(Diagnostic::new(
                DanglingTerminal,
                format!("dangling terminal: `{owner}` references unknown node `{node}`"),
            ));
        }
    };

    for e in &netlist.elements {
        if !names.insert(e.name.as_str()) {
            diags.push(Diagnostic::new(
                DuplicateName,
                format!("element name `{}` used twice", e.name),
            ));
        }
        if e.nodes.len() != e.kind.terminal_count() {
            diags.push(Diagnostic::new(
                TerminalCount,
                format!(
                    "`{}` is a {} and needs {} terminals, got {}",
                    e.name,
                    e.kind,
                    e.kind.terminal_count(),
                    e.nodes.len()
                ),
            ));
        }
        for n in &e.nodes {
            check_node(&mut diags, &e.name, n);
        }
        let ok = if e.kind.is_passive() {
            e.value.is_finite() && e.value > 0.0
        } else {
            e.value.is_finite()
        };
        if !ok {
            diags.push(Diagnostic::new(
                BadValue,
                format!("`{}` has invalid {} value {}", e.name, e.kind, e.value),
            ));
        }
    }

    let inductors: HashMap<&str, &Element> = netlist
        .elements
        .iter()
        .filter(|e| e.kind == ElementKind::Inductor)
        .map(|e| (e.name.as_str(), e))
        .collect();
    let mut coupled = HashSet::new();
    for c in &netlist.couplings {
        if !(c.k.is_finite() && c.k.abs() < 1.0) {
            diags.push(Diagnostic::new(
                CouplingOutOfRange,
                format!("coupling out of range: k = {} between `{}` and `{}`", c.k, c.a, c.b),
            ));
        }
        if c.a == c.b {
            diags.push(Diagnostic::new(
                CouplingTarget,
                format!("coupling joins `{}` to itself", c.a),
            ));
        }
        for l in [&c.a, &c.b] {
            if !inductors.contains_key(l.as_str()) {
                diags.push(Diagnostic::new(
                    CouplingTarget,
                    format!("coupling references `{l}`, which is not an inductor"),
                ));
            }
        }
        let key = if c.a <= c.b {
            (c.a.as_str(), c.b.as_str())
        } else {
            (c.b.as_str(), c.a.as_str())
        };
        if c.a != c.b && !coupled.insert(key) {
            diags.push(Diagnostic::new(
                CouplingTarget,
                format!("`{}` and `{}` are coupled twice", c.a, c.b),
            ));
        }
    }

    let mut port_names = HashSet::new();
    for p in &netlist.ports {
        if !port_names.insert(p.name.as_str()) {
            diags.push(Diagnostic::new(
                DuplicatePort,
                format!("port `{}` declared twice", p.name),
            ));
        }
        check_node(&mut diags, &p.name, &p.node);
        if let Some(r) = p.termination {
            if !(r.is_finite() && r >= 0.0) {
                diags.push(Diagnostic::new(
                    BadValue,
                    format!("port `{}` has invalid termination {r}", p.name),
                ));
            }
        }
    }

    let mut noise_names = HashSet::new();
    let mut inputs = 0;
    for s in &netlist.noise_sources {
        if !noise_names.insert(s.name.as_str()) {
            diags.push(Diagnostic::new(
                DuplicateName,
                format!("noise source `{}` declared twice", s.name),
            ));
        }
        inputs += usize::from(s.input);
        match &s.placement {
            NoisePlacement::Element { element } => match netlist.element(element) {
                Some(e) if !e.kind.is_independent_source() => {}
                Some(_) => diags.push(Diagnostic::new(
                    BadNoiseSource,
                    format!(
                        "noise source `{}` is attached to independent source `{element}`",
                        s.name
                    ),
                )),
                None => diags.push(Diagnostic::new(
                    BadNoiseSource,
                    format!("noise source `{}` references unknown element `{element}`", s.name),
                )),
            },
            NoisePlacement::Injection { nodes: [p, n] } => {
                check_node(&mut diags, &s.name, p);
                check_node(&mut diags, &s.name, n);
            }
        }
        let psd_ok = match s.psd {
            PsdModel::White { value } => value.is_finite() && value >= 0.0,
            PsdModel::Thermal {
                resistance,
                temperature,
            } => resistance > 0.0 && resistance.is_finite() && temperature >= 0.0 && temperature.is_finite(),
            PsdModel::Channel {
                gamma,
                eta,
                gm,
                temperature,
            } => [gamma, eta, gm, temperature].iter().all(|v| v.is_finite() && *v >= 0.0),
        };
        if !psd_ok {
            diags.push(Diagnostic::new(
                BadNoiseSource,
                format!("noise source `{}` has a negative or non-finite PSD", s.name),
            ));
        }
    }
    if inputs > 1 {
        diags.push(Diagnostic::new(
            BadNoiseSource,
            format!("{inputs} noise sources are marked as input; at most one is allowed"),
        ));
    }

    if nodes.contains(GROUND) {
        // Ports are ground-referenced, so any port counts.
        let referenced = !netlist.ports.is_empty()
            || netlist
                .elements
                .iter()
                .flat_map(|e| e.nodes.iter())
                .any(|n| n == GROUND);
        if !referenced {
            diags.push(Diagnostic::new(
                UnreferencedGround,
                "ground node is not referenced by any element or port",
            ));
        }
    }

    if !dangling && nodes.contains(GROUND) {
        let floating = unreachable_from_ground(netlist, true);
        if !floating.is_empty() {
            diags.push(Diagnostic::new(
                Disconnected,
                format!(
                    "nodes without a path to ground: {}",
                    floating.into_iter().collect::<Vec<_>>().join(", ")
                ),
            ));
        }
    }

    diags
}

/// Nodes with no path to ground. With `structural` every element terminal and
/// port counts as a connection; otherwise only branches that carry current
/// (R, L, C, voltage sources and terminated ports) do.
pub(crate) fn unreachable_from_ground(netlist: &Netlist, structural: bool) -> BTreeSet<String> {
    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut edges: Vec<(&str, &str)> = Vec::new();
    for e in &netlist.elements {
        let conducts = structural
            || matches!(
                e.kind,
                ElementKind::Resistor | ElementKind::Capacitor | ElementKind::Inductor | ElementKind::Vsource
            );
        if conducts {
            for pair in e.nodes.chunks_exact(2) {
                edges.push((&pair[0], &pair[1]));
            }
        }
    }
    for p in &netlist.ports {
        if structural || p.termination.is_some() {
            edges.push((&p.node, GROUND));
        }
    }
    for (a, b) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }

    let mut seen: HashSet<&str> = HashSet::new();
    let mut stack = vec![GROUND];
    while let Some(n) = stack.pop() {
        if seen.insert(n) {
            if let Some(next) = adj.get(n) {
                stack.extend(next.iter().copied());
            }
        }
    }
    netlist
        .nodes
        .iter()
        .filter(|n| !seen.contains(n.as_str()))
        .cloned()
        .collect()
}

/// Returns `Err(InvalidNetlist)` carrying every diagnostic when `netlist` is
/// not well formed.
pub fn ensure_valid(netlist: &Netlist) -> Result<()> {
    let diags = validate(netlist);
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidNetlist(diags))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn divider() -> Netlist {
        Netlist::builder()
            .node(GROUND)
            .vsource("v1", "in", GROUND, 1.0)
            .resistor("r1", "in", "mid", 1e3)
            .resistor("r2", "mid", GROUND, 1e3)
            .build()
    }

    #[test]
    fn divider_is_valid() {
        assert_eq!(validate(&divider()), vec![]);
    }

    #[test]
    fn dangling_terminal_reported_once() {
        let mut n = divider();
        n.elements[2].nodes[0] = "nowhere".into();
        let d = validate(&n);
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].kind, DiagnosticKind::DanglingTerminal);
        assert!(d[0].message.contains("dangling terminal"));
    }

    #[test]
    fn coupling_out_of_range() {
        let n = Netlist::builder()
            .inductor("la", "a", GROUND, 1e-9)
            .inductor("lb", "a", GROUND, 1e-9)
            .coupling("la", "lb", 1.2)
            .build();
        let d = validate(&n);
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].kind, DiagnosticKind::CouplingOutOfRange);
    }

    #[test]
    fn coupling_must_join_two_distinct_inductors() {
        let n = Netlist::builder()
            .inductor("la", "a", GROUND, 1e-9)
            .resistor("r", "a", GROUND, 1.0)
            .coupling("la", "la", 0.5)
            .coupling("la", "r", 0.5)
            .build();
        let kinds: Vec<_> = validate(&n).into_iter().map(|d| d.kind).collect();
        assert!(kinds.iter().all(|k| *k == DiagnosticKind::CouplingTarget));
        assert_eq!(kinds.len(), 2);
    }

    #[test]
    fn floating_node_reported() {
        let n = Netlist::builder()
            .resistor("r1", "a", GROUND, 1.0)
            .resistor("r2", "b", "c", 1.0)
            .build();
        let d = validate(&n);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::Disconnected);
        assert!(d[0].message.contains("b, c"));
    }

    #[test]
    fn missing_ground_and_bad_values() {
        let n = Netlist::builder()
            .resistor("r1", "a", "b", -1.0)
            .capacitor("c1", "a", "b", f64::NAN)
            .build();
        let kinds: Vec<_> = validate(&n).into_iter().map(|d| d.kind).collect();
        assert!(kinds.contains(&DiagnosticKind::MissingGround));
        assert_eq!(kinds.iter().filter(|k| **k == DiagnosticKind::BadValue).count(), 2);
    }

    #[test]
    fn vccs_gain_may_be_negative() {
        let n = Netlist::builder()
            .resistor("r", "a", GROUND, 1.0)
            .vccs("g", "a", GROUND, "a", GROUND, -0.3)
            .build();
        assert!(validate(&n).is_empty());
    }

    #[test]
    fn noise_source_references_are_checked() {
        let n = divider();
        let mut bad = n.clone();
        bad.noise_sources.push(NoiseSource {
            name: "n1".into(),
            placement: NoisePlacement::Element {
                element: "missing".into(),
            },
            psd: PsdModel::White { value: 1.0 },
            input: false,
        });
        bad.noise_sources.push(NoiseSource {
            name: "n2".into(),
            placement: NoisePlacement::Injection {
                nodes: ["mid".into(), "zz".into()],
            },
            psd: PsdModel::White { value: -1.0 },
            input: false,
        });
        let kinds: Vec<_> = validate(&bad).into_iter().map(|d| d.kind).collect();
        assert!(kinds.contains(&DiagnosticKind::BadNoiseSource));
        assert!(kinds.contains(&DiagnosticKind::DanglingTerminal));
    }

    #[test]
    fn json_round_trip() {
        let n = Netlist::builder()
            .inductor("la", "a", GROUND, 1e-9)
            .inductor("lb", "a", "b", 2e-9)
            .resistor("r", "b", GROUND, 50.0)
            .coupling("la", "lb", 0.3)
            .port("p1", "a", Some(50.0))
            .port("p2", "b", None)
            .element_noise(
                "rn",
                "r",
                PsdModel::Thermal {
                    resistance: 50.0,
                    temperature: 290.0,
                },
                false,
            )
            .injected_noise("src", GROUND, "a", PsdModel::White { value: 1e-20 }, true)
            .build();
        let back = Netlist::from_json(&n.to_json_pretty()).unwrap();
        assert_eq!(back, n);
    }

    #[test]
    fn json_schema_field_names() {
        let text = r#"{
            "nodes": ["0", "a"],
            "elements": [{"kind": "resistor", "name": "r1", "nodes": ["a", "0"], "value": 50}],
            "couplings": [],
            "ports": [{"name": "p1", "node": "a"}],
            "noise_sources": [
                {"name": "n", "element": "r1", "psd": {"kind": "thermal", "resistance": 50, "temperature": 290}, "input": true}
            ]
        }"#;
        let n = Netlist::from_json(text).unwrap();
        assert!(validate(&n).is_empty());
        assert_eq!(n.noise_sources()[0].psd.psd(), 4.0 * BOLTZMANN * 290.0 / 50.0);
    }

    #[test]
    fn coupling_removal_is_idempotent_on_elements() {
        let n = Netlist::builder()
            .inductor("la", "a", GROUND, 1e-9)
            .inductor("lb", "a", GROUND, 4e-9)
            .coupling("la", "lb", 0.5)
            .build();
        assert!((n.mutual_inductance(&n.couplings()[0]).unwrap() - 1e-9).abs() < 1e-24);
        let stripped = n.without_coupling("lb", "la");
        assert!(stripped.couplings().is_empty());
        let again = stripped.with_coupling("la", "lb", 0.5);
        assert_eq!(again.elements(), n.elements());
        assert_eq!(again, n);
    }
}
