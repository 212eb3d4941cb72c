//! Complex AC modified nodal analysis.
//!
//! Unknowns are the non-ground node voltages followed by one branch current
//! per inductor and voltage source (plus any auxiliary sources an analysis
//! adds). Mutual couplings are stamped as `-jωM` cross terms between the
//! branch equations of the coupled inductors. The system is row/column
//! equilibrated and factored densely with partial pivoting; a 1-norm
//! condition estimate above [`CONDITION_LIMIT`] is reported as singular.

mod twoport;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::netlist::{ensure_valid, ElementKind, Netlist, GROUND};

pub use twoport::{convert, ParamKind, TwoPort};

/// Condition estimate beyond which a solve is refused.
pub const CONDITION_LIMIT: f64 = 1e12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Result of a single-frequency AC solve.
#[derive(Debug, Clone, PartialEq)]
pub struct AcSolution {
    pub frequency: f64,
    /// Name of the independent source that was active.
    pub excitation: String,
    pub amplitude: f64,
    /// Every node, ground included (exactly zero).
    pub node_voltages: BTreeMap<String, Complex64>,
    /// Inductor and voltage-source branch currents, first terminal to second.
    pub branch_currents: BTreeMap<String, Complex64>,
}

impl AcSolution {
    pub fn voltage(&self, node: &str) -> Option<Complex64> {
        self.node_voltages.get(node).copied()
    }

    pub fn current(&self, element: &str) -> Option<Complex64> {
        self.branch_currents.get(element).copied()
    }
}

/// Auxiliary branches an analysis adds on top of the netlist.
#[derive(Debug, Clone, Default)]
pub(crate) struct Extras<'a> {
    /// Stamp port terminations as resistors to ground.
    pub terminate_ports: bool,
    /// Stamp this conductance from every port node to ground.
    pub port_conductance: Option<f64>,
    /// Voltage sources from each listed node to ground, each with its own
    /// branch-current unknown.
    pub vsources: Vec<&'a str>,
}

/// Unknown numbering of an assembled system.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    nodes: HashMap<String, usize>,
    branches: HashMap<String, usize>,
    extras: Vec<usize>,
    labels: Vec<String>,
}

impl Layout {
    pub fn node(&self, name: &str) -> Option<usize> {
        self.nodes.get(name).copied()
    }

    pub fn branch(&self, element: &str) -> Option<usize> {
        self.branches.get(element).copied()
    }

    pub fn extra(&self, k: usize) -> usize {
        self.extras[k]
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    /// Adds a unit current drawn from `p` and delivered into `n`.
    pub fn inject(&self, rhs: &mut DVector<Complex64>, p: &str, n: &str, amp: Complex64) {
        if let Some(i) = self.node(p) {
            rhs[i] -= amp;
        }
        if let Some(i) = self.node(n) {
            rhs[i] += amp;
        }
    }

    pub fn voltage(&self, x: &DVector<Complex64>, node: &str) -> Complex64 {
        self.node(node).map_or(ZERO, |i| x[i])
    }
}

/// Assembled and factored MNA system at one frequency.
pub(crate) struct System {
    pub layout: Layout,
    /// 1-norm condition estimate of the equilibrated matrix.
    pub condition: f64,
    lu: LU<Complex64, Dyn, Dyn>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
}

impl System {
    pub fn new(netlist: &Netlist, frequency: f64, extras: &Extras<'_>) -> Result<System> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::InvalidFrequency(frequency));
        }
        let (matrix, layout) = assemble(netlist, frequency, extras);
        factor(netlist, matrix, layout, frequency, extras)
    }

    pub fn zero_rhs(&self) -> DVector<Complex64> {
        DVector::zeros(self.layout.size())
    }

    pub fn solve(&self, rhs: &DVector<Complex64>) -> DVector<Complex64> {
        let scaled = DVector::from_fn(rhs.len(), |i, _| rhs[i] * self.row_scale[i]);
        let y = self
            .lu
            .solve(&scaled)
            .expect("factorization was checked for invertibility");
        DVector::from_fn(y.len(), |i, _| y[i] * self.col_scale[i])
    }
}

fn assemble(netlist: &Netlist, frequency: f64, extras: &Extras<'_>) -> (DMatrix<Complex64>, Layout) {
    let mut nodes = HashMap::new();
    let mut labels = Vec::new();
    for n in netlist.nodes() {
        if n != GROUND && !nodes.contains_key(n) {
            nodes.insert(n.clone(), labels.len());
            labels.push(format!("V({n})"));
        }
    }
    let mut branches = HashMap::new();
    for e in netlist.elements() {
        if e.kind.has_branch_current() {
            branches.insert(e.name.clone(), labels.len());
            labels.push(format!("I({})", e.name));
        }
    }
    let mut short_ports = Vec::new();
    if extras.terminate_ports {
        for p in netlist.ports() {
            if p.termination == Some(0.0) {
                short_ports.push((p.node.as_str(), labels.len()));
                labels.push(format!("I(port {})", p.name));
            }
        }
    }
    let mut extra_idx = Vec::new();
    for n in &extras.vsources {
        extra_idx.push(labels.len());
        labels.push(format!("I(aux {n})"));
    }

    let layout = Layout {
        nodes,
        branches,
        extras: extra_idx,
        labels,
    };
    let size = layout.size();
    let mut a = DMatrix::<Complex64>::zeros(size, size);
    let omega = 2.0 * PI * frequency;
    let jw = Complex64::new(0.0, omega);

    let idx = |n: &str| layout.node(n);
    let admittance = |a: &mut DMatrix<Complex64>, p: &str, n: &str, y: Complex64| {
        let (ip, in_) = (idx(p), idx(n));
        if let Some(i) = ip {
            a[(i, i)] += y;
        }
        if let Some(j) = in_ {
            a[(j, j)] += y;
        }
        if let (Some(i), Some(j)) = (ip, in_) {
            a[(i, j)] -= y;
            a[(j, i)] -= y;
        }
    };
    // Branch current `k` leaves `p` and enters `n`; branch row enforces v(p) - v(n).
    let branch = |a: &mut DMatrix<Complex64>, p: &str, n: &str, k: usize| {
        if let Some(i) = idx(p) {
            a[(i, k)] += 1.0;
            a[(k, i)] += 1.0;
        }
        if let Some(i) = idx(n) {
            a[(i, k)] -= 1.0;
            a[(k, i)] -= 1.0;
        }
    };

    for e in netlist.elements() {
        let nd = |i: usize| e.nodes[i].as_str();
        match e.kind {
            ElementKind::Resistor => admittance(&mut a, nd(0), nd(1), Complex64::from(1.0 / e.value)),
            ElementKind::Capacitor => admittance(&mut a, nd(0), nd(1), jw * e.value),
            ElementKind::Inductor => {
                let k = layout.branch(&e.name).expect("inductor branch");
                branch(&mut a, nd(0), nd(1), k);
                a[(k, k)] -= jw * e.value;
            }
            ElementKind::Vsource => {
                let k = layout.branch(&e.name).expect("source branch");
                branch(&mut a, nd(0), nd(1), k);
            }
            ElementKind::Vccs => {
                let gm = Complex64::from(e.value);
                for (row, sr) in [(nd(0), 1.0), (nd(1), -1.0)] {
                    let Some(r) = idx(row) else { continue };
                    for (col, sc) in [(nd(2), 1.0), (nd(3), -1.0)] {
                        if let Some(c) = idx(col) {
                            a[(r, c)] += gm * (sr * sc);
                        }
                    }
                }
            }
            ElementKind::Isource => {}
        }
    }

    for c in netlist.couplings() {
        let (Some(ka), Some(kb)) = (layout.branch(&c.a), layout.branch(&c.b)) else {
            continue;
        };
        let m = netlist.mutual_inductance(c).unwrap_or(0.0);
        a[(ka, kb)] -= jw * m;
        a[(kb, ka)] -= jw * m;
    }

    if extras.terminate_ports {
        for p in netlist.ports() {
            match p.termination {
                Some(r) if r > 0.0 => admittance(&mut a, &p.node, GROUND, Complex64::from(1.0 / r)),
                _ => {}
            }
        }
        for (node, k) in &short_ports {
            branch(&mut a, node, GROUND, *k);
        }
    }
    if let Some(g) = extras.port_conductance {
        for p in netlist.ports() {
            admittance(&mut a, &p.node, GROUND, Complex64::from(g));
        }
    }
    for (node, k) in extras.vsources.iter().zip(&layout.extras) {
        branch(&mut a, node, GROUND, *k);
    }

    (a, layout)
}

fn factor(
    netlist: &Netlist,
    mut a: DMatrix<Complex64>,
    layout: Layout,
    frequency: f64,
    extras: &Extras<'_>,
) -> Result<System> {
    let n = a.nrows();
    let singular = |condition: f64, pivots: Vec<String>| {
        let mut nodes = floating_nodes(netlist, extras);
        if nodes.is_empty() {
            nodes = pivots;
        }
        Error::SingularSystem {
            frequency,
            condition,
            nodes,
        }
    };

    let mut row_scale = vec![1.0; n];
    for (i, s) in row_scale.iter_mut().enumerate() {
        let m = a.row(i).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            return Err(singular(f64::INFINITY, vec![layout.labels[i].clone()]));
        }
        *s = 1.0 / m;
        a.row_mut(i).scale_mut(*s);
    }
    let mut col_scale = vec![1.0; n];
    for (j, s) in col_scale.iter_mut().enumerate() {
        let m = a.column(j).iter().map(|v| v.norm()).fold(0.0, f64::max);
        if m == 0.0 {
            return Err(singular(f64::INFINITY, vec![layout.labels[j].clone()]));
        }
        *s = 1.0 / m;
        a.column_mut(j).scale_mut(*s);
    }

    let norm1 = |m: &DMatrix<Complex64>| {
        (0..m.ncols())
            .map(|j| m.column(j).iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let a_norm = norm1(&a);
    let lu = a.lu();
    let u = lu.u();
    let umax = u.diagonal().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let weak: Vec<String> = (0..n)
        .filter(|&i| u[(i, i)].norm() <= umax * 1e-13)
        .map(|i| layout.labels[i].clone())
        .collect();
    let inv = match lu.try_inverse() {
        Some(inv) if inv.iter().all(|v| v.re.is_finite() && v.im.is_finite()) => inv,
        _ => return Err(singular(f64::INFINITY, weak)),
    };
    let condition = a_norm * norm1(&inv);
    if !(condition <= CONDITION_LIMIT) {
        return Err(singular(condition, weak));
    }
    Ok(System {
        layout,
        condition,
        lu,
        row_scale,
        col_scale,
    })
}

/// Nodes with no conducting path to ground in the analysed configuration.
fn floating_nodes(netlist: &Netlist, extras: &Extras<'_>) -> Vec<String> {
    let mut adj: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut link = |a: &str, b: &str| {
        let (a, b) = (
            netlist.nodes().iter().find(|n| *n == a).map(String::as_str),
            netlist.nodes().iter().find(|n| *n == b).map(String::as_str),
        );
        if let (Some(a), Some(b)) = (a, b) {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
    };
    for e in netlist.elements() {
        if matches!(
            e.kind,
            ElementKind::Resistor | ElementKind::Capacitor | ElementKind::Inductor | ElementKind::Vsource
        ) {
            link(&e.nodes[0], &e.nodes[1]);
        }
    }
    for p in netlist.ports() {
        if (extras.terminate_ports && p.termination.is_some()) || extras.port_conductance.is_some() {
            link(&p.node, GROUND);
        }
    }
    for n in &extras.vsources {
        link(n, GROUND);
    }
    let mut seen = HashSet::new();
    let mut stack = vec![GROUND];
    while let Some(n) = stack.pop() {
        if seen.insert(n) {
            if let Some(next) = adj.get(n) {
                stack.extend(next.iter().copied());
            }
        }
    }
    netlist
        .nodes()
        .iter()
        .filter(|n| !seen.contains(n.as_str()))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// A validated netlist ready for repeated AC analysis.
///
/// Holds no mutable state; one instance can serve many threads.
#[derive(Debug, Clone, Copy)]
pub struct AcAnalysis<'a> {
    netlist: &'a Netlist,
}

impl<'a> AcAnalysis<'a> {
    pub fn new(netlist: &'a Netlist) -> Result<Self> {
        ensure_valid(netlist)?;
        Ok(AcAnalysis { netlist })
    }

    pub fn netlist(&self) -> &'a Netlist {
        self.netlist
    }

    /// Condition estimate of the equilibrated system with port terminations
    /// in place, as used by driven solves.
    pub fn condition(&self, frequency: f64) -> Result<f64> {
        let extras = Extras {
            terminate_ports: true,
            ..Extras::default()
        };
        Ok(System::new(self.netlist, frequency, &extras)?.condition)
    }

    /// Solves with `excitation` at unit amplitude and every other independent
    /// source zeroed. Port terminations are stamped.
    pub fn solve(&self, frequency: f64, excitation: &str) -> Result<AcSolution> {
        self.solve_scaled(frequency, excitation, 1.0)
    }

    pub fn solve_scaled(&self, frequency: f64, excitation: &str, amplitude: f64) -> Result<AcSolution> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::InvalidFrequency(frequency));
        }
        let source = self
            .netlist
            .element(excitation)
            .filter(|e| e.kind.is_independent_source())
            .ok_or_else(|| Error::Unknown {
                what: "independent source",
                name: excitation.to_string(),
            })?;
        let extras = Extras {
            terminate_ports: true,
            ..Extras::default()
        };
        let sys = System::new(self.netlist, frequency, &extras)?;
        let mut rhs = sys.zero_rhs();
        let amp = Complex64::from(amplitude);
        match source.kind {
            ElementKind::Vsource => {
                let k = sys.layout.branch(&source.name).expect("source branch");
                rhs[k] = amp;
            }
            _ => sys.layout.inject(&mut rhs, &source.nodes[0], &source.nodes[1], amp),
        }
        let x = sys.solve(&rhs);
        let node_voltages = self
            .netlist
            .nodes()
            .iter()
            .map(|n| (n.clone(), sys.layout.voltage(&x, n)))
            .collect();
        let mut branch_currents: BTreeMap<String, Complex64> = self
            .netlist
            .elements()
            .iter()
            .filter_map(|e| sys.layout.branch(&e.name).map(|k| (e.name.clone(), x[k])))
            .collect();
        for p in self.netlist.ports().iter().filter(|p| p.termination == Some(0.0)) {
            if let Some(k) = sys
                .layout
                .labels
                .iter()
                .position(|l| *l == format!("I(port {})", p.name))
            {
                branch_currents.insert(format!("port:{}", p.name), x[k]);
            }
        }
        Ok(AcSolution {
            frequency,
            excitation: excitation.to_string(),
            amplitude,
            node_voltages,
            branch_currents,
        })
    }

    /// Network parameters at the netlist's ports.
    ///
    /// Z drives each port with a unit current with all ports open, Y drives
    /// each port with a unit voltage with all ports shorted, and S drives each
    /// port through `z0` with every port terminated in `z0`
    /// (`S_ij = 2 V_i - δ_ij` for a unit EMF).
    pub fn port_parameters(&self, frequency: f64, kind: ParamKind, z0: f64) -> Result<TwoPort> {
        let ports = self.netlist.ports();
        if ports.is_empty() || ports.len() > 2 {
            return Err(Error::PortCount {
                expected: "1 or 2",
                found: ports.len(),
            });
        }
        if !(z0.is_finite() && z0 > 0.0) {
            return Err(Error::param("z0", format!("must be positive, got {z0}")));
        }
        let n = ports.len();
        let nodes: Vec<&str> = ports.iter().map(|p| p.node.as_str()).collect();
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        match kind {
            ParamKind::Z => {
                let sys = System::new(self.netlist, frequency, &Extras::default())?;
                for j in 0..n {
                    let mut rhs = sys.zero_rhs();
                    sys.layout.inject(&mut rhs, GROUND, nodes[j], Complex64::from(1.0));
                    let x = sys.solve(&rhs);
                    for i in 0..n {
                        m[(i, j)] = sys.layout.voltage(&x, nodes[i]);
                    }
                }
            }
            ParamKind::Y => {
                let extras = Extras {
                    vsources: nodes.clone(),
                    ..Extras::default()
                };
                let sys = System::new(self.netlist, frequency, &extras)?;
                for j in 0..n {
                    let mut rhs = sys.zero_rhs();
                    rhs[sys.layout.extra(j)] = Complex64::from(1.0);
                    let x = sys.solve(&rhs);
                    for i in 0..n {
                        m[(i, j)] = -x[sys.layout.extra(i)];
                    }
                }
            }
            ParamKind::S => {
                let extras = Extras {
                    port_conductance: Some(1.0 / z0),
                    ..Extras::default()
                };
                let sys = System::new(self.netlist, frequency, &extras)?;
                for j in 0..n {
                    let mut rhs = sys.zero_rhs();
                    sys.layout.inject(&mut rhs, GROUND, nodes[j], Complex64::from(1.0 / z0));
                    let x = sys.solve(&rhs);
                    for i in 0..n {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        m[(i, j)] = sys.layout.voltage(&x, nodes[i]) * 2.0 - delta;
                    }
                }
            }
        }
        TwoPort::new(kind, m, z0).map_err(|e| e.at_frequency(frequency))
    }
}

/// Solves `netlist` at `frequency` with only `excitation` active.
pub fn solve_ac(netlist: &Netlist, frequency: f64, excitation: &str) -> Result<AcSolution> {
    AcAnalysis::new(netlist)?.solve(frequency, excitation)
}

pub fn port_parameters(netlist: &Netlist, frequency: f64, kind: ParamKind, z0: f64) -> Result<TwoPort> {
    AcAnalysis::new(netlist)?.port_parameters(frequency, kind, z0)
}

/// Net current leaving each node under `solution`, computed element by
/// element from the solved voltages and branch currents. Every entry is zero
/// up to rounding for a correct solve.
pub fn kcl_residuals(netlist: &Netlist, solution: &AcSolution) -> BTreeMap<String, Complex64> {
    let jw = Complex64::new(0.0, 2.0 * PI * solution.frequency);
    let v = |n: &str| solution.voltage(n).unwrap_or(ZERO);
    let mut out: BTreeMap<String, Complex64> = netlist.nodes().iter().map(|n| (n.clone(), ZERO)).collect();
    let mut flow = |from: &str, to: &str, i: Complex64| {
        *out.entry(from.to_string()).or_insert(ZERO) += i;
        *out.entry(to.to_string()).or_insert(ZERO) -= i;
    };
    for e in netlist.elements() {
        let (a, b) = (e.nodes[0].as_str(), e.nodes[1].as_str());
        let i = match e.kind {
            ElementKind::Resistor => (v(a) - v(b)) / e.value,
            ElementKind::Capacitor => (v(a) - v(b)) * jw * e.value,
            ElementKind::Inductor | ElementKind::Vsource => solution.current(&e.name).unwrap_or(ZERO),
            ElementKind::Vccs => (v(&e.nodes[2]) - v(&e.nodes[3])) * e.value,
            ElementKind::Isource if e.name == solution.excitation => Complex64::from(solution.amplitude),
            ElementKind::Isource => ZERO,
        };
        flow(a, b, i);
    }
    for p in netlist.ports() {
        match p.termination {
            Some(r) if r > 0.0 => flow(&p.node, GROUND, v(&p.node) / r),
            Some(_) => flow(
                &p.node,
                GROUND,
                solution.current(&format!("port:{}", p.name)).unwrap_or(ZERO),
            ),
            None => {}
        }
    }
    out
}
