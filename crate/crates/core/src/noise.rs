//! Output noise by superposition.
//!
//! Each noise source is replaced by a unit deterministic current at its
//! location, the circuit is solved with every independent source zeroed and
//! port terminations in place, and the squared transfer to the output scales
//! the source PSD. Sources are uncorrelated, so their contributions add.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mna::{Extras, System};
use crate::netlist::{ensure_valid, Netlist, GROUND};

/// Reference temperature for noise figure, kelvin.
pub const T0: f64 = 290.0;

/// The output quantity noise is referred to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseOutput {
    /// Open-circuit voltage `v(p) - v(n)`.
    Voltage { p: String, n: String },
    /// Current from `node` into an ideal short to ground.
    ShortCircuitCurrent { node: String },
    /// Branch current of an inductor or voltage source.
    BranchCurrent { element: String },
}

impl NoiseOutput {
    pub fn short_circuit(node: &str) -> Self {
        NoiseOutput::ShortCircuitCurrent { node: node.to_string() }
    }

    pub fn voltage(p: &str, n: &str) -> Self {
        NoiseOutput::Voltage {
            p: p.to_string(),
            n: n.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseContribution {
    pub source: String,
    /// Source PSD, A²/Hz.
    pub psd: f64,
    pub transfer: Complex64,
    /// `psd · |transfer|²`, in units² of the output quantity per Hz.
    pub output_psd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub frequency: f64,
    pub contributions: Vec<NoiseContribution>,
    pub total_output_psd: f64,
    pub source_contribution: f64,
    pub noise_factor: f64,
    pub noise_figure_db: f64,
}

/// Noise analysis of one netlist towards one output.
pub struct NoiseAnalysis<'a> {
    netlist: &'a Netlist,
    output: NoiseOutput,
}

impl<'a> NoiseAnalysis<'a> {
    pub fn new(netlist: &'a Netlist, output: NoiseOutput) -> Result<Self> {
        ensure_valid(netlist)?;
        let known_node = |n: &str| netlist.nodes().iter().any(|x| x == n);
        match &output {
            NoiseOutput::Voltage { p, n } => {
                for node in [p, n] {
                    if !known_node(node) {
                        return Err(Error::Unknown {
                            what: "node",
                            name: node.clone(),
                        });
                    }
                }
            }
            NoiseOutput::ShortCircuitCurrent { node } => {
                if !known_node(node) || node == GROUND {
                    return Err(Error::Unknown {
                        what: "non-ground node",
                        name: node.clone(),
                    });
                }
            }
            NoiseOutput::BranchCurrent { element } => {
                if !netlist.element(element).is_some_and(|e| e.kind.has_branch_current()) {
                    return Err(Error::Unknown {
                        what: "inductor or voltage source",
                        name: element.clone(),
                    });
                }
            }
        }
        Ok(NoiseAnalysis { netlist, output })
    }

    fn system(&self, frequency: f64) -> Result<System> {
        let vsources = match &self.output {
            NoiseOutput::ShortCircuitCurrent { node } => vec![node.as_str()],
            _ => Vec::new(),
        };
        let extras = Extras {
            terminate_ports: true,
            vsources,
            ..Extras::default()
        };
        System::new(self.netlist, frequency, &extras)
    }

    fn read(&self, sys: &System, x: &nalgebra::DVector<Complex64>) -> Complex64 {
        match &self.output {
            NoiseOutput::Voltage { p, n } => sys.layout.voltage(x, p) - sys.layout.voltage(x, n),
            NoiseOutput::ShortCircuitCurrent { .. } => x[sys.layout.extra(0)],
            NoiseOutput::BranchCurrent { element } => x[sys.layout.branch(element).expect("checked in new")],
        }
    }

    fn transfers(&self, sys: &System) -> Vec<Complex64> {
        self.netlist
            .noise_sources()
            .iter()
            .map(|s| {
                let (p, n) = self.netlist.noise_injection(s).expect("validated");
                let mut rhs = sys.zero_rhs();
                sys.layout.inject(&mut rhs, &p, &n, Complex64::from(1.0));
                self.read(sys, &sys.solve(&rhs))
            })
            .collect()
    }

    /// Transfer from a unit current at `source` to the output.
    pub fn transfer(&self, source: &str, frequency: f64) -> Result<Complex64> {
        let s = self.netlist.noise_source(source).ok_or_else(|| Error::Unknown {
            what: "noise source",
            name: source.to_string(),
        })?;
        let sys = self.system(frequency)?;
        let (p, n) = self.netlist.noise_injection(s).expect("validated");
        let mut rhs = sys.zero_rhs();
        sys.layout.inject(&mut rhs, &p, &n, Complex64::from(1.0));
        Ok(self.read(&sys, &sys.solve(&rhs)))
    }

    pub fn report(&self, frequency: f64) -> Result<NoiseReport> {
        let sources = self.netlist.noise_sources();
        let input = sources.iter().position(|s| s.input).ok_or(Error::NoInputNoise)?;
        let sys = self.system(frequency)?;
        let contributions: Vec<NoiseContribution> = sources
            .iter()
            .zip(self.transfers(&sys))
            .map(|(s, h)| {
                let psd = s.psd.psd();
                NoiseContribution {
                    source: s.name.clone(),
                    psd,
                    transfer: h,
                    output_psd: psd * h.norm_sqr(),
                }
            })
            .collect();
        let total_output_psd: f64 = contributions.iter().map(|c| c.output_psd).sum();
        let source_contribution = contributions[input].output_psd;
        if !(source_contribution > 0.0) {
            return Err(Error::ZeroSourceContribution(frequency));
        }
        let noise_factor = total_output_psd / source_contribution;
        Ok(NoiseReport {
            frequency,
            contributions,
            total_output_psd,
            source_contribution,
            noise_factor,
            noise_figure_db: 10.0 * noise_factor.log10(),
        })
    }
}

/// Transfer from a unit deterministic current at `source` to `output`.
pub fn noise_transfer(netlist: &Netlist, source: &str, output: &NoiseOutput, frequency: f64) -> Result<Complex64> {
    NoiseAnalysis::new(netlist, output.clone())?.transfer(source, frequency)
}

/// Per-source output noise, total, and the noise factor referred to the
/// source marked `input`.
pub fn output_noise(netlist: &Netlist, output: &NoiseOutput, frequency: f64) -> Result<NoiseReport> {
    NoiseAnalysis::new(netlist, output.clone())?.report(frequency)
}
