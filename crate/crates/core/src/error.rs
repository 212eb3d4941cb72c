use thiserror::Error;

use crate::netlist::Diagnostic;

/// Errors raised by the analysis engines and the LNA model layer.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid netlist: {}", summarize(.0))]
    InvalidNetlist(Vec<Diagnostic>),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("frequency must be positive and finite, got {0} Hz")]
    InvalidFrequency(f64),

    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },

    #[error("singular system at {frequency} Hz (condition estimate {condition:e}), involving {}", .nodes.join(", "))]
    SingularSystem {
        frequency: f64,
        condition: f64,
        nodes: Vec<String>,
    },

    #[error("expected {expected} ports, netlist has {found}")]
    PortCount { expected: &'static str, found: usize },

    #[error("singular intermediate matrix converting {from} to {to}")]
    SingularConversion { from: &'static str, to: &'static str },

    #[error("no noise source is marked as the input-source noise")]
    NoInputNoise,

    #[error("input-source noise contributes zero output power at {0} Hz")]
    ZeroSourceContribution(f64),

    #[error("no positive inductor pair satisfies the match: {0}")]
    NoMatchSolution(String),

    #[error("{0}")]
    Domain(String),

    #[error("metrics extraction: {0}")]
    Metrics(String),

    #[error("at {frequency} Hz: {source}")]
    AtFrequency {
        frequency: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn summarize(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_frequency(self, frequency: f64) -> Self {
        match self {
            e @ Error::AtFrequency { .. } => e,
            e => Error::AtFrequency {
                frequency,
                source: Box::new(e),
            },
        }
    }
}
