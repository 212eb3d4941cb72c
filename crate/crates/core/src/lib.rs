//! Small-signal AC and noise analysis for linear netlists, with models of a
//! variable-gain cascode LNA built on top.
//!
//! - [`netlist`]: circuit description, validation and the LNA model builders.
//! - [`mna`]: modified nodal analysis, S/Y/Z extraction and conversion.
//! - [`noise`]: output noise and noise factor by superposition.
//! - [`lna`]: closed-form design equations and device calibrations.
//! - [`sweep`]: frequency, control-voltage and corner sweeps and metrics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod lna;
pub mod mna;
pub mod netlist;
pub mod noise;
pub mod sweep;

pub use error::{Error, Result};
pub use mna::{convert, port_parameters, solve_ac, AcAnalysis, AcSolution, ParamKind, TwoPort};
pub use netlist::{
    build_first_stage_model, build_gain_model, build_two_stage_model, DesignParams, ModelOptions, Netlist,
    NetlistBuilder, GROUND,
};
pub use noise::{output_noise, NoiseOutput, NoiseReport};
pub use sweep::{extract_metrics, frequency_sweep, CornerFactors, FrequencyGrid, Spacing, SweepMetrics, SweepTable};
