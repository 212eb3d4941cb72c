use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rfss_core::sweep::{CornerFactors, FrequencyGrid, Spacing};
use serde_json::json;

use crate::diag::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "rfss",
    version,
    about = "Small-signal analysis of linear RF netlists and the variable-gain LNA model"
)]
pub struct Cli {
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, env = "RFSS_THREADS", global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// S-parameters (and noise figure, if the netlist has an input noise
    /// source) of a two-port JSON netlist.
    Analyze(AnalyzeArgs),
    /// Per-control-voltage metrics of the LNA design as CSV and JSON.
    Report(ReportArgs),
    /// Synthesize Lg and Ls for an input match.
    DesignMatch(MatchArgs),
    /// Figure of merit from six scalars.
    Fom(FomArgs),
    /// Frequency sweeps of the LNA design as Touchstone and CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Start frequency, GHz.
    #[arg(long, default_value_t = 20.0)]
    pub fmin: f64,
    /// Stop frequency, GHz.
    #[arg(long, default_value_t = 60.0)]
    pub fmax: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    /// Logarithmic instead of linear spacing.
    #[arg(long)]
    pub log: bool,
}

impl GridArgs {
    pub fn grid(&self) -> Result<FrequencyGrid, CliError> {
        let spacing = if self.log { Spacing::Log } else { Spacing::Linear };
        FrequencyGrid::new(self.fmin * 1e9, self.fmax * 1e9, self.points, spacing).map_err(|e| {
            CliError::input(
                "invalid-grid",
                e.to_string(),
                json!({ "fmin_ghz": self.fmin, "fmax_ghz": self.fmax, "points": self.points }),
            )
        })
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// JSON netlist with exactly two ports.
    #[arg(long)]
    pub input: PathBuf,
    /// Output prefix; writes `<prefix>.s2p` and `<prefix>_nf.csv`.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Reference impedance of the S-parameters, ohms.
    #[arg(long, default_value_t = 50.0)]
    pub z0: f64,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Design parameter file.
    #[arg(long)]
    pub input: PathBuf,
    /// Output prefix; writes `<prefix>_metrics.csv` and `<prefix>_report.json`.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Control voltages, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7")]
    pub vctrl: Vec<f64>,
    /// Process corners, comma separated (TT, FF, SS).
    #[arg(long, value_delimiter = ',', default_value = "TT")]
    pub corners: Vec<CornerFactors>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Design parameter file.
    #[arg(long)]
    pub input: PathBuf,
    /// Output prefix; writes one `.s2p` per case and `<prefix>_sweep.csv`.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Control voltages, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub vctrl: Vec<f64>,
    /// Process corners, comma separated (TT, FF, SS).
    #[arg(long, value_delimiter = ',', default_value = "TT")]
    pub corners: Vec<CornerFactors>,
    /// Reference impedance of the written S-parameters (default: the design's source resistance).
    #[arg(long)]
    pub z0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// Optional design parameter file supplying defaults.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// M1 transconductance, S.
    #[arg(long)]
    pub gm1: Option<f64>,
    /// Gate-source capacitance, F.
    #[arg(long)]
    pub cgs: Option<f64>,
    /// Lg-Ls coupling coefficient.
    #[arg(long)]
    pub k: Option<f64>,
    /// Match frequency, Hz.
    #[arg(long)]
    pub f0: Option<f64>,
    /// Source resistance, ohms.
    #[arg(long)]
    pub rs: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FomArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub gain_db: f64,
    #[arg(long)]
    pub bw_ghz: f64,
    #[arg(long)]
    pub f0_ghz: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub iip3_dbm: f64,
    #[arg(long)]
    pub nf_db: f64,
    #[arg(long)]
    pub pdc_mw: f64,
    /// Print the conventions and the comparison with published values.
    #[arg(long)]
    pub explain: bool,
}
