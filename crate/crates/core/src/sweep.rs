//! Frequency, control-voltage and process-corner sweeps of the two-stage
//! model, and extraction of scalar amplifier metrics from a sweep.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lna::{fom, FomInputs, VCTRL_MAX};
use crate::mna::{AcAnalysis, ParamKind, TwoPort};
use crate::netlist::{build_two_stage_model_with, DesignParams, ModelOptions, Netlist};
use crate::noise::{NoiseAnalysis, NoiseOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl FrequencyGrid {
    pub fn new(start: f64, stop: f64, points: usize, spacing: Spacing) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && start > 0.0 && start < stop) {
            return Err(Error::param(
                "grid",
                format!("need 0 < start < stop, got {start}..{stop}"),
            ));
        }
        if points < 2 {
            return Err(Error::param("grid", format!("need at least 2 points, got {points}")));
        }
        Ok(FrequencyGrid {
            start,
            stop,
            points,
            spacing,
        })
    }

    pub fn linear(start: f64, stop: f64, points: usize) -> Result<Self> {
        Self::new(start, stop, points, Spacing::Linear)
    }

    pub fn log(start: f64, stop: f64, points: usize) -> Result<Self> {
        Self::new(start, stop, points, Spacing::Log)
    }

    /// Same span with the point spacing halved.
    pub fn refined(&self) -> Self {
        FrequencyGrid {
            points: 2 * self.points - 1,
            ..*self
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == self.points - 1 {
                    return self.stop;
                }
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

/// Process corner applied on top of a design: transconductances scale by
/// `gm_scale`, gate capacitances by `cgs_scale`, and the gain-control
/// device threshold moves by `vt_shift` volts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerFactors {
    pub name: String,
    pub gm_scale: f64,
    pub cgs_scale: f64,
    pub vt_shift: f64,
}

impl CornerFactors {
    pub fn tt() -> Self {
        CornerFactors {
            name: "TT".into(),
            gm_scale: 1.0,
            cgs_scale: 1.0,
            vt_shift: 0.0,
        }
    }

    pub fn ff() -> Self {
        CornerFactors {
            name: "FF".into(),
            gm_scale: 1.15,
            cgs_scale: 0.95,
            vt_shift: -0.030,
        }
    }

    pub fn ss() -> Self {
        CornerFactors {
            name: "SS".into(),
            gm_scale: 0.87,
            cgs_scale: 1.05,
            vt_shift: 0.030,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gm_scale.is_finite() && self.gm_scale > 0.0 && self.cgs_scale.is_finite() && self.cgs_scale > 0.0) {
            return Err(Error::param(
                "corner",
                format!("scales of `{}` must be positive", self.name),
            ));
        }
        if !self.vt_shift.is_finite() {
            return Err(Error::param("corner", "vt_shift must be finite"));
        }
        Ok(())
    }
}

impl Default for CornerFactors {
    fn default() -> Self {
        Self::tt()
    }
}

impl FromStr for CornerFactors {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "TT" => Ok(Self::tt()),
            "FF" => Ok(Self::ff()),
            "SS" => Ok(Self::ss()),
            other => Err(format!("unknown corner `{other}` (expected TT, FF or SS)")),
        }
    }
}

impl fmt::Display for CornerFactors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// One frequency point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub frequency: f64,
    pub s: TwoPort,
    pub nf_db: f64,
}

impl SweepRow {
    pub fn s21_db(&self) -> f64 {
        db20(self.s.get(1, 0).norm())
    }

    pub fn s11_db(&self) -> f64 {
        db20(self.s.get(0, 0).norm())
    }
}

fn db20(mag: f64) -> f64 {
    20.0 * mag.max(f64::MIN_POSITIVE).log10()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn frequencies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.frequency).collect()
    }

    /// S21 phase in degrees, unwrapped along the table.
    pub fn unwrapped_phase_deg(&self) -> Vec<f64> {
        unwrap_deg(self.rows.iter().map(|r| r.s.get(1, 0).arg().to_degrees()))
    }

    /// Unwrapped S21 phase interpolated at `frequency`.
    pub fn phase_deg_at(&self, frequency: f64) -> f64 {
        interp(&self.frequencies(), &self.unwrapped_phase_deg(), frequency)
    }
}

fn unwrap_deg(phases: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for p in phases {
        match out.last() {
            None => out.push(p),
            Some(&prev) => {
                let mut d = p - prev;
                d -= 360.0 * (d / 360.0).round();
                out.push(prev + d);
            }
        }
    }
    out
}

/// Linear interpolation; clamps outside the table.
fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|v| *v <= x).min(n - 1);
    let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
    if x1 == x0 {
        return y0;
    }
    y0 + (x - x0) / (x1 - x0) * (y1 - y0)
}

/// Sweeps S-parameters (referenced to `p.rs`) and noise figure of a prepared
/// netlist. Grid points are solved in parallel; rows come back in grid order.
pub fn sweep_netlist(
    netlist: &Netlist,
    frequencies: &[f64],
    z0: f64,
    noise_output: Option<&NoiseOutput>,
) -> Result<SweepTable> {
    let ac = AcAnalysis::new(netlist)?;
    let noise = noise_output
        .map(|o| NoiseAnalysis::new(netlist, o.clone()))
        .transpose()?;
    let rows = frequencies
        .par_iter()
        .map(|&f| {
            let row = (|| {
                let s = ac.port_parameters(f, ParamKind::S, z0)?;
                let nf_db = match &noise {
                    Some(n) => n.report(f)?.noise_figure_db,
                    None => f64::NAN,
                };
                Ok(SweepRow { frequency: f, s, nf_db })
            })();
            row.map_err(|e: Error| e.at_frequency(f))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { rows })
}

/// S-parameters and noise figure of the two-stage model at `vctrl` over
/// `grid`. Noise is referred to the short-circuit output current.
pub fn frequency_sweep(p: &DesignParams, vctrl: f64, grid: &FrequencyGrid) -> Result<SweepTable> {
    frequency_sweep_with(p, vctrl, grid, &ModelOptions::default())
}

pub fn frequency_sweep_with(
    p: &DesignParams,
    vctrl: f64,
    grid: &FrequencyGrid,
    opts: &ModelOptions,
) -> Result<SweepTable> {
    let netlist = build_two_stage_model_with(p, vctrl, opts)?;
    let output = NoiseOutput::short_circuit("out2");
    sweep_netlist(
        &netlist,
        &grid.frequencies(),
        p.rs.max(f64::MIN_POSITIVE),
        Some(&output),
    )
}

/// A frequency band; a clipped edge stopped at the end of the table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub low_hz: f64,
    pub high_hz: f64,
    pub low_clipped: bool,
    pub high_clipped: bool,
}

impl Band {
    pub fn width_hz(&self) -> f64 {
        self.high_hz - self.low_hz
    }

    pub fn clipped(&self) -> bool {
        self.low_clipped || self.high_clipped
    }
}

/// Scalar figures extracted from a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetrics {
    /// Frequency of peak |S21|.
    pub f0_hz: f64,
    pub peak_gain_db: f64,
    /// Band where |S21| is within 3 dB of the peak.
    pub bw_3db: Band,
    pub bw_3db_hz: f64,
    pub s11_min_db: f64,
    pub s11_min_hz: f64,
    /// Widest contiguous band with S11 below -10 dB around the S11 minimum.
    pub matching_band: Option<Band>,
    pub nf_at_f0_db: f64,
    pub phase_at_f0_deg: f64,
    pub fom_db: Option<f64>,
}

impl SweepMetrics {
    pub fn matching_band_hz(&self) -> f64 {
        self.matching_band.map_or(0.0, |b| b.width_hz())
    }

    /// Figure of merit from these metrics plus externally supplied linearity
    /// and DC power.
    pub fn fom_inputs(&self, iip3_dbm: f64, pdc_mw: f64) -> FomInputs {
        FomInputs {
            gain_db: self.peak_gain_db,
            bw_3db_ghz: self.bw_3db_hz / 1e9,
            f0_ghz: self.f0_hz / 1e9,
            iip3_dbm,
            nf_db: self.nf_at_f0_db,
            pdc_mw,
        }
    }

    pub fn with_fom(mut self, iip3_dbm: f64, pdc_mw: f64) -> Result<Self> {
        self.fom_db = Some(fom(&self.fom_inputs(iip3_dbm, pdc_mw))?);
        Ok(self)
    }
}

/// Vertex of the parabola through three points, as `(x, y)`.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<(f64, f64)> {
    let (x1, x3) = (x[0] - x[1], x[2] - x[1]);
    let (d1, d3) = ((y[0] - y[1]) / x1, (y[2] - y[1]) / x3);
    let a = (d3 - d1) / (x3 - x1);
    if !(a.is_finite() && a != 0.0) {
        return None;
    }
    let b = d3 - a * x3;
    let xv = (-b / (2.0 * a)).clamp(x1, x3);
    let yv = y[1] + b * xv + a * xv * xv;
    Some((x[1] + xv, yv))
}

/// Walks away from `start` until `inside` fails, returning the interpolated
/// crossing of `level` or the table end (clipped).
fn edge(fs: &[f64], ys: &[f64], start: usize, level: f64, step: isize, inside: impl Fn(f64) -> bool) -> (f64, bool) {
    let mut i = start as isize;
    loop {
        let next = i + step;
        if next < 0 || next as usize >= fs.len() {
            return (fs[i as usize], true);
        }
        let (a, b) = (i as usize, next as usize);
        if !inside(ys[b]) {
            let t = if ys[b] == ys[a] {
                0.0
            } else {
                (level - ys[a]) / (ys[b] - ys[a])
            };
            return (fs[a] + t.clamp(0.0, 1.0) * (fs[b] - fs[a]), false);
        }
        i = next;
    }
}

/// Extracts peak gain, centre frequency, bandwidths, input match, noise
/// figure and phase at the centre frequency from a frequency-sorted table.
///
/// The peak is refined by a parabola through the three samples around the
/// maximum (in dB); band edges are linear crossings between samples. Rows
/// repeating a frequency are ignored after the first.
pub fn extract_metrics(table: &SweepTable) -> Result<SweepMetrics> {
    if table.rows.is_empty() {
        return Err(Error::Metrics("table is empty".into()));
    }
    if table.rows.windows(2).any(|w| !(w[1].frequency >= w[0].frequency)) {
        return Err(Error::Metrics("table is not sorted by frequency".into()));
    }
    if table.rows.iter().any(|r| r.s.ports() != 2) {
        return Err(Error::Metrics("metrics need two-port rows".into()));
    }
    let mut rows: Vec<&SweepRow> = Vec::with_capacity(table.rows.len());
    for r in &table.rows {
        if rows.last().is_none_or(|l| l.frequency != r.frequency) {
            rows.push(r);
        }
    }
    let fs: Vec<f64> = rows.iter().map(|r| r.frequency).collect();
    let gain: Vec<f64> = rows.iter().map(|r| r.s21_db()).collect();
    let s11: Vec<f64> = rows.iter().map(|r| r.s11_db()).collect();
    let nf: Vec<f64> = rows.iter().map(|r| r.nf_db).collect();
    let phase = unwrap_deg(rows.iter().map(|r| r.s.get(1, 0).arg().to_degrees()));
    let n = fs.len();

    let imax = (0..n).fold(0, |best, i| if gain[i] > gain[best] { i } else { best });
    let (f0_hz, peak_gain_db) = if imax > 0 && imax + 1 < n {
        parabola_vertex(
            [fs[imax - 1], fs[imax], fs[imax + 1]],
            [gain[imax - 1], gain[imax], gain[imax + 1]],
        )
        .filter(|(_, y)| *y >= gain[imax])
        .unwrap_or((fs[imax], gain[imax]))
    } else {
        (fs[imax], gain[imax])
    };

    let level = peak_gain_db - 3.0;
    let above = |y: f64| y >= level;
    let (low_hz, low_clipped) = edge(&fs, &gain, imax, level, -1, above);
    let (high_hz, high_clipped) = edge(&fs, &gain, imax, level, 1, above);
    let bw_3db = Band {
        low_hz,
        high_hz,
        low_clipped,
        high_clipped,
    };

    let imin = (0..n).fold(0, |best, i| if s11[i] < s11[best] { i } else { best });
    let matching_band = (s11[imin] < -10.0).then(|| {
        let below = |y: f64| y < -10.0;
        let (low_hz, low_clipped) = edge(&fs, &s11, imin, -10.0, -1, below);
        let (high_hz, high_clipped) = edge(&fs, &s11, imin, -10.0, 1, below);
        Band {
            low_hz,
            high_hz,
            low_clipped,
            high_clipped,
        }
    });

    Ok(SweepMetrics {
        f0_hz,
        peak_gain_db,
        bw_3db,
        bw_3db_hz: bw_3db.width_hz(),
        s11_min_db: s11[imin],
        s11_min_hz: fs[imin],
        matching_band,
        nf_at_f0_db: interp(&fs, &nf, f0_hz),
        phase_at_f0_deg: interp(&fs, &phase, f0_hz),
        fom_db: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VctrlEntry {
    pub vctrl: f64,
    pub metrics: SweepMetrics,
    /// `|phase(vctrl) - phase(first vctrl)|` of S21 at the sweep's
    /// phase reference frequency, degrees.
    pub phase_deviation_deg: f64,
    pub table: SweepTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VctrlSweep {
    pub entries: Vec<VctrlEntry>,
    /// Centre frequency of the first entry; phase deviations are read here.
    pub phase_ref_hz: f64,
    pub peak_gain_spread_db: f64,
    pub f0_spread_hz: f64,
}

/// One frequency sweep and metric extraction per control voltage.
pub fn vctrl_sweep(p: &DesignParams, vgrid: &[f64], fgrid: &FrequencyGrid) -> Result<VctrlSweep> {
    if vgrid.is_empty() {
        return Err(Error::param("vctrl", "at least one control voltage is required"));
    }
    if let Some(v) = vgrid.iter().find(|v| !(0.0..=VCTRL_MAX).contains(*v)) {
        return Err(Error::param(
            "vctrl",
            format!("must lie in [0, {VCTRL_MAX}] V, got {v}"),
        ));
    }
    let swept = vgrid
        .par_iter()
        .map(|&v| {
            let table = frequency_sweep(p, v, fgrid)?;
            let metrics = extract_metrics(&table)?;
            Ok((v, metrics, table))
        })
        .collect::<Result<Vec<_>>>()?;

    let phase_ref_hz = swept[0].1.f0_hz;
    let ref_phase = swept[0].2.phase_deg_at(phase_ref_hz);
    let entries: Vec<VctrlEntry> = swept
        .into_iter()
        .map(|(vctrl, metrics, table)| VctrlEntry {
            vctrl,
            phase_deviation_deg: (table.phase_deg_at(phase_ref_hz) - ref_phase).abs(),
            metrics,
            table,
        })
        .collect();
    let spread = |f: &dyn Fn(&SweepMetrics) -> f64| {
        let vals: Vec<f64> = entries.iter().map(|e| f(&e.metrics)).collect();
        vals.iter().cloned().fold(f64::MIN, f64::max) - vals.iter().cloned().fold(f64::MAX, f64::min)
    };
    Ok(VctrlSweep {
        peak_gain_spread_db: spread(&|m| m.peak_gain_db),
        f0_spread_hz: spread(&|m| m.f0_hz),
        phase_ref_hz,
        entries,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CornerEntry {
    pub corner: CornerFactors,
    pub metrics: SweepMetrics,
}

/// Sweeps the design at each process corner (replacing `p.corner`).
pub fn corner_sweep(
    p: &DesignParams,
    corners: &[CornerFactors],
    fgrid: &FrequencyGrid,
    vctrl: f64,
) -> Result<Vec<CornerEntry>> {
    corners
        .par_iter()
        .map(|c| {
            c.validate()?;
            let mut pc = p.clone();
            pc.corner = c.clone();
            let metrics = extract_metrics(&frequency_sweep(&pc, vctrl, fgrid)?)?;
            Ok(CornerEntry {
                corner: c.clone(),
                metrics,
            })
        })
        .collect()
}
