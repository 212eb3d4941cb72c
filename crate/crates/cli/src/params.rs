//! Design parameter files.
//!
//! ```json
//! {
//!   "design": { "gm1": 0.02, "k": 0.3 },
//!   "match_at_hz": 40e9,
//!   "linearity": { "pdc_mw": 4.5, "iip3": [{ "vctrl": 0.0, "iip3_dbm": -7.8 }] }
//! }
//! ```
//!
//! Omitted design fields take reference values. With `match_at_hz`, Lg and Ls
//! are resynthesized for that frequency. `linearity` enables the FoM column.

use std::path::Path;

use rfss_core::netlist::DesignParams;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::diag::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    #[serde(default)]
    pub design: DesignParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub match_at_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linearity: Option<Linearity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linearity {
    pub pdc_mw: f64,
    pub iip3: Vec<Iip3Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Iip3Point {
    pub vctrl: f64,
    pub iip3_dbm: f64,
}

impl Linearity {
    /// IIP3 at `vctrl`, linear in vctrl between the given points and held
    /// constant beyond them.
    pub fn iip3_at(&self, vctrl: f64) -> f64 {
        let mut pts = self.iip3.clone();
        pts.sort_by(|a, b| a.vctrl.total_cmp(&b.vctrl));
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if vctrl <= first.vctrl {
            return first.iip3_dbm;
        }
        if vctrl >= last.vctrl {
            return last.iip3_dbm;
        }
        let i = pts.partition_point(|p| p.vctrl <= vctrl);
        let (a, b) = (pts[i - 1], pts[i]);
        a.iip3_dbm + (vctrl - a.vctrl) / (b.vctrl - a.vctrl) * (b.iip3_dbm - a.iip3_dbm)
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.pdc_mw.is_finite() && self.pdc_mw > 0.0) {
            return Err(format!("pdc_mw must be positive, got {}", self.pdc_mw));
        }
        if self.iip3.is_empty() {
            return Err("iip3 needs at least one point".into());
        }
        if self
            .iip3
            .iter()
            .any(|p| !(p.vctrl.is_finite() && p.iip3_dbm.is_finite()))
        {
            return Err("iip3 points must be finite".into());
        }
        Ok(())
    }
}

/// A loaded and validated parameter file.
#[derive(Debug, Clone)]
pub struct LoadedParams {
    pub design: DesignParams,
    /// Frequency the input match is checked (and, if requested, synthesized) at.
    pub match_f0: f64,
    pub linearity: Option<Linearity>,
}

pub fn parse(path: &str, text: &str) -> Result<LoadedParams, CliError> {
    let file: ParamsFile = serde_json::from_str(text).map_err(|e| CliError::json(path, text, &e))?;
    let mut design = file.design;
    let match_f0 = file.match_at_hz.unwrap_or(DesignParams::REFERENCE_F0);
    if !(match_f0.is_finite() && match_f0 > 0.0) {
        return Err(CliError::input(
            "invalid-parameter",
            format!("match_at_hz must be positive, got {match_f0}"),
            json!({ "path": path, "parameter": "match_at_hz" }),
        ));
    }
    if file.match_at_hz.is_some() {
        design = design.rematched(match_f0).map_err(CliError::from)?;
    }
    design.validate().map_err(CliError::from)?;
    if let Some(l) = &file.linearity {
        l.validate().map_err(|m| {
            CliError::input(
                "invalid-parameter",
                m,
                json!({ "path": path, "parameter": "linearity" }),
            )
        })?;
    }
    Ok(LoadedParams {
        design,
        match_f0,
        linearity: file.linearity,
    })
}

pub fn load(path: &Path) -> Result<LoadedParams, CliError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(&name, &e))?;
    parse(&name, &text)
}
