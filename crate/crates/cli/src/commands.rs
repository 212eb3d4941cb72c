use std::io::Write;
use std::path::{Path, PathBuf};

use rfss_core::lna::{self, dc_block_check, fom, match_residuals, FomInputs, DC_BLOCK_RATIO, VCTRL_MAX};
use rfss_core::mna::{convert, ParamKind};
use rfss_core::netlist::{ensure_valid, Netlist};
use rfss_core::noise::NoiseOutput;
use rfss_core::sweep::{frequency_sweep, sweep_netlist, vctrl_sweep, CornerFactors, SweepMetrics, SweepTable};
use serde_json::{json, Value};

use crate::args::{AnalyzeArgs, FomArgs, MatchArgs, ReportArgs, SweepArgs};
use crate::diag::CliError;
use crate::params::{self, LoadedParams};
use crate::touchstone;

/// Column order of the metrics CSV. `fom_db` is appended only when
/// linearity inputs are present.
pub const METRICS_COLUMNS: [&str; 16] = [
    "corner",
    "vctrl",
    "f0_hz",
    "peak_gain_db",
    "bw_3db_low_hz",
    "bw_3db_high_hz",
    "bw_3db_hz",
    "bw_3db_clipped",
    "s11_min_db",
    "s11_min_hz",
    "matching_band_low_hz",
    "matching_band_high_hz",
    "matching_band_hz",
    "nf_at_f0_db",
    "phase_at_f0_deg",
    "phase_deviation_deg",
];

/// Column order of the sweep CSV.
pub const SWEEP_COLUMNS: [&str; 9] = [
    "corner",
    "vctrl",
    "frequency_hz",
    "s11_db",
    "s21_db",
    "s12_db",
    "s22_db",
    "s21_phase_deg",
    "nf_db",
];

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(&path.display().to_string(), &e)
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::input("io", e.to_string(), json!({ "path": path.display().to_string() }))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

fn report_written(out: &mut dyn Write, paths: &[PathBuf]) -> Result<(), CliError> {
    for p in paths {
        writeln!(out, "{}", p.display()).map_err(|e| CliError::io("<stdout>", &e))?;
    }
    Ok(())
}

fn check_vctrl(list: &[f64]) -> Result<(), CliError> {
    if list.is_empty() {
        return Err(CliError::input(
            "invalid-argument",
            "--vctrl needs at least one value",
            json!({}),
        ));
    }
    if let Some(v) = list.iter().find(|v| !(0.0..=VCTRL_MAX).contains(*v)) {
        return Err(CliError::input(
            "invalid-argument",
            format!("control voltage {v} outside [0, {VCTRL_MAX}] V"),
            json!({ "vctrl": v }),
        ));
    }
    Ok(())
}

fn check_z0(z0: f64) -> Result<(), CliError> {
    if z0.is_finite() && z0 > 0.0 {
        Ok(())
    } else {
        Err(CliError::input(
            "invalid-argument",
            format!("--z0 must be positive, got {z0}"),
            json!({ "z0": z0 }),
        ))
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn db20(x: f64) -> f64 {
    20.0 * x.max(f64::MIN_POSITIVE).log10()
}

pub fn analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let path = a.input.display().to_string();
    let text = std::fs::read_to_string(&a.input).map_err(|e| CliError::io(&path, &e))?;
    let netlist = Netlist::from_json(&text).map_err(|e| CliError::json(&path, &text, &e))?;
    ensure_valid(&netlist)?;
    check_z0(a.z0)?;
    if netlist.ports().len() != 2 {
        return Err(CliError::input(
            "port-count",
            format!(
                "analyze needs a two-port netlist, found {} ports",
                netlist.ports().len()
            ),
            json!({ "path": path, "ports": netlist.ports().len() }),
        ));
    }
    let grid = a.grid.grid()?;
    let noisy = netlist.noise_sources().iter().any(|s| s.input);
    let noise_out = noisy.then(|| NoiseOutput::short_circuit(&netlist.ports()[1].node));
    let table = sweep_netlist(&netlist, &grid.frequencies(), a.z0, noise_out.as_ref())?;

    let prefix = a.output.with_extension("");
    let s2p = with_suffix(&prefix, ".s2p");
    let rows: Vec<touchstone::Row> = table.rows.iter().map(|r| (r.frequency, r.s.clone())).collect();
    touchstone::write(&s2p, &rows, a.z0)?;
    let mut written = vec![s2p];
    if noisy {
        let nf = with_suffix(&prefix, "_nf.csv");
        let body: Vec<Vec<String>> = table
            .rows
            .iter()
            .map(|r| vec![num(r.frequency), num(r.nf_db)])
            .collect();
        write_csv(&nf, &["frequency_hz", "nf_db"], &body)?;
        written.push(nf);
    }
    report_written(out, &written)
}

fn case_tables(
    p: &LoadedParams,
    corners: &[CornerFactors],
    vctrl: &[f64],
    grid: &rfss_core::sweep::FrequencyGrid,
) -> Result<Vec<(CornerFactors, f64, SweepTable)>, CliError> {
    let mut cases = Vec::new();
    for c in corners {
        let mut d = p.design.clone();
        d.corner = c.clone();
        for &v in vctrl {
            cases.push((c.clone(), v, frequency_sweep(&d, v, grid)?));
        }
    }
    Ok(cases)
}

pub fn sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let p = params::load(&a.input)?;
    check_vctrl(&a.vctrl)?;
    let z0 = a.z0.unwrap_or(p.design.rs);
    check_z0(z0)?;
    let grid = a.grid.grid()?;
    let cases = case_tables(&p, &a.corners, &a.vctrl, &grid)?;

    let prefix = a.output.with_extension("");
    let mut written = Vec::new();
    let mut csv_rows = Vec::new();
    for (corner, v, table) in &cases {
        let mut rows = Vec::with_capacity(table.rows.len());
        for r in &table.rows {
            let s = if z0 == r.s.z0 {
                r.s.clone()
            } else {
                convert(&r.s, ParamKind::S, z0)?
            };
            let phase = s.get(1, 0).arg().to_degrees();
            csv_rows.push(vec![
                corner.name.clone(),
                num(*v),
                num(r.frequency),
                num(db20(s.get(0, 0).norm())),
                num(db20(s.get(1, 0).norm())),
                num(db20(s.get(0, 1).norm())),
                num(db20(s.get(1, 1).norm())),
                num(phase),
                num(r.nf_db),
            ]);
            rows.push((r.frequency, s));
        }
        let path = with_suffix(&prefix, &format!("_{}_v{:.3}.s2p", corner.name, v));
        touchstone::write(&path, &rows, z0)?;
        written.push(path);
    }
    let csv_path = with_suffix(&prefix, "_sweep.csv");
    write_csv(&csv_path, &SWEEP_COLUMNS, &csv_rows)?;
    written.push(csv_path);
    report_written(out, &written)
}

fn metrics_record(corner: &str, vctrl: f64, m: &SweepMetrics, deviation: f64, with_fom: bool) -> Vec<String> {
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    let mut r = vec![
        corner.to_string(),
        num(vctrl),
        num(m.f0_hz),
        num(m.peak_gain_db),
        num(m.bw_3db.low_hz),
        num(m.bw_3db.high_hz),
        num(m.bw_3db_hz),
        m.bw_3db.clipped().to_string(),
        num(m.s11_min_db),
        num(m.s11_min_hz),
        opt(m.matching_band.map(|b| b.low_hz)),
        opt(m.matching_band.map(|b| b.high_hz)),
        num(m.matching_band_hz()),
        num(m.nf_at_f0_db),
        num(m.phase_at_f0_deg),
        num(deviation),
    ];
    if with_fom {
        r.push(opt(m.fom_db));
    }
    r
}

pub fn report(a: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let p = params::load(&a.input)?;
    check_vctrl(&a.vctrl)?;
    let grid = a.grid.grid()?;
    let d = &p.design;

    let ro_vg_min = lna::ro_vg(VCTRL_MAX, &d.effective().vg_device)?;
    let dc = dc_block_check(d.c0, ro_vg_min, p.match_f0);
    let res = match_residuals(d.gm1, d.cgs, d.k, p.match_f0, d.rs, d.lg, d.ls);

    let with_fom = p.linearity.is_some();
    let mut records = Vec::new();
    let mut rows_json = Vec::new();
    let mut spreads = Vec::new();
    for c in &a.corners {
        let mut dc_design = d.clone();
        dc_design.corner = c.clone();
        let vs = vctrl_sweep(&dc_design, &a.vctrl, &grid)?;
        for e in &vs.entries {
            let mut m = e.metrics.clone();
            if let Some(l) = &p.linearity {
                m = m.with_fom(l.iip3_at(e.vctrl), l.pdc_mw)?;
            }
            records.push(metrics_record(&c.name, e.vctrl, &m, e.phase_deviation_deg, with_fom));
            let mut row = serde_json::to_value(&m).expect("metrics serialize");
            row["corner"] = json!(c.name);
            row["vctrl"] = json!(e.vctrl);
            row["phase_deviation_deg"] = json!(e.phase_deviation_deg);
            if !with_fom {
                row.as_object_mut().expect("object").remove("fom_db");
            }
            rows_json.push(row);
        }
        spreads.push(json!({
            "corner": c.name,
            "peak_gain_spread_db": vs.peak_gain_spread_db,
            "f0_spread_hz": vs.f0_spread_hz,
            "phase_ref_hz": vs.phase_ref_hz,
        }));
    }

    let mut header: Vec<&str> = METRICS_COLUMNS.to_vec();
    if with_fom {
        header.push("fom_db");
    }
    let prefix = a.output.with_extension("");
    let csv_path = with_suffix(&prefix, "_metrics.csv");
    write_csv(&csv_path, &header, &records)?;

    let report = json!({
        "design": d,
        "match": {
            "f0_hz": p.match_f0,
            "lg_h": d.lg,
            "ls_h": d.ls,
            "residuals": res,
        },
        "dc_block_check": {
            "c0_f": d.c0,
            "ro_vg_min_ohm": ro_vg_min,
            "f0_hz": p.match_f0,
            "threshold": DC_BLOCK_RATIO,
            "corner_hz": dc.corner_hz,
            "ratio": dc.ratio,
            "pass": dc.pass,
        },
        "grid": grid,
        "linearity": p.linearity,
        "columns": header,
        "rows": rows_json,
        "spread": spreads,
    });
    let json_path = with_suffix(&prefix, "_report.json");
    write_json(&json_path, &report)?;
    report_written(out, &[csv_path, json_path])
}

pub fn design_match(a: &MatchArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let base = match &a.input {
        Some(path) => params::load(path)?,
        None => params::parse("<default>", "{}")?,
    };
    let d = &base.design;
    let gm1 = a.gm1.unwrap_or(d.gm1);
    let cgs = a.cgs.unwrap_or(d.cgs);
    let k = a.k.unwrap_or(d.k);
    let f0 = a.f0.unwrap_or(base.match_f0);
    let rs = a.rs.unwrap_or(d.rs);
    let (lg, ls) = lna::design_input_match(gm1, cgs, k, f0, rs).map_err(|e| {
        let mut err = CliError::from(e);
        err.context = json!({ "gm1": gm1, "cgs": cgs, "k": k, "f0_hz": f0, "rs": rs });
        err
    })?;
    let res = match_residuals(gm1, cgs, k, f0, rs, lg, ls);
    let value = json!({
        "inputs": { "gm1": gm1, "cgs": cgs, "k": k, "f0_hz": f0, "rs": rs },
        "lg_h": lg,
        "ls_h": ls,
        "mutual_h": k * (lg * ls).sqrt(),
        "residuals": res,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json")).map_err(|e| CliError::io("<stdout>", &e))
}

const FOM_EXPLANATION: &str = "\
FoM = 20 log10( G * BW * f0 * IIP3 / ((F - 1) * PDC) )
  G    = 10^(gain_dB / 10)   gain as a power ratio
  BW   = 3-dB bandwidth in GHz, f0 = centre frequency in GHz
  IIP3 = 10^(iip3_dBm / 10)  in mW
  F    = 10^(NF_dB / 10)
  PDC  = DC power in mW
Published comparison (two-stage variable-gain LNA, highest/lowest gain):
  lowest gain  (15 dB, 9.8 GHz, 39.75 GHz, +1.2 dBm, 5.5 dB, 4.5 mW): 63.02 computed, 63.02 published
  highest gain (21 dB, 6.8 GHz, 40.5 GHz, -7.8 dBm, 2.8 dB, 4.5 mW): 63.00 computed, 63.15 published
The 0.15 dB gap on the highest-gain row is not closed by any convention;
it is attributed to rounding of the published inputs. Taking the gain as a
voltage ratio (10^(dB/20)) lowers every result by gain_dB and reproduces
neither row.";

pub fn fom_cmd(a: &FomArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let inputs = FomInputs {
        gain_db: a.gain_db,
        bw_3db_ghz: a.bw_ghz,
        f0_ghz: a.f0_ghz,
        iip3_dbm: a.iip3_dbm,
        nf_db: a.nf_db,
        pdc_mw: a.pdc_mw,
    };
    let value = fom(&inputs)?;
    // Keep tiny negative results from printing as "-0.00".
    let value = if format!("{value:.2}") == "-0.00" { 0.0 } else { value };
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(|e| CliError::io("<stdout>", &e));
    w(out, format!("{value:.2}"))?;
    if a.explain {
        w(out, FOM_EXPLANATION.to_string())?;
        w(
            out,
            format!(
                "this input: {value:.2} (power-ratio gain), {:.2} (voltage-ratio gain)",
                value - a.gain_db
            ),
        )?;
    }
    Ok(())
}
