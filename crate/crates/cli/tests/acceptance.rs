//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfss_core::lna::{
    design_input_match, input_impedance_cf, m1_noise_transfer_cf, match_residuals, noise_factor_cf,
    noise_factor_dc_limit, ro_vg, stage_gain_cf, threshold_voltage, BodyBiasParams,
};
use rfss_core::mna::{convert, port_parameters, solve_ac, ParamKind};
use rfss_core::netlist::{
    build_first_stage_model_with, build_gain_model, build_two_stage_model, DesignParams, ModelOptions, Netlist,
    PsdModel, GROUND,
};
use rfss_core::noise::{output_noise, NoiseAnalysis, NoiseOutput, T0};
use rfss_core::sweep::{corner_sweep, frequency_sweep, CornerFactors, FrequencyGrid};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn log_uniform(r: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo * (hi / lo).powf(r.gen::<f64>())
}

fn log_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| start * (stop / start).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn run_fom(args: &[&str]) -> Result<(f64, Duration), String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_rfss"))
        .arg("fom")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let text = String::from_utf8_lossy(&out.stdout);
    let v = text.trim().parse::<f64>().map_err(|e| format!("{e}: {text}"))?;
    Ok((v, elapsed))
}

fn fom_reproduction() -> Outcome {
    let (low, t1) = run_fom(&[
        "--gain-db",
        "15",
        "--bw-ghz",
        "9.8",
        "--f0-ghz",
        "39.75",
        "--iip3-dbm",
        "1.2",
        "--nf-db",
        "5.5",
        "--pdc-mw",
        "4.5",
    ])?;
    let (high, t2) = run_fom(&[
        "--gain-db",
        "21",
        "--bw-ghz",
        "6.8",
        "--f0-ghz",
        "40.5",
        "--iip3-dbm",
        "-7.8",
        "--nf-db",
        "2.8",
        "--pdc-mw",
        "4.5",
    ])?;
    let slowest = t1.max(t2);
    ensure(
        (low - 63.02).abs() <= 0.10 && (high - 63.15).abs() <= 0.50 && slowest < Duration::from_secs(1),
        format!("lowest gain {low:.2} dB (want 63.02 +/- 0.10), highest gain {high:.2} dB (want 63.15 +/- 0.50), slowest run {slowest:?}"),
    )
}

fn random_params(r: &mut impl Rng) -> DesignParams {
    DesignParams {
        gm1: log_uniform(r, 5e-3, 60e-3),
        gm2: log_uniform(r, 5e-3, 60e-3),
        cgs: log_uniform(r, 5e-15, 100e-15),
        lg: log_uniform(r, 50e-12, 2e-9),
        ls: log_uniform(r, 5e-12, 300e-12),
        k: r.gen_range(0.0..0.8),
        c0: log_uniform(r, 0.1e-12, 5e-12),
        ro1: log_uniform(r, 300.0, 10e3),
        ro2: log_uniform(r, 300.0, 10e3),
        rs: r.gen_range(25.0..100.0),
        gamma_noise: r.gen_range(0.67..2.5),
        eta: r.gen_range(0.5..1.5),
        temperature: r.gen_range(250.0..400.0),
        ..DesignParams::reference()
    }
}

fn closed_form_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(0x5eed);
    let freqs = log_grid(1e9, 100e9, 200);
    let (mut zin, mut h, mut f, mut gain) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let p = random_params(&mut r);
        let n = build_first_stage_model_with(&p, 1e3, &ModelOptions::m1_only()).map_err(|e| e.to_string())?;
        let noise = NoiseAnalysis::new(&n, NoiseOutput::short_circuit("d1")).map_err(|e| e.to_string())?;
        for &fr in &freqs {
            let z = port_parameters(&n, fr, ParamKind::Z, p.rs)
                .map_err(|e| e.to_string())?
                .get(0, 0);
            zin = zin.max(rel(z, input_impedance_cf(&p, fr)));
            let hn = noise.transfer("n_cs1", fr).map_err(|e| e.to_string())?.norm_sqr();
            let hc = m1_noise_transfer_cf(&p, fr);
            h = h.max((hn - hc).abs() / hc);
            let fnum = noise.report(fr).map_err(|e| e.to_string())?.noise_factor;
            let fc = noise_factor_cf(&p, fr);
            f = f.max((fnum - fc).abs() / fc);
        }
        let f0 = p.resonance_frequency();
        for rv in [45.0, 500.0, 5e5] {
            let g = build_gain_model(&p, rv).map_err(|e| e.to_string())?;
            let v = solve_ac(&g, f0, "vin")
                .map_err(|e| e.to_string())?
                .voltage("out1")
                .unwrap();
            gain = gain.max(rel(-v, stage_gain_cf(&p, rv, f0)));
        }
    }
    let elapsed = start.elapsed();
    ensure(
        zin < 1e-9 && h < 1e-6 && f < 1e-6 && gain < 1e-3 && elapsed < Duration::from_secs(30),
        format!(
            "max rel err: Zin {zin:.1e} (<1e-9), M1 transfer {h:.1e} (<1e-6), F {f:.1e} (<1e-6), stage gain {gain:.1e} (<1e-3); {elapsed:.1?}"
        ),
    )
}

fn matching_synthesis() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_res, mut worst_z, mut solved) = (0.0f64, 0.0f64, 0);
    while solved < 1000 {
        let gm1 = log_uniform(&mut r, 2e-3, 100e-3);
        let cgs = log_uniform(&mut r, 2e-15, 200e-15);
        let k = r.gen_range(0.0..0.95);
        let f0 = log_uniform(&mut r, 1e9, 100e9);
        let rs = 50.0;
        let w = 2.0 * PI * f0;
        // Draws with 1/(w0^2 Cgs) <= Rs Cgs / gm1 have no positive solution for any k.
        if 1.0 / (w * w * cgs) <= 1.05 * rs * cgs / gm1 {
            continue;
        }
        let (lg, ls) =
            design_input_match(gm1, cgs, k, f0, rs).map_err(|e| format!("gm1={gm1} cgs={cgs} k={k} f0={f0}: {e}"))?;
        let res = match_residuals(gm1, cgs, k, f0, rs, lg, ls);
        worst_res = worst_res.max(res[0].abs()).max(res[1].abs());
        let p = DesignParams {
            gm1,
            cgs,
            k,
            lg,
            ls,
            rs,
            ..DesignParams::reference()
        };
        let z = input_impedance_cf(&p, f0);
        worst_z = worst_z.max((z.re - rs).abs()).max(z.im.abs());
        solved += 1;
    }
    let (lg0, ls0) = design_input_match(0.02, 20e-15, 0.0, 40e9, 50.0).map_err(|e| e.to_string())?;
    let w = 2.0 * PI * 40e9;
    let ls_cf = 50.0 * 20e-15 / 0.02;
    let lg_cf = 1.0 / (w * w * 20e-15) - ls_cf;
    let exact = ls0 == ls_cf && lg0 == lg_cf;
    ensure(
        worst_res < 1e-9 && worst_z < 1e-6 && exact,
        format!(
            "1000 draws: max residual {worst_res:.1e} (<1e-9), max |Zin - Rs| {worst_z:.1e} ohm (<1e-6); k=0 closed form exact: {exact} (Lg {:.2} pH, Ls {:.2} pH)",
            lg0 * 1e12,
            ls0 * 1e12
        ),
    )
}

fn thermal(r: f64) -> PsdModel {
    PsdModel::Thermal {
        resistance: r,
        temperature: T0,
    }
}

fn noise_physics() -> Outcome {
    let mut worst = 0.0f64;
    for db in [3.0, 6.02, 10.0] {
        let k = 10f64.powf(db / 20.0);
        let (z0, r1, r2) = (50.0, 50.0 * (k - 1.0) / (k + 1.0), 100.0 * k / (k * k - 1.0));
        let n = Netlist::builder()
            .resistor("ra", "in", "mid", r1)
            .resistor("rb", "mid", "out", r1)
            .resistor("rc", "mid", GROUND, r2)
            .port("p1", "in", Some(z0))
            .port("p2", "out", Some(z0))
            .injected_noise("n_src", GROUND, "in", thermal(z0), true)
            .element_noise("n_ra", "ra", thermal(r1), false)
            .element_noise("n_rb", "rb", thermal(r1), false)
            .element_noise("n_rc", "rc", thermal(r2), false)
            .build();
        let nf = output_noise(&n, &NoiseOutput::voltage("out", GROUND), 10e9)
            .map_err(|e| e.to_string())?
            .noise_figure_db;
        worst = worst.max((nf - db).abs());
    }
    let quiet = build_two_stage_model(&DesignParams::reference(), 0.3)
        .map_err(|e| e.to_string())?
        .filter_noise_sources(|s| s.input);
    let f_quiet = output_noise(&quiet, &NoiseOutput::short_circuit("out2"), 40e9)
        .map_err(|e| e.to_string())?
        .noise_factor;
    let dc = noise_factor_dc_limit(1.0, 1.0, 0.02, 50.0);
    ensure(
        worst < 0.01 && f_quiet == 1.0 && dc == 2.0,
        format!("pad NF error {worst:.1e} dB (<0.01); F without internal sources {f_quiet}; DC-limit F {dc}"),
    )
}

fn gain_control() -> Outcome {
    let p = DesignParams::reference();
    let grid = FrequencyGrid::linear(30e9, 50e9, 201).map_err(|e| e.to_string())?;
    let vs: Vec<f64> = (0..=7).map(|i| i as f64 / 10.0).collect();
    let mut tables = Vec::new();
    for &v in &vs {
        tables.push(frequency_sweep(&p, v, &grid).map_err(|e| e.to_string())?);
    }
    let mut violations = 0;
    for i in 0..grid.points {
        for w in tables.windows(2) {
            if w[1].rows[i].s.get(1, 0).norm() > w[0].rows[i].s.get(1, 0).norm() {
                violations += 1;
            }
        }
    }
    let r = ro_vg(0.7, &p.vg_device).map_err(|e| e.to_string())?;
    ensure(
        violations == 0 && (r / 45.0 - 1.0).abs() <= 0.01,
        format!(
            "{violations} increases of |S21| over 8 vctrl x {} frequencies; ro_vg(0.7) = {r:.3} ohm",
            grid.points
        ),
    )
}

fn body_bias() -> Outcome {
    let b = BodyBiasParams::default();
    let vt = threshold_voltage(&BodyBiasParams { vt0: 0.46, ..b }, -0.55).map_err(|e| e.to_string())?;
    let vt_zero = threshold_voltage(&BodyBiasParams { vt0: 0.46, ..b }, 0.0).map_err(|e| e.to_string())?;
    ensure(
        (vt - 0.41).abs() <= 1e-3 && vt_zero == 0.46,
        format!(
            "VT(-0.55 V) = {vt:.6} V (0.41 +/- 0.001) with gamma {:.5}, phi_f {}; VT(0) = {vt_zero}",
            b.gamma_body, b.phi_f
        ),
    )
}

fn random_passive(r: &mut impl Rng) -> Netlist {
    let sections = r.gen_range(1..=4);
    let mut b = Netlist::builder().node(GROUND);
    let mut inductors: Vec<String> = Vec::new();
    for i in 0..sections {
        let (a, c) = (format!("n{i}"), format!("n{}", i + 1));
        match r.gen_range(0..3) {
            0 => b = b.resistor(&format!("rs{i}"), &a, &c, log_uniform(r, 1.0, 1e3)),
            1 => {
                b = b.inductor(&format!("ls{i}"), &a, &c, log_uniform(r, 10e-12, 5e-9));
                inductors.push(format!("ls{i}"));
            }
            _ => b = b.capacitor(&format!("cs{i}"), &a, &c, log_uniform(r, 10e-15, 5e-12)),
        }
        b = b.resistor(&format!("rg{i}"), &c, GROUND, log_uniform(r, 10.0, 1e4));
        if r.gen_bool(0.5) {
            b = b.capacitor(&format!("cg{i}"), &c, GROUND, log_uniform(r, 10e-15, 2e-12));
        }
        if r.gen_bool(0.4) {
            b = b.inductor(&format!("lg{i}"), &c, GROUND, log_uniform(r, 50e-12, 5e-9));
            inductors.push(format!("lg{i}"));
        }
    }
    b = b.resistor("rg_in", "n0", GROUND, log_uniform(r, 10.0, 1e4));
    if inductors.len() >= 2 {
        let k = r.gen_range(0.0..0.95);
        b = b.coupling(&inductors[0], &inductors[1], k);
    }
    b.port("p1", "n0", None)
        .port("p2", &format!("n{sections}"), None)
        .build()
}

fn network_properties() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(500);
    let (mut recip, mut sigma, mut trip) = (0.0f64, 0.0f64, 0.0f64);
    let mut skipped = 0;
    for _ in 0..500 {
        let n = random_passive(&mut r);
        let f = log_uniform(&mut r, 1e8, 100e9);
        let s = port_parameters(&n, f, ParamKind::S, 50.0).map_err(|e| e.to_string())?;
        recip = recip.max((s.get(0, 1) - s.get(1, 0)).norm());
        sigma = sigma.max(s.max_singular_value());
        let round = convert(&s, ParamKind::Z, 50.0)
            .and_then(|z| convert(&z, ParamKind::Y, 50.0))
            .and_then(|y| convert(&y, ParamKind::S, 50.0));
        match round {
            Ok(back) => trip = trip.max(s.relative_distance(&back)),
            Err(_) => skipped += 1,
        }
    }
    ensure(
        recip < 1e-9 && sigma <= 1.0 + 1e-9 && trip < 1e-9,
        format!(
            "500 netlists: max |S12 - S21| {recip:.1e}, max singular value {sigma:.12}, S->Z->Y->S error {trip:.1e} ({skipped} without Z)"
        ),
    )
}

fn corner_directions() -> Outcome {
    let grid = FrequencyGrid::linear(30e9, 50e9, 201).map_err(|e| e.to_string())?;
    let c = corner_sweep(
        &DesignParams::reference(),
        &[CornerFactors::ss(), CornerFactors::tt(), CornerFactors::ff()],
        &grid,
        0.0,
    )
    .map_err(|e| e.to_string())?;
    let (ss, tt, ff) = (&c[0].metrics, &c[1].metrics, &c[2].metrics);
    ensure(
        ss.f0_hz < tt.f0_hz
            && tt.f0_hz < ff.f0_hz
            && ss.peak_gain_db < tt.peak_gain_db
            && tt.peak_gain_db < ff.peak_gain_db,
        format!(
            "f0 SS/TT/FF {:.2}/{:.2}/{:.2} GHz, peak gain {:.2}/{:.2}/{:.2} dB",
            ss.f0_hz / 1e9,
            tt.f0_hz / 1e9,
            ff.f0_hz / 1e9,
            ss.peak_gain_db,
            tt.peak_gain_db,
            ff.peak_gain_db
        ),
    )
}

fn readme_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")
}

fn non_reproducibility_statement() -> Outcome {
    let text = std::fs::read_to_string(readme_path()).map_err(|e| format!("README.md: {e}"))?;
    let lower = text
        .replace('\u{2212}', "-")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase();
    let needles = ["-26.3 db", "2.8 db", "corner", "not reproducible"];
    let missing: Vec<&str> = needles.iter().copied().filter(|n| !lower.contains(n)).collect();
    ensure(
        missing.is_empty(),
        format!("README statement present; missing phrases: {missing:?}"),
    )
}

fn main() {
    type Check = (&'static str, fn() -> Outcome);
    let criteria: [Check; 9] = [
        ("FoM reproduction", fom_reproduction),
        ("closed-form / oracle equivalence", closed_form_equivalence),
        ("matching synthesis", matching_synthesis),
        ("noise-engine physics", noise_physics),
        ("gain control", gain_control),
        ("body-bias arithmetic", body_bias),
        ("network-theory properties", network_properties),
        ("corner directions", corner_directions),
        ("non-reproducibility statement", non_reproducibility_statement),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
