//! Closed-form expressions for the variable-gain LNA.
//!
//! Everything here is a direct evaluation on the `jω` axis with
//! `M = k·sqrt(Lg·Ls)`; the numeric engines in [`crate::mna`] and
//! [`crate::noise`] serve as independent checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::DesignParams;

/// Upper end of the gain-control voltage range, volts.
pub const VCTRL_MAX: f64 = 0.7;

/// Default minimum `f0 / corner` ratio accepted by [`dc_block_check`].
pub const DC_BLOCK_RATIO: f64 = 8.0;

fn s_of(frequency: f64) -> Complex64 {
    Complex64::new(0.0, 2.0 * PI * frequency)
}

/// Input impedance of the inductively degenerated, coupled-inductor stage:
/// `gm1 (Ls + M) / Cgs + 1 / (s Cgs) + s (Lg + Ls + 2M)`.
pub fn input_impedance_cf(p: &DesignParams, frequency: f64) -> Complex64 {
    let p = p.effective();
    let s = s_of(frequency);
    let m = p.mutual();
    p.gm1 * (p.ls + m) / p.cgs + 1.0 / (s * p.cgs) + s * (p.lg + p.ls + 2.0 * m)
}

/// Common denominator of the feedback and output-noise transfers,
/// `s² Cgs (Lg + Ls + 2M) + s (gm1 (Ls + M) + Cgs Rs) + 1`.
fn noise_denominator(p: &DesignParams, s: Complex64) -> Complex64 {
    let m = p.mutual();
    s * s * p.cgs * p.loop_inductance() + s * (p.gm1 * (p.ls + m) + p.cgs * p.rs) + 1.0
}

/// `1 + s Cgs Rs + s² Cgs (Lg + Ls + 2M)`.
fn noise_numerator(p: &DesignParams, s: Complex64) -> Complex64 {
    1.0 + s * p.cgs * p.rs + s * s * p.cgs * p.loop_inductance()
}

/// Gate-branch current per unit M1 channel-noise current, `i_g / i_n`,
/// magnitude `s² Cgs (M + Ls) / D`.
///
/// `i_n` flows drain to source inside M1; `i_g` is taken flowing from the
/// gate back towards the source port, so the feedback shows as a negative
/// real part at low frequency (about `-ω² Cgs (Ls + M)`).
pub fn feedback_noise_current_cf(p: &DesignParams, frequency: f64) -> Complex64 {
    let p = p.effective();
    let s = s_of(frequency);
    s * s * p.cgs * (p.mutual() + p.ls) / noise_denominator(&p, s)
}

/// `|I_out / I_n|²` for the M1 channel noise reaching the shorted drain.
pub fn m1_noise_transfer_cf(p: &DesignParams, frequency: f64) -> f64 {
    let p = p.effective();
    let s = s_of(frequency);
    (noise_numerator(&p, s) / noise_denominator(&p, s)).norm_sqr()
}

/// Noise factor with M1 channel noise and source-resistance noise only:
/// `1 + γ η |1 + s Cgs Rs + s² Cgs (Lg + Ls + 2M)|² / (gm1 Rs)`.
pub fn noise_factor_cf(p: &DesignParams, frequency: f64) -> f64 {
    let p = p.effective();
    let s = s_of(frequency);
    1.0 + p.eta * p.gamma_noise * noise_numerator(&p, s).norm_sqr() / (p.gm1 * p.rs)
}

/// Analytic `f -> 0` limit of [`noise_factor_cf`]: `1 + γ η / (gm1 Rs)`.
pub fn noise_factor_dc_limit(gamma: f64, eta: f64, gm1: f64, rs: f64) -> f64 {
    1.0 + gamma * eta / (gm1 * rs)
}

/// Voltage gain of the first stage with the gain-control branch:
/// `gm1 / (1 + s gm1 Ls) · [ro1 ∥ (1 + s C0 ro_vg) / (s C0)] · (1 + gm2 ro2)`.
///
/// This is the non-inverted magnitude form; the stage itself inverts.
pub fn stage_gain_cf(p: &DesignParams, ro_vg: f64, frequency: f64) -> Complex64 {
    let p = p.effective();
    let s = s_of(frequency);
    let branch = (1.0 + s * p.c0 * ro_vg) / (s * p.c0);
    let load = (branch * p.ro1) / (branch + p.ro1);
    p.gm1 / (1.0 + s * p.gm1 * p.ls) * load * (1.0 + p.gm2 * p.ro2)
}

/// Small-signal resistance of the gain-control device.
///
/// Below threshold the device sits at `r_off`; above it the triode
/// conductance `beta (vctrl - vth)` takes over. The two are combined as
/// parallel conductances with the overdrive smoothed by a softplus of width
/// `blend`, which keeps the curve smooth and non-increasing everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoVgCalibration {
    pub vth: f64,
    pub beta: f64,
    pub r_off: f64,
    pub blend: f64,
}

impl RoVgCalibration {
    /// Calibrates `beta` so that `ro_vg(v_anchor) == r_anchor` exactly.
    pub fn calibrated(vth: f64, r_off: f64, blend: f64, v_anchor: f64, r_anchor: f64) -> Result<Self> {
        let overdrive = softplus(v_anchor - vth, blend);
        let g = 1.0 / r_anchor - 1.0 / r_off;
        if !(overdrive > 0.0 && g > 0.0) {
            return Err(Error::param(
                "vg_device",
                "anchor must sit above threshold and below the off-state plateau",
            ));
        }
        Ok(RoVgCalibration {
            vth,
            beta: g / overdrive,
            r_off,
            blend,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("beta", self.beta), ("r_off", self.r_off), ("blend", self.blend)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param("vg_device", format!("{name} must be positive, got {v}")));
            }
        }
        if !self.vth.is_finite() {
            return Err(Error::param("vg_device", "vth must be finite"));
        }
        Ok(())
    }
}

impl Default for RoVgCalibration {
    /// Threshold 0.41 V (body-biased), 500 kΩ off-state, 20 mV blend,
    /// 45 Ω at 0.7 V.
    fn default() -> Self {
        Self::calibrated(0.41, 500e3, 0.020, VCTRL_MAX, 45.0).expect("default calibration")
    }
}

fn softplus(x: f64, width: f64) -> f64 {
    let t = x / width;
    if t > 30.0 {
        x
    } else {
        width * t.exp().ln_1p()
    }
}

/// `r_o,VG` at control voltage `vctrl` (0 to 0.7 V).
pub fn ro_vg(vctrl: f64, cal: &RoVgCalibration) -> Result<f64> {
    if !(vctrl.is_finite() && (0.0..=VCTRL_MAX).contains(&vctrl)) {
        return Err(Error::param(
            "vctrl",
            format!("must lie in [0, {VCTRL_MAX}] V, got {vctrl}"),
        ));
    }
    let g = cal.beta * softplus(vctrl - cal.vth, cal.blend) + 1.0 / cal.r_off;
    Ok(1.0 / g)
}

/// Body-effect parameters of an NMOS device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BodyBiasParams {
    /// Threshold at zero source-bulk voltage, volts.
    pub vt0: f64,
    /// Body-effect coefficient, √V.
    pub gamma_body: f64,
    /// Bulk Fermi potential, volts.
    pub phi_f: f64,
}

impl BodyBiasParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi_f.is_finite() && self.phi_f > 0.0) {
            return Err(Error::param("body.phi_f", "must be positive"));
        }
        if !(self.gamma_body.is_finite() && self.gamma_body >= 0.0) {
            return Err(Error::param("body.gamma_body", "must be non-negative"));
        }
        if !self.vt0.is_finite() {
            return Err(Error::param("body.vt0", "must be finite"));
        }
        Ok(())
    }
}

impl Default for BodyBiasParams {
    /// `vt0 = 0.46 V`, `phi_f = 0.40 V`, and the body coefficient that brings
    /// the threshold to 0.41 V at 0.55 V of forward body bias.
    fn default() -> Self {
        let phi_f = 0.40;
        BodyBiasParams {
            vt0: 0.46,
            gamma_body: fit_body_coefficient(0.46, -0.55, 0.41, phi_f).expect("default body-bias fit"),
            phi_f,
        }
    }
}

/// `VT = VT0 + γ (sqrt(2 φf + VSB) - sqrt(2 φf))`. Forward body bias is
/// `vsb < 0`.
pub fn threshold_voltage(b: &BodyBiasParams, vsb: f64) -> Result<f64> {
    let arg = 2.0 * b.phi_f + vsb;
    if !(arg >= 0.0) {
        return Err(Error::Domain(format!(
            "2·phi_f + vsb = {arg} V is negative; the body diode is beyond the model"
        )));
    }
    Ok(b.vt0 + b.gamma_body * (arg.sqrt() - (2.0 * b.phi_f).sqrt()))
}

/// Body coefficient that maps `vt0` to `vt_target` at `vsb` for a given
/// `phi_f`. The threshold is linear in the coefficient, so this is exact.
pub fn fit_body_coefficient(vt0: f64, vsb: f64, vt_target: f64, phi_f: f64) -> Result<f64> {
    let arg = 2.0 * phi_f + vsb;
    if !(phi_f > 0.0 && arg >= 0.0) {
        return Err(Error::Domain("body-bias fit outside the model domain".into()));
    }
    let bracket = arg.sqrt() - (2.0 * phi_f).sqrt();
    if bracket == 0.0 {
        return Err(Error::Domain("vsb = 0 leaves the body coefficient undetermined".into()));
    }
    let gamma = (vt_target - vt0) / bracket;
    if gamma < 0.0 {
        return Err(Error::Domain(format!(
            "target threshold needs a negative body coefficient ({gamma})"
        )));
    }
    Ok(gamma)
}

/// Residuals of the input match for a candidate `(lg, ls)`, both relative:
/// `gm1 (Ls + M) / (Cgs Rs) - 1` and `ω0² Cgs (Lg + Ls + 2M) - 1`.
pub fn match_residuals(gm1: f64, cgs: f64, k: f64, f0: f64, rs: f64, lg: f64, ls: f64) -> [f64; 2] {
    let m = k * (lg * ls).sqrt();
    let w0 = 2.0 * PI * f0;
    [
        gm1 * (ls + m) / (cgs * rs) - 1.0,
        w0 * w0 * cgs * (lg + ls + 2.0 * m) - 1.0,
    ]
}

/// Synthesizes `(lg, ls)` so that the input impedance is exactly `rs` at
/// `f0`: `gm1 (Ls + M) / Cgs = Rs` and `ω0² Cgs (Lg + Ls + 2M) = 1`.
///
/// Damped Newton on the two residuals, started from the uncoupled closed
/// form `Ls = Rs Cgs / gm1`, `Lg = 1 / (ω0² Cgs) - Ls`.
pub fn design_input_match(gm1: f64, cgs: f64, k: f64, f0: f64, rs: f64) -> Result<(f64, f64)> {
    for (name, v) in [("gm1", gm1), ("cgs", cgs), ("f0", f0), ("rs", rs)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::param(name, format!("must be positive, got {v}")));
        }
    }
    if !(k.is_finite() && (0.0..1.0).contains(&k)) {
        return Err(Error::param("k", format!("must lie in [0, 1), got {k}")));
    }
    let w0 = 2.0 * PI * f0;
    // Ls + M and Lg + Ls + 2M targets.
    let a = rs * cgs / gm1;
    let b = 1.0 / (w0 * w0 * cgs);
    if b <= a {
        return Err(Error::NoMatchSolution(format!(
            "the resonant inductance {b:.4e} H does not exceed the degeneration {a:.4e} H; \
             Lg would have to be non-positive"
        )));
    }
    if k == 0.0 {
        return Ok((b - a, a));
    }

    // Work in units of `a` so both unknowns are O(1).
    let beta = b / a;
    let resid = |x: [f64; 2]| {
        let (lg, ls) = (x[0], x[1]);
        let m = k * (lg * ls).sqrt();
        [ls + m - 1.0, (lg + ls + 2.0 * m) / beta - 1.0]
    };
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut x = [beta - 1.0, 1.0];
    let mut r = resid(x);
    for _ in 0..50 {
        if norm(r) < 1e-14 {
            break;
        }
        let (lg, ls) = (x[0], x[1]);
        let root = (lg * ls).sqrt();
        // dM/dLg, dM/dLs
        let dm_dlg = k * 0.5 * ls / root;
        let dm_dls = k * 0.5 * lg / root;
        let j = [
            [dm_dlg, 1.0 + dm_dls],
            [(1.0 + 2.0 * dm_dlg) / beta, (1.0 + 2.0 * dm_dls) / beta],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = [
            -(j[1][1] * r[0] - j[0][1] * r[1]) / det,
            -(-j[1][0] * r[0] + j[0][0] * r[1]) / det,
        ];
        let mut t = 1.0;
        loop {
            let cand = [x[0] + t * dx[0], x[1] + t * dx[1]];
            if cand[0] > 0.0 && cand[1] > 0.0 {
                let rc = resid(cand);
                if norm(rc) < norm(r) || t < 1e-6 {
                    x = cand;
                    r = rc;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::NoMatchSolution(
                    "Newton step could not be damped into the positive quadrant".into(),
                ));
            }
        }
    }
    let (lg, ls) = (x[0] * a, x[1] * a);
    let res = match_residuals(gm1, cgs, k, f0, rs, lg, ls);
    if !(res[0].abs() < 1e-9 && res[1].abs() < 1e-9 && lg > 0.0 && ls > 0.0) {
        return Err(Error::NoMatchSolution(format!(
            "did not converge (residuals {:.3e}, {:.3e})",
            res[0], res[1]
        )));
    }
    Ok((lg, ls))
}

/// Outcome of [`dc_block_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DcBlockCheck {
    pub corner_hz: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// Checks that the `C0`/`ro_vg` corner `1 / (2π ro_vg C0)` sits well below
/// the operating frequency (ratio at least [`DC_BLOCK_RATIO`]).
pub fn dc_block_check(c0: f64, ro_vg_min: f64, f0: f64) -> DcBlockCheck {
    dc_block_check_with(c0, ro_vg_min, f0, DC_BLOCK_RATIO)
}

pub fn dc_block_check_with(c0: f64, ro_vg_min: f64, f0: f64, threshold: f64) -> DcBlockCheck {
    let corner_hz = 1.0 / (2.0 * PI * ro_vg_min * c0);
    let ratio = f0 / corner_hz;
    DcBlockCheck {
        corner_hz,
        ratio,
        pass: ratio >= threshold,
    }
}

/// Inputs of the amplifier figure of merit. Bandwidth and centre frequency in
/// GHz, power in mW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FomInputs {
    pub gain_db: f64,
    pub bw_3db_ghz: f64,
    pub f0_ghz: f64,
    pub iip3_dbm: f64,
    pub nf_db: f64,
    pub pdc_mw: f64,
}

/// `20 log10(G · BW · f0 · IIP3 / ((F - 1) · PDC))` with the gain taken as a
/// power ratio, `G = 10^(dB/10)`, IIP3 in mW and `F = 10^(NF/10)`.
pub fn fom(inputs: &FomInputs) -> Result<f64> {
    let i = inputs;
    for (name, v) in [("bw_3db_ghz", i.bw_3db_ghz), ("f0_ghz", i.f0_ghz), ("pdc_mw", i.pdc_mw)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::param(name, format!("must be positive, got {v}")));
        }
    }
    if !(i.nf_db.is_finite() && i.nf_db > 0.0) {
        return Err(Error::param(
            "nf_db",
            format!("must be positive so that F > 1, got {}", i.nf_db),
        ));
    }
    if !(i.gain_db.is_finite() && i.iip3_dbm.is_finite()) {
        return Err(Error::param("gain_db", "gain and IIP3 must be finite"));
    }
    let gain = 10f64.powf(i.gain_db / 10.0);
    let iip3_mw = 10f64.powf(i.iip3_dbm / 10.0);
    let f = 10f64.powf(i.nf_db / 10.0);
    Ok(20.0 * (gain * i.bw_3db_ghz * i.f0_ghz * iip3_mw / ((f - 1.0) * i.pdc_mw)).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> DesignParams {
        DesignParams::reference()
    }

    #[test]
    fn impedance_is_reactive_without_degeneration() {
        let mut p = reference();
        p.k = 0.0;
        p.ls = 1e-30;
        let z = input_impedance_cf(&p, 40e9);
        assert!(z.re.abs() < 1e-12, "{z}");
    }

    #[test]
    fn impedance_resonance_cancels_reactance() {
        let p = reference();
        let z = input_impedance_cf(&p, p.resonance_frequency());
        assert!(z.im.abs() < 1e-9 * z.norm(), "{z}");
        assert!((z.re - 50.0).abs() < 1e-9);
    }

    #[test]
    fn feedback_current_limits() {
        let mut p = reference();
        let low = feedback_noise_current_cf(&p, 1e3);
        let w = 2.0 * PI * 1e3;
        let asym = -w * w * p.cgs * (p.ls + p.mutual());
        assert!(
            (low.re / asym - 1.0).abs() < 1e-6 && low.im.abs() < 1e-3 * asym.abs(),
            "{low}"
        );
        p.k = 0.0;
        p.ls = 1e-300;
        assert!(feedback_noise_current_cf(&p, 40e9).norm() < 1e-200);
    }

    #[test]
    fn m1_transfer_without_gm_is_unity() {
        let mut p = reference();
        p.gm1 = 1e-18;
        for f in [1e9, 40e9, 90e9] {
            assert!((m1_noise_transfer_cf(&p, f) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn m1_transfer_null_with_zero_source_resistance() {
        let mut p = reference();
        p.rs = 0.0;
        let h = m1_noise_transfer_cf(&p, p.resonance_frequency());
        assert!(h < 1e-24, "{h}");
    }

    #[test]
    fn noise_factor_dc_limit_arithmetic() {
        let f = noise_factor_dc_limit(1.0, 1.0, 0.02, 50.0);
        assert_eq!(f, 2.0);
        assert!((10.0 * f.log10() - 3.0103).abs() < 1e-4);
        let mut p = reference();
        p.gm1 = 0.02;
        p.rs = 50.0;
        assert!((noise_factor_cf(&p, 1e3) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn noise_factor_minimum_tracks_numerator_minimum() {
        let p = reference();
        let freqs: Vec<f64> = (1..=2000).map(|i| i as f64 * 0.05e9).collect();
        let argmin = |f: &dyn Fn(f64) -> f64| freqs.iter().copied().min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
        let s = |f: f64| {
            let s = s_of(f);
            noise_numerator(&p, s).norm_sqr()
        };
        assert_eq!(argmin(&|f| noise_factor_cf(&p, f)), argmin(&s));
    }

    #[test]
    fn stage_gain_limits() {
        let mut p = reference();
        p.ls = 1e-300;
        p.c0 = 1e6;
        let rv = 300.0;
        let g = stage_gain_cf(&p, rv, 40e9);
        let expect = p.gm1 * (p.ro1 * rv / (p.ro1 + rv)) * (1.0 + p.gm2 * p.ro2);
        assert!((g.re / expect - 1.0).abs() < 1e-9 && g.im.abs() < 1e-6 * expect);

        let p = reference();
        let s = s_of(40e9);
        let cap = 1.0 / (s * p.c0);
        let open = p.gm1 / (1.0 + s * p.gm1 * p.ls) * (cap * p.ro1 / (cap + p.ro1)) * (1.0 + p.gm2 * p.ro2);
        let g = stage_gain_cf(&p, 0.0, 40e9);
        assert!((g - open).norm() / open.norm() < 1e-9);
        let bare = p.gm1 / (1.0 + s * p.gm1 * p.ls) * p.ro1 * (1.0 + p.gm2 * p.ro2);
        let g = stage_gain_cf(&p, 1e15, 40e9);
        assert!((g - bare).norm() / bare.norm() < 1e-9);
    }

    #[test]
    fn stage_gain_falls_with_control_voltage() {
        let p = reference();
        let grid: Vec<f64> = (0..15).map(|i| 0.7 * i as f64 / 14.0).collect();
        let g: Vec<f64> = grid
            .iter()
            .map(|v| stage_gain_cf(&p, ro_vg(*v, &p.vg_device).unwrap(), 40e9).norm())
            .collect();
        for w in g.windows(2) {
            assert!(w[1] < w[0], "{g:?}");
        }
    }

    #[test]
    fn ro_vg_anchor_and_plateau() {
        let cal = RoVgCalibration::default();
        assert!((ro_vg(0.7, &cal).unwrap() - 45.0).abs() < 1e-9);
        let off = ro_vg(0.0, &cal).unwrap();
        assert!(off >= 100.0 * 2e3, "{off}");
        assert!((off / cal.r_off - 1.0).abs() < 1e-6);
        assert!((cal.beta - 0.0766).abs() < 0.001, "{}", cal.beta);
    }

    #[test]
    fn ro_vg_is_monotone() {
        let cal = RoVgCalibration::default();
        let r: Vec<f64> = (0..=700).map(|i| ro_vg(i as f64 / 1000.0, &cal).unwrap()).collect();
        assert!(r.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn ro_vg_range_checked() {
        let cal = RoVgCalibration::default();
        assert!(ro_vg(-0.01, &cal).is_err());
        assert!(ro_vg(0.75, &cal).is_err());
        assert!(ro_vg(f64::NAN, &cal).is_err());
    }

    #[test]
    fn threshold_voltage_behaviour() {
        let b = BodyBiasParams::default();
        assert_eq!(threshold_voltage(&b, 0.0).unwrap(), b.vt0);
        assert!((threshold_voltage(&b, -0.55).unwrap() - 0.41).abs() < 1e-3);
        assert!(threshold_voltage(&b, 0.3).unwrap() > b.vt0);
        assert!(threshold_voltage(&b, -0.81).is_err());
        // Fitted at phi_f = 0.40 V.
        assert!((b.gamma_body - 0.12677).abs() < 1e-4, "{}", b.gamma_body);
    }

    #[test]
    fn default_vth_matches_body_biased_threshold() {
        let vt = threshold_voltage(&BodyBiasParams::default(), -0.55).unwrap();
        assert!((RoVgCalibration::default().vth - vt).abs() < 1e-9);
    }

    #[test]
    fn uncoupled_match_closed_form() {
        let (lg, ls) = design_input_match(0.02, 20e-15, 0.0, 40e9, 50.0).unwrap();
        assert!((ls - 50e-12).abs() < 1e-24);
        assert!((lg - 741.6e-12).abs() < 0.1e-12, "{lg}");
        let r = match_residuals(0.02, 20e-15, 0.0, 40e9, 50.0, lg, ls);
        assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12);
    }

    #[test]
    fn coupled_match_needs_less_degeneration() {
        let (_, ls0) = design_input_match(0.02, 20e-15, 0.0, 40e9, 50.0).unwrap();
        let (lg, ls) = design_input_match(0.02, 20e-15, 0.3, 40e9, 50.0).unwrap();
        let r = match_residuals(0.02, 20e-15, 0.3, 40e9, 50.0, lg, ls);
        assert!(r[0].abs() < 1e-9 && r[1].abs() < 1e-9);
        assert!(ls < ls0);
    }

    #[test]
    fn matched_design_presents_rs() {
        let mut p = reference();
        let (lg, ls) = design_input_match(p.gm1, p.cgs, p.k, 40e9, p.rs).unwrap();
        p.lg = lg;
        p.ls = ls;
        let z = input_impedance_cf(&p, 40e9);
        assert!((z.re - 50.0).abs() < 1e-6 && z.im.abs() < 1e-6, "{z}");
    }

    #[test]
    fn infeasible_match_reported() {
        // Huge Cgs at high f0: the resonant inductance is below Ls.
        assert!(matches!(
            design_input_match(0.005, 100e-15, 0.3, 100e9, 50.0),
            Err(Error::NoMatchSolution(_))
        ));
        assert!(design_input_match(0.02, 20e-15, 1.0, 40e9, 50.0).is_err());
    }

    #[test]
    fn dc_block_examples() {
        let c = dc_block_check(0.75e-12, 45.0, 40e9);
        assert!((c.corner_hz - 4.716e9).abs() < 0.01e9, "{}", c.corner_hz);
        assert!((c.ratio - 8.48).abs() < 0.01);
        assert!(c.pass);
        let big = dc_block_check(1.0, 45.0, 40e9);
        assert!(big.corner_hz < 1.0 && big.pass);
        let small = dc_block_check(0.01e-12, 45.0, 40e9);
        assert!((small.corner_hz - 353.7e9).abs() < 1e9, "{}", small.corner_hz);
        assert!(!small.pass);
    }

    #[test]
    fn fom_rows() {
        let low = FomInputs {
            gain_db: 15.0,
            bw_3db_ghz: 9.8,
            f0_ghz: 39.75,
            iip3_dbm: 1.2,
            nf_db: 5.5,
            pdc_mw: 4.5,
        };
        assert!((fom(&low).unwrap() - 63.02).abs() < 0.1);
        let high = FomInputs {
            gain_db: 21.0,
            bw_3db_ghz: 6.8,
            f0_ghz: 40.5,
            iip3_dbm: -7.8,
            nf_db: 2.8,
            pdc_mw: 4.5,
        };
        assert!((fom(&high).unwrap() - 63.0).abs() < 0.5);
        let unity = FomInputs {
            gain_db: 0.0,
            bw_3db_ghz: 1.0,
            f0_ghz: 1.0,
            iip3_dbm: 0.0,
            nf_db: 10.0 * 2f64.log10(),
            pdc_mw: 1.0,
        };
        assert!(fom(&unity).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fom_rejects_non_positive_nf() {
        let mut i = FomInputs {
            gain_db: 10.0,
            bw_3db_ghz: 1.0,
            f0_ghz: 1.0,
            iip3_dbm: 0.0,
            nf_db: 0.0,
            pdc_mw: 1.0,
        };
        assert!(fom(&i).is_err());
        i.nf_db = 1.0;
        i.pdc_mw = 0.0;
        assert!(fom(&i).is_err());
    }
}
