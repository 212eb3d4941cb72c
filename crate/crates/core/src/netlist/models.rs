//! Small-signal netlists of the variable-gain LNA.
//!
//! First stage: the signal source (port 1, terminated by `rs`) drives `lg`
//! into the gate of M1, `cgs` sits between gate and source, and `ls`
//! degenerates the source to ground with `lg`/`ls` magnetically coupled.
//! M1 is a VCCS from its drain `d1` to its source. `ro1` and the series
//! `c0`/`ro_vg` gain-control branch load `d1` to ground, and the cascode
//! device M2 (a VCCS with `ro2`, gate at AC ground) lifts `d1` to `out1`.
//!
//! `ro1` is returned to ground rather than to the source node, so the drain
//! current of M1 does not depend on the drain voltage. With that, the input
//! impedance and the short-circuit drain current are exactly the closed forms
//! in [`crate::lna`].

use serde::{Deserialize, Serialize};

use super::{Netlist, NetlistBuilder, PsdModel, GROUND};
use crate::error::{Error, Result};
use crate::lna::{self, BodyBiasParams, RoVgCalibration, VCTRL_MAX};
use crate::sweep::CornerFactors;

/// Series capacitor joining the first-stage output to the second stage.
pub const INTERSTAGE_CAPACITANCE: f64 = 10e-12;

/// Small-signal design of the two-stage variable-gain LNA.
///
/// `gm1`/`cgs`/`lg`/`ls`/`k`/`ro1` describe the common-source device and its
/// input network, `gm2`/`ro2` the cascode device. The second stage replicates
/// the first without the gain-control branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignParams {
    pub gm1: f64,
    pub gm2: f64,
    pub cgs: f64,
    pub lg: f64,
    pub ls: f64,
    pub k: f64,
    pub c0: f64,
    pub ro1: f64,
    pub ro2: f64,
    pub rs: f64,
    pub gamma_noise: f64,
    pub eta: f64,
    pub temperature: f64,
    pub vg_device: RoVgCalibration,
    pub body: BodyBiasParams,
    pub corner: CornerFactors,
}

impl DesignParams {
    /// Centre frequency the reference design is matched at.
    pub const REFERENCE_F0: f64 = 40e9;

    /// Reference design: gm = 20 mS, Cgs = 20 fF, ro = 2 kΩ, k = 0.3,
    /// Rs = 50 Ω, C0 = 0.75 pF, with Lg/Ls synthesized for a 50 Ω match at
    /// 40 GHz.
    pub fn reference() -> Self {
        let (gm1, cgs, k, rs) = (20e-3, 20e-15, 0.3, 50.0);
        let (lg, ls) =
            lna::design_input_match(gm1, cgs, k, Self::REFERENCE_F0, rs).expect("reference design has a match");
        DesignParams {
            gm1,
            gm2: 20e-3,
            cgs,
            lg,
            ls,
            k,
            c0: 0.75e-12,
            ro1: 2e3,
            ro2: 2e3,
            rs,
            gamma_noise: 1.0,
            eta: 1.0,
            temperature: 290.0,
            vg_device: RoVgCalibration::default(),
            body: BodyBiasParams::default(),
            corner: CornerFactors::tt(),
        }
    }

    /// Mutual inductance between `lg` and `ls`.
    pub fn mutual(&self) -> f64 {
        self.k * (self.lg * self.ls).sqrt()
    }

    /// Total series inductance of the input loop, `Lg + Ls + 2M`.
    pub fn loop_inductance(&self) -> f64 {
        self.lg + self.ls + 2.0 * self.mutual()
    }

    /// Series resonance of `cgs` with the input loop inductance.
    pub fn resonance_frequency(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * (self.cgs * self.loop_inductance()).sqrt())
    }

    /// Re-runs the input match at `f0` with the current gm1/Cgs/k/Rs.
    pub fn rematched(mut self, f0: f64) -> Result<Self> {
        let (lg, ls) = lna::design_input_match(self.gm1, self.cgs, self.k, f0, self.rs)?;
        self.lg = lg;
        self.ls = ls;
        Ok(self)
    }

    /// Parameters with the process corner folded in (and the corner reset to TT).
    pub fn effective(&self) -> DesignParams {
        let c = &self.corner;
        let mut p = self.clone();
        p.gm1 *= c.gm_scale;
        p.gm2 *= c.gm_scale;
        p.cgs *= c.cgs_scale;
        p.vg_device.vth += c.vt_shift;
        p.corner = CornerFactors::tt();
        p
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gm1", self.gm1),
            ("gm2", self.gm2),
            ("cgs", self.cgs),
            ("lg", self.lg),
            ("ls", self.ls),
            ("c0", self.c0),
            ("ro1", self.ro1),
            ("ro2", self.ro2),
            ("temperature", self.temperature),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.k.is_finite() && (0.0..1.0).contains(&self.k)) {
            return Err(Error::param("k", format!("must lie in [0, 1), got {}", self.k)));
        }
        if !(self.rs.is_finite() && self.rs >= 0.0) {
            return Err(Error::param("rs", format!("must be non-negative, got {}", self.rs)));
        }
        for (name, v) in [("gamma_noise", self.gamma_noise), ("eta", self.eta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("must be non-negative, got {v}")));
            }
        }
        self.vg_device.validate()?;
        self.body.validate()?;
        self.corner.validate()?;
        Ok(())
    }
}

impl Default for DesignParams {
    fn default() -> Self {
        Self::reference()
    }
}

/// Which optional noise sources the LNA builders attach. M1 and the source
/// resistance are always noisy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelOptions {
    pub cascode_noise: bool,
    pub vg_noise: bool,
    pub second_stage_noise: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            cascode_noise: false,
            vg_noise: false,
            second_stage_noise: true,
        }
    }
}

impl ModelOptions {
    /// Only the source resistance and M1: the setting the closed-form noise
    /// expressions assume.
    pub fn m1_only() -> Self {
        ModelOptions {
            cascode_noise: false,
            vg_noise: false,
            second_stage_noise: false,
        }
    }
}

fn channel(p: &DesignParams, gm: f64) -> PsdModel {
    PsdModel::Channel {
        gamma: p.gamma_noise,
        eta: p.eta,
        gm,
        temperature: p.temperature,
    }
}

struct StageNodes<'a> {
    input: &'a str,
    gate: &'a str,
    source: &'a str,
    drain: &'a str,
    out: &'a str,
    suffix: &'a str,
}

/// Common-source input network plus cascode; shared by both stages.
fn cascode_stage(
    b: NetlistBuilder,
    p: &DesignParams,
    n: &StageNodes<'_>,
    noisy: bool,
    opts: &ModelOptions,
) -> NetlistBuilder {
    let name = |base: &str| format!("{base}{}", n.suffix);
    let (lg, ls, gm_cs, gm_cg) = (name("lg"), name("ls"), name("gm_cs"), name("gm_cg"));
    let mut b = b
        .inductor(&lg, n.input, n.gate, p.lg)
        .capacitor(&name("cgs"), n.gate, n.source, p.cgs)
        .inductor(&ls, n.source, GROUND, p.ls)
        .vccs(&gm_cs, n.drain, n.source, n.gate, n.source, p.gm1)
        .resistor(&name("ro_cs"), n.drain, GROUND, p.ro1)
        .vccs(&gm_cg, n.out, n.drain, GROUND, n.drain, p.gm2)
        .resistor(&name("ro_cg"), n.out, n.drain, p.ro2);
    if p.k != 0.0 {
        b = b.coupling(&lg, &ls, p.k);
    }
    if noisy {
        b = b.element_noise(&name("n_cs"), &gm_cs, channel(p, p.gm1), false);
    }
    if noisy && opts.cascode_noise {
        b = b.element_noise(&name("n_cg"), &gm_cg, channel(p, p.gm2), false);
    }
    b
}

fn first_stage(p: &DesignParams, ro_vg: f64, opts: &ModelOptions) -> Result<NetlistBuilder> {
    p.validate()?;
    if !(ro_vg.is_finite() && ro_vg > 0.0) {
        return Err(Error::param("ro_vg", format!("must be positive, got {ro_vg}")));
    }
    let p = p.effective();
    let mut b = Netlist::builder().node(GROUND).port("p1", "in", Some(p.rs));
    if p.rs > 0.0 {
        b = b.injected_noise(
            "n_rs",
            GROUND,
            "in",
            PsdModel::Thermal {
                resistance: p.rs,
                temperature: p.temperature,
            },
            true,
        );
    }
    let nodes = StageNodes {
        input: "in",
        gate: "g1",
        source: "s1",
        drain: "d1",
        out: "out1",
        suffix: "1",
    };
    b = cascode_stage(b, &p, &nodes, true, opts)
        .capacitor("c0", "d1", "vg", p.c0)
        .resistor("ro_vg", "vg", GROUND, ro_vg);
    if opts.vg_noise {
        b = b.element_noise(
            "n_vg",
            "ro_vg",
            PsdModel::Thermal {
                resistance: ro_vg,
                temperature: p.temperature,
            },
            false,
        );
    }
    Ok(b)
}

/// First stage alone: port 1 at the source, port 2 at the cascode output.
///
/// Element names: `lg1`, `ls1`, `cgs1`, `gm_cs1` (M1), `ro_cs1`, `gm_cg1`
/// (M2), `ro_cg1`, `c0`, `ro_vg`; noise sources `n_rs` (input) and `n_cs1`.
pub fn build_first_stage_model(p: &DesignParams, ro_vg: f64) -> Result<Netlist> {
    build_first_stage_model_with(p, ro_vg, &ModelOptions::default())
}

pub fn build_first_stage_model_with(p: &DesignParams, ro_vg: f64, opts: &ModelOptions) -> Result<Netlist> {
    let b = first_stage(p, ro_vg, opts)?;
    Ok(b.port("p2", "out1", Some(p.rs)).build())
}

/// Two-stage amplifier at control voltage `vctrl`: the first stage feeds a
/// replica stage (without the gain-control branch) through
/// [`INTERSTAGE_CAPACITANCE`]. The second-stage input is shunted by `r_is`
/// (equal to `rs`, omitted when `rs` is zero) so its matching network is
/// driven from a finite impedance. Port 2 is the second cascode output.
pub fn build_two_stage_model(p: &DesignParams, vctrl: f64) -> Result<Netlist> {
    build_two_stage_model_with(p, vctrl, &ModelOptions::default())
}

pub fn build_two_stage_model_with(p: &DesignParams, vctrl: f64, opts: &ModelOptions) -> Result<Netlist> {
    if !(0.0..=VCTRL_MAX).contains(&vctrl) {
        return Err(Error::param(
            "vctrl",
            format!("must lie in [0, {VCTRL_MAX}] V, got {vctrl}"),
        ));
    }
    let eff = p.effective();
    let ro_vg = lna::ro_vg(vctrl, &eff.vg_device)?;
    let mut b = first_stage(p, ro_vg, opts)?.capacitor("cc", "out1", "in2", INTERSTAGE_CAPACITANCE);
    if eff.rs > 0.0 {
        b = b.resistor("r_is", "in2", GROUND, eff.rs);
        if opts.second_stage_noise {
            b = b.element_noise(
                "n_is",
                "r_is",
                PsdModel::Thermal {
                    resistance: eff.rs,
                    temperature: eff.temperature,
                },
                false,
            );
        }
    }
    let nodes = StageNodes {
        input: "in2",
        gate: "g2",
        source: "s2",
        drain: "d2",
        out: "out2",
        suffix: "2",
    };
    Ok(cascode_stage(b, &eff, &nodes, opts.second_stage_noise, opts)
        .port("p2", "out2", Some(eff.rs))
        .build())
}

/// Gain-calculation model of the first stage: an ideal source `vin` on the
/// gate, `ls` degeneration, the drain load `ro1 ∥ (c0 + ro_vg)` and an
/// unloaded cascode. Input network, `cgs` and coupling are left out.
/// The output is node `out1`.
pub fn build_gain_model(p: &DesignParams, ro_vg: f64) -> Result<Netlist> {
    p.validate()?;
    if !(ro_vg.is_finite() && ro_vg > 0.0) {
        return Err(Error::param("ro_vg", format!("must be positive, got {ro_vg}")));
    }
    let p = p.effective();
    Ok(Netlist::builder()
        .node(GROUND)
        .vsource("vin", "g1", GROUND, 1.0)
        .inductor("ls1", "s1", GROUND, p.ls)
        .vccs("gm_cs1", "d1", "s1", "g1", "s1", p.gm1)
        .resistor("ro_cs1", "d1", GROUND, p.ro1)
        .capacitor("c0", "d1", "vg", p.c0)
        .resistor("ro_vg", "vg", GROUND, ro_vg)
        .vccs("gm_cg1", "out1", "d1", GROUND, "d1", p.gm2)
        .resistor("ro_cg1", "out1", "d1", p.ro2)
        .build())
}
