#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rfss_core::netlist::{DesignParams, Netlist, GROUND};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo * (hi / lo).powf(rng.gen::<f64>())
}

pub fn log_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| start * (stop / start).powf(i as f64 / (points - 1) as f64))
        .collect()
}

/// Random design around the reference: inductors are drawn directly, so the
/// input is generally not matched.
pub fn random_params(rng: &mut impl Rng) -> DesignParams {
    DesignParams {
        gm1: log_uniform(rng, 5e-3, 60e-3),
        gm2: log_uniform(rng, 5e-3, 60e-3),
        cgs: log_uniform(rng, 5e-15, 100e-15),
        lg: log_uniform(rng, 50e-12, 2e-9),
        ls: log_uniform(rng, 5e-12, 300e-12),
        k: rng.gen_range(0.0..0.8),
        c0: log_uniform(rng, 0.1e-12, 5e-12),
        ro1: log_uniform(rng, 300.0, 10e3),
        ro2: log_uniform(rng, 300.0, 10e3),
        rs: rng.gen_range(25.0..100.0),
        gamma_noise: rng.gen_range(0.67..2.5),
        eta: rng.gen_range(0.5..1.5),
        temperature: rng.gen_range(250.0..400.0),
        ..DesignParams::reference()
    }
}

/// Random passive ladder of R, L, C with optional inductor coupling between
/// two ports. Every node has a resistive path to ground.
pub fn random_passive(rng: &mut impl Rng) -> Netlist {
    let sections = rng.gen_range(1..=4);
    let mut b = Netlist::builder().node(GROUND);
    let mut inductors: Vec<String> = Vec::new();
    let node = |i: usize| format!("n{i}");
    for i in 0..sections {
        let (a, c) = (node(i), node(i + 1));
        match rng.gen_range(0..3) {
            0 => b = b.resistor(&format!("rs{i}"), &a, &c, log_uniform(rng, 1.0, 1e3)),
            1 => {
                let name = format!("ls{i}");
                b = b.inductor(&name, &a, &c, log_uniform(rng, 10e-12, 5e-9)).resistor(
                    &format!("rl{i}"),
                    &a,
                    &c,
                    log_uniform(rng, 100.0, 1e5),
                );
                inductors.push(name);
            }
            _ => b = b.capacitor(&format!("cs{i}"), &a, &c, log_uniform(rng, 10e-15, 5e-12)),
        }
        b = b.resistor(&format!("rg{i}"), &c, GROUND, log_uniform(rng, 10.0, 1e4));
        if rng.gen_bool(0.5) {
            b = b.capacitor(&format!("cg{i}"), &c, GROUND, log_uniform(rng, 10e-15, 2e-12));
        }
        if rng.gen_bool(0.4) {
            let name = format!("lg{i}");
            b = b.inductor(&name, &c, GROUND, log_uniform(rng, 50e-12, 5e-9));
            inductors.push(name);
        }
    }
    b = b.resistor("rg_in", &node(0), GROUND, log_uniform(rng, 10.0, 1e4));
    if inductors.len() >= 2 {
        let k = rng.gen_range(0.0..0.95);
        b = b.coupling(&inductors[0], &inductors[1], k);
    }
    b.port("p1", &node(0), None).port("p2", &node(sections), None).build()
}

pub fn rel(a: num_complex::Complex64, b: num_complex::Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
