//! Seeded, bit-reproducible scenario generators.
//!
//! Experiments and tests need identical data on every platform, so the
//! generator stack is fixed and fully specified here rather than drawn
//! from a pluggable RNG:
//!
//! * integers: SplitMix64 — the state advances by `0x9E3779B97F4A7C15`
//!   per draw and is mixed by two xor-shift-multiply rounds with the
//!   constants `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB`, finished
//!   by `z ^ (z >> 31)`;
//! * uniforms: the top 53 bits plus one, scaled by `2^-53`, giving a
//!   value in `(0, 1]` (never zero, so logarithms are safe);
//! * gaussians: the Box-Muller transform; each pair of uniforms yields
//!   `sqrt(-2 ln u1) * (cos, sin)(2 pi u2)`, the sine branch being
//!   cached for the next call.
//!
//! All transcendentals go through `libm`, so a given seed produces
//! bit-identical sequences everywhere.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::model::ArmaSpec;

/// Deterministic SplitMix64 generator with a Box-Muller gaussian stage.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
    cached_gaussian: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            cached_gaussian: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `(0, 1]`.
    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.cached_gaussian.take() {
            return z;
        }
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let angle = 2.0 * core::f64::consts::PI * u2;
        self.cached_gaussian = Some(radius * libm::sin(angle));
        radius * libm::cos(angle)
    }
}

/// One generated experiment: observations plus the noiseless ground
/// truth and its analytic first derivative on a uniform time grid.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub truth: Vec<f64>,
    pub truth_d1: Vec<f64>,
    pub seed: u64,
}

const SINE_LEN: usize = 1201;
const SINE_STEP: f64 = 0.1;

/// Slow sinusoid in unit-variance white gaussian noise:
/// `x(t) = 5 sin(0.1 t) + N(0, 1)` on `t = 0, 0.1, .., 120`.
pub fn gen_sine(seed: u64) -> Scenario {
    let mut rng = Rng::new(seed);
    let mut t = Vec::with_capacity(SINE_LEN);
    let mut x = Vec::with_capacity(SINE_LEN);
    let mut truth = Vec::with_capacity(SINE_LEN);
    let mut truth_d1 = Vec::with_capacity(SINE_LEN);
    for i in 0..SINE_LEN {
        let ti = i as f64 * SINE_STEP;
        let f = 5.0 * libm::sin(0.1 * ti);
        t.push(ti);
        truth.push(f);
        truth_d1.push(0.5 * libm::cos(0.1 * ti));
        x.push(f + rng.next_gaussian());
    }
    Scenario {
        name: String::from("sine"),
        t,
        x,
        truth,
        truth_d1,
        seed,
    }
}

/// Sinusoid riding an exponential trend in unit-variance noise:
/// `x(t) = 5 sin(0.1 t) + exp(0.03 t) + N(0, 1)` on the same grid.
pub fn gen_sine_exp(seed: u64) -> Scenario {
    let mut rng = Rng::new(seed);
    let mut t = Vec::with_capacity(SINE_LEN);
    let mut x = Vec::with_capacity(SINE_LEN);
    let mut truth = Vec::with_capacity(SINE_LEN);
    let mut truth_d1 = Vec::with_capacity(SINE_LEN);
    for i in 0..SINE_LEN {
        let ti = i as f64 * SINE_STEP;
        let f = 5.0 * libm::sin(0.1 * ti) + libm::exp(0.03 * ti);
        t.push(ti);
        truth.push(f);
        truth_d1.push(0.5 * libm::cos(0.1 * ti) + 0.03 * libm::exp(0.03 * ti));
        x.push(f + rng.next_gaussian());
    }
    Scenario {
        name: String::from("sine_exp"),
        t,
        x,
        truth,
        truth_d1,
        seed,
    }
}

const FAULT_LEN: usize = 800;
const FAULT_STEP: f64 = 0.1;
const FAULT_NOISE_SD: f64 = 0.1732;

/// Three ranging-style channels sharing one slow trajectory
/// `8 + 2 sin(0.02 t)` plus small independent noise. The third channel
/// additionally carries `n_jumps` level jumps of size `jump_mag`, each
/// lasting 3 to 8 samples, at seeded positions past the burn-in region.
/// The jumps are faults: every channel's `truth` stays the clean
/// trajectory.
pub fn gen_fault_channels(seed: u64, n_jumps: usize, jump_mag: f64) -> Vec<Scenario> {
    let mut rng = Rng::new(seed);
    let mut t = Vec::with_capacity(FAULT_LEN);
    let mut truth = Vec::with_capacity(FAULT_LEN);
    let mut truth_d1 = Vec::with_capacity(FAULT_LEN);
    for i in 0..FAULT_LEN {
        let ti = i as f64 * FAULT_STEP;
        t.push(ti);
        truth.push(8.0 + 2.0 * libm::sin(0.02 * ti));
        truth_d1.push(0.04 * libm::cos(0.02 * ti));
    }

    let mut channels: Vec<Scenario> = (0..3)
        .map(|c| {
            let x: Vec<f64> = truth
                .iter()
                .map(|f| f + FAULT_NOISE_SD * rng.next_gaussian())
                .collect();
            Scenario {
                name: format!("sensor{}", c + 1),
                t: t.clone(),
                x,
                truth: truth.clone(),
                truth_d1: truth_d1.clone(),
                seed,
            }
        })
        .collect();

    for _ in 0..n_jumps {
        let start = 60 + (rng.next_uniform() * (FAULT_LEN - 80) as f64) as usize;
        let duration = 3 + (rng.next_uniform() * 6.0) as usize; // 3..=8
        let end = (start + duration).min(FAULT_LEN);
        for i in start..end {
            channels[2].x[i] += jump_mag;
        }
    }
    channels
}

/// Simulates the ARMA difference equation driven by seeded gaussian
/// innovations of variance `innov_var`, discarding 200 warm-up samples.
pub fn gen_arma_noise(spec: &ArmaSpec, innov_var: f64, n: usize, seed: u64) -> Vec<f64> {
    const WARMUP: usize = 200;
    let mut rng = Rng::new(seed);
    let sd = libm::sqrt(innov_var);
    let p = spec.phi_coeffs().len();
    let q = spec.theta_coeffs().len() - 1;

    let mut eps_hist: Vec<f64> = Vec::with_capacity(q + 1);
    let mut v_hist: Vec<f64> = Vec::with_capacity(p);
    let mut out = Vec::with_capacity(n);
    for i in 0..(n + WARMUP) {
        let eps = sd * rng.next_gaussian();
        eps_hist.insert(0, eps);
        eps_hist.truncate(q + 1);

        let mut v = 0.0;
        for (j, theta) in spec.theta_coeffs().iter().enumerate() {
            if let Some(e) = eps_hist.get(j) {
                v += theta * e;
            }
        }
        for (j, phi) in spec.phi_coeffs().iter().enumerate() {
            if let Some(prev) = v_hist.get(j) {
                v -= phi * prev;
            }
        }
        if p > 0 {
            v_hist.insert(0, v);
            v_hist.truncate(p);
        }
        if i >= WARMUP {
            out.push(v);
        }
    }
    out
}
