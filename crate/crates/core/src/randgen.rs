//! Random Pauli-product circuits with tunable parallelism.
//!
//! Product sizes follow a geometric distribution with success probability
//! `1 / size_mean`, truncated to `[1, spread]`. Each product picks a window
//! of `spread` consecutive qubits uniformly, then distinct qubits inside it
//! and a uniform operator per qubit. Small products on narrow windows give
//! wide task-graph layers; large ones make the circuit nearly serial.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Circuit, Error, Pauli, PauliProduct, Result, TaskGraph};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandGenParams {
    pub num_qubits: u32,
    pub num_products: usize,
    /// Mean of the untruncated size distribution.
    pub size_mean: f64,
    /// Width of the qubit window each product draws from.
    pub spread: u32,
    pub seed: u64,
}

impl RandGenParams {
    pub const DEFAULT_PRODUCTS: usize = 20_000;

    pub fn new(num_qubits: u32, size_mean: f64, spread: u32, seed: u64) -> RandGenParams {
        RandGenParams {
            num_qubits,
            num_products: Self::DEFAULT_PRODUCTS,
            size_mean,
            spread,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_qubits;
        if n == 0 {
            return Err(Error::InvalidParams("num_qubits must be positive".into()));
        }
        if !(self.size_mean >= 1.0 && self.size_mean <= n as f64) {
            return Err(Error::InvalidParams(format!(
                "size_mean {} outside [1, {n}]",
                self.size_mean
            )));
        }
        if self.spread == 0 || self.spread > n {
            return Err(Error::InvalidParams(format!("spread {} outside [1, {n}]", self.spread)));
        }
        Ok(())
    }

    /// Size drawn from `u` in `[0, 1)` by inverting the truncated CDF.
    fn size_from_uniform(&self, u: f64) -> u32 {
        let kmax = self.spread;
        let p = 1.0 / self.size_mean;
        if p >= 1.0 {
            return 1;
        }
        let q = 1.0 - p;
        let mass = 1.0 - libm::pow(q, kmax as f64);
        let k = 1 + libm::floor(libm::log1p(-u * mass) / libm::log(q)) as u32;
        k.clamp(1, kmax)
    }
}

/// Generates a circuit. Deterministic in `params`.
pub fn generate_random_circuit(params: &RandGenParams) -> Result<Circuit> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.num_qubits;
    let products = (0..params.num_products)
        .map(|_| {
            let k = params.size_from_uniform(rng.gen::<f64>());
            let start = rng.gen_range(0..=n - params.spread);
            let ops = index::sample(&mut rng, params.spread as usize, k as usize)
                .into_iter()
                .map(|i| (start + i as u32, Pauli::ALL[rng.gen_range(0..3)]))
                .collect();
            PauliProduct::new(ops)
        })
        .collect::<Result<Vec<_>>>()?;
    Circuit::new(n, products)
}

/// Average products per layer of the task graph built from `params`.
pub fn measure_parallelism(params: &RandGenParams) -> Result<f64> {
    let c = generate_random_circuit(params)?;
    Ok(TaskGraph::build(&c).parallelism_stats().avg_products_per_layer)
}

/// Named parallelism levels for 64-qubit circuits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Low,
    Medium,
    High,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Low, Preset::Medium, Preset::High];

    /// Target average products per layer.
    pub fn target(self) -> f64 {
        match self {
            Preset::Low => 1.42,
            Preset::Medium => 7.92,
            Preset::High => 25.13,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Low => "low",
            Preset::Medium => "medium",
            Preset::High => "high",
        }
    }
}

impl core::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Preset> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown preset {s:?}")))
    }
}

/// Relative tolerance of [`calibrate`] on the measured parallelism.
pub const CALIBRATION_TOLERANCE: f64 = 0.05;

const CALIBRATION_STEPS: u32 = 40;

/// Finds a `size_mean` (spread fixed to the qubit count) whose circuit of
/// [`RandGenParams::DEFAULT_PRODUCTS`] products averages `target` products
/// per layer within [`CALIBRATION_TOLERANCE`].
pub fn calibrate_preset(target: f64, num_qubits: u32, seed: u64) -> Result<RandGenParams> {
    calibrate(target, RandGenParams::new(num_qubits, 1.0, num_qubits, seed))
}

/// As [`calibrate_preset`], keeping `template`'s product count and seed.
pub fn calibrate(target: f64, template: RandGenParams) -> Result<RandGenParams> {
    let n = template.num_qubits;
    if !(target >= 1.0 && target <= n as f64) {
        return Err(Error::Calibration(format!("target {target} outside [1, {n}]")));
    }
    let at = |size_mean: f64| {
        let p = RandGenParams {
            size_mean,
            spread: n,
            ..template
        };
        measure_parallelism(&p).map(|m| (p, m))
    };
    let close = |m: f64| (m - target).abs() <= CALIBRATION_TOLERANCE * target;

    // parallelism falls as size_mean grows
    let (mut lo, mut hi) = (1.0, n as f64);
    let (p_lo, m_lo) = at(lo)?;
    if close(m_lo) {
        return Ok(p_lo);
    }
    let (p_hi, m_hi) = at(hi)?;
    if close(m_hi) {
        return Ok(p_hi);
    }
    if m_lo < target || m_hi > target {
        return Err(Error::Calibration(format!(
            "target {target} outside the reachable range [{m_hi:.3}, {m_lo:.3}]"
        )));
    }
    for _ in 0..CALIBRATION_STEPS {
        let mid = 0.5 * (lo + hi);
        let (p, m) = at(mid)?;
        if close(m) {
            return Ok(p);
        }
        if m > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Calibration(format!(
        "no size_mean reached {target} within {CALIBRATION_STEPS} bisection steps"
    )))
}
