//! Seeded Euler paths of Lévy-driven systems.
//!
//! One step of coordinate `i` is
//! `x_i + mu_i(X) delta + delta^{1/alpha_i} sigma_i(X) eta_i`
//! with `eta_i` drawn from the standard stable law of source `i`. Each source
//! draws from its own ChaCha8 stream of the run seed, so coordinate `k`'s
//! noise does not depend on how many other coordinates exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::TimeSeries;
use crate::models::{CompiledModel, ModelSpec};
use crate::stable::{stable_sample, StableParams};

/// Default bound on `|x|` before a path counts as exploded.
pub const EXPLOSION_CAP: f64 = 1e12;

fn default_cap() -> f64 {
    EXPLOSION_CAP
}

/// Simulation settings.
///
/// The recorded series starts at the state reached after `burn_in` steps and
/// then takes `n_steps` further steps, so it has `n_steps + 1` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub model: ModelSpec,
    pub x0: Vec<f64>,
    pub delta: f64,
    pub n_steps: usize,
    pub seed: u64,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default = "default_cap")]
    pub explosion_cap: f64,
}

impl SimConfig {
    pub fn new(model: ModelSpec, x0: Vec<f64>, delta: f64, n_steps: usize, seed: u64) -> Self {
        Self {
            model,
            x0,
            delta,
            n_steps,
            seed,
            burn_in: 0,
            explosion_cap: EXPLOSION_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.x0.len() != self.model.dim() {
            return Err(Error::Config(format!(
                "initial state has {} coordinates, model has {}",
                self.x0.len(),
                self.model.dim()
            )));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("initial state must be finite".into()));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!(
                "time step {} must be positive",
                self.delta
            )));
        }
        if self.n_steps < 1 {
            return Err(Error::Config("n_steps must be at least 1".into()));
        }
        if !(self.explosion_cap > 0.0) {
            return Err(Error::Config("explosion cap must be positive".into()));
        }
        Ok(())
    }
}

/// The random source of coordinate `i` for a run seeded with `seed`.
pub fn noise_stream(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

fn step_into(
    cm: &CompiledModel,
    x: &[f64],
    delta: f64,
    scales: &[f64],
    eta: &[f64],
    out: &mut [f64],
) {
    for i in 0..x.len() {
        out[i] = x[i] + cm.drift(i, x) * delta + scales[i] * cm.noise(i, x) * eta[i];
    }
}

/// One Euler step from `x` driven by the innovations `eta`.
pub fn euler_step(model: &ModelSpec, x: &[f64], delta: f64, eta: &[f64]) -> Result<Vec<f64>> {
    let cm = model.compile()?;
    if x.len() != cm.dim() || eta.len() != cm.dim() {
        return Err(Error::Config(format!(
            "state and noise must have {} entries",
            cm.dim()
        )));
    }
    let scales: Vec<f64> = (0..cm.dim())
        .map(|i| delta.powf(1.0 / cm.alpha(i)))
        .collect();
    let mut out = vec![0.0; x.len()];
    step_into(&cm, x, delta, &scales, eta, &mut out);
    Ok(out)
}

/// Simulated series together with the innovations that produced each
/// recorded transition (row-major, `n_steps x d`).
#[derive(Debug, Clone)]
pub struct RecordedPath {
    pub series: TimeSeries,
    pub noise: Vec<f64>,
}

/// Simulate a path.
pub fn simulate_path(cfg: &SimConfig) -> Result<TimeSeries> {
    Ok(run(cfg, false)?.series)
}

/// Simulate a path and keep the driving innovations.
pub fn simulate_path_recorded(cfg: &SimConfig) -> Result<RecordedPath> {
    run(cfg, true)
}

fn run(cfg: &SimConfig, record: bool) -> Result<RecordedPath> {
    cfg.validate()?;
    let cm = cfg.model.compile()?;
    let d = cm.dim();
    let laws: Vec<StableParams> = (0..d)
        .map(|i| StableParams::standard(cm.alpha(i), cm.beta(i)))
        .collect::<Result<_>>()?;
    let scales: Vec<f64> = (0..d).map(|i| cfg.delta.powf(1.0 / cm.alpha(i))).collect();
    let mut rngs: Vec<ChaCha8Rng> = (0..d).map(|i| noise_stream(cfg.seed, i)).collect();

    let mut x = cfg.x0.clone();
    let mut next = vec![0.0; d];
    let mut eta = vec![0.0; d];
    let mut data = Vec::with_capacity((cfg.n_steps + 1) * d);
    let mut noise = Vec::with_capacity(if record { cfg.n_steps * d } else { 0 });
    for step in 0..cfg.burn_in + cfg.n_steps {
        if step == cfg.burn_in {
            data.extend_from_slice(&x);
        }
        for i in 0..d {
            eta[i] = stable_sample(&laws[i], &mut rngs[i]);
        }
        step_into(&cm, &x, cfg.delta, &scales, &eta, &mut next);
        if let Some(v) = next.iter().find(|v| !(v.abs() <= cfg.explosion_cap)) {
            return Err(Error::PathExplosion {
                step: step + 1,
                value: v.abs(),
                cap: cfg.explosion_cap,
            });
        }
        std::mem::swap(&mut x, &mut next);
        if step >= cfg.burn_in {
            data.extend_from_slice(&x);
            if record {
                noise.extend_from_slice(&eta);
            }
        }
    }
    Ok(RecordedPath {
        series: TimeSeries::from_flat(cfg.delta, d, data)?,
        noise,
    })
}
