//! Standardized residuals and the Euler transition likelihood.
//!
//! For a diagonal noise matrix the one-step transition density factorizes:
//!
//! ```text
//! ln p(X' | X) = sum_i [ ln f_i(eta_i) - ln sigma_i(X) - (1/alpha_i) ln delta ]
//! eta_i = (x_i' - x_i - mu_i(X) delta) / (delta^{1/alpha_i} sigma_i(X))
//! ```
//!
//! where `f_i` is the standard stable density of source `i`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{CompiledModel, ModelSpec};
use crate::stable::{stable_log_pdf, DensityGrid, StableParams};

/// Lower bound applied to every log-density term.
pub const LOG_DENSITY_FLOOR: f64 = -1e8;

/// Probability mass inside the tabulated part of likelihood grids.
pub const GRID_COVERAGE: f64 = 1.0 - 1e-6;

const CHUNK: usize = 4096;

/// Uniformly sampled d-dimensional observations, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    delta: f64,
    dim: usize,
    data: Vec<f64>,
    times: Option<Vec<f64>>,
}

impl TimeSeries {
    /// Series from rows of equal length sampled every `delta`.
    pub fn new(delta: f64, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Data(format!(
                "row {} has {} values, expected {dim}",
                r + 1,
                rows[r].len()
            )));
        }
        Self::from_flat(delta, dim, rows.concat())
    }

    /// Series from row-major values with `dim` columns.
    pub fn from_flat(delta: f64, dim: usize, data: Vec<f64>) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Config(format!(
                "sampling step {delta} must be positive"
            )));
        }
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::Data(format!(
                "{} values do not form rows of {dim} columns",
                data.len()
            )));
        }
        if data.len() / dim < 2 {
            return Err(Error::Data(
                "a time series needs at least 2 observations".into(),
            ));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite observation in row {}, column {}",
                k / dim + 1,
                k % dim + 1
            )));
        }
        Ok(Self {
            delta,
            dim,
            data,
            times: None,
        })
    }

    /// Series with explicit time stamps; the sampling step is inferred and
    /// stamps must be uniform within 1e-6 relative.
    pub fn with_times(times: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        if times.len() != rows.len() {
            return Err(Error::Data(format!(
                "{} time stamps for {} rows",
                times.len(),
                rows.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::Data(
                "a time series needs at least 2 observations".into(),
            ));
        }
        let n = times.len();
        let delta = (times[n - 1] - times[0]) / (n - 1) as f64;
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Data("time stamps must increase".into()));
        }
        for (k, w) in times.windows(2).enumerate() {
            let step = w[1] - w[0];
            if ((step - delta) / delta).abs() > 1e-6 {
                return Err(Error::Data(format!(
                    "non-uniform time stamps: step {step} between rows {} and {} (expected {delta})",
                    k + 1,
                    k + 2
                )));
            }
        }
        let mut ts = Self::new(delta, rows)?;
        ts.times = Some(times);
        Ok(ts)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn times(&self) -> Option<&[f64]> {
        self.times.as_deref()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.data
            .iter()
            .skip(i)
            .step_by(self.dim)
            .copied()
            .collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// Standardized innovations of each transition, with an inclusion mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    dim: usize,
    eta: Vec<f64>,
    mask: Vec<bool>,
}

impl Residuals {
    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.eta[t * self.dim..(t + 1) * self.dim]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        check_mask(Some(&mask), self.len())?;
        self.mask = mask;
        Ok(self)
    }

    /// Included residuals of coordinate `i`.
    pub fn included(&self, i: usize) -> Vec<f64> {
        (0..self.len())
            .filter(|&t| self.mask[t])
            .map(|t| self.eta[t * self.dim + i])
            .collect()
    }
}

fn check_mask(mask: Option<&[bool]>, transitions: usize) -> Result<()> {
    if let Some(m) = mask {
        if m.len() != transitions {
            return Err(Error::Config(format!(
                "mask has {} entries for {transitions} transitions",
                m.len()
            )));
        }
        if !m.iter().any(|&b| b) {
            return Err(Error::Degenerate("mask excludes every transition".into()));
        }
    }
    Ok(())
}

fn check_model(ts: &TimeSeries, model: &ModelSpec) -> Result<CompiledModel> {
    let cm = model.compile()?;
    if cm.dim() != ts.dim() {
        return Err(Error::Config(format!(
            "model has {} dimensions, data has {}",
            cm.dim(),
            ts.dim()
        )));
    }
    Ok(cm)
}

#[inline]
fn residual(
    cm: &CompiledModel,
    i: usize,
    x: &[f64],
    next: f64,
    delta: f64,
    scale: f64,
) -> (f64, f64) {
    let sigma = cm.noise(i, x);
    (
        (next - x[i] - cm.drift(i, x) * delta) / (scale * sigma),
        sigma,
    )
}

/// Invert the Euler scheme for the innovations driving each transition.
pub fn compute_residuals(ts: &TimeSeries, model: &ModelSpec) -> Result<Residuals> {
    let cm = check_model(ts, model)?;
    let d = ts.dim();
    let delta = ts.delta();
    let scales: Vec<f64> = (0..d).map(|i| delta.powf(1.0 / cm.alpha(i))).collect();
    let n = ts.len() - 1;
    let mut eta = Vec::with_capacity(n * d);
    for t in 0..n {
        let x = ts.row(t);
        let next = ts.row(t + 1);
        for i in 0..d {
            let (e, sigma) = residual(&cm, i, x, next[i], delta, scales[i]);
            if !(sigma > 0.0 && e.is_finite()) {
                return Err(Error::Degenerate(format!(
                    "residual of row {}, coordinate {} is undefined (noise intensity {sigma})",
                    t + 1,
                    i + 1
                )));
            }
            eta.push(e);
        }
    }
    Ok(Residuals {
        dim: d,
        eta,
        mask: vec![true; n],
    })
}

/// Log-density of one transition `x_curr -> x_next` over a step `delta`.
pub fn transition_log_density(
    x_next: &[f64],
    x_curr: &[f64],
    model: &ModelSpec,
    delta: f64,
) -> Result<f64> {
    let cm = model.compile()?;
    if x_next.len() != cm.dim() || x_curr.len() != cm.dim() {
        return Err(Error::Config(
            "state length does not match the model".into(),
        ));
    }
    if !(delta > 0.0) {
        return Err(Error::Config(format!("time step {delta} must be positive")));
    }
    let mut total = 0.0;
    for i in 0..cm.dim() {
        let alpha = cm.alpha(i);
        let (eta, sigma) = residual(&cm, i, x_curr, x_next[i], delta, delta.powf(1.0 / alpha));
        if !(sigma > 0.0) {
            return Err(Error::Degenerate(format!(
                "noise intensity {sigma} is not positive"
            )));
        }
        let p = StableParams::standard(alpha, cm.beta(i))?;
        let lp = stable_log_pdf(eta, &p)?.max(LOG_DENSITY_FLOOR);
        total += lp - sigma.ln() - delta.ln() / alpha;
    }
    Ok(total)
}

/// Which density table backs likelihood evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridKind {
    /// adaptive node placement, cheap to build
    Adaptive,
    /// fine fixed spacing; smooth in the stable parameters, used for curvature
    Uniform,
}

type GridKey = (u64, u64);

/// Log-likelihood evaluator over a fixed series and mask with a cache of
/// density tables keyed by `(alpha, beta)`.
pub struct Likelihood<'a> {
    ts: &'a TimeSeries,
    mask: Option<Vec<bool>>,
    kind: GridKind,
    cache: Mutex<HashMap<GridKey, Arc<DensityGrid>>>,
}

const CACHE_LIMIT: usize = 256;

impl<'a> Likelihood<'a> {
    pub fn new(ts: &'a TimeSeries, mask: Option<&[bool]>, kind: GridKind) -> Result<Self> {
        check_mask(mask, ts.len() - 1)?;
        Ok(Self {
            ts,
            mask: mask.map(<[bool]>::to_vec),
            kind,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn series(&self) -> &TimeSeries {
        self.ts
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    /// Number of transitions that enter the likelihood.
    pub fn included(&self) -> usize {
        self.mask
            .as_ref()
            .map_or(self.ts.len() - 1, |m| m.iter().filter(|&&b| b).count())
    }

    fn grid(&self, alpha: f64, beta: f64) -> Result<Arc<DensityGrid>> {
        let key = (alpha.to_bits(), beta.to_bits());
        if let Some(g) = self.cache.lock().unwrap().get(&key) {
            return Ok(g.clone());
        }
        let g = Arc::new(match self.kind {
            GridKind::Adaptive => crate::stable::build_density_grid(alpha, beta, GRID_COVERAGE)?,
            GridKind::Uniform => DensityGrid::uniform(alpha, beta, GRID_COVERAGE)?,
        });
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, g.clone());
        Ok(g)
    }

    /// Log-likelihood contribution of coordinate `i`.
    pub fn dimension(&self, cm: &CompiledModel, i: usize) -> Result<f64> {
        let alpha = cm.alpha(i);
        let grid = self.grid(alpha, cm.beta(i))?;
        let ts = self.ts;
        let delta = ts.delta();
        let scale = delta.powf(1.0 / alpha);
        let ln_scale = delta.ln() / alpha;
        let n = ts.len() - 1;
        let mask = self.mask.as_deref();
        let chunk = |start: usize| -> f64 {
            let mut s = 0.0;
            for t in start..(start + CHUNK).min(n) {
                if mask.is_some_and(|m| !m[t]) {
                    continue;
                }
                let x = ts.row(t);
                let (eta, sigma) = residual(cm, i, x, ts.row(t + 1)[i], delta, scale);
                let lp = grid.ln_pdf(eta);
                let lp = if lp >= LOG_DENSITY_FLOOR {
                    lp
                } else {
                    LOG_DENSITY_FLOOR
                };
                let ls = sigma.ln();
                let ls = if ls.is_finite() {
                    ls
                } else {
                    -LOG_DENSITY_FLOOR
                };
                s += lp - ls - ln_scale;
            }
            s
        };
        let starts: Vec<usize> = (0..n).step_by(CHUNK).collect();
        let partial: Vec<f64> = starts.par_iter().map(|&s| chunk(s)).collect();
        Ok(partial.iter().fold(0.0, |a, b| a + b))
    }

    /// Per-coordinate log-likelihoods.
    pub fn by_dimension(&self, model: &ModelSpec) -> Result<Vec<f64>> {
        let cm = check_model(self.ts, model)?;
        (0..cm.dim()).map(|i| self.dimension(&cm, i)).collect()
    }

    pub fn total(&self, model: &ModelSpec) -> Result<f64> {
        Ok(self.by_dimension(model)?.iter().fold(0.0, |a, b| a + b))
    }
}

/// Path log-likelihood conditional on the first observation, over the
/// transitions selected by `mask`.
pub fn log_likelihood(ts: &TimeSeries, model: &ModelSpec, mask: Option<&[bool]>) -> Result<f64> {
    Likelihood::new(ts, mask, GridKind::Adaptive)?.total(model)
}

/// Per-coordinate terms of [`log_likelihood`]; their sum is the total.
pub fn log_likelihood_by_dimension(
    ts: &TimeSeries,
    model: &ModelSpec,
    mask: Option<&[bool]>,
) -> Result<Vec<f64>> {
    Likelihood::new(ts, mask, GridKind::Adaptive)?.by_dimension(model)
}
