//! Run configuration: one JSON document per run.

use std::path::{Path, PathBuf};

use levyfit::estimate::{truncation_bounds, FitOptions, Truncation};
use levyfit::likelihood::TimeSeries;
use levyfit::models::{equidistant_knots, DriftModel, ModelSpec, NoiseModel};
use levyfit::simulate::{SimConfig, EXPLOSION_CAP};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io;

fn default_cap() -> f64 {
    EXPLOSION_CAP
}

fn default_ks_level() -> f64 {
    0.01
}

/// Map applied to simulated values before they are written.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputTransform {
    #[default]
    None,
    Exp,
}

/// Map applied to data values after they are read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputTransform {
    #[default]
    None,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub x0: Vec<f64>,
    pub delta: f64,
    pub n_steps: usize,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default = "default_cap")]
    pub explosion_cap: f64,
    #[serde(default)]
    pub transform: OutputTransform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// CSV file, relative to the directory of the config file
    pub path: PathBuf,
    /// sampling step; required when the file has no `t` column
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub transform: InputTransform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    #[serde(default)]
    pub options: FitOptions,
    /// defaults to true exactly when a truncation is configured
    #[serde(default)]
    pub two_pass: Option<bool>,
    /// significance level of the residual KS tests
    #[serde(default = "default_ks_level")]
    pub ks_level: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            options: FitOptions::default(),
            two_pass: None,
            ks_level: default_ks_level(),
        }
    }
}

/// Equidistant knots replacing those of every spline in the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnotSection {
    pub count: usize,
    /// knot range; defaults to the truncation domain of the data
    #[serde(default)]
    pub lower: Option<f64>,
    #[serde(default)]
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub simulation: Option<SimulationSection>,
    #[serde(default)]
    pub data: Option<DataSection>,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub knots: Option<KnotSection>,
}

impl RunConfig {
    /// Read, resolve relative data paths and validate.
    pub fn load(path: &Path) -> CliResult<Self> {
        let mut cfg: RunConfig = io::read_json(path)?;
        if let Some(d) = &mut cfg.data {
            if d.path.is_relative() {
                let base = path.parent().unwrap_or(Path::new(""));
                d.path = base.join(&d.path);
            }
        }
        cfg.validate()
            .map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.model.validate()?;
        self.fit.options.validate()?;
        if !(self.fit.ks_level > 0.0 && self.fit.ks_level < 1.0) {
            return Err(CliError::config("fit.ks_level must lie in (0, 1)"));
        }
        if let Some(s) = &self.simulation {
            self.sim_config_from(s)?.validate()?;
        }
        if let Some(d) = &self.data {
            if let Some(delta) = d.delta {
                if !(delta > 0.0 && delta.is_finite()) {
                    return Err(CliError::config(format!(
                        "data.delta {delta} must be positive"
                    )));
                }
            }
        }
        if let Some(k) = &self.knots {
            if k.count < 3 {
                return Err(CliError::config("knots.count must be at least 3"));
            }
            if let (Some(l), Some(u)) = (k.lower, k.upper) {
                if !(l < u) {
                    return Err(CliError::config("knots.lower must be below knots.upper"));
                }
            }
        }
        Ok(())
    }

    fn sim_config_from(&self, s: &SimulationSection) -> CliResult<SimConfig> {
        Ok(SimConfig {
            model: self.model.clone(),
            x0: s.x0.clone(),
            delta: s.delta,
            n_steps: s.n_steps,
            seed: self.seed,
            burn_in: s.burn_in,
            explosion_cap: s.explosion_cap,
        })
    }

    pub fn sim_config(&self) -> CliResult<SimConfig> {
        let s = self
            .simulation
            .as_ref()
            .ok_or_else(|| CliError::config("config has no simulation section"))?;
        let c = self.sim_config_from(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn two_pass(&self) -> bool {
        self.fit
            .two_pass
            .unwrap_or(self.fit.options.truncation.is_some())
    }

    /// Fill every optional setting with its effective value.
    pub fn materialize(&mut self) {
        self.fit.two_pass = Some(self.two_pass());
        self.output = None;
    }

    /// Override every alpha (beta) in the model with a fixed value.
    pub fn fix_alpha(&mut self, alpha: f64) {
        for d in &mut self.model.dimensions {
            d.alpha.value = alpha;
            d.alpha.free = false;
        }
    }

    pub fn fix_beta(&mut self, beta: f64) {
        for d in &mut self.model.dimensions {
            d.beta.value = beta;
            d.beta.free = false;
        }
    }
}

/// Replace the knots of every spline in `model` by `k.count` equidistant
/// knots. Without explicit limits the knot range of coordinate `i` is the
/// truncation domain of `ts`.
pub fn apply_knots(
    model: &mut ModelSpec,
    k: &KnotSection,
    ts: &TimeSeries,
    trunc: &Truncation,
) -> CliResult<()> {
    let bounds = truncation_bounds(ts, trunc)?;
    let mut any = false;
    for (i, dm) in model.dimensions.iter_mut().enumerate() {
        let (lo, hi) = (
            k.lower.unwrap_or(bounds[i].0),
            k.upper.unwrap_or(bounds[i].1),
        );
        if !(lo < hi) {
            return Err(CliError::data(format!(
                "knot range [{lo}, {hi}] of x{} is empty",
                i + 1
            )));
        }
        let knots = equidistant_knots(lo, hi, k.count);
        if let DriftModel::Spline {
            knots: kn,
            ordinates,
            ..
        } = &mut dm.drift
        {
            *kn = knots.clone();
            ordinates.resize(k.count, 0.0);
            any = true;
        }
        if let NoiseModel::Spline {
            knots: kn,
            log_values,
            ..
        } = &mut dm.noise
        {
            let fill = log_values.first().copied().unwrap_or(0.0);
            *kn = knots;
            log_values.resize(k.count, fill);
            any = true;
        }
    }
    if !any {
        return Err(CliError::config(
            "knots were given but the model has no spline",
        ));
    }
    model.validate()?;
    Ok(())
}
