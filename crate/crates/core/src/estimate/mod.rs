//! Maximum-likelihood fitting, observed information and the two-pass
//! domain-truncated fit.
//!
//! The objective is minimized by simplex search over unbounded coordinates
//! (log for intensities, scaled logistic for alpha, tanh for beta). Because
//! the log-likelihood is a sum of per-coordinate terms with disjoint
//! parameters, each coordinate's block is optimized on its own.

mod information;
mod init;
mod simplex;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{GridKind, Likelihood, TimeSeries};
use crate::models::{pack_params, unpack_params, ModelSpec, ParamVector, Role, Transform};

pub use information::{
    observed_information, standard_errors, HessianStep, Information, StandardErrors,
};
pub use init::{initialize_params, ALPHA_START, BETA_START};

/// Fraction of removed transitions above which a truncation is refused.
pub const TRUNCATION_ERROR_FRACTION: f64 = 0.95;
/// Fraction of removed transitions above which a truncation is flagged.
pub const TRUNCATION_WARNING_FRACTION: f64 = 0.5;

/// State-space domain used for drift and noise estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Truncation {
    /// empirical quantiles of every coordinate
    Quantiles { lo: f64, hi: f64 },
    /// explicit per-coordinate bounds
    Bounds { lower: Vec<f64>, upper: Vec<f64> },
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Quantiles {
            lo: 0.005,
            hi: 0.995,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    /// relative objective spread at which the simplex stops
    pub tolerance: f64,
    /// iteration cap per coordinate block; default 2000 per free parameter
    pub max_iterations: Option<usize>,
    pub multistart: usize,
    pub seed: u64,
    pub truncation: Option<Truncation>,
    pub hessian_step: HessianStep,
    /// start from data-driven values instead of the template's
    pub initialize: bool,
    /// starting values by parameter name, applied after initialization
    pub initial: BTreeMap<String, f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: None,
            multistart: 1,
            seed: 0,
            truncation: None,
            hessian_step: HessianStep::default(),
            initialize: true,
            initial: BTreeMap::new(),
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.multistart < 1 {
            return Err(Error::Config("multistart must be at least 1".into()));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        if !(self.hessian_step.relative > 0.0 && self.hessian_step.minimum > 0.0) {
            return Err(Error::Config("Hessian steps must be positive".into()));
        }
        match &self.truncation {
            Some(Truncation::Quantiles { lo, hi }) if !(0.0 <= *lo && lo < hi && *hi <= 1.0) => {
                Err(Error::Config(format!(
                    "truncation quantiles need 0 <= lo < hi <= 1, got ({lo}, {hi})"
                )))
            }
            Some(Truncation::Bounds { lower, upper })
                if lower.len() != upper.len() || lower.iter().zip(upper).any(|(l, u)| !(l < u)) =>
            {
                Err(Error::Config(
                    "truncation bounds need lower < upper in every coordinate".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Outcome of one optimization pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassSummary {
    pub label: String,
    pub loglik: f64,
    pub n_transitions: usize,
    pub converged: bool,
    pub n_objective_calls: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// fitted model, frozen parameters included
    pub model: ModelSpec,
    pub theta_hat: ParamVector,
    pub std_errors: Vec<f64>,
    /// log-likelihood of the fitted model over all transitions
    pub loglik: f64,
    pub observed_information: Vec<Vec<f64>>,
    pub covariance: Vec<Vec<f64>>,
    pub converged: bool,
    pub n_objective_calls: usize,
    pub n_transitions: usize,
    pub aic: f64,
    pub bic: f64,
    pub passes: Vec<PassSummary>,
    /// per-coordinate (lower, upper) domain of the drift and noise fit
    pub truncation_bounds: Option<Vec<(f64, f64)>>,
    pub notes: Vec<String>,
}

struct Optimized {
    model: ModelSpec,
    converged: bool,
    calls: usize,
}

fn initial_step(t: Transform, u: f64) -> f64 {
    match t {
        Transform::Identity => (0.1 * u.abs()).max(0.01),
        Transform::Log => 0.1,
        Transform::Alpha => 0.2,
        Transform::Beta => 0.1,
    }
}

/// Minimize `-loglik` over the free parameters of `start`, one coordinate
/// block at a time.
fn optimize(lik: &Likelihood, start: &ModelSpec, opts: &FitOptions) -> Result<Optimized> {
    let theta = pack_params(start);
    if theta.is_empty() {
        return Err(Error::Config("the model has no free parameters".into()));
    }
    let calls = AtomicUsize::new(0);
    let mut values = theta.values.clone();
    let mut converged = true;
    for dim in 0..start.dim() {
        let idx: Vec<usize> = (0..theta.len())
            .filter(|&k| theta.info[k].dimension == dim)
            .collect();
        if idx.is_empty() {
            continue;
        }
        let transforms: Vec<Transform> = idx.iter().map(|&k| theta.info[k].transform).collect();
        let objective = |u: &[f64]| -> f64 {
            calls.fetch_add(1, Ordering::Relaxed);
            let mut v = values.clone();
            for ((&k, t), u) in idx.iter().zip(&transforms).zip(u) {
                v[k] = t.from_unbounded(*u);
            }
            let m = match unpack_params(
                &ParamVector {
                    values: v,
                    info: theta.info.clone(),
                },
                start,
            )
            .and_then(|m| m.compile())
            {
                Ok(m) => m,
                Err(_) => return f64::INFINITY,
            };
            match lik.dimension(&m, dim) {
                Ok(l) if l.is_finite() => -l,
                _ => f64::INFINITY,
            }
        };
        let u0: Vec<f64> = idx
            .iter()
            .zip(&transforms)
            .map(|(&k, t)| t.to_unbounded(values[k]))
            .collect();
        let steps: Vec<f64> = u0
            .iter()
            .zip(&transforms)
            .map(|(u, t)| initial_step(*t, *u))
            .collect();
        let budget = opts.max_iterations.unwrap_or(2000 * idx.len());
        let mut best: Option<simplex::Outcome> = None;
        for replica in 0..opts.multistart {
            let x0: Vec<f64> = if replica == 0 {
                u0.clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(((dim as u64) << 32) | replica as u64);
                u0.iter()
                    .zip(&steps)
                    .map(|(u, s)| u + 2.0 * s * rng.random_range(-1.0..1.0))
                    .collect()
            };
            let out = simplex::minimize(&objective, &x0, &steps, opts.tolerance, budget);
            if best.as_ref().is_none_or(|b| out.f < b.f) {
                best = Some(out);
            }
        }
        let best = best.expect("multistart is at least 1");
        if !best.f.is_finite() {
            return Err(Error::Optimization(format!(
                "every trial parameter vector of coordinate {} was rejected",
                dim + 1
            )));
        }
        converged &= best.converged;
        for ((&k, t), u) in idx.iter().zip(&transforms).zip(&best.x) {
            values[k] = t.from_unbounded(*u);
        }
    }
    let model = unpack_params(
        &ParamVector {
            values,
            info: theta.info,
        },
        start,
    )?;
    Ok(Optimized {
        model,
        converged,
        calls: calls.into_inner(),
    })
}

fn starting_model(
    ts: &TimeSeries,
    template: &ModelSpec,
    opts: &FitOptions,
    mask: Option<&[bool]>,
) -> Result<ModelSpec> {
    let mut start = if opts.initialize {
        initialize_params(ts, template, mask)?
    } else {
        template.clone()
    };
    if !opts.initial.is_empty() {
        let mut theta = pack_params(&start);
        for (name, v) in &opts.initial {
            let k = theta.position(name).ok_or_else(|| {
                Error::Config(format!("unknown parameter '{name}' in initial values"))
            })?;
            theta.values[k] = *v;
        }
        start = unpack_params(&theta, &start)?;
    }
    start.validate()?;
    Ok(start)
}

fn boundary_notes(theta: &ParamVector, info: &Information) -> Vec<String> {
    let mut notes = Vec::new();
    for (k, p) in theta.info.iter().enumerate() {
        let v = theta.values[k];
        if p.role == Role::Alpha && v > 2.0 - 1e-3 {
            notes.push(format!(
                "{} = {v} is at the upper bound 2; its standard error is one-sided",
                p.name
            ));
        } else if p.role == Role::Beta && v.abs() > 1.0 - 1e-3 {
            notes.push(format!(
                "{} = {v} is at a bound; its standard error is one-sided",
                p.name
            ));
        } else if info.one_sided[k] {
            notes.push(format!(
                "{} is close to a bound; curvature taken one-sided",
                p.name
            ));
        }
    }
    notes
}

fn criteria(loglik: f64, k: usize, n: usize) -> (f64, f64) {
    let k = k as f64;
    (2.0 * k - 2.0 * loglik, k * (n as f64).ln() - 2.0 * loglik)
}

/// Maximum-likelihood fit of the free parameters of `template` over all
/// transitions of `ts`.
pub fn fit_mle(ts: &TimeSeries, template: &ModelSpec, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    let start = starting_model(ts, template, opts, None)?;
    let lik = Likelihood::new(ts, None, GridKind::Adaptive)?;
    let fit = optimize(&lik, &start, opts)?;
    let loglik = lik.total(&fit.model)?;
    let theta = pack_params(&fit.model);
    let curvature = Likelihood::new(ts, None, GridKind::Uniform)?;
    let info = information::observed_information_with(
        &curvature,
        &theta,
        &fit.model,
        &opts.hessian_step,
        |_| true,
    )?;
    let se = standard_errors(&info.matrix);
    let mut notes = boundary_notes(&theta, &info);
    notes.extend(se.notes.iter().cloned());
    if !fit.converged {
        notes.push("optimizer stopped at the iteration limit before converging".into());
    }
    let n = lik.included();
    let (aic, bic) = criteria(loglik, theta.len(), n);
    Ok(FitResult {
        model: fit.model,
        theta_hat: theta,
        std_errors: se.std_errors,
        loglik,
        observed_information: info.matrix,
        covariance: se.covariance,
        converged: fit.converged,
        n_objective_calls: fit.calls,
        n_transitions: n,
        aic,
        bic,
        passes: vec![PassSummary {
            label: "all parameters, all transitions".into(),
            loglik,
            n_transitions: n,
            converged: fit.converged,
            n_objective_calls: fit.calls,
        }],
        truncation_bounds: None,
        notes,
    })
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-coordinate `(lower, upper)` domain of a truncation.
pub fn truncation_bounds(ts: &TimeSeries, t: &Truncation) -> Result<Vec<(f64, f64)>> {
    match t {
        Truncation::Quantiles { lo, hi } => Ok((0..ts.dim())
            .map(|i| {
                let mut c = ts.column(i);
                c.sort_by(f64::total_cmp);
                (quantile(&c, *lo), quantile(&c, *hi))
            })
            .collect()),
        Truncation::Bounds { lower, upper } => {
            if lower.len() != ts.dim() {
                return Err(Error::Config(format!(
                    "truncation bounds given for {} coordinates, data has {}",
                    lower.len(),
                    ts.dim()
                )));
            }
            Ok(lower.iter().copied().zip(upper.iter().copied()).collect())
        }
    }
}

/// Transitions whose origin lies inside `bounds` in every coordinate.
pub fn truncation_mask(ts: &TimeSeries, bounds: &[(f64, f64)]) -> Vec<bool> {
    (0..ts.len() - 1)
        .map(|t| {
            ts.row(t)
                .iter()
                .zip(bounds)
                .all(|(x, (l, u))| *l <= *x && *x <= *u)
        })
        .collect()
}

/// Two-pass fit: drift and noise intensity (with alpha and beta) from the
/// transitions starting inside the truncation domain, then alpha and beta
/// alone from all transitions with drift and noise held at their pass-one
/// values.
///
/// Without a truncation in `opts` the default 0.5% / 99.5% quantile domain is
/// used. Standard errors of drift and noise parameters come from the
/// pass-one curvature; those of alpha and beta from the all-transition
/// curvature.
pub fn two_pass_fit(ts: &TimeSeries, template: &ModelSpec, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    let trunc = opts.truncation.clone().unwrap_or_default();
    let bounds = truncation_bounds(ts, &trunc)?;
    let mask = truncation_mask(ts, &bounds);
    let total = mask.len();
    let kept = mask.iter().filter(|&&b| b).count();
    let removed = 1.0 - kept as f64 / total as f64;
    let mut notes = Vec::new();
    if removed > TRUNCATION_ERROR_FRACTION {
        return Err(Error::Config(format!(
            "truncation removes {:.1}% of transitions (limit {:.0}%)",
            100.0 * removed,
            100.0 * TRUNCATION_ERROR_FRACTION
        )));
    }
    if removed > TRUNCATION_WARNING_FRACTION {
        notes.push(format!(
            "warning: truncation removes {:.1}% of transitions",
            100.0 * removed
        ));
    }
    notes.push(
        "two-pass fit: drift and noise from transitions inside the truncation domain, alpha and beta refit on all transitions"
            .into(),
    );

    let start = starting_model(ts, template, opts, Some(&mask))?;
    let lik1 = Likelihood::new(ts, Some(&mask), GridKind::Adaptive)?;
    let pass1 = optimize(&lik1, &start, opts)?;
    let loglik1 = lik1.total(&pass1.model)?;
    let mut passes = vec![PassSummary {
        label: "all parameters, truncated transitions".into(),
        loglik: loglik1,
        n_transitions: kept,
        converged: pass1.converged,
        n_objective_calls: pass1.calls,
    }];

    let lik2 = Likelihood::new(ts, None, GridKind::Adaptive)?;
    let stable_only = pass1.model.freeze_drift_and_noise();
    let has_stable = !pack_params(&stable_only).is_empty();
    let mut model = pass1.model.clone();
    let mut converged = pass1.converged;
    let mut calls = pass1.calls;
    if has_stable {
        let pass2 = optimize(&lik2, &stable_only, opts)?;
        let loglik2 = lik2.total(&pass2.model)?;
        passes.push(PassSummary {
            label: "alpha and beta, all transitions".into(),
            loglik: loglik2,
            n_transitions: total,
            converged: pass2.converged,
            n_objective_calls: pass2.calls,
        });
        converged &= pass2.converged;
        calls += pass2.calls;
        for (dm, fitted) in model.dimensions.iter_mut().zip(&pass2.model.dimensions) {
            dm.alpha.value = fitted.alpha.value;
            dm.beta.value = fitted.beta.value;
        }
    }
    let loglik = lik2.total(&model)?;
    let theta = pack_params(&model);
    let is_stable = |k: usize| matches!(theta.info[k].role, Role::Alpha | Role::Beta);
    let curv1 = Likelihood::new(ts, Some(&mask), GridKind::Uniform)?;
    let mut info =
        information::observed_information_with(&curv1, &theta, &model, &opts.hessian_step, |_| {
            true
        })?;
    if has_stable {
        let curv2 = Likelihood::new(ts, None, GridKind::Uniform)?;
        let info2 = information::observed_information_with(
            &curv2,
            &theta,
            &model,
            &opts.hessian_step,
            is_stable,
        )?;
        for i in (0..theta.len()).filter(|&k| is_stable(k)) {
            for j in (0..theta.len()).filter(|&k| is_stable(k)) {
                info.matrix[i][j] = info2.matrix[i][j];
            }
            info.one_sided[i] = info2.one_sided[i];
        }
    }
    let se = standard_errors(&info.matrix);
    notes.extend(boundary_notes(&theta, &info));
    notes.extend(se.notes.iter().cloned());
    if !converged {
        notes.push("optimizer stopped at the iteration limit before converging".into());
    }
    let (aic, bic) = criteria(loglik, theta.len(), total);
    Ok(FitResult {
        model,
        theta_hat: theta,
        std_errors: se.std_errors,
        loglik,
        observed_information: info.matrix,
        covariance: se.covariance,
        converged,
        n_objective_calls: calls,
        n_transitions: total,
        aic,
        bic,
        passes,
        truncation_bounds: Some(bounds),
        notes,
    })
}
