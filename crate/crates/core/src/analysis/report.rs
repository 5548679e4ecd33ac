use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::KsTest;
use crate::estimate::{FitResult, PassSummary};
use crate::models::{DriftModel, NoiseModel, Role};

/// One estimated parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    /// one-based coordinate
    pub dimension: usize,
    pub role: Role,
    pub estimate: f64,
    pub std_error: f64,
    /// knot abscissa for spline parameters
    pub knot: Option<f64>,
}

/// Post-fit diagnostics attached to a report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// residual KS tests, one per coordinate
    pub ks: Vec<KsTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub converged: bool,
    pub parameters: Vec<ReportRow>,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_transitions: usize,
    pub n_objective_calls: usize,
    pub passes: Vec<PassSummary>,
    pub truncation_bounds: Option<Vec<(f64, f64)>>,
    pub ks: Vec<KsTest>,
    pub notes: Vec<String>,
}

/// Assemble the parameter table, likelihood summary and diagnostics of a fit.
pub fn model_report(fit: &FitResult, diagnostics: &Diagnostics) -> ModelReport {
    let parameters = fit
        .theta_hat
        .info
        .iter()
        .zip(&fit.theta_hat.values)
        .zip(&fit.std_errors)
        .map(|((info, v), se)| ReportRow {
            name: info.name.clone(),
            dimension: info.dimension + 1,
            role: info.role,
            estimate: *v,
            std_error: *se,
            knot: info.name.split_once('@').and_then(|(_, k)| k.parse().ok()),
        })
        .collect();
    let mut notes = fit.notes.clone();
    notes.push("stable laws use the S1 parameterization with unit scale and zero shift".into());
    notes.push(
        "transition density includes the 1/sigma(X) Jacobian factor of each coordinate".into(),
    );
    let spline = fit.model.dimensions.iter().any(|d| {
        matches!(d.drift, DriftModel::Spline { .. }) || matches!(d.noise, NoiseModel::Spline { .. })
    });
    if spline {
        notes.push(
            "splines are natural cubic (zero end curvature) and continue linearly beyond the end knots".into(),
        );
    }
    ModelReport {
        converged: fit.converged,
        parameters,
        loglik: fit.loglik,
        aic: fit.aic,
        bic: fit.bic,
        n_transitions: fit.n_transitions,
        n_objective_calls: fit.n_objective_calls,
        passes: fit.passes.clone(),
        truncation_bounds: fit.truncation_bounds.clone(),
        ks: diagnostics.ks.clone(),
        notes,
    }
}

impl ModelReport {
    /// Plain-text rendering.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if !self.converged {
            let _ = writeln!(
                s,
                "*** NOT CONVERGED: estimates are the best values found ***\n"
            );
        }
        let _ = writeln!(
            s,
            "converged: {}",
            if self.converged { "yes" } else { "NO" }
        );
        let width = self
            .parameters
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(4)
            .max(9);
        let _ = writeln!(
            s,
            "\n{:<width$}  {:>14}  {:>12}",
            "parameter", "estimate", "std. error"
        );
        for r in &self.parameters {
            let _ = writeln!(
                s,
                "{:<width$}  {:>14.6}  {:>12.6}",
                r.name, r.estimate, r.std_error
            );
        }
        let _ = writeln!(s, "\nlog-likelihood  {:.6}", self.loglik);
        let _ = writeln!(s, "AIC             {:.6}", self.aic);
        let _ = writeln!(s, "BIC             {:.6}", self.bic);
        let _ = writeln!(s, "transitions     {}", self.n_transitions);
        if self.passes.len() > 1 {
            for p in &self.passes {
                let _ = writeln!(
                    s,
                    "pass: {} -- log-likelihood {:.6} over {} transitions{}",
                    p.label,
                    p.loglik,
                    p.n_transitions,
                    if p.converged { "" } else { " (not converged)" }
                );
            }
        }
        if let Some(b) = &self.truncation_bounds {
            for (i, (lo, hi)) in b.iter().enumerate() {
                let _ = writeln!(s, "domain x{}: [{lo:.6}, {hi:.6}]", i + 1);
            }
        }
        for (i, k) in self.ks.iter().enumerate() {
            let _ = writeln!(
                s,
                "KS x{}: D = {:.6}, cutoff {:.6} at level {} -> {}",
                i + 1,
                k.statistic,
                k.critical,
                k.level,
                if k.pass { "pass" } else { "FAIL" }
            );
        }
        if !self.notes.is_empty() {
            let _ = writeln!(s, "\nnotes:");
            for n in &self.notes {
                let _ = writeln!(s, "  - {n}");
            }
        }
        s
    }
}
