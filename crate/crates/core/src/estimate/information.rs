//! Observed Fisher information by central differences and the standard
//! errors derived from it.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{GridKind, Likelihood, TimeSeries};
use crate::models::{pack_params, unpack_params, ParamVector, Transform};

/// Finite-difference step rule `h = max(minimum, relative * |theta|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HessianStep {
    pub relative: f64,
    pub minimum: f64,
}

impl Default for HessianStep {
    fn default() -> Self {
        Self {
            relative: 1e-4,
            minimum: 1e-4,
        }
    }
}

impl HessianStep {
    pub fn step(&self, v: f64) -> f64 {
        (self.relative * v.abs()).max(self.minimum)
    }
}

/// Negative Hessian of the log-likelihood in natural parameter units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Information {
    pub matrix: Vec<Vec<f64>>,
    /// parameters whose stencil had to be moved inside a bound
    pub one_sided: Vec<bool>,
}

/// Curvature-based uncertainty of the estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    pub std_errors: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub pseudo_inverse: bool,
    pub notes: Vec<String>,
}

fn bounds(t: Transform) -> (f64, f64) {
    match t {
        Transform::Identity => (f64::NEG_INFINITY, f64::INFINITY),
        Transform::Log => (0.0, f64::INFINITY),
        Transform::Alpha => (0.1, 2.0),
        Transform::Beta => (-1.0, 1.0),
    }
}

/// Observed information of the free parameters of `model` (in packing
/// order) for the transitions selected by `mask`.
///
/// Coordinates enter the likelihood as separate sums whose parameters do not
/// overlap, so only the blocks within one coordinate are differenced; the
/// blocks coupling different coordinates are zero.
pub fn observed_information(
    ts: &TimeSeries,
    model: &crate::models::ModelSpec,
    mask: Option<&[bool]>,
) -> Result<Information> {
    let lik = Likelihood::new(ts, mask, GridKind::Uniform)?;
    let theta = pack_params(model);
    observed_information_with(&lik, &theta, model, &HessianStep::default(), |_| true)
}

/// Information restricted to the parameters selected by `keep`; entries
/// outside the selection are zero.
pub(crate) fn observed_information_with(
    lik: &Likelihood,
    theta: &ParamVector,
    model: &crate::models::ModelSpec,
    rule: &HessianStep,
    keep: impl Fn(usize) -> bool,
) -> Result<Information> {
    let p = theta.len();
    let mut center = theta.values.clone();
    let mut steps = vec![0.0; p];
    let mut one_sided = vec![false; p];
    for k in 0..p {
        let (lo, hi) = bounds(theta.info[k].transform);
        let mut h = rule.step(center[k]);
        if theta.info[k].transform == Transform::Log {
            h = h.min(0.25 * center[k]);
        }
        if center[k] + h > hi {
            center[k] = hi - h;
            one_sided[k] = true;
        } else if center[k] - h < lo {
            center[k] = lo + h;
            one_sided[k] = true;
        }
        steps[k] = h;
    }
    let eval = |values: &[f64], dim: usize| -> Result<f64> {
        let m = unpack_params(
            &ParamVector {
                values: values.to_vec(),
                info: theta.info.clone(),
            },
            model,
        )?;
        let cm = m.compile()?;
        Ok(-lik.dimension(&cm, dim)?)
    };
    let mut h = vec![vec![0.0; p]; p];
    for dim in 0..model.dim() {
        let idx: Vec<usize> = (0..p)
            .filter(|&k| theta.info[k].dimension == dim && keep(k))
            .collect();
        if idx.is_empty() {
            continue;
        }
        let f0 = eval(&center, dim)?;
        let shifted = |moves: &[(usize, f64)]| -> Result<f64> {
            let mut v = center.clone();
            for &(k, s) in moves {
                v[k] += s * steps[k];
            }
            eval(&v, dim)
        };
        for (a, &i) in idx.iter().enumerate() {
            let fp = shifted(&[(i, 1.0)])?;
            let fm = shifted(&[(i, -1.0)])?;
            h[i][i] = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
            for &j in &idx[a + 1..] {
                let fpp = shifted(&[(i, 1.0), (j, 1.0)])?;
                let fpm = shifted(&[(i, 1.0), (j, -1.0)])?;
                let fmp = shifted(&[(i, -1.0), (j, 1.0)])?;
                let fmm = shifted(&[(i, -1.0), (j, -1.0)])?;
                let v = (fpp - fpm - fmp + fmm) / (4.0 * steps[i] * steps[j]);
                h[i][j] = v;
                h[j][i] = v;
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            let s = 0.5 * (h[i][j] + h[j][i]);
            h[i][j] = s;
            h[j][i] = s;
        }
    }
    if h.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("information matrix is not finite".into()));
    }
    Ok(Information {
        matrix: h,
        one_sided,
    })
}

/// Covariance as the inverse of the information, with a pseudo-inverse when
/// the information is singular; standard errors are the square roots of its
/// diagonal (NaN where the diagonal is negative).
pub fn standard_errors(info: &[Vec<f64>]) -> StandardErrors {
    let p = info.len();
    let mut notes = Vec::new();
    let f = DMatrix::from_fn(p, p, |i, j| info[i][j]);
    let scale = f
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let svd = f.clone().svd(false, false);
    let smin = svd.singular_values.min();
    let singular = p > 0 && !(smin > 1e-13 * scale);
    let (cov, pseudo) = match (singular, f.clone().try_inverse()) {
        (false, Some(inv)) => (inv, false),
        _ => {
            notes.push("information matrix is singular; covariance from its pseudo-inverse".into());
            let pinv = f
                .pseudo_inverse(1e-12 * scale)
                .unwrap_or_else(|_| DMatrix::from_element(p, p, f64::NAN));
            (pinv, true)
        }
    };
    let cov = 0.5 * (&cov + cov.transpose());
    let mut se = Vec::with_capacity(p);
    for i in 0..p {
        let v = cov[(i, i)];
        if v >= 0.0 {
            se.push(v.sqrt());
        } else {
            notes.push(format!(
                "covariance diagonal {} is negative; its standard error is undefined",
                i + 1
            ));
            se.push(f64::NAN);
        }
    }
    StandardErrors {
        std_errors: se,
        covariance: (0..p)
            .map(|i| (0..p).map(|j| cov[(i, j)]).collect())
            .collect(),
        pseudo_inverse: pseudo,
        notes,
    }
}
