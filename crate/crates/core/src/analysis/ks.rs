use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::Residuals;
use crate::stable::{CdfGrid, StableParams};

/// Kolmogorov–Smirnov comparison of residuals with a stable law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    /// largest statistic accepted at `level`
    pub critical: f64,
    pub level: f64,
    pub n: usize,
    pub pass: bool,
}

/// Largest distance between the empirical distribution of `sample` and
/// `cdf`.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            (f - k as f64 / n).max((k + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0)
}

/// Asymptotic Kolmogorov cutoff for `n` points at significance `level`, with
/// Stephens' finite-sample correction.
pub fn ks_critical(n: usize, level: f64) -> f64 {
    let k = (-0.5 * (0.5 * level).ln()).sqrt();
    let rn = (n as f64).sqrt();
    k / (rn + 0.12 + 0.11 / rn)
}

/// KS test of the included residuals of coordinate `dim` against `p`.
pub fn ks_residual_test(
    res: &Residuals,
    dim: usize,
    p: &StableParams,
    level: f64,
) -> Result<KsTest> {
    p.validate()?;
    if dim >= res.dim() {
        return Err(Error::Config(format!(
            "coordinate {} requested from {}-dimensional residuals",
            dim + 1,
            res.dim()
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("level {level} must lie in (0, 1)")));
    }
    let sample = res.included(dim);
    if sample.is_empty() {
        return Err(Error::Degenerate("no residuals left after masking".into()));
    }
    if sample.len() < 100 {
        return Err(Error::Data(format!(
            "KS test needs at least 100 residuals, got {}",
            sample.len()
        )));
    }
    let grid = CdfGrid::new(p.alpha, p.beta, 1.0 - 1e-6)?;
    let statistic = ks_distance(&sample, |x| grid.cdf(p.standardize(x)));
    let critical = ks_critical(sample.len(), level);
    Ok(KsTest {
        statistic,
        critical,
        level,
        n: sample.len(),
        pass: statistic < critical,
    })
}
