use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Kernels further than this many bandwidths away are ignored.
const KERNEL_REACH: f64 = 9.0;

/// Effective potential `U(x) = -ln p(x)` of a sample, shifted so its minimum
/// over the grid is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialCurve {
    pub abscissae: Vec<f64>,
    pub potential: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl PotentialCurve {
    /// Indices of the interior local minima of `U`, see [`local_minima`].
    pub fn minima(&self) -> Vec<usize> {
        local_minima(&self.potential, MIN_SEPARATION)
    }
}

/// Minimum distance in grid cells between reported minima.
pub const MIN_SEPARATION: usize = 3;

fn sorted(sample: &[f64]) -> Vec<f64> {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule `1.06 s n^{-1/5}`, where `s` is the smaller of the sample
/// standard deviation and `IQR / 1.349`.
pub fn silverman_bandwidth(sample: &[f64]) -> Result<f64> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::Data("a bandwidth needs at least 2 points".into()));
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let s = var.sqrt();
    if !(s > 0.0) {
        return Err(Error::Data("sample has zero variance".into()));
    }
    let srt = sorted(sample);
    let iqr = (quantile(&srt, 0.75) - quantile(&srt, 0.25)) / 1.349;
    let scale = if iqr > 0.0 { s.min(iqr) } else { s };
    Ok(1.06 * scale * (n as f64).powf(-0.2))
}

/// Gaussian kernel density estimate of `sample` at `points`.
pub fn kde(sample: &[f64], bandwidth: f64, points: &[f64]) -> Vec<f64> {
    let srt = sorted(sample);
    let norm = 1.0 / (srt.len() as f64 * bandwidth * SQRT_2PI);
    points
        .iter()
        .map(|&x| {
            let lo = srt.partition_point(|&v| v < x - KERNEL_REACH * bandwidth);
            let hi = srt.partition_point(|&v| v <= x + KERNEL_REACH * bandwidth);
            srt[lo..hi]
                .iter()
                .map(|v| {
                    let z = (x - v) / bandwidth;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// Evaluation window of [`effective_potential`]: the 0.5% to 99.5% quantile
/// range of the sample.
pub fn default_window(sample: &[f64]) -> (f64, f64) {
    let s = sorted(sample);
    (quantile(&s, 0.005), quantile(&s, 0.995))
}

/// Effective potential on `grid_size` equally spaced points over `window`
/// (default: [`default_window`]) with a Gaussian kernel density estimate.
pub fn effective_potential(
    sample: &[f64],
    grid_size: usize,
    bandwidth: Option<f64>,
    window: Option<(f64, f64)>,
) -> Result<PotentialCurve> {
    if sample.len() < 100 {
        return Err(Error::Data(format!(
            "effective potential needs at least 100 points, got {}",
            sample.len()
        )));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("sample contains non-finite values".into()));
    }
    if grid_size < 2 {
        return Err(Error::Config(
            "potential grid needs at least 2 points".into(),
        ));
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::Config(format!("bandwidth {h} must be positive"))),
        None => silverman_bandwidth(sample)?,
    };
    let (lo, hi) = window.unwrap_or_else(|| default_window(sample));
    if !(lo < hi) {
        return Err(Error::Data(
            "sample has no spread inside the evaluation window".into(),
        ));
    }
    let abscissae: Vec<f64> = (0..grid_size)
        .map(|k| lo + (hi - lo) * k as f64 / (grid_size - 1) as f64)
        .collect();
    let density = kde(sample, h, &abscissae);
    let raw: Vec<f64> = density
        .iter()
        .map(|p| -p.max(f64::MIN_POSITIVE).ln())
        .collect();
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PotentialCurve {
        abscissae,
        potential: raw.iter().map(|u| u - min).collect(),
        density,
        bandwidth: h,
    })
}

/// Interior grid points strictly below every other point within
/// `separation` cells on both sides.
pub fn local_minima(u: &[f64], separation: usize) -> Vec<usize> {
    let n = u.len();
    (1..n.saturating_sub(1))
        .filter(|&i| {
            let lo = i.saturating_sub(separation);
            let hi = (i + separation).min(n - 1);
            (lo..=hi).all(|j| j == i || u[i] < u[j])
        })
        .collect()
}
