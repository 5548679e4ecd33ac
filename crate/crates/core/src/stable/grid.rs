//! Tabulated log-density and distribution function of a standard stable law.
//!
//! Nodes are placed in `t = asinh((z - c) / s)` where `c` is the center of
//! the law, so spacing is fine in the bulk and grows geometrically into the
//! tails. A coarse uniform layer in `t` is refined by bisection wherever the
//! cubic prediction of a midpoint misses its computed value. Values between
//! nodes come from four-point Lagrange interpolation of the logarithm;
//! beyond the outermost node the tail series takes over.

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use super::tail::{leading_constant, series_radius, TailSeries};
use super::{effective_alpha, s1_center, std_cdf_pair, std_ln_pdf, StableParams, ALPHA_ONE_BAND};
use crate::error::{Error, Result};

/// Accepted miss of the cubic midpoint prediction, in log units.
const REFINE_TOL: f64 = 2e-6;

/// Node spacing policy.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Resolution {
    /// spacing of the first layer in `t`
    step: f64,
    /// maximum number of bisection passes
    levels: u32,
    /// relative tolerance of the quadrature behind each node
    node_tol: f64,
}

/// Coarse layer refined where needed; the default.
const ADAPTIVE: Resolution = Resolution {
    step: 0.16,
    levels: 6,
    node_tol: 1e-9,
};

/// Fixed fine spacing. Node positions then move smoothly with (alpha, beta),
/// which keeps finite differences of the likelihood in those parameters clean.
const UNIFORM: Resolution = Resolution {
    step: 0.005,
    levels: 0,
    node_tol: 1e-11,
};

const LN_2_SQRT_PI: f64 = 1.265_512_123_484_645_4;

/// Leading power-law constants: f(z) ~ C |z|^(-alpha-1) on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCoefficients {
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Gaussian,
    Cauchy,
    Tabulated,
}

/// Node placement and tail data shared by the density and distribution tables.
#[derive(Debug, Clone)]
struct Layout {
    center: f64,
    scale: f64,
    /// largest |t| covered
    extent: f64,
    symmetric: bool,
    res: Resolution,
    /// shift of the variable when evaluation snaps alpha out of the band around 1
    eval_shift: f64,
    right: Option<TailSeries>,
    left: Option<TailSeries>,
}

impl Layout {
    fn new(alpha: f64, beta: f64, coverage: f64, res: Resolution) -> Self {
        let center = s1_center(alpha, beta);
        let scale = 1.0 / gamma(1.0 + 1.0 / alpha).max(1.0);
        let eval_alpha = if alpha != 1.0 && (alpha - 1.0).abs() < ALPHA_ONE_BAND {
            if alpha > 1.0 {
                1.0 + ALPHA_ONE_BAND
            } else {
                1.0 - ALPHA_ONE_BAND
            }
        } else {
            alpha
        };
        let eval_shift = s1_center(eval_alpha, beta) - center;
        let mut radius = 2.0 * (1.0 / (1.0 - coverage)).ln().sqrt() + 1.0;
        let (right, left) = if alpha < 2.0 {
            let series = series_radius(eval_alpha, beta);
            let c = leading_constant(eval_alpha, beta.abs());
            let cov = (2.0 * c / (eval_alpha * (1.0 - coverage))).powf(1.0 / eval_alpha);
            radius = radius.max(series).max(cov);
            (
                TailSeries::new(eval_alpha, beta, series),
                TailSeries::new(eval_alpha, -beta, series),
            )
        } else {
            (None, None)
        };
        let extent = ((radius / scale).asinh() / res.step).ceil() * res.step;
        Self {
            center,
            scale,
            extent,
            symmetric: beta == 0.0,
            res,
            eval_shift,
            right,
            left,
        }
    }

    fn z_at(&self, t: f64) -> f64 {
        self.center + self.scale * t.sinh()
    }

    fn t_of(&self, z: f64) -> f64 {
        ((z - self.center) / self.scale).asinh()
    }

    /// Variable at which the tail series of the right (or mirrored left) side is evaluated.
    fn tail_arg(&self, z: f64) -> f64 {
        z + self.eval_shift
    }
}

/// Cubic through four (t, v) points, evaluated at `t`.
fn cubic(ts: &[f64], vs: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let mut w = 1.0;
        for j in 0..4 {
            if j != i {
                w *= (t - ts[j]) / (ts[i] - ts[j]);
            }
        }
        acc += w * vs[i];
    }
    acc
}

/// Index of the first node of the four-point stencil around `t`.
fn stencil(ts: &[f64], t: f64) -> usize {
    let i = ts.partition_point(|&x| x <= t);
    i.saturating_sub(2).min(ts.len() - 4)
}

fn miss(pred: f64, actual: f64) -> f64 {
    if pred.is_finite() && actual.is_finite() {
        (pred - actual).abs()
    } else if !pred.is_finite() && !actual.is_finite() {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Adaptive table of `K` log-valued functions over `t` in `[t0, t1]`.
fn tabulate<const K: usize, F>(layout: &Layout, t0: f64, t1: f64, f: F) -> (Vec<f64>, Vec<[f64; K]>)
where
    F: Fn(f64) -> [f64; K] + Sync,
{
    let step = layout.res.step;
    let n = ((t1 - t0) / step).round() as usize;
    let mut ts: Vec<f64> = (0..=n).map(|k| t0 + k as f64 * step).collect();
    let mut vals: Vec<[f64; K]> = ts.par_iter().map(|&t| f(layout.z_at(t))).collect();
    let mut active = vec![true; n];
    for _ in 0..layout.res.levels {
        let todo: Vec<usize> = (0..active.len()).filter(|&i| active[i]).collect();
        if todo.is_empty() {
            break;
        }
        let mids: Vec<[f64; K]> = todo
            .par_iter()
            .map(|&i| f(layout.z_at(0.5 * (ts[i] + ts[i + 1]))))
            .collect();
        let mut nts = Vec::with_capacity(ts.len() + todo.len());
        let mut nvals = Vec::with_capacity(ts.len() + todo.len());
        let mut nactive = Vec::with_capacity(active.len() + todo.len());
        let mut next = 0;
        for i in 0..active.len() {
            nts.push(ts[i]);
            nvals.push(vals[i]);
            if !active[i] {
                nactive.push(false);
                continue;
            }
            let tm = 0.5 * (ts[i] + ts[i + 1]);
            let m = mids[next];
            next += 1;
            let j = i.saturating_sub(1).min(ts.len().saturating_sub(4));
            let err = if ts.len() >= 4 {
                (0..K)
                    .map(|k| {
                        let vs: Vec<f64> = vals[j..j + 4].iter().map(|v| v[k]).collect();
                        miss(cubic(&ts[j..j + 4], &vs, tm), m[k])
                    })
                    .fold(0.0, f64::max)
            } else {
                f64::INFINITY
            };
            nts.push(tm);
            nvals.push(m);
            nactive.push(err > REFINE_TOL);
            nactive.push(err > REFINE_TOL);
        }
        nts.push(ts[ts.len() - 1]);
        nvals.push(vals[vals.len() - 1]);
        ts = nts;
        vals = nvals;
        active = nactive;
    }
    (ts, vals)
}

/// Build the full table. When the law is symmetric only the right half is
/// computed and `mirror` maps a node's values to those at the reflected node.
fn table<const K: usize, F>(
    layout: &Layout,
    f: F,
    mirror: fn([f64; K]) -> [f64; K],
) -> (Vec<f64>, Vec<Vec<f64>>)
where
    F: Fn(f64) -> [f64; K] + Sync,
{
    let (ts, vals) = if layout.symmetric {
        let (ts, vals) = tabulate(layout, 0.0, layout.extent, f);
        let mut full_t: Vec<f64> = ts[1..].iter().rev().map(|t| -t).collect();
        full_t.extend_from_slice(&ts);
        let mut full_v: Vec<[f64; K]> = vals[1..].iter().rev().map(|&v| mirror(v)).collect();
        full_v.extend_from_slice(&vals);
        (full_t, full_v)
    } else {
        tabulate(layout, -layout.extent, layout.extent, f)
    };
    let mut columns: Vec<Vec<f64>> = (0..K)
        .map(|k| vals.iter().map(|v| v[k]).collect())
        .collect();
    for c in &mut columns {
        continue_linearly(&ts, c);
    }
    (ts, columns)
}

/// Replace non-finite entries by linear continuation in `t` from the center outwards.
fn continue_linearly(ts: &[f64], values: &mut [f64]) {
    let n = values.len();
    let mid = ts.partition_point(|&t| t < 0.0).min(n - 1);
    for k in mid + 1..n {
        if !values[k].is_finite() {
            values[k] = if k >= mid + 2 {
                let slope = (values[k - 1] - values[k - 2]) / (ts[k - 1] - ts[k - 2]);
                values[k - 1] + slope * (ts[k] - ts[k - 1])
            } else {
                values[k - 1]
            };
        }
    }
    for k in (0..mid).rev() {
        if !values[k].is_finite() {
            values[k] = if k + 2 <= mid {
                let slope = (values[k + 2] - values[k + 1]) / (ts[k + 2] - ts[k + 1]);
                values[k + 1] - slope * (ts[k + 1] - ts[k])
            } else {
                values[k + 1]
            };
        }
    }
}

fn check(alpha: f64, beta: f64, coverage: f64) -> Result<()> {
    StableParams::standard(alpha, beta)?;
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(Error::ParameterDomain(format!(
            "coverage = {coverage} outside (0, 1)"
        )));
    }
    Ok(())
}

/// Straight-line continuation of a table column in `z` beyond its last node.
fn extend(zs: &[f64], vs: &[f64], z: f64) -> f64 {
    let n = zs.len();
    if z > zs[n - 1] {
        vs[n - 1] + (vs[n - 1] - vs[n - 2]) / (zs[n - 1] - zs[n - 2]) * (z - zs[n - 1])
    } else {
        vs[0] + (vs[1] - vs[0]) / (zs[1] - zs[0]) * (z - zs[0])
    }
}

/// Log-density table of the standard law `S(alpha, beta, 1, 0; 1)`.
///
/// Immutable once built and cheap to share across threads.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    alpha: f64,
    beta: f64,
    shape: Shape,
    layout: Layout,
    ts: Vec<f64>,
    abscissae: Vec<f64>,
    log_pdf_values: Vec<f64>,
    tail_coefficients: TailCoefficients,
}

/// Tabulate the standard log-density so that at least `coverage` of the
/// probability lies inside the table.
pub fn build_density_grid(alpha: f64, beta: f64, coverage: f64) -> Result<DensityGrid> {
    DensityGrid::build(alpha, beta, coverage, ADAPTIVE)
}

impl DensityGrid {
    /// Like [`build_density_grid`] but with a fixed fine node spacing. Slower
    /// to build; interpolation error is smaller and varies smoothly with the
    /// parameters.
    pub fn uniform(alpha: f64, beta: f64, coverage: f64) -> Result<Self> {
        Self::build(alpha, beta, coverage, UNIFORM)
    }

    fn build(alpha: f64, beta: f64, coverage: f64, res: Resolution) -> Result<Self> {
        check(alpha, beta, coverage)?;
        let alpha = effective_alpha(alpha);
        let shape = if alpha == 2.0 {
            Shape::Gaussian
        } else if alpha == 1.0 && beta == 0.0 {
            Shape::Cauchy
        } else {
            Shape::Tabulated
        };
        let layout = Layout::new(alpha, beta, coverage, res);
        let node_tol = res.node_tol;
        let (ts, mut columns) = match shape {
            Shape::Gaussian => table(&layout, |z| [-0.25 * z * z - LN_2_SQRT_PI], |v| v),
            Shape::Cauchy => table(
                &layout,
                |z| [-(std::f64::consts::PI * (1.0 + z * z)).ln()],
                |v| v,
            ),
            Shape::Tabulated => table(&layout, |z| [std_ln_pdf(z, alpha, beta, node_tol)], |v| v),
        };
        let log_pdf_values = columns.pop().unwrap_or_default();
        if log_pdf_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Quadrature {
                achieved: f64::NAN,
                requested: node_tol,
            });
        }
        let abscissae = ts.iter().map(|&t| layout.z_at(t)).collect();
        let tail_coefficients = if alpha >= 2.0 {
            TailCoefficients {
                left: 0.0,
                right: 0.0,
            }
        } else {
            TailCoefficients {
                left: leading_constant(alpha, -beta),
                right: leading_constant(alpha, beta),
            }
        };
        Ok(DensityGrid {
            alpha,
            beta,
            shape,
            layout,
            ts,
            abscissae,
            log_pdf_values,
            tail_coefficients,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Standardized node positions, strictly increasing.
    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn log_pdf_values(&self) -> &[f64] {
        &self.log_pdf_values
    }

    pub fn tail_coefficients(&self) -> TailCoefficients {
        self.tail_coefficients
    }

    /// Log-density of the standard law at `z`.
    pub fn ln_pdf(&self, z: f64) -> f64 {
        match self.shape {
            Shape::Gaussian => return -0.25 * z * z - LN_2_SQRT_PI,
            Shape::Cauchy => return -(std::f64::consts::PI * (1.0 + z * z)).ln(),
            Shape::Tabulated => {}
        }
        let t = self.layout.t_of(z);
        let n = self.ts.len();
        if t >= self.ts[0] && t <= self.ts[n - 1] {
            let j = stencil(&self.ts, t);
            return cubic(&self.ts[j..j + 4], &self.log_pdf_values[j..j + 4], t);
        }
        if t.is_nan() {
            return f64::NAN;
        }
        let arg = self.layout.tail_arg(z);
        let series = if t > 0.0 {
            self.layout.right.as_ref().and_then(|s| s.ln_pdf(arg))
        } else {
            self.layout.left.as_ref().and_then(|s| s.ln_pdf(-arg))
        };
        series.unwrap_or_else(|| extend(&self.abscissae, &self.log_pdf_values, z))
    }

    /// Log-density at `x` under scale `gamma` and shift `delta`.
    pub fn ln_pdf_scaled(&self, x: f64, gamma: f64, delta: f64) -> f64 {
        let p = StableParams {
            alpha: self.alpha,
            beta: self.beta,
            gamma,
            delta,
        };
        self.ln_pdf(p.standardize(x)) - gamma.ln()
    }
}

/// Distribution-function table of the standard law.
#[derive(Debug, Clone)]
pub struct CdfGrid {
    alpha: f64,
    beta: f64,
    layout: Layout,
    ts: Vec<f64>,
    abscissae: Vec<f64>,
    ln_lower: Vec<f64>,
    ln_upper: Vec<f64>,
}

impl CdfGrid {
    pub fn new(alpha: f64, beta: f64, coverage: f64) -> Result<Self> {
        check(alpha, beta, coverage)?;
        let alpha = effective_alpha(alpha);
        let layout = Layout::new(alpha, beta, coverage, ADAPTIVE);
        let (ts, mut columns) = table(
            &layout,
            |z| {
                let (p, q) = std_cdf_pair(z, alpha, beta, ADAPTIVE.node_tol);
                [p.ln(), q.ln()]
            },
            |[p, q]| [q, p],
        );
        let ln_upper = columns.pop().unwrap_or_default();
        let ln_lower = columns.pop().unwrap_or_default();
        let abscissae = ts.iter().map(|&t| layout.z_at(t)).collect();
        Ok(Self {
            alpha,
            beta,
            layout,
            ts,
            abscissae,
            ln_lower,
            ln_upper,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Distribution function of the standard law at `z`.
    pub fn cdf(&self, z: f64) -> f64 {
        let t = self.layout.t_of(z);
        if t.is_nan() {
            return f64::NAN;
        }
        let n = self.ts.len();
        if t >= self.ts[0] && t <= self.ts[n - 1] {
            let j = stencil(&self.ts, t);
            let lo = cubic(&self.ts[j..j + 4], &self.ln_lower[j..j + 4], t);
            if lo < -std::f64::consts::LN_2 {
                return lo.exp();
            }
            let hi = cubic(&self.ts[j..j + 4], &self.ln_upper[j..j + 4], t);
            return (1.0 - hi.exp()).clamp(0.0, 1.0);
        }
        let arg = self.layout.tail_arg(z);
        if t > 0.0 {
            let q = match &self.layout.right {
                Some(s) => s.survival(arg),
                None => extend(&self.abscissae, &self.ln_upper, z).exp(),
            };
            (1.0 - q).clamp(0.0, 1.0)
        } else {
            let p = match &self.layout.left {
                Some(s) => s.survival(-arg),
                None => extend(&self.abscissae, &self.ln_lower, z).exp(),
            };
            p.clamp(0.0, 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_grid_is_exact() {
        let g = build_density_grid(2.0, 0.0, 1.0 - 1e-6).unwrap();
        for &z in &[-7.0, -1.3, 0.0, 0.4, 9.0] {
            assert!((g.ln_pdf(z) - (-0.25 * z * z - LN_2_SQRT_PI)).abs() < 1e-12);
        }
        assert_eq!(
            g.tail_coefficients(),
            TailCoefficients {
                left: 0.0,
                right: 0.0
            }
        );
    }

    #[test]
    fn abscissae_increase() {
        let g = build_density_grid(1.3, -0.4, 1.0 - 1e-6).unwrap();
        assert!(g.abscissae().windows(2).all(|w| w[1] > w[0]));
        assert!(g.log_pdf_values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn rejects_bad_coverage() {
        assert!(build_density_grid(1.5, 0.0, 1.0).is_err());
        assert!(build_density_grid(1.5, 0.0, 0.0).is_err());
        assert!(CdfGrid::new(1.5, 2.0, 0.5).is_err());
    }
}
