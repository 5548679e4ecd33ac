//! Starting values: least squares for the drift, a robust increment scale
//! for the noise intensity, and fixed stable parameters.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::likelihood::TimeSeries;
use crate::models::{drift_design, pack_params, DriftModel, ModelSpec, NoiseModel};
use crate::stable::{stable_cdf, StableParams};

/// Starting index of every free alpha.
pub const ALPHA_START: f64 = 1.8;
/// Starting skewness of every free beta.
pub const BETA_START: f64 = 0.0;

/// Ratio of smallest to largest singular value below which a design counts
/// as rank deficient.
const RANK_TOL: f64 = 1e-10;

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median of `|eta|` for the standard law `S(alpha, 0, 1, 0)`.
fn median_abs(alpha: f64) -> Result<f64> {
    let p = StableParams::standard(alpha, 0.0)?;
    let (mut lo, mut hi) = (0.0, 10.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if stable_cdf(mid, &p)? < 0.75 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Least squares with one trimming pass: rows whose residual exceeds eight
/// median absolute residuals are dropped and the fit repeated.
fn least_squares(rows: &[Vec<f64>], y: &[f64], what: &str) -> Result<Vec<f64>> {
    let k = rows.first().map_or(0, Vec::len);
    if k == 0 {
        return Ok(Vec::new());
    }
    let solve = |keep: &[bool]| -> Result<Vec<f64>> {
        let idx: Vec<usize> = (0..rows.len()).filter(|&t| keep[t]).collect();
        let a = DMatrix::from_fn(idx.len(), k, |r, c| rows[idx[r]][c]);
        // column scaling keeps the rank test meaningful for mixed powers
        let norms: Vec<f64> = (0..k)
            .map(|c| a.column(c).norm().max(f64::MIN_POSITIVE))
            .collect();
        let a = DMatrix::from_fn(idx.len(), k, |r, c| a[(r, c)] / norms[c]);
        let b = DVector::from_fn(idx.len(), |r, _| y[idx[r]]);
        let svd = a.svd(true, true);
        let s = &svd.singular_values;
        let (smax, smin) = (s.max(), s.min());
        if !(smin > RANK_TOL * smax) {
            return Err(Error::Initialization(format!(
                "the {what} regression design is rank deficient; use fewer drift parameters"
            )));
        }
        let c = svd
            .solve(&b, 0.0)
            .map_err(|e| Error::Initialization(e.to_string()))?;
        Ok((0..k).map(|j| c[j] / norms[j]).collect())
    };
    let all = vec![true; rows.len()];
    let c = solve(&all)?;
    let resid: Vec<f64> = rows
        .iter()
        .zip(y)
        .map(|(r, y)| y - r.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let mut abs: Vec<f64> = resid.iter().map(|r| r.abs()).collect();
    let cut = 8.0 * median(&mut abs);
    let keep: Vec<bool> = resid.iter().map(|r| r.abs() <= cut).collect();
    if keep.iter().filter(|&&b| b).count() > k && cut > 0.0 {
        solve(&keep)
    } else {
        Ok(c)
    }
}

/// Fill the free parameters of `template` with data-driven starting values.
///
/// Drift coefficients come from a least-squares fit of `dx / delta` on the
/// drift basis over the transitions selected by `mask`; noise intensities
/// from the median absolute drift-corrected increment; alpha starts at 1.8
/// and beta at 0.
pub fn initialize_params(
    ts: &TimeSeries,
    template: &ModelSpec,
    mask: Option<&[bool]>,
) -> Result<ModelSpec> {
    template.validate()?;
    if template.dim() != ts.dim() {
        return Err(Error::Config(format!(
            "model has {} dimensions, data has {}",
            template.dim(),
            ts.dim()
        )));
    }
    let n_free = pack_params(template).len();
    let rows: Vec<usize> = (0..ts.len() - 1)
        .filter(|&t| mask.is_none_or(|m| m[t]))
        .collect();
    if rows.len() < 10 * n_free {
        return Err(Error::Initialization(format!(
            "{} transitions are too few for {n_free} free parameters (need at least {})",
            rows.len(),
            10 * n_free
        )));
    }
    let delta = ts.delta();
    let m_abs = median_abs(ALPHA_START)?;
    let mut model = template.clone();
    for i in 0..model.dim() {
        let ys: Vec<f64> = rows
            .iter()
            .map(|&t| (ts.row(t + 1)[i] - ts.row(t)[i]) / delta)
            .collect();
        let dm = &mut model.dimensions[i];
        match &mut dm.drift {
            DriftModel::LotkaVolterra { r, a, free } if *free => {
                let design: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|&t| {
                        let x = ts.row(t);
                        std::iter::once(x[i])
                            .chain(x.iter().map(|v| x[i] * v))
                            .collect()
                    })
                    .collect();
                let c = least_squares(&design, &ys, "Lotka–Volterra")?;
                if !(c[0].abs() > 1e-12) {
                    return Err(Error::Initialization(format!(
                        "growth rate of coordinate {} is not identifiable from the data",
                        i + 1
                    )));
                }
                *r = c[0];
                for (aj, cj) in a.iter_mut().zip(&c[1..]) {
                    *aj = -cj / c[0];
                }
            }
            _ => {}
        }
        let snapshot = dm.clone();
        if let Some(design) = drift_design(&snapshot) {
            let (basis, target): (Vec<Vec<f64>>, Vec<f64>) = rows
                .iter()
                .zip(&ys)
                .map(|(&t, y)| {
                    let (b, off) = design(ts.row(t));
                    (b, y - off)
                })
                .unzip();
            let c = least_squares(&basis, &target, "drift")?;
            let mut it = c.into_iter();
            match &mut dm.drift {
                DriftModel::Polynomial { terms } => {
                    for t in terms.iter_mut().filter(|t| t.free) {
                        t.value = it.next().unwrap_or(t.value);
                    }
                }
                DriftModel::Spline {
                    ordinates, free, ..
                } if *free => {
                    for o in ordinates.iter_mut() {
                        *o = it.next().unwrap_or(*o);
                    }
                }
                _ => {}
            }
        }
        dm.alpha.value = if dm.alpha.free {
            ALPHA_START
        } else {
            dm.alpha.value
        };
        dm.beta.value = if dm.beta.free {
            BETA_START
        } else {
            dm.beta.value
        };
    }
    let cm = model.compile()?;
    for i in 0..model.dim() {
        let free = match &model.dimensions[i].noise {
            NoiseModel::Constant { free, .. } | NoiseModel::Spline { free, .. } => *free,
        };
        if !free {
            continue;
        }
        let mut dev: Vec<f64> = rows
            .iter()
            .map(|&t| {
                let x = ts.row(t);
                (ts.row(t + 1)[i] - x[i] - cm.drift(i, x) * delta).abs()
            })
            .collect();
        let sigma = median(&mut dev) / (delta.powf(1.0 / ALPHA_START) * m_abs);
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Initialization(format!(
                "coordinate {} has no variability to estimate a noise intensity from",
                i + 1
            )));
        }
        match &mut model.dimensions[i].noise {
            NoiseModel::Constant { value, .. } => *value = sigma,
            NoiseModel::Spline { log_values, .. } => {
                log_values.iter_mut().for_each(|w| *w = sigma.ln())
            }
        }
    }
    Ok(model)
}
