//! Natural cubic splines with linear extrapolation.

use crate::error::{Error, Result};

/// Natural cubic spline through `(knots[j], values[j])`.
///
/// Second derivative is zero at both end knots; outside `[knots[0],
/// knots[n-1]]` the curve continues along the end tangents.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// second derivatives at the knots
    curvature: Vec<f64>,
}

pub(crate) fn check_knots(knots: &[f64]) -> Result<()> {
    if knots.len() < 4 {
        return Err(Error::Config(format!(
            "a spline needs at least 4 knots, got {}",
            knots.len()
        )));
    }
    if knots.iter().any(|k| !k.is_finite()) {
        return Err(Error::Config("spline knots must be finite".into()));
    }
    if let Some(w) = knots.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!(
            "spline knots must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// `n` equally spaced knots from `lo` to `hi` inclusive.
pub fn equidistant_knots(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            if j + 1 == n {
                hi
            } else {
                lo + (hi - lo) * j as f64 / (n - 1) as f64
            }
        })
        .collect()
}

impl NaturalSpline {
    pub fn new(knots: &[f64], values: &[f64]) -> Result<Self> {
        check_knots(knots)?;
        if values.len() != knots.len() {
            return Err(Error::Config(format!(
                "{} spline ordinates for {} knots",
                values.len(),
                knots.len()
            )));
        }
        Ok(Self::build(knots, values))
    }

    /// Construction without validation; knots are known to be good.
    pub(crate) fn build(knots: &[f64], values: &[f64]) -> Self {
        let n = knots.len();
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let mut curvature = vec![0.0; n];
        // Thomas algorithm on the interior equations
        let m = n - 2;
        let mut diag = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            let k = i + 1;
            diag[i] = 2.0 * (h[k - 1] + h[k]);
            rhs[i] =
                6.0 * ((values[k + 1] - values[k]) / h[k] - (values[k] - values[k - 1]) / h[k - 1]);
        }
        for i in 1..m {
            let w = h[i] / diag[i - 1];
            diag[i] -= w * h[i];
            rhs[i] -= w * rhs[i - 1];
        }
        for i in (0..m).rev() {
            let upper = if i + 1 < m {
                h[i + 1] * curvature[i + 2]
            } else {
                0.0
            };
            curvature[i + 1] = (rhs[i] - upper) / diag[i];
        }
        Self {
            knots: knots.to_vec(),
            values: values.to_vec(),
            curvature,
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        let y = &self.values;
        let m = &self.curvature;
        let n = k.len();
        if x < k[0] {
            let h = k[1] - k[0];
            let slope = (y[1] - y[0]) / h - h * (2.0 * m[0] + m[1]) / 6.0;
            return y[0] + slope * (x - k[0]);
        }
        if x >= k[n - 1] {
            let h = k[n - 1] - k[n - 2];
            let slope = (y[n - 1] - y[n - 2]) / h + h * (m[n - 2] + 2.0 * m[n - 1]) / 6.0;
            return y[n - 1] + slope * (x - k[n - 1]);
        }
        let i = k.partition_point(|&v| v <= x) - 1;
        let h = k[i + 1] - k[i];
        let t = x - k[i];
        let b = (y[i + 1] - y[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0;
        y[i] + t * (b + t * (0.5 * m[i] + t * (m[i + 1] - m[i]) / (6.0 * h)))
    }
}

/// Evaluate the natural cubic spline through `(knots, ordinates)` at `x`.
pub fn spline_eval(knots: &[f64], ordinates: &[f64], x: f64) -> Result<f64> {
    Ok(NaturalSpline::new(knots, ordinates)?.eval(x))
}
