//! Univariate alpha-stable laws in the classical S1 parameterization.
//!
//! The characteristic function of `S(alpha, beta, gamma, delta; 1)` is
//!
//! ```text
//! exp(-gamma^a |u|^a (1 - i beta tan(pi a / 2) sign u) + i delta u)        a != 1
//! exp(-gamma |u| (1 + i beta (2/pi) sign u ln|u|) + i delta u)             a == 1
//! ```
//!
//! Close to `alpha = 1` the S1 law drifts off to infinity when `beta != 0`;
//! densities there are evaluated in the continuous S0 form, with the shift
//! conversion `delta_1 = delta_0 - beta * gamma * tan(pi alpha / 2)`.

mod grid;
mod integral;
pub mod oracle;
mod sampler;
mod tail;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use grid::{build_density_grid, CdfGrid, DensityGrid, TailCoefficients};
pub use oracle::{stable_cdf_oracle, stable_pdf_oracle};
pub use sampler::{cms_transform, stable_sample};

/// Smallest index used in numerical evaluation; smaller values are clipped.
pub const ALPHA_FLOOR: f64 = 0.1;

/// Half-width of the band around alpha = 1 where evaluation snaps to the band edge.
pub const ALPHA_ONE_BAND: f64 = 1e-3;

/// Four-parameter stable law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            gamma,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Unit scale, zero shift.
    pub fn standard(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let Self {
            alpha,
            beta,
            gamma,
            delta,
        } = *self;
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite() && delta.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "non-finite stable parameters {self:?}"
            )));
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::ParameterDomain(format!(
                "alpha = {alpha} outside (0, 2]"
            )));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::ParameterDomain(format!(
                "beta = {beta} outside [-1, 1]"
            )));
        }
        if gamma <= 0.0 {
            return Err(Error::ParameterDomain(format!(
                "gamma = {gamma} must be positive"
            )));
        }
        Ok(())
    }

    /// Map `x` to the standard (gamma = 1, delta = 0) variable.
    pub fn standardize(&self, x: f64) -> f64 {
        if self.alpha == 1.0 {
            (x - self.delta - 2.0 / PI * self.beta * self.gamma * self.gamma.ln()) / self.gamma
        } else {
            (x - self.delta) / self.gamma
        }
    }

    /// Inverse of [`standardize`](Self::standardize).
    pub fn destandardize(&self, z: f64) -> f64 {
        if self.alpha == 1.0 {
            self.gamma * z + self.delta + 2.0 / PI * self.beta * self.gamma * self.gamma.ln()
        } else {
            self.gamma * z + self.delta
        }
    }
}

pub(crate) fn effective_alpha(alpha: f64) -> f64 {
    alpha.max(ALPHA_FLOOR)
}

/// Location of the bulk of the standard S1 law (its S0 origin).
pub(crate) fn s1_center(alpha: f64, beta: f64) -> f64 {
    if alpha == 1.0 || alpha >= 2.0 {
        0.0
    } else {
        beta * (FRAC_PI_2 * alpha).tan()
    }
}

const LN_2_SQRT_PI: f64 = 1.265_512_123_484_645_4;

/// Relative tolerance of the quadrature behind point evaluations.
const POINT_TOL: f64 = 1e-10;

/// ln f(z) for the standard law, parameters already validated.
pub(crate) fn std_ln_pdf(z: f64, alpha: f64, beta: f64, tol: f64) -> f64 {
    let alpha = effective_alpha(alpha);
    if alpha == 2.0 {
        return -0.25 * z * z - LN_2_SQRT_PI;
    }
    if alpha == 1.0 {
        if beta == 0.0 {
            return -(PI * (1.0 + z * z)).ln();
        }
        if let Some(v) = tail_ln_pdf(z, alpha, beta) {
            return v;
        }
        return integral::ln_pdf_one(z, beta, tol);
    }
    if (alpha - 1.0).abs() < ALPHA_ONE_BAND {
        let snapped = if alpha > 1.0 {
            1.0 + ALPHA_ONE_BAND
        } else {
            1.0 - ALPHA_ONE_BAND
        };
        let z0 = z - s1_center(alpha, beta);
        return std_ln_pdf(z0 + s1_center(snapped, beta), snapped, beta, tol);
    }
    if let Some(v) = tail_ln_pdf(z, alpha, beta) {
        return v;
    }
    integral::ln_pdf_general(z, alpha, beta, tol)
}

fn tail_ln_pdf(z: f64, alpha: f64, beta: f64) -> Option<f64> {
    let radius = tail::series_radius(alpha, beta);
    let d = z - s1_center(alpha, beta);
    if d > radius && z > 0.0 {
        tail::TailSeries::new(alpha, beta, radius)?.ln_pdf(z)
    } else if d < -radius && z < 0.0 {
        tail::TailSeries::new(alpha, -beta, radius)?.ln_pdf(-z)
    } else {
        None
    }
}

/// (F(z), 1 - F(z)) for the standard law.
pub(crate) fn std_cdf_pair(z: f64, alpha: f64, beta: f64, tol: f64) -> (f64, f64) {
    let alpha = effective_alpha(alpha);
    if alpha == 2.0 {
        let p = 0.5 * statrs::function::erf::erfc(-z / 2.0);
        let q = 0.5 * statrs::function::erf::erfc(z / 2.0);
        return (p, q);
    }
    if alpha == 1.0 && beta == 0.0 {
        let q = if z > 0.0 {
            (1.0 / z).atan() / PI
        } else {
            0.5 - z.atan() / PI
        };
        let p = if z < 0.0 {
            (-1.0 / z).atan() / PI
        } else {
            0.5 + z.atan() / PI
        };
        return (p, q);
    }
    if alpha != 1.0 && (alpha - 1.0).abs() < ALPHA_ONE_BAND {
        let snapped = if alpha > 1.0 {
            1.0 + ALPHA_ONE_BAND
        } else {
            1.0 - ALPHA_ONE_BAND
        };
        let z0 = z - s1_center(alpha, beta);
        return std_cdf_pair(z0 + s1_center(snapped, beta), snapped, beta, tol);
    }
    let radius = tail::series_radius(alpha, beta);
    let d = z - s1_center(alpha, beta);
    if d > radius && z > 0.0 {
        if let Some(s) = tail::TailSeries::new(alpha, beta, radius) {
            let q = s.survival(z);
            return (1.0 - q, q);
        }
    } else if d < -radius && z < 0.0 {
        if let Some(s) = tail::TailSeries::new(alpha, -beta, radius) {
            let p = s.survival(-z);
            return (p, 1.0 - p);
        }
    }
    if alpha == 1.0 {
        integral::cdf_one(z, beta, tol)
    } else {
        integral::cdf_general(z, alpha, beta, tol)
    }
}

/// Natural log of the stable density at `x`.
///
/// Exact closed forms are used for the Gaussian (alpha = 2, variance
/// 2 gamma^2) and the symmetric Cauchy case. Returns `-inf` only where the
/// density is zero or underflows (outside the support of totally skewed
/// laws with alpha < 1, or the light side of alpha > 1 laws with |beta| = 1).
pub fn stable_log_pdf(x: f64, p: &StableParams) -> Result<f64> {
    p.validate()?;
    if !x.is_finite() {
        return Err(Error::ParameterDomain(format!(
            "density requested at non-finite x = {x}"
        )));
    }
    Ok(std_ln_pdf(p.standardize(x), p.alpha, p.beta, POINT_TOL) - p.gamma.ln())
}

pub fn stable_pdf(x: f64, p: &StableParams) -> Result<f64> {
    stable_log_pdf(x, p).map(f64::exp)
}

/// Distribution function of the stable law.
pub fn stable_cdf(x: f64, p: &StableParams) -> Result<f64> {
    p.validate()?;
    if x.is_nan() {
        return Err(Error::ParameterDomain(
            "distribution function requested at NaN".into(),
        ));
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    if x == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let (f, _) = std_cdf_pair(p.standardize(x), p.alpha, p.beta, POINT_TOL);
    Ok(f.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn closed_form_points() {
        let g = StableParams::standard(2.0, 0.0).unwrap();
        assert!((stable_log_pdf(0.0, &g).unwrap() + 1.265_512).abs() < 1e-6);
        let c = StableParams::standard(1.0, 0.0).unwrap();
        assert!((stable_log_pdf(1.0, &c).unwrap() + 1.837_877).abs() < 1e-6);
        let l = StableParams::standard(0.5, 1.0).unwrap();
        assert!((stable_log_pdf(1.0, &l).unwrap() + 1.418_939).abs() < 1e-6);
    }

    #[test]
    fn levy_is_zero_left_of_support() {
        let l = StableParams::standard(0.5, 1.0).unwrap();
        assert_eq!(stable_log_pdf(-0.5, &l).unwrap(), f64::NEG_INFINITY);
        assert_eq!(stable_cdf(-0.5, &l).unwrap(), 0.0);
    }

    #[test]
    fn central_value_identity() {
        for &a in &[0.7, 1.1, 1.6, 1.9] {
            let p = StableParams::standard(a, 0.0).unwrap();
            let f0 = stable_pdf(0.0, &p).unwrap();
            assert!(rel(f0, statrs::function::gamma::gamma(1.0 + 1.0 / a) / PI) < 1e-12);
            // just off zero goes through the integral and must agree
            let f1 = stable_pdf(1e-6, &p).unwrap();
            assert!(rel(f1, f0) < 1e-6, "alpha {a}: {f1} vs {f0}");
        }
    }

    #[test]
    fn cauchy_cdf() {
        let c = StableParams::standard(1.0, 0.0).unwrap();
        assert!((stable_cdf(1.0, &c).unwrap() - 0.75).abs() < 1e-15);
        let p = StableParams::standard(1.6, 0.0).unwrap();
        assert!((stable_cdf(0.0, &p).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(StableParams::standard(0.0, 0.0).is_err());
        assert!(StableParams::standard(2.1, 0.0).is_err());
        assert!(StableParams::standard(1.5, 1.2).is_err());
        assert!(StableParams::new(1.5, 0.0, -1.0, 0.0).is_err());
        assert!(StableParams::new(1.5, 0.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn scale_shift_alpha_one() {
        let p = StableParams::new(1.0, 0.4, 2.5, -1.0).unwrap();
        let x = 3.0;
        let z = p.standardize(x);
        assert!((p.destandardize(z) - x).abs() < 1e-14);
        let direct = stable_log_pdf(x, &p).unwrap();
        let std =
            stable_log_pdf(z, &StableParams::standard(1.0, 0.4).unwrap()).unwrap() - 2.5_f64.ln();
        assert!((direct - std).abs() < 1e-14);
    }
}
