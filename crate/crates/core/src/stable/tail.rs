//! Power-law tail expansions of the standard S1 stable law.
//!
//! For x -> +inf and alpha != 1,
//!
//!   f(x) ~ (1/pi) sum_k (-1)^(k+1) A^k Gamma(alpha k + 1) / k! * x^(-alpha k - 1) * sin(k w)
//!
//! with A = sqrt(1 + (beta tan(pi alpha / 2))^2) and w = atan(beta tan(pi alpha / 2)) + pi alpha / 2.
//! The series converges for alpha < 1 and is asymptotic for alpha > 1. The
//! left tail follows by reflection (beta -> -beta).

use std::f64::consts::{FRAC_PI_2, PI};

use statrs::function::gamma::{gamma, ln_gamma};

const MAX_TERMS: usize = 400;

/// Series coefficients for one side of the distribution.
#[derive(Debug, Clone)]
pub(crate) struct TailSeries {
    alpha: f64,
    /// density coefficients, c_k multiplies x^(-alpha k - 1)
    pdf: Vec<f64>,
    /// survival coefficients, s_k multiplies x^(-alpha k)
    sf: Vec<f64>,
}

/// Leading constant C in f(x) ~ C x^(-alpha-1) on the right side.
pub(crate) fn leading_constant(alpha: f64, beta: f64) -> f64 {
    if alpha >= 2.0 {
        return 0.0;
    }
    gamma(alpha + 1.0) * (FRAC_PI_2 * alpha).sin() * (1.0 + beta) / PI
}

/// Radius (from the center of the law) beyond which the tail series is used.
pub(crate) fn series_radius(alpha: f64, beta: f64) -> f64 {
    if alpha == 1.0 {
        return 1e6;
    }
    let zeta = beta * (FRAC_PI_2 * alpha).tan();
    let a = (1.0 + zeta * zeta).sqrt();
    50.0 * a.powf(1.0 / alpha).max(1.0)
}

impl TailSeries {
    /// Build the right-side series truncated so that at `radius` the last
    /// retained term is negligible. Returns `None` when the side carries no
    /// power-law tail (totally skewed towards the other side).
    pub(crate) fn new(alpha: f64, beta: f64, radius: f64) -> Option<Self> {
        if alpha >= 2.0 || 1.0 + beta <= 1e-12 {
            return None;
        }
        if alpha == 1.0 {
            let c = (1.0 + beta) / PI;
            return Some(Self {
                alpha,
                pdf: vec![c],
                sf: vec![c],
            });
        }
        let zeta = beta * (FRAC_PI_2 * alpha).tan();
        let ln_a = 0.5 * (1.0 + zeta * zeta).ln();
        let w = zeta.atan() + FRAC_PI_2 * alpha;
        if (w.sin() * (1.0 + beta)).abs() < 1e-14 {
            return None;
        }
        let ln_r = radius.ln();
        let mut pdf = Vec::new();
        let mut sf = Vec::new();
        let mut first = 0.0;
        let mut prev_mag = f64::INFINITY;
        for k in 1..=MAX_TERMS {
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            let s = (kf * w).sin();
            let ln_c = kf * ln_a + ln_gamma(alpha * kf + 1.0) - ln_gamma(kf + 1.0);
            let ln_cs = kf * ln_a + ln_gamma(alpha * kf) - ln_gamma(kf + 1.0);
            // magnitude of the term at the radius, relative to the leading one
            let mag = (ln_c - alpha * kf * ln_r).exp();
            if k == 1 {
                first = mag * s.abs();
            } else if alpha > 1.0 && mag > prev_mag {
                break;
            }
            pdf.push(sign * s * ln_c.exp() / PI);
            sf.push(sign * s * ln_cs.exp() / PI);
            if k > 1 && mag < 1e-17 * first {
                break;
            }
            prev_mag = mag;
        }
        Some(Self { alpha, pdf, sf })
    }

    fn eval(coefs: &[f64], y: f64) -> f64 {
        // sum c_k y^k, k >= 1
        coefs.iter().rev().fold(0.0, |acc, &c| (acc + c) * y)
    }

    /// ln f(x) for x > 0; None if the truncated series is not positive.
    pub(crate) fn ln_pdf(&self, x: f64) -> Option<f64> {
        if self.alpha == 1.0 {
            return Some(self.pdf[0].ln() - 2.0 * x.ln());
        }
        let y = x.powf(-self.alpha);
        let v = Self::eval(&self.pdf, y) / x;
        (v > 0.0).then(|| v.ln())
    }

    /// 1 - F(x) for x > 0.
    pub(crate) fn survival(&self, x: f64) -> f64 {
        if self.alpha == 1.0 {
            return self.sf[0] / x;
        }
        let y = x.powf(-self.alpha);
        Self::eval(&self.sf, y).max(0.0)
    }

    #[cfg(test)]
    pub(crate) fn terms(&self) -> usize {
        self.pdf.len()
    }
}
