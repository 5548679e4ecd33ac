//! Zolotarev-type integral representations of the standard S1 stable law.
//!
//! The density and distribution function are written as integrals of a
//! monotone kernel over a finite angular interval. The kernel `g` runs from
//! 0 to infinity across the interval, so the integrand `g·exp(-g)` has a
//! single peak where `g = 1`; the interval is split there and each half is
//! integrated with adaptive Gauss–Kronrod. Evaluation is done in log space
//! so that very large or small powers of `x` never overflow.

use std::f64::consts::{FRAC_PI_2, PI};

use statrs::function::gamma::gamma;

use crate::quadrature;

const MAX_SEGMENTS: usize = 400;

/// A point of the integration interval given from both ends, so that the
/// kernel can be evaluated accurately near either endpoint.
#[derive(Clone, Copy)]
struct Split {
    from_lo: f64,
    from_hi: f64,
}

/// Kernel of the representation for fixed (alpha, beta) on the positive
/// half-line of the S1 standard variable.
enum Kernel {
    /// alpha != 1. Variable phi = theta + theta0 in (0, len).
    General {
        alpha: f64,
        theta0: f64,
        len: f64,
        ln_cos_at0: f64,
    },
    /// alpha == 1, beta > 0. Variable u = theta + pi/2 in (0, pi).
    One { beta: f64 },
}

impl Kernel {
    fn new(alpha: f64, beta: f64) -> Self {
        if alpha == 1.0 {
            Kernel::One { beta }
        } else {
            let theta0 = (beta * (FRAC_PI_2 * alpha).tan()).atan() / alpha;
            Kernel::General {
                alpha,
                theta0,
                len: FRAC_PI_2 + theta0,
                ln_cos_at0: (alpha * theta0).cos().ln(),
            }
        }
    }

    fn len(&self) -> f64 {
        match *self {
            Kernel::General { len, .. } => len,
            Kernel::One { .. } => PI,
        }
    }

    /// ln V at the split point (without the x-dependent factor).
    fn ln_v(&self, p: Split) -> f64 {
        match *self {
            Kernel::General {
                alpha,
                theta0,
                ln_cos_at0,
                ..
            } => {
                let phi = p.from_lo;
                let cos_theta = p.from_hi.sin();
                let sin_a = (alpha * phi).sin();
                let tail = (theta0 + (alpha - 1.0) * phi).cos();
                let am1 = alpha - 1.0;
                ln_cos_at0 / am1 + alpha / am1 * (cos_theta.ln() - sin_a.ln()) + tail.ln()
                    - cos_theta.ln()
            }
            Kernel::One { beta } => {
                let u = p.from_lo;
                // theta = u - pi/2; cos(theta) = sin(u); tan(theta) = -cos(u)/sin(u)
                let sin_u = if u < FRAC_PI_2 {
                    u.sin()
                } else {
                    p.from_hi.sin()
                };
                let cos_u = if u < FRAC_PI_2 {
                    u.cos()
                } else {
                    -p.from_hi.cos()
                };
                let w = FRAC_PI_2 + beta * (u - FRAC_PI_2);
                (2.0 / PI).ln() + w.ln() - sin_u.ln() - w * cos_u / (sin_u * beta)
            }
        }
    }

    /// True when ln V decreases along the interval.
    fn decreasing(&self) -> bool {
        matches!(*self, Kernel::General { alpha, .. } if alpha > 1.0)
    }
}

/// Locate the point where `ln_g = ln_scale + ln V` crosses zero.
fn find_peak(kernel: &Kernel, ln_scale: f64) -> Split {
    let len = kernel.len();
    let dec = kernel.decreasing();
    // `past` is false at the low end of the interval and true at the high end
    let past = |p: Split, near_hi: bool| {
        let v = ln_scale + kernel.ln_v(p);
        if v.is_nan() {
            near_hi
        } else {
            (v > 0.0) != dec
        }
    };
    let half = 0.5 * len;
    let in_lower = past(
        Split {
            from_lo: half,
            from_hi: half,
        },
        true,
    );
    let at = |m: f64| {
        if in_lower {
            Split {
                from_lo: m,
                from_hi: len - m,
            }
        } else {
            Split {
                from_lo: len - m,
                from_hi: m,
            }
        }
    };
    let (mut lo, mut hi) = (0.0_f64, half);
    for _ in 0..48 {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        let p = past(at(m), !in_lower);
        // moving away from the near end: in the lower half `past` flips to
        // true past the crossing, in the upper half it flips to false
        if p != in_lower {
            lo = m;
        } else {
            hi = m;
        }
    }
    at(0.5 * (lo + hi))
}

/// Integrate `h(ln g)` over the whole interval. The integrand lives on a
/// scale set by the distance `e` of the peak from the nearer end, so the
/// interval is cut at distances `e, 2e, 4e, ...` from that end.
fn integrate_kernel<H: Fn(f64) -> f64>(
    kernel: &Kernel,
    ln_scale: f64,
    tol: f64,
    h: H,
) -> (f64, bool) {
    let len = kernel.len();
    if len <= 0.0 {
        return (0.0, true);
    }
    let peak = find_peak(kernel, ln_scale);
    let near_lo = peak.from_lo <= peak.from_hi;
    let e = if near_lo { peak.from_lo } else { peak.from_hi };
    let mut breaks = vec![0.0];
    let mut b = e.max(len * 1e-300);
    while b < len {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(len);
    // When |ln_scale| is large the peak is only about e/|ln_scale| wide, too
    // narrow for the panels above to see; add cuts closing in on it.
    let mut d = 0.5;
    while d * ln_scale.abs() > 0.125 {
        for c in [e * (1.0 - d), e * (1.0 + d)] {
            if c > 0.0 && c < len {
                breaks.push(c);
            }
        }
        d *= 0.5;
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let r = quadrature::integrate_pieces(
        |s| {
            let p = if near_lo {
                Split {
                    from_lo: s,
                    from_hi: len - s,
                }
            } else {
                Split {
                    from_lo: len - s,
                    from_hi: s,
                }
            };
            let v = h(ln_scale + kernel.ln_v(p));
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        &breaks,
        1e-300,
        tol,
        MAX_SEGMENTS,
    );
    (r.value, r.converged)
}

fn peak_integrand(lg: f64) -> f64 {
    (lg - lg.exp()).exp()
}

/// Density of the standard S1 law at x > 0 (alpha != 1) in log form.
fn ln_pdf_positive(x: f64, alpha: f64, beta: f64, tol: f64) -> f64 {
    let kernel = Kernel::new(alpha, beta);
    if kernel.len() <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let am1 = alpha - 1.0;
    let ln_x = x.ln();
    let ln_scale = alpha / am1 * ln_x;
    let (integral, _) = integrate_kernel(&kernel, ln_scale, tol, peak_integrand);
    alpha.ln() - ln_x - (PI * am1.abs()).ln() + integral.ln()
}

fn ln_pdf_at_zero(alpha: f64, beta: f64) -> f64 {
    let zeta = beta * (FRAC_PI_2 * alpha).tan();
    let theta0 = zeta.atan() / alpha;
    gamma(1.0 + 1.0 / alpha).ln() + theta0.cos().ln()
        - PI.ln()
        - (1.0 + zeta * zeta).ln() / (2.0 * alpha)
}

/// Log-density of the standard S1 law (alpha != 1, alpha < 2).
pub(crate) fn ln_pdf_general(x: f64, alpha: f64, beta: f64, tol: f64) -> f64 {
    if x.abs() < 1e-14 {
        ln_pdf_at_zero(alpha, beta)
    } else if x > 0.0 {
        ln_pdf_positive(x, alpha, beta, tol)
    } else {
        ln_pdf_positive(-x, alpha, -beta, tol)
    }
}

/// Log-density of the standard alpha = 1 law with beta != 0.
pub(crate) fn ln_pdf_one(x: f64, beta: f64, tol: f64) -> f64 {
    let (x, beta) = if beta < 0.0 { (-x, -beta) } else { (x, beta) };
    let kernel = Kernel::One { beta };
    let ln_scale = -PI * x / (2.0 * beta);
    let (integral, _) = integrate_kernel(&kernel, ln_scale, tol, peak_integrand);
    integral.ln() - (2.0 * beta).ln()
}

/// (F(x), 1 - F(x)) of the standard S1 law, alpha != 1.
pub(crate) fn cdf_general(x: f64, alpha: f64, beta: f64, tol: f64) -> (f64, f64) {
    if x < 0.0 {
        let (f, s) = cdf_general(-x, alpha, -beta, tol);
        return (s, f);
    }
    let zeta = beta * (FRAC_PI_2 * alpha).tan();
    let theta0 = zeta.atan() / alpha;
    if x == 0.0 {
        return ((FRAC_PI_2 - theta0) / PI, (FRAC_PI_2 + theta0) / PI);
    }
    let kernel = Kernel::new(alpha, beta);
    if kernel.len() <= 0.0 {
        // no mass on the positive half-line
        return (1.0, 0.0);
    }
    let ln_scale = alpha / (alpha - 1.0) * x.ln();
    if alpha > 1.0 {
        let (i, _) = integrate_kernel(&kernel, ln_scale, tol, |lg| (-lg.exp()).exp());
        let s = i / PI;
        (1.0 - s, s)
    } else {
        let (i, _) = integrate_kernel(&kernel, ln_scale, tol, |lg| -(-lg.exp()).exp_m1());
        let s = i / PI;
        (1.0 - s, s)
    }
}

/// (F(x), 1 - F(x)) of the standard alpha = 1 law with beta != 0.
pub(crate) fn cdf_one(x: f64, beta: f64, tol: f64) -> (f64, f64) {
    if beta < 0.0 {
        let (f, s) = cdf_one(-x, -beta, tol);
        return (s, f);
    }
    let kernel = Kernel::One { beta };
    let ln_scale = -PI * x / (2.0 * beta);
    let (lower, _) = integrate_kernel(&kernel, ln_scale, tol, |lg| (-lg.exp()).exp());
    if lower < FRAC_PI_2 {
        return (lower / PI, 1.0 - lower / PI);
    }
    let (upper, _) = integrate_kernel(&kernel, ln_scale, tol, |lg| -(-lg.exp()).exp_m1());
    (1.0 - upper / PI, upper / PI)
}
