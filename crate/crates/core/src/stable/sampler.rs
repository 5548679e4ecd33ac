use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use super::StableParams;

/// Chambers–Mallows–Stuck map from an angle `v` in (-pi/2, pi/2) and a unit
/// exponential `w` to a standard S1 stable variate.
pub fn cms_transform(v: f64, w: f64, alpha: f64, beta: f64) -> f64 {
    if alpha == 1.0 {
        let b = FRAC_PI_2 + beta * v;
        return (b * v.tan() - beta * (FRAC_PI_2 * w * v.cos() / b).ln()) * 2.0 / PI;
    }
    let t = beta * (FRAC_PI_2 * alpha).tan();
    let b = t.atan() / alpha;
    let s = (1.0 + t * t).powf(0.5 / alpha);
    let av = alpha * (v + b);
    s * av.sin() / v.cos().powf(1.0 / alpha) * ((v - av).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Draw one variate from `p`.
pub fn stable_sample<R: Rng + ?Sized>(p: &StableParams, rng: &mut R) -> f64 {
    // open interval (0, 1) for both uniforms
    let u: f64 = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    };
    let e: f64 = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break -u.ln();
        }
    };
    let v = PI * (u - 0.5);
    p.destandardize(cms_transform(v, e, p.alpha, p.beta))
}
