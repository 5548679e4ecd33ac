use levyfit::quadrature::integrate_pieces;
use levyfit::stable::{build_density_grid, stable_cdf, stable_log_pdf, stable_pdf, StableParams};
use proptest::prelude::*;

use super::{check, prop, rel, Check, CASES};

const M: &str = "stable";

fn nonnegativity() -> Result<String, String> {
    prop(
        256,
        (0.1f64..=2.0, -1.0f64..=1.0, -1e3f64..1e3),
        |(a, b, x)| {
            let p = StableParams::standard(a, b).unwrap();
            let f = stable_log_pdf(x, &p).unwrap().exp();
            prop_assert!(f >= 0.0 && f.is_finite(), "pdf {f}");
            Ok(())
        },
    )
}

/// Integral of the tabulated density plus the power-law mass beyond the
/// table, over a lattice of shapes.
fn normalization() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for &a in &[0.5, 0.7, 1.0, 1.3, 1.6, 1.9] {
        for &b in &[-0.9, -0.5, 0.0, 0.5, 0.9] {
            if a == 1.0 && b == 0.0 {
                continue;
            }
            let g = build_density_grid(a, b, 1.0 - 1e-6).map_err(|e| e.to_string())?;
            let z = g.abscissae();
            let body = integrate_pieces(|t| g.ln_pdf(t).exp(), z, 1e-10, 1e-10, 20_000).value;
            let tc = g.tail_coefficients();
            let (lo, hi) = (z[0], z[z.len() - 1]);
            let tails = tc.right * hi.powf(-a) / a + tc.left * (-lo).powf(-a) / a;
            let total = body + tails;
            worst = worst.max((total - 1.0).abs());
            if (total - 1.0).abs() > 1e-3 {
                return Err(format!("alpha {a}, beta {b}: mass {total}"));
            }
        }
    }
    Ok(format!("largest deviation {worst:.2e}"))
}

fn reflection() -> Result<String, String> {
    prop(
        CASES,
        (0.3f64..=2.0, -1.0f64..=1.0, -20.0f64..20.0)
            .prop_filter("alpha off 1", |(a, _, _)| (a - 1.0).abs() > 0.01),
        |(a, b, x)| {
            let f = stable_pdf(x, &StableParams::standard(a, b).unwrap()).unwrap();
            let g = stable_pdf(-x, &StableParams::standard(a, -b).unwrap()).unwrap();
            prop_assert!(rel(f, g) <= 1e-8, "{f} vs {g}");
            Ok(())
        },
    )
}

fn scale_shift() -> Result<String, String> {
    prop(
        CASES,
        (
            0.3f64..=2.0,
            -1.0f64..=1.0,
            0.1f64..10.0,
            -5.0f64..5.0,
            -20.0f64..20.0,
        )
            .prop_filter("alpha off 1", |(a, ..)| (a - 1.0).abs() > 0.01),
        |(a, b, g, d, x)| {
            let full = stable_pdf(x, &StableParams::new(a, b, g, d).unwrap()).unwrap();
            let std = stable_pdf((x - d) / g, &StableParams::standard(a, b).unwrap()).unwrap() / g;
            prop_assert!(rel(full, std) <= 1e-8, "{full} vs {std}");
            Ok(())
        },
    )
}

fn cdf_derivative() -> Result<String, String> {
    let h = 1e-3;
    prop(
        CASES,
        (0.5f64..=2.0, -1.0f64..=1.0, -5.0f64..5.0),
        |(a, b, x)| {
            let p = StableParams::standard(a, b).unwrap();
            let (lo, hi) = (
                stable_cdf(x - h, &p).unwrap(),
                stable_cdf(x + h, &p).unwrap(),
            );
            prop_assert!(hi >= lo, "cdf decreases: {lo} > {hi}");
            let slope = (hi - lo) / (2.0 * h);
            let f = stable_pdf(x, &p).unwrap();
            prop_assert!((slope - f).abs() <= 1e-3, "slope {slope} vs pdf {f}");
            Ok(())
        },
    )
}

/// Every stable invariant except the sampler law, which the caller supplies.
pub fn run() -> Vec<Check> {
    vec![
        check(M, "nonnegativity", nonnegativity()),
        check(M, "normalization", normalization()),
        check(M, "reflection", reflection()),
        check(M, "scale and shift", scale_shift()),
        check(M, "cdf monotone, pdf = cdf'", cdf_derivative()),
    ]
}
