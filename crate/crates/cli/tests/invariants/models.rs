use levyfit::models::spline::NaturalSpline;
use levyfit::models::{eval_noise, spline_eval, ModelSpec, NoiseModel, Transform};
use proptest::collection::vec;
use proptest::prelude::*;

use super::{check, prop, rel, Check, CASES};

const M: &str = "models";

/// Increasing knots with gaps in [0.2, 2] and matching ordinates.
fn knots_and_values() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (4usize..10)
        .prop_flat_map(|n| {
            (
                -5.0f64..5.0,
                vec(0.2f64..2.0, n - 1),
                vec(-10.0f64..10.0, n),
            )
        })
        .prop_map(|(start, gaps, ys)| {
            let mut k = vec![start];
            for g in gaps {
                k.push(k.last().unwrap() + g);
            }
            (k, ys)
        })
}

fn interpolation() -> Result<String, String> {
    prop(CASES, knots_and_values(), |(k, y)| {
        let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (kj, yj) in k.iter().zip(&y) {
            let s = spline_eval(&k, &y, *kj).unwrap();
            prop_assert!(
                (s - yj).abs() <= 1e-12 * scale,
                "s({kj}) = {s}, ordinate {yj}"
            );
        }
        Ok(())
    })
}

/// One-sided second differences at each interior knot, extrapolated in the
/// step so the cubic pieces give the exact one-sided curvature.
fn c2_continuity() -> Result<String, String> {
    prop(CASES, knots_and_values(), |(k, y)| {
        let s = NaturalSpline::new(&k, &y).unwrap();
        let h = 0.05;
        let d2 = |x: f64, h: f64| (s.eval(x) - 2.0 * s.eval(x + h) + s.eval(x + 2.0 * h)) / (h * h);
        let one_sided = |x: f64, dir: f64| 2.0 * d2(x, dir * h / 2.0) - d2(x, dir * h);
        let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs())) / (0.2 * 0.2);
        for kj in &k[1..k.len() - 1] {
            let (l, r) = (one_sided(*kj, -1.0), one_sided(*kj, 1.0));
            prop_assert!(
                (l - r).abs() <= 1e-6 * (l.abs().max(r.abs()) + scale),
                "curvature jump at {kj}: {l} vs {r}"
            );
        }
        Ok(())
    })
}

fn transforms() -> Result<String, String> {
    let kinds = prop_oneof![
        (-1e6f64..1e6).prop_map(|v| (Transform::Identity, v)),
        (1e-6f64..1e6).prop_map(|v| (Transform::Log, v)),
        (0.15f64..1.995).prop_map(|v| (Transform::Alpha, v)),
        (-0.99f64..0.99).prop_map(|v| (Transform::Beta, v)),
    ];
    prop(512, (kinds, -1e3f64..1e3), |((t, v), u)| {
        let back = t.from_unbounded(t.to_unbounded(v));
        prop_assert!(rel(back, v) <= 1e-12, "{t:?}: {v} -> {back}");
        let w = t.from_unbounded(u);
        let inside = match t {
            Transform::Identity => w.is_finite(),
            Transform::Log => w > 0.0 && w.is_finite(),
            Transform::Alpha => (0.1..=2.0).contains(&w),
            Transform::Beta => (-1.0..=1.0).contains(&w),
        };
        prop_assert!(inside, "{t:?}: {u} -> {w}");
        Ok(())
    })
}

fn noise_positivity() -> Result<String, String> {
    prop(CASES, (knots_and_values(), 1e-4f64..10.0), |((k, y), c)| {
        let mut spline = ModelSpec::spline(&k, &vec![0.0; k.len()], &vec![1.0; k.len()], 1.5, 0.0);
        if let NoiseModel::Spline { log_values, .. } = &mut spline.dimensions[0].noise {
            *log_values = y.clone();
        }
        let constant = ModelSpec::landau(1.0, 1.0, c, 1.5, 0.0);
        for j in 0..=2000 {
            let x = -100.0 + 0.1 * j as f64;
            let s = eval_noise(&spline, &[x]).unwrap()[0];
            let n = eval_noise(&constant, &[x]).unwrap()[0];
            prop_assert!(s > 0.0 && s.is_finite(), "spline noise {s} at {x}");
            prop_assert!(n > 0.0, "constant noise {n}");
        }
        Ok(())
    })
}

pub fn run() -> Vec<Check> {
    vec![
        check(M, "spline interpolation", interpolation()),
        check(M, "C2 continuity", c2_continuity()),
        check(M, "transform consistency", transforms()),
        check(M, "noise positivity", noise_positivity()),
    ]
}
