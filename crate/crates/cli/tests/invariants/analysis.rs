use levyfit::analysis::{effective_potential, kde, ks_distance, silverman_bandwidth};
use levyfit::stable::CdfGrid;
use proptest::collection::vec;
use proptest::prelude::*;

use super::{check, prop, Check, CASES};

const M: &str = "analysis";

/// Samples from a two-component mixture with random centres and spreads.
fn mixture() -> impl Strategy<Value = Vec<f64>> {
    (
        100usize..2000,
        -3.0f64..3.0,
        0.1f64..2.0,
        -3.0f64..3.0,
        0.1f64..2.0,
    )
        .prop_flat_map(|(n, m1, s1, m2, s2)| {
            vec((any::<bool>(), -1.0f64..1.0, -1.0f64..1.0), n).prop_map(move |draws| {
                draws
                    .into_iter()
                    .map(|(first, u, v)| {
                        if first {
                            m1 + s1 * (u + v)
                        } else {
                            m2 + s2 * (u + v)
                        }
                    })
                    .collect()
            })
        })
}

fn kde_mass() -> Result<String, String> {
    prop(CASES, mixture(), |s| {
        let h = silverman_bandwidth(&s).unwrap();
        let lo = s.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
        let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
        let m = ((hi - lo) / (h / 10.0)).ceil() as usize + 1;
        let step = (hi - lo) / (m - 1) as f64;
        let xs: Vec<f64> = (0..m).map(|k| lo + step * k as f64).collect();
        let p = kde(&s, h, &xs);
        let mass = step * (p.iter().sum::<f64>() - 0.5 * (p[0] + p[m - 1]));
        prop_assert!((mass - 1.0).abs() <= 1e-3, "mass {mass}");
        Ok(())
    })
}

fn potential_shift() -> Result<String, String> {
    prop(CASES, (mixture(), 2usize..600), |(s, grid)| {
        let c = effective_potential(&s, grid, None, None).unwrap();
        let min = c.potential.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(min, 0.0);
        Ok(())
    })
}

fn ks_range() -> Result<String, String> {
    prop(
        CASES,
        (
            1.1f64..2.0,
            -1.0f64..1.0,
            50usize..2000,
            vec(-50.0f64..50.0, 1..300),
        ),
        |(a, b, n, free)| {
            let g = CdfGrid::new(a, b, 1.0 - 1e-6).unwrap();
            let d = ks_distance(&free, |x| g.cdf(x));
            prop_assert!((0.0..=1.0).contains(&d), "statistic {d}");
            // inverse distribution function at the midpoints of n equal cells
            let inverse = |q: f64| {
                let (mut lo, mut hi) = (-1e6, 1e6);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if g.cdf(mid) < q {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            let s: Vec<f64> = (0..n)
                .map(|k| inverse((k as f64 + 0.5) / n as f64))
                .collect();
            let d = ks_distance(&s, |x| g.cdf(x));
            prop_assert!(d <= 1.0 / n as f64, "statistic {d} for {n} quantile points");
            Ok(())
        },
    )
}

pub fn run() -> Vec<Check> {
    vec![
        check(M, "KDE integrates to one", kde_mass()),
        check(M, "potential minimum is zero", potential_shift()),
        check(M, "KS statistic range", ks_range()),
    ]
}
