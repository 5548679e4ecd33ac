use levyfit::models::{DimensionModel, DriftModel, ModelSpec, NoiseModel, Param, PolyTerm};
use levyfit::simulate::{noise_stream, simulate_path, simulate_path_recorded, SimConfig};
use levyfit::stable::{stable_sample, StableParams};
use proptest::prelude::*;

use super::{check, prop, Check, CASES};

const M: &str = "simulate";

/// Independent mean-reverting coordinates `dx_i = -x_i dt + sigma_i dL_i`.
pub fn decoupled(alpha: &[f64], beta: &[f64], sigma: f64) -> ModelSpec {
    let d = alpha.len();
    let dimensions = (0..d)
        .map(|i| {
            let mut powers = vec![0; d];
            powers[i] = 1;
            DimensionModel {
                drift: DriftModel::Polynomial {
                    terms: vec![PolyTerm::new("k", 1.0, -1.0, &powers)],
                },
                noise: NoiseModel::Constant {
                    name: "sigma".into(),
                    value: sigma,
                    free: true,
                },
                alpha: Param::free(alpha[i]),
                beta: Param::free(beta[i]),
            }
        })
        .collect();
    ModelSpec { dimensions }
}

fn determinism() -> Result<String, String> {
    prop(
        CASES,
        (any::<u64>(), 1.2f64..2.0, -1.0f64..1.0),
        |(seed, a, b)| {
            let cfg = SimConfig::new(
                ModelSpec::landau(1.0, 1.0, 0.3, a, b),
                vec![1.0],
                0.01,
                300,
                seed,
            );
            let (p, q) = (simulate_path(&cfg), simulate_path(&cfg));
            match (p, q) {
                (Ok(p), Ok(q)) => prop_assert_eq!(p, q),
                (Err(e), Err(f)) => prop_assert_eq!(e.to_string(), f.to_string()),
                _ => prop_assert!(false, "one run failed, the other did not"),
            }
            Ok(())
        },
    )
}

fn substreams() -> Result<String, String> {
    prop(
        CASES,
        (
            any::<u64>(),
            1.1f64..2.0,
            1.1f64..2.0,
            -1.0f64..1.0,
            1.1f64..2.0,
        ),
        |(seed, a0, a1, b1, a0_other)| {
            let steps = 200;
            let run = |a0: f64| {
                let cfg = SimConfig::new(
                    decoupled(&[a0, a1], &[0.0, b1], 0.1),
                    vec![0.0, 0.0],
                    0.01,
                    steps,
                    seed,
                );
                simulate_path_recorded(&cfg).unwrap()
            };
            let base = run(a0);
            let other = run(a0_other);
            let law = StableParams::standard(a1, b1).unwrap();
            let mut rng = noise_stream(seed, 1);
            for t in 0..steps {
                let own = stable_sample(&law, &mut rng);
                prop_assert_eq!(base.noise[2 * t + 1], own);
                prop_assert_eq!(other.noise[2 * t + 1], own);
            }
            prop_assert_eq!(base.series.column(1), other.series.column(1));
            Ok(())
        },
    )
}

fn gaussian_limit() -> Result<String, String> {
    let sigma = 0.5;
    let delta = 0.01;
    let model = ModelSpec {
        dimensions: vec![DimensionModel {
            drift: DriftModel::Polynomial { terms: vec![] },
            noise: NoiseModel::Constant {
                name: "sigma".into(),
                value: sigma,
                free: true,
            },
            alpha: Param::fixed(2.0),
            beta: Param::fixed(0.0),
        }],
    };
    let n = 1_000_000;
    let ts = simulate_path(&SimConfig::new(model, vec![0.0], delta, n, 11))
        .map_err(|e| e.to_string())?;
    let x = ts.column(0);
    let inc: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = inc.iter().sum::<f64>() / n as f64;
    let var = inc.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let want = 2.0 * delta * sigma * sigma;
    let dev = (var / want - 1.0).abs();
    let msg = format!("increment variance {var:.6e}, expected {want:.6e}");
    if dev <= 0.02 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

pub fn run() -> Vec<Check> {
    vec![
        check(M, "determinism", determinism()),
        check(M, "substream independence", substreams()),
        check(M, "Gaussian limit", gaussian_limit()),
    ]
}
