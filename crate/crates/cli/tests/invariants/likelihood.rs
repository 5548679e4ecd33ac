use levyfit::likelihood::{
    compute_residuals, log_likelihood, log_likelihood_by_dimension, GridKind, Likelihood,
    TimeSeries,
};
use levyfit::models::{eval_drift, eval_noise, ModelSpec};
use levyfit::simulate::{simulate_path, simulate_path_recorded, SimConfig};
use proptest::prelude::*;

use super::simulate::decoupled;
use super::{check, prop, rel, Check, CASES};

const M: &str = "likelihood";

/// Euler transition likelihood with normal increments of standard deviation
/// `sqrt(2 delta) sigma(x)`.
pub fn gaussian_euler_loglik(ts: &TimeSeries, model: &ModelSpec) -> f64 {
    let delta = ts.delta();
    let mut total = 0.0;
    for t in 0..ts.len() - 1 {
        let (x, y) = (ts.row(t), ts.row(t + 1));
        let mu = eval_drift(model, x).unwrap();
        let sig = eval_noise(model, x).unwrap();
        for i in 0..x.len() {
            let sd = (2.0 * delta).sqrt() * sig[i];
            let z = (y[i] - x[i] - mu[i] * delta) / sd;
            total += -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
        }
    }
    total
}

pub fn landau_gaussian(seed: u64, a: f64, b: f64, c: f64, steps: usize) -> (TimeSeries, ModelSpec) {
    let mut m = ModelSpec::landau(a, b, c, 2.0, 0.0);
    m.dimensions[0].alpha.free = false;
    m.dimensions[0].beta.free = false;
    let ts = simulate_path(&SimConfig::new(m.clone(), vec![1.0], 0.01, steps, seed)).unwrap();
    (ts, m)
}

fn gaussian_reduction() -> Result<String, String> {
    prop(
        CASES,
        (any::<u64>(), 0.2f64..2.0, 0.2f64..2.0, 0.05f64..1.0),
        |(seed, a, b, c)| {
            let (ts, m) = landau_gaussian(seed, a, b, c, 1000);
            let l = log_likelihood(&ts, &m, None).unwrap();
            let g = gaussian_euler_loglik(&ts, &m);
            prop_assert!(rel(l, g) <= 1e-8, "{l} vs {g}");
            Ok(())
        },
    )
}

/// A three-species competitive system at its reference parameters.
pub fn lotka_volterra_truth() -> ModelSpec {
    let a = vec![
        vec![0.06, 0.02, 0.04],
        vec![0.02, 0.08, 0.02],
        vec![0.02, 0.04, 0.1],
    ];
    ModelSpec::lotka_volterra(
        &[1.0, 2.0, 3.0],
        &a,
        &[0.3; 3],
        &[1.7, 1.8, 1.9],
        &[-0.1, 0.1, 0.3],
    )
}

pub const LV_START: [f64; 3] = [10.87, 8.69, 4.35];

fn factorization() -> Result<String, String> {
    let truth = lotka_volterra_truth();
    let ts = simulate_path(&SimConfig::new(
        truth.clone(),
        LV_START.to_vec(),
        0.01,
        400,
        5,
    ))
    .map_err(|e| e.to_string())?;
    prop(
        CASES,
        (0.8f64..1.2, 0.8f64..1.2, 1.2f64..2.0, -0.5f64..0.5),
        |(sr, ss, alpha, beta)| {
            let mut m = truth.clone();
            for d in &mut m.dimensions {
                if let levyfit::models::DriftModel::LotkaVolterra { r, .. } = &mut d.drift {
                    *r *= sr;
                }
                if let levyfit::models::NoiseModel::Constant { value, .. } = &mut d.noise {
                    *value *= ss;
                }
                d.alpha.value = alpha;
                d.beta.value = beta;
            }
            let total = log_likelihood(&ts, &m, None).unwrap();
            let parts = log_likelihood_by_dimension(&ts, &m, None).unwrap();
            prop_assert_eq!(total, parts.iter().sum::<f64>());
            Ok(())
        },
    )
}

fn residual_round_trip() -> Result<String, String> {
    prop(CASES, any::<u64>(), |seed| {
        let cfg = SimConfig::new(lotka_volterra_truth(), LV_START.to_vec(), 0.01, 500, seed);
        let path = match simulate_path_recorded(&cfg) {
            Ok(p) => p,
            Err(_) => return Err(TestCaseError::reject("path exploded")),
        };
        let res = compute_residuals(&path.series, &cfg.model).unwrap();
        let worst = (0..res.len())
            .flat_map(|t| res.row(t).to_vec())
            .zip(&path.noise)
            .map(|(r, e)| rel(r, *e))
            .fold(0.0, f64::max);
        prop_assert!(worst <= 1e-10, "relative error {worst}");
        Ok(())
    })
}

fn continuous_response() -> Result<String, String> {
    prop(CASES, any::<u64>(), |seed| {
        let truth = decoupled(&[1.5], &[0.0], 1.0);
        let ts = simulate_path(&SimConfig::new(truth.clone(), vec![0.0], 0.01, 200, seed)).unwrap();
        let lik = Likelihood::new(&ts, None, GridKind::Adaptive).unwrap();
        let mut prev: Option<f64> = None;
        let k = 400;
        for j in 0..k {
            let sigma = 0.01 * 1e4f64.powf(j as f64 / (k - 1) as f64);
            let mut m = truth.clone();
            if let levyfit::models::NoiseModel::Constant { value, .. } = &mut m.dimensions[0].noise
            {
                *value = sigma;
            }
            let l = lik.total(&m).unwrap();
            prop_assert!(l.is_finite(), "loglik {l} at sigma {sigma}");
            if let Some(p) = prev {
                let step = 1e4f64.ln() / (k - 1) as f64;
                prop_assert!(
                    (l - p).abs() <= 10.0 * 200.0 * step,
                    "jump {p} -> {l} at sigma {sigma}"
                );
            }
            prev = Some(l);
        }
        Ok(())
    })
}

pub fn run() -> Vec<Check> {
    vec![
        check(M, "Gaussian reduction", gaussian_reduction()),
        check(M, "factorization", factorization()),
        check(M, "residual round trip", residual_round_trip()),
        check(M, "continuous response in sigma", continuous_response()),
    ]
}
