//! Subcommand implementations.

use std::path::{Path, PathBuf};

use levyfit::analysis::{
    effective_potential, ks_residual_test, model_report, Diagnostics, ModelReport,
};
use levyfit::estimate::{fit_mle, two_pass_fit, FitResult};
use levyfit::likelihood::{compute_residuals, Residuals, TimeSeries};
use levyfit::models::ModelSpec;
use levyfit::simulate::simulate_path;
use levyfit::stable::{stable_cdf, stable_pdf, StableParams};
use serde::{Deserialize, Serialize};

use crate::config::{apply_knots, InputTransform, OutputTransform, RunConfig};
use crate::error::{CliError, CliResult, EXIT_NUMERICAL, EXIT_OK};
use crate::io;

const VERSION: &str = env!("CARGO_PKG_VERSION");
const DEFAULT_OUT: &str = "levyfit-out";

fn column_names(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("x{i}")).collect()
}

fn out_dir(flag: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Record written next to a simulated series.
#[derive(Debug, Serialize, Deserialize)]
pub struct SimulationMetadata {
    pub version: String,
    pub rows: usize,
    pub dim: usize,
    pub delta: f64,
    pub series: String,
    pub config: RunConfig,
}

#[derive(Debug, Default)]
pub struct SimulateOverrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub delta_t: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

pub fn simulate(config: &Path, o: &SimulateOverrides) -> CliResult<i32> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(a) = o.alpha {
        cfg.fix_alpha(a);
    }
    if let Some(b) = o.beta {
        cfg.fix_beta(b);
    }
    if let (Some(d), Some(s)) = (o.delta_t, cfg.simulation.as_mut()) {
        s.delta = d;
    }
    cfg.validate()?;
    let sim = cfg.sim_config()?;
    let transform = cfg
        .simulation
        .as_ref()
        .map(|s| s.transform)
        .unwrap_or_default();
    let dir = out_dir(o.out.as_deref(), &cfg);
    let mut ts = simulate_path(&sim).map_err(|e| CliError::from(e).at("simulate"))?;
    if transform == OutputTransform::Exp {
        let data: Vec<f64> = ts.values().iter().map(|v| v.exp()).collect();
        ts = TimeSeries::from_flat(ts.delta(), ts.dim(), data)
            .map_err(|e| CliError::from(e).at("simulate"))?;
    }
    io::write_series(Some(&dir.join("series.csv")), &ts, &column_names(ts.dim()))?;
    cfg.materialize();
    io::write_json(&dir.join("config.json"), &cfg)?;
    let meta = SimulationMetadata {
        version: VERSION.into(),
        rows: ts.len(),
        dim: ts.dim(),
        delta: ts.delta(),
        series: "series.csv".into(),
        config: cfg,
    };
    io::write_json(&dir.join("metadata.json"), &meta)?;
    println!(
        "wrote {} rows to {}",
        ts.len(),
        dir.join("series.csv").display()
    );
    Ok(EXIT_OK)
}

/// Read the configured data, applying the configured transform.
fn load_data(path: &Path, delta: Option<f64>, transform: InputTransform) -> CliResult<TimeSeries> {
    let ts = io::ingest_csv(path, delta)?;
    match transform {
        InputTransform::None => Ok(ts),
        InputTransform::Log => {
            if let Some(k) = ts.values().iter().position(|v| *v <= 0.0) {
                return Err(CliError::data(format!(
                    "{}: row {} holds a non-positive value, which has no logarithm",
                    path.display(),
                    k / ts.dim() + 1
                )));
            }
            let data: Vec<f64> = ts.values().iter().map(|v| v.ln()).collect();
            let out = match ts.times() {
                Some(t) => {
                    let rows: Vec<Vec<f64>> = data_rows(&data, ts.dim());
                    TimeSeries::with_times(t.to_vec(), &rows)?
                }
                None => TimeSeries::from_flat(ts.delta(), ts.dim(), data)?,
            };
            Ok(out)
        }
    }
}

fn data_rows(flat: &[f64], d: usize) -> Vec<Vec<f64>> {
    flat.chunks(d).map(<[f64]>::to_vec).collect()
}

#[derive(Debug, Default)]
pub struct DataOverrides {
    pub data: Option<PathBuf>,
    pub delta_t: Option<f64>,
}

fn data_from(cfg: Option<&RunConfig>, o: &DataOverrides) -> CliResult<TimeSeries> {
    let section = cfg.and_then(|c| c.data.as_ref());
    let path = o
        .data
        .clone()
        .or_else(|| section.map(|d| d.path.clone()))
        .ok_or_else(|| {
            CliError::config("no data file: give --data or a data section in the config")
        })?;
    let delta = o.delta_t.or_else(|| section.and_then(|d| d.delta));
    if let Some(d) = delta {
        if !(d > 0.0 && d.is_finite()) {
            return Err(CliError::config(format!(
                "sampling step {d} must be positive"
            )));
        }
    }
    let transform = section.map(|d| d.transform).unwrap_or_default();
    load_data(&path, delta, transform)
}

/// Summary of the data behind a fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataSummary {
    pub path: PathBuf,
    pub rows: usize,
    pub dim: usize,
    pub delta: f64,
}

/// Everything a fit run produces, in one document.
#[derive(Debug, Serialize, Deserialize)]
pub struct FitDocument {
    pub version: String,
    pub config: RunConfig,
    pub data: DataSummary,
    pub report: ModelReport,
    pub fit: FitResult,
}

#[derive(Debug, Default)]
pub struct FitOverrides {
    pub data: DataOverrides,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub knots: Option<usize>,
}

/// Residual KS tests of every coordinate over all transitions.
pub fn diagnostics(res: &Residuals, model: &ModelSpec, level: f64) -> CliResult<Diagnostics> {
    let ks = model
        .dimensions
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let p = StableParams::standard(d.alpha.value, d.beta.value)?;
            ks_residual_test(res, i, &p, level)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Diagnostics { ks })
}

fn write_residuals(path: Option<&Path>, res: &Residuals, delta: f64) -> CliResult<()> {
    let mut header = vec!["t".to_string()];
    header.extend((1..=res.dim()).map(|i| format!("eta{i}")));
    io::write_csv(
        path,
        &header,
        (0..res.len()).map(|t| {
            let mut r = vec![(t + 1) as f64 * delta];
            r.extend_from_slice(res.row(t));
            r
        }),
    )
}

pub fn fit(config: &Path, o: &FitOverrides) -> CliResult<i32> {
    let mut cfg = RunConfig::load(config).map_err(|e| e.at("config"))?;
    if let Some(s) = o.seed {
        cfg.seed = s;
        cfg.fit.options.seed = s;
    }
    if let Some(a) = o.alpha {
        cfg.fix_alpha(a);
    }
    if let Some(b) = o.beta {
        cfg.fix_beta(b);
    }
    if let Some(n) = o.knots {
        let k = cfg.knots.get_or_insert(crate::config::KnotSection {
            count: n,
            lower: None,
            upper: None,
        });
        k.count = n;
    }
    if let Some(d) = o.data.delta_t {
        if let Some(s) = cfg.data.as_mut() {
            s.delta = Some(d);
        }
    }
    if let Some(p) = &o.data.data {
        match cfg.data.as_mut() {
            Some(s) => s.path = p.clone(),
            None => {
                cfg.data = Some(crate::config::DataSection {
                    path: p.clone(),
                    delta: o.data.delta_t,
                    transform: InputTransform::None,
                })
            }
        }
    }
    cfg.validate().map_err(|e| e.at("config"))?;
    let dir = out_dir(o.out.as_deref(), &cfg);

    let ts = data_from(Some(&cfg), &DataOverrides::default()).map_err(|e| e.at("ingest"))?;
    if ts.dim() != cfg.model.dim() {
        return Err(CliError::config(format!(
            "data has {} columns, model has {} dimensions",
            ts.dim(),
            cfg.model.dim()
        ))
        .at("config"));
    }
    let mut template = cfg.model.clone();
    if let Some(k) = &cfg.knots {
        let trunc = cfg.fit.options.truncation.clone().unwrap_or_default();
        apply_knots(&mut template, k, &ts, &trunc).map_err(|e| e.at("knots"))?;
    }

    let result = if cfg.two_pass() {
        two_pass_fit(&ts, &template, &cfg.fit.options)
    } else {
        fit_mle(&ts, &template, &cfg.fit.options)
    }
    .map_err(|e| CliError::from(e).at("fit"))?;

    let res =
        compute_residuals(&ts, &result.model).map_err(|e| CliError::from(e).at("residuals"))?;
    let diag =
        diagnostics(&res, &result.model, cfg.fit.ks_level).map_err(|e| e.at("diagnostics"))?;
    let report = model_report(&result, &diag);

    write_residuals(Some(&dir.join("residuals.csv")), &res, ts.delta())?;
    io::write_json(&dir.join("fitted_model.json"), &result.model)?;
    let text = report.to_text();
    std::fs::write(dir.join("report.txt"), &text)
        .map_err(|e| CliError::config(format!("cannot write report.txt: {e}")))?;
    let data_path = cfg
        .data
        .as_ref()
        .map(|d| d.path.clone())
        .unwrap_or_default();
    cfg.materialize();
    cfg.model = template;
    let doc = FitDocument {
        version: VERSION.into(),
        config: cfg,
        data: DataSummary {
            path: data_path,
            rows: ts.len(),
            dim: ts.dim(),
            delta: ts.delta(),
        },
        report,
        fit: result,
    };
    io::write_json(&dir.join("report.json"), &doc)?;
    print!("{text}");
    Ok(if doc.report.converged {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    })
}

/// Density or distribution function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    Pdf,
    Cdf,
}

#[derive(Debug)]
pub struct CurveArgs {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub location: f64,
    pub x: Option<f64>,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub out: Option<PathBuf>,
}

pub fn curve(kind: Curve, a: &CurveArgs) -> CliResult<i32> {
    let p = StableParams::new(a.alpha, a.beta, a.gamma, a.location)?;
    let xs: Vec<f64> = match a.x {
        Some(x) => vec![x],
        None => {
            if !(a.from < a.to) || a.points < 2 {
                return Err(CliError::config(
                    "need --from < --to and at least 2 --points",
                ));
            }
            (0..a.points)
                .map(|k| a.from + (a.to - a.from) * k as f64 / (a.points - 1) as f64)
                .collect()
        }
    };
    let (name, f): (&str, fn(f64, &StableParams) -> levyfit::Result<f64>) = match kind {
        Curve::Pdf => ("pdf", stable_pdf),
        Curve::Cdf => ("cdf", stable_cdf),
    };
    let rows = xs
        .iter()
        .map(|&x| Ok(vec![x, f(x, &p)?]))
        .collect::<levyfit::Result<Vec<_>>>()?;
    io::write_csv(
        a.out.as_deref(),
        &["x".into(), name.into()],
        rows.into_iter(),
    )?;
    Ok(EXIT_OK)
}

#[derive(Debug, Default)]
pub struct ResidualArgs {
    pub config: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub data: DataOverrides,
    pub out: Option<PathBuf>,
}

pub fn residuals(a: &ResidualArgs) -> CliResult<i32> {
    let cfg = a.config.as_deref().map(RunConfig::load).transpose()?;
    let model: ModelSpec = match (&a.model, &cfg) {
        (Some(p), _) => io::read_json(p)?,
        (None, Some(c)) => c.model.clone(),
        (None, None) => return Err(CliError::config("give --model or --config")),
    };
    model.validate()?;
    let ts = data_from(cfg.as_ref(), &a.data)?;
    if ts.dim() != model.dim() {
        return Err(CliError::config(format!(
            "data has {} columns, model has {} dimensions",
            ts.dim(),
            model.dim()
        )));
    }
    let res = compute_residuals(&ts, &model)?;
    write_residuals(a.out.as_deref(), &res, ts.delta())?;
    Ok(EXIT_OK)
}

#[derive(Debug, Default)]
pub struct PotentialArgs {
    pub config: Option<PathBuf>,
    pub data: DataOverrides,
    pub column: usize,
    pub grid: usize,
    pub bandwidth: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub out: Option<PathBuf>,
}

pub fn potential(a: &PotentialArgs) -> CliResult<i32> {
    let cfg = a.config.as_deref().map(RunConfig::load).transpose()?;
    let ts = data_from(
        cfg.as_ref(),
        &DataOverrides {
            data: a.data.data.clone(),
            delta_t: a.data.delta_t.or(Some(1.0)),
        },
    )?;
    if a.column < 1 || a.column > ts.dim() {
        return Err(CliError::config(format!(
            "column {} out of range 1..={}",
            a.column,
            ts.dim()
        )));
    }
    let sample = ts.column(a.column - 1);
    let window = match (a.lower, a.upper) {
        (None, None) => None,
        (l, u) => {
            let (dl, du) = levyfit::analysis::default_window(&sample);
            Some((l.unwrap_or(dl), u.unwrap_or(du)))
        }
    };
    let curve = effective_potential(&sample, a.grid, a.bandwidth, window)?;
    io::write_csv(
        a.out.as_deref(),
        &["x".into(), "U".into()],
        curve
            .abscissae
            .iter()
            .zip(&curve.potential)
            .map(|(x, u)| vec![*x, *u]),
    )?;
    Ok(EXIT_OK)
}

pub fn report(input: &Path, json: bool) -> CliResult<i32> {
    let doc: serde_json::Value = io::read_json(input)?;
    let report: ModelReport = serde_json::from_value(doc.get("report").cloned().unwrap_or(doc))
        .map_err(|e| CliError::config(format!("{}: not a fit report: {e}", input.display())))?;
    if json {
        print!("{}", io::to_json(&report)?);
    } else {
        print!("{}", report.to_text());
    }
    Ok(if report.converged {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    })
}
