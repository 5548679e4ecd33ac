//! Drift and noise-intensity families, the per-dimension model
//! specification, and flat packing of free parameters.

mod params;
pub mod spline;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stable::StableParams;
use spline::{check_knots, NaturalSpline};

pub use params::{pack_params, unpack_params, ParamInfo, ParamVector, Role, Transform};
pub use spline::{equidistant_knots, spline_eval};

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

fn sigma_name() -> String {
    "sigma".into()
}

/// A scalar model parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Param {
    pub value: f64,
    #[serde(default = "yes")]
    pub free: bool,
}

impl Param {
    pub fn free(value: f64) -> Self {
        Self { value, free: true }
    }

    pub fn fixed(value: f64) -> Self {
        Self { value, free: false }
    }
}

/// One monomial `multiplier * value * prod_j x_j^powers[j]`.
///
/// The multiplier is a fixed sign or scale, e.g. the Landau drift `a x - b x^3`
/// is the pair of terms `(a, +1, [1])` and `(b, -1, [3])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub name: String,
    pub value: f64,
    #[serde(default = "one")]
    pub multiplier: f64,
    pub powers: Vec<u32>,
    #[serde(default = "yes")]
    pub free: bool,
}

impl PolyTerm {
    pub fn new(name: &str, value: f64, multiplier: f64, powers: &[u32]) -> Self {
        Self {
            name: name.into(),
            value,
            multiplier,
            powers: powers.to_vec(),
            free: true,
        }
    }

    fn monomial(&self, x: &[f64]) -> f64 {
        self.powers
            .iter()
            .zip(x)
            .fold(self.multiplier, |acc, (&p, &v)| acc * v.powi(p as i32))
    }
}

/// Drift `mu_i(X)` of one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftModel {
    /// Sum of monomials in all coordinates.
    Polynomial { terms: Vec<PolyTerm> },
    /// Natural cubic spline in the (single) coordinate; ordinates are the parameters.
    Spline {
        knots: Vec<f64>,
        ordinates: Vec<f64>,
        #[serde(default = "yes")]
        free: bool,
    },
    /// `r x_i (1 - sum_j a_j x_j)`.
    LotkaVolterra {
        r: f64,
        a: Vec<f64>,
        #[serde(default = "yes")]
        free: bool,
    },
}

/// Noise intensity `sigma_i(X)` of one coordinate, positive by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    Constant {
        #[serde(default = "sigma_name")]
        name: String,
        value: f64,
        #[serde(default = "yes")]
        free: bool,
    },
    /// `exp` of a natural cubic spline through the log-ordinates.
    Spline {
        knots: Vec<f64>,
        log_values: Vec<f64>,
        #[serde(default = "yes")]
        free: bool,
    },
}

/// Model of one coordinate: drift, noise intensity and its stable noise source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionModel {
    pub drift: DriftModel,
    pub noise: NoiseModel,
    pub alpha: Param,
    pub beta: Param,
}

/// A d-dimensional system `dX = M(X) dt + Sigma(X) dL` with diagonal `Sigma`
/// and independent standard stable sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub dimensions: Vec<DimensionModel>,
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        self.dimensions.len()
    }

    /// Landau double-well model `dx = (a x - b x^3) dt + c dL`.
    pub fn landau(a: f64, b: f64, c: f64, alpha: f64, beta: f64) -> Self {
        Self {
            dimensions: vec![DimensionModel {
                drift: DriftModel::Polynomial {
                    terms: vec![
                        PolyTerm::new("a", a, 1.0, &[1]),
                        PolyTerm::new("b", b, -1.0, &[3]),
                    ],
                },
                noise: NoiseModel::Constant {
                    name: "c".into(),
                    value: c,
                    free: true,
                },
                alpha: Param::free(alpha),
                beta: Param::free(beta),
            }],
        }
    }

    /// Competitive Lotka–Volterra system with constant noise intensities.
    pub fn lotka_volterra(
        r: &[f64],
        a: &[Vec<f64>],
        sigma: &[f64],
        alpha: &[f64],
        beta: &[f64],
    ) -> Self {
        let dimensions = (0..r.len())
            .map(|i| DimensionModel {
                drift: DriftModel::LotkaVolterra {
                    r: r[i],
                    a: a[i].clone(),
                    free: true,
                },
                noise: NoiseModel::Constant {
                    name: "sigma".into(),
                    value: sigma[i],
                    free: true,
                },
                alpha: Param::free(alpha[i]),
                beta: Param::free(beta[i]),
            })
            .collect();
        Self { dimensions }
    }

    /// Univariate spline model with drift and noise knots at `knots`.
    pub fn spline(knots: &[f64], drift: &[f64], sigma: &[f64], alpha: f64, beta: f64) -> Self {
        Self {
            dimensions: vec![DimensionModel {
                drift: DriftModel::Spline {
                    knots: knots.to_vec(),
                    ordinates: drift.to_vec(),
                    free: true,
                },
                noise: NoiseModel::Spline {
                    knots: knots.to_vec(),
                    log_values: sigma.iter().map(|s| s.ln()).collect(),
                    free: true,
                },
                alpha: Param::free(alpha),
                beta: Param::free(beta),
            }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::Config("model has no dimensions".into()));
        }
        for (i, m) in self.dimensions.iter().enumerate() {
            let at = |msg: String| Error::Config(format!("dimension {}: {msg}", i + 1));
            match &m.drift {
                DriftModel::Polynomial { terms } => {
                    for t in terms {
                        if t.powers.len() > d {
                            return Err(at(format!(
                                "term '{}' has {} powers for a {d}-dimensional model",
                                t.name,
                                t.powers.len()
                            )));
                        }
                        if !(t.value.is_finite() && t.multiplier.is_finite()) {
                            return Err(at(format!("term '{}' is not finite", t.name)));
                        }
                    }
                }
                DriftModel::Spline {
                    knots, ordinates, ..
                } => {
                    if d != 1 {
                        return Err(at(
                            "spline drift is only supported for one-dimensional models".into(),
                        ));
                    }
                    check_knots(knots).map_err(|e| at(e.to_string()))?;
                    if ordinates.len() != knots.len() || ordinates.iter().any(|v| !v.is_finite()) {
                        return Err(at(format!(
                            "drift spline needs {} finite ordinates, got {}",
                            knots.len(),
                            ordinates.len()
                        )));
                    }
                }
                DriftModel::LotkaVolterra { r, a, .. } => {
                    if a.len() != d {
                        return Err(at(format!(
                            "interaction row has {} entries, expected {d}",
                            a.len()
                        )));
                    }
                    if !r.is_finite() || a.iter().any(|v| !v.is_finite()) {
                        return Err(at("Lotka–Volterra parameters must be finite".into()));
                    }
                }
            }
            match &m.noise {
                NoiseModel::Constant { value, .. } => {
                    if !(*value >= 0.0 && value.is_finite()) {
                        return Err(at(format!("noise intensity {value} must be nonnegative")));
                    }
                }
                NoiseModel::Spline {
                    knots, log_values, ..
                } => {
                    check_knots(knots).map_err(|e| at(e.to_string()))?;
                    if log_values.len() != knots.len() || log_values.iter().any(|v| !v.is_finite())
                    {
                        return Err(at(format!(
                            "noise spline needs {} finite log-values, got {}",
                            knots.len(),
                            log_values.len()
                        )));
                    }
                }
            }
            StableParams::standard(m.alpha.value, m.beta.value).map_err(|e| at(e.to_string()))?;
        }
        Ok(())
    }

    /// Validated copy with splines prepared for fast evaluation.
    pub fn compile(&self) -> Result<CompiledModel> {
        self.validate()?;
        let dims = self
            .dimensions
            .iter()
            .map(|m| CompiledDimension {
                drift: match &m.drift {
                    DriftModel::Polynomial { terms } => CompiledDrift::Polynomial(
                        terms
                            .iter()
                            .map(|t| (t.value * t.multiplier, t.powers.clone()))
                            .collect(),
                    ),
                    DriftModel::Spline {
                        knots, ordinates, ..
                    } => CompiledDrift::Spline(NaturalSpline::build(knots, ordinates)),
                    DriftModel::LotkaVolterra { r, a, .. } => CompiledDrift::LotkaVolterra {
                        r: *r,
                        a: a.clone(),
                    },
                },
                noise: match &m.noise {
                    NoiseModel::Constant { value, .. } => CompiledNoise::Constant(*value),
                    NoiseModel::Spline {
                        knots, log_values, ..
                    } => CompiledNoise::Spline(NaturalSpline::build(knots, log_values)),
                },
                alpha: m.alpha.value,
                beta: m.beta.value,
            })
            .collect();
        Ok(CompiledModel { dims })
    }

    /// Copy with every drift and noise parameter frozen.
    pub fn freeze_drift_and_noise(&self) -> Self {
        let mut m = self.clone();
        for dm in &mut m.dimensions {
            match &mut dm.drift {
                DriftModel::Polynomial { terms } => terms.iter_mut().for_each(|t| t.free = false),
                DriftModel::Spline { free, .. } | DriftModel::LotkaVolterra { free, .. } => {
                    *free = false
                }
            }
            match &mut dm.noise {
                NoiseModel::Constant { free, .. } | NoiseModel::Spline { free, .. } => {
                    *free = false
                }
            }
        }
        m
    }

    /// Copy with the stable parameters of every dimension frozen.
    pub fn freeze_stable(&self) -> Self {
        let mut m = self.clone();
        for dm in &mut m.dimensions {
            dm.alpha.free = false;
            dm.beta.free = false;
        }
        m
    }
}

#[derive(Debug, Clone)]
enum CompiledDrift {
    Polynomial(Vec<(f64, Vec<u32>)>),
    Spline(NaturalSpline),
    LotkaVolterra { r: f64, a: Vec<f64> },
}

#[derive(Debug, Clone)]
enum CompiledNoise {
    Constant(f64),
    Spline(NaturalSpline),
}

#[derive(Debug, Clone)]
struct CompiledDimension {
    drift: CompiledDrift,
    noise: CompiledNoise,
    alpha: f64,
    beta: f64,
}

/// Evaluation form of a [`ModelSpec`].
#[derive(Debug, Clone)]
pub struct CompiledModel {
    dims: Vec<CompiledDimension>,
}

impl CompiledModel {
    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// Drift of coordinate `i` at state `x`.
    pub fn drift(&self, i: usize, x: &[f64]) -> f64 {
        match &self.dims[i].drift {
            CompiledDrift::Polynomial(terms) => terms
                .iter()
                .map(|(c, p)| {
                    p.iter()
                        .zip(x)
                        .fold(*c, |acc, (&k, &v)| acc * v.powi(k as i32))
                })
                .sum(),
            CompiledDrift::Spline(s) => s.eval(x[0]),
            CompiledDrift::LotkaVolterra { r, a } => {
                let inner: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum();
                r * x[i] * (1.0 - inner)
            }
        }
    }

    /// Noise intensity of coordinate `i` at state `x`.
    pub fn noise(&self, i: usize, x: &[f64]) -> f64 {
        match &self.dims[i].noise {
            CompiledNoise::Constant(c) => *c,
            // clamped so that far extrapolation stays positive and finite
            CompiledNoise::Spline(s) => s.eval(x[i]).clamp(-700.0, 700.0).exp(),
        }
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.dims[i].alpha
    }

    pub fn beta(&self, i: usize) -> f64 {
        self.dims[i].beta
    }
}

/// Drift vector `M(X)`.
pub fn eval_drift(m: &ModelSpec, x: &[f64]) -> Result<Vec<f64>> {
    let c = m.compile()?;
    check_state(&c, x)?;
    Ok((0..c.dim()).map(|i| c.drift(i, x)).collect())
}

/// Diagonal of the noise-intensity matrix `Sigma(X)`.
pub fn eval_noise(m: &ModelSpec, x: &[f64]) -> Result<Vec<f64>> {
    let c = m.compile()?;
    check_state(&c, x)?;
    Ok((0..c.dim()).map(|i| c.noise(i, x)).collect())
}

fn check_state(c: &CompiledModel, x: &[f64]) -> Result<()> {
    if x.len() != c.dim() {
        return Err(Error::Config(format!(
            "state has {} coordinates, model has {}",
            x.len(),
            c.dim()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("state is not finite".into()));
    }
    Ok(())
}

/// Regression design of the free drift coefficients of one coordinate.
///
/// The returned function maps a state to `(basis, offset)` so that the drift
/// equals `offset + basis · c` for the free coefficients `c` in packing
/// order. `None` for drift forms that are not linear in their parameters.
pub(crate) fn drift_design(
    m: &DimensionModel,
) -> Option<Box<dyn Fn(&[f64]) -> (Vec<f64>, f64) + Sync + '_>> {
    match &m.drift {
        DriftModel::Polynomial { terms } => Some(Box::new(move |x: &[f64]| {
            let mut basis = Vec::new();
            let mut offset = 0.0;
            for t in terms {
                if t.free {
                    basis.push(t.monomial(x));
                } else {
                    offset += t.value * t.monomial(x);
                }
            }
            (basis, offset)
        })),
        DriftModel::Spline {
            knots,
            ordinates,
            free,
        } => {
            if !*free {
                let s = NaturalSpline::build(knots, ordinates);
                return Some(Box::new(move |x: &[f64]| (Vec::new(), s.eval(x[0]))));
            }
            let n = knots.len();
            let splines: Vec<NaturalSpline> = (0..n)
                .map(|k| {
                    let mut e = vec![0.0; n];
                    e[k] = 1.0;
                    NaturalSpline::build(knots, &e)
                })
                .collect();
            Some(Box::new(move |x: &[f64]| {
                (splines.iter().map(|s| s.eval(x[0])).collect(), 0.0)
            }))
        }
        DriftModel::LotkaVolterra { .. } => None,
    }
}
