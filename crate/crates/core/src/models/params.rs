use serde::{Deserialize, Serialize};

use super::{DriftModel, ModelSpec, NoiseModel};
use crate::error::{Error, Result};

/// Finite stand-in for the unbounded coordinate of a parameter sitting on
/// its bound; maps back to the bound exactly.
const EDGE_ALPHA: f64 = 40.0;
const EDGE_BETA: f64 = 20.0;
/// keeps `exp(u)` positive and finite
const EDGE_LOG: f64 = 700.0;

/// Map between a parameter's natural range and the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    /// positive parameters, `theta = exp(u)`
    Log,
    /// stability index, `alpha = 0.1 + 1.9 logistic(u)`
    Alpha,
    /// skewness, `beta = tanh(u)`
    Beta,
}

impl Transform {
    pub fn to_unbounded(self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::Log => v.ln(),
            Transform::Alpha => {
                let p = (v - 0.1) / 1.9;
                (p / (1.0 - p)).ln().clamp(-EDGE_ALPHA, EDGE_ALPHA)
            }
            Transform::Beta => v.atanh().clamp(-EDGE_BETA, EDGE_BETA),
        }
    }

    pub fn from_unbounded(self, u: f64) -> f64 {
        match self {
            Transform::Identity => u,
            Transform::Log => u.clamp(-EDGE_LOG, EDGE_LOG).exp(),
            Transform::Alpha => (0.1 + 1.9 / (1.0 + (-u).exp())).clamp(0.1, 2.0),
            Transform::Beta => u.tanh().clamp(-1.0, 1.0),
        }
    }
}

/// Which part of a dimension's model a parameter belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Drift,
    Noise,
    Alpha,
    Beta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamInfo {
    pub name: String,
    /// zero-based coordinate the parameter belongs to
    pub dimension: usize,
    pub role: Role,
    pub transform: Transform,
}

/// Free parameters of a model in natural units, in packing order: for each
/// dimension its drift parameters, then noise, then alpha, then beta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub values: Vec<f64>,
    pub info: Vec<ParamInfo>,
}

impl ParamVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.info.iter().map(|i| i.name.as_str()).collect()
    }

    pub fn to_unbounded(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.info)
            .map(|(v, i)| i.transform.to_unbounded(*v))
            .collect()
    }

    pub fn from_unbounded(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.info)
            .map(|(u, i)| i.transform.from_unbounded(*u))
            .collect()
    }

    /// Index of the parameter labelled `name`.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.info.iter().position(|i| i.name == name)
    }
}

fn label(base: &str, i: usize, d: usize) -> String {
    if d == 1 {
        base.to_string()
    } else {
        format!("{base}[{}]", i + 1)
    }
}

/// Visit every free parameter in packing order with a mutable handle.
fn visit<F: FnMut(&mut f64, ParamInfo)>(m: &mut ModelSpec, mut f: F) {
    let d = m.dim();
    for (i, dm) in m.dimensions.iter_mut().enumerate() {
        let mut push = |v: &mut f64, name: String, role, transform| {
            f(
                v,
                ParamInfo {
                    name,
                    dimension: i,
                    role,
                    transform,
                },
            )
        };
        match &mut dm.drift {
            DriftModel::Polynomial { terms } => {
                for t in terms.iter_mut().filter(|t| t.free) {
                    let name = label(&t.name, i, d);
                    push(&mut t.value, name, Role::Drift, Transform::Identity);
                }
            }
            DriftModel::Spline {
                knots,
                ordinates,
                free,
            } => {
                if *free {
                    for (k, v) in knots.iter().zip(ordinates.iter_mut()) {
                        push(v, format!("mu@{k}"), Role::Drift, Transform::Identity);
                    }
                }
            }
            DriftModel::LotkaVolterra { r, a, free } => {
                if *free {
                    push(r, format!("r[{}]", i + 1), Role::Drift, Transform::Identity);
                    for (j, v) in a.iter_mut().enumerate() {
                        push(
                            v,
                            format!("a[{},{}]", i + 1, j + 1),
                            Role::Drift,
                            Transform::Identity,
                        );
                    }
                }
            }
        }
        match &mut dm.noise {
            NoiseModel::Constant { name, value, free } => {
                if *free {
                    let name = label(name, i, d);
                    push(value, name, Role::Noise, Transform::Log);
                }
            }
            NoiseModel::Spline {
                knots,
                log_values,
                free,
            } => {
                if *free {
                    for (k, w) in knots.iter().zip(log_values.iter_mut()) {
                        // reported and packed as sigma itself; the log is the unbounded coordinate
                        let mut s = w.exp();
                        push(&mut s, format!("sigma@{k}"), Role::Noise, Transform::Log);
                        if s != w.exp() {
                            *w = s.ln();
                        }
                    }
                }
            }
        }
        if dm.alpha.free {
            push(
                &mut dm.alpha.value,
                label("alpha", i, d),
                Role::Alpha,
                Transform::Alpha,
            );
        }
        if dm.beta.free {
            push(
                &mut dm.beta.value,
                label("beta", i, d),
                Role::Beta,
                Transform::Beta,
            );
        }
    }
}

/// Collect the free parameters of `m`.
pub fn pack_params(m: &ModelSpec) -> ParamVector {
    let mut m = m.clone();
    let mut values = Vec::new();
    let mut info = Vec::new();
    visit(&mut m, |v, i| {
        values.push(*v);
        info.push(i);
    });
    ParamVector { values, info }
}

/// Write `v` into the free slots of `template`; frozen parameters are kept.
pub fn unpack_params(v: &ParamVector, template: &ModelSpec) -> Result<ModelSpec> {
    unpack_values(&v.values, template)
}

pub(crate) fn unpack_values(values: &[f64], template: &ModelSpec) -> Result<ModelSpec> {
    let mut m = template.clone();
    let mut n = 0;
    visit(&mut m, |slot, _| {
        if let Some(v) = values.get(n) {
            *slot = *v;
        }
        n += 1;
    });
    if n != values.len() {
        return Err(Error::Config(format!(
            "parameter vector has {} entries, model has {n} free parameters",
            values.len()
        )));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn landau_order() {
        let m = ModelSpec::landau(1.0, 1.0, 0.3, 1.6, 0.0);
        let p = pack_params(&m);
        assert_eq!(p.names(), vec!["a", "b", "c", "alpha", "beta"]);
        assert_eq!(p.values, vec![1.0, 1.0, 0.3, 1.6, 0.0]);
        assert_eq!(unpack_params(&p, &m).unwrap(), m);
    }

    #[test]
    fn length_mismatch() {
        let m = ModelSpec::landau(1.0, 1.0, 0.3, 1.6, 0.0);
        assert!(matches!(
            unpack_values(&[1.0; 4], &m),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            unpack_values(&[1.0; 6], &m),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn frozen_untouched() {
        let mut m = ModelSpec::landau(1.0, 1.0, 0.3, 1.6, 0.0);
        m.dimensions[0].alpha.free = false;
        let p = pack_params(&m);
        assert_eq!(p.len(), 4);
        let back = unpack_values(&[2.0, 3.0, 0.5, 0.2], &m).unwrap();
        assert_eq!(back.dimensions[0].alpha.value, 1.6);
        assert_eq!(back.dimensions[0].beta.value, 0.2);
    }

    #[test]
    fn bounds_hit_exactly() {
        assert_eq!(Transform::Alpha.from_unbounded(1e300), 2.0);
        assert_eq!(Transform::Alpha.from_unbounded(-1e300), 0.1);
        assert_eq!(
            Transform::Alpha.from_unbounded(Transform::Alpha.to_unbounded(2.0)),
            2.0
        );
        assert_eq!(
            Transform::Beta.from_unbounded(Transform::Beta.to_unbounded(-1.0)),
            -1.0
        );
    }

    #[test]
    fn spline_labels() {
        let k = [-1.0, 0.0, 1.5, 2.0];
        let m = ModelSpec::spline(&k, &[0.0; 4], &[0.3; 4], 1.6, 0.0);
        let p = pack_params(&m);
        assert_eq!(p.names()[0], "mu@-1");
        assert_eq!(p.names()[6], "sigma@1.5");
        assert!((p.values[6] - 0.3).abs() < 1e-15);
    }
}
