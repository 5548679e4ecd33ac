//! Nelder–Mead direct search with dimension-adapted coefficients and
//! restarts from the best vertex.

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn spread_small(lo: f64, hi: f64, tol: f64) -> bool {
    hi - lo <= tol * (1.0 + lo.abs())
}

fn clean(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// One simplex run; stops when the objective spread over the vertices falls
/// below `tol` relative or the iteration budget is used up.
fn run<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    x0: &[f64],
    steps: &[f64],
    tol: f64,
    budget: usize,
) -> Outcome {
    let n = x0.len();
    let nf = n as f64;
    let (reflect, expand) = (1.0, 1.0 + 2.0 / nf);
    let contract = 0.75 - 0.5 / nf;
    let shrink = 1.0 - 1.0 / nf.max(2.0);

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += steps[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| clean(f(p))).collect();

    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();
    while iterations < budget {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (best, worst, second) = (order[0], order[n], order[n - 1]);
        if vals[best].is_finite() && spread_small(vals[best], vals[worst], tol) {
            converged = true;
            break;
        }
        iterations += 1;
        let mut centroid = vec![0.0; n];
        for &k in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&pts[k]) {
                *c += v / nf;
            }
        }
        let towards = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = towards(reflect, &pts[worst]);
        let fr = clean(f(&xr));
        if fr < vals[best] {
            let xe = towards(reflect * expand, &pts[worst]);
            let fe = clean(f(&xe));
            if fe < fr {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[worst] {
            let xc = towards(reflect * contract, &pts[worst]);
            let fc = clean(f(&xc));
            (xc, if fc <= fr { fc } else { f64::INFINITY })
        } else {
            let xc = towards(-contract, &pts[worst]);
            let fc = clean(f(&xc));
            (xc, if fc < vals[worst] { fc } else { f64::INFINITY })
        };
        if fc.is_finite() {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        let anchor = pts[best].clone();
        for &k in &order[1..] {
            for (p, a) in pts[k].iter_mut().zip(&anchor) {
                *p = a + shrink * (*p - a);
            }
            vals[k] = clean(f(&pts[k]));
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .unwrap_or(0);
    Outcome {
        x: pts[best].clone(),
        f: vals[best],
        converged,
        iterations,
    }
}

/// Minimize `f` from `x0`. After each converged run the simplex is rebuilt
/// around the best point; the search ends when a restart no longer improves
/// the objective by more than `tol` relative.
pub(crate) fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    steps: &[f64],
    tol: f64,
    max_iter: usize,
) -> Outcome {
    const RESTARTS: usize = 6;
    let mut out = run(&mut f, x0, steps, tol, max_iter);
    let mut used = out.iterations;
    for r in 0..RESTARTS {
        if !out.converged || used >= max_iter {
            break;
        }
        let scale = 0.5f64.powi(r as i32 + 1);
        let small: Vec<f64> = steps.iter().map(|s| s * scale).collect();
        let next = run(&mut f, &out.x, &small, tol, max_iter - used);
        used += next.iterations;
        let improved = next.f < out.f && !spread_small(next.f, out.f, tol);
        if next.f < out.f {
            out.x = next.x;
            out.f = next.f;
        }
        out.converged = next.converged;
        if !improved {
            break;
        }
    }
    out.iterations = used;
    out
}
