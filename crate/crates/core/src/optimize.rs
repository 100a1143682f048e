//! Unconstrained maximisers used for the shape-parameter step: Nelder–Mead simplex search and
//! BFGS with central-difference gradients, plus the log/exp reparametrisation of `(χ, ψ)`.
//!
//! Objectives return `Some(value)` to be maximised, or `None` to reject a point (outside the
//! domain, numerical failure). Non-finite values are treated as rejections.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// An objective to maximise plus its budget.
pub struct ObjectiveSpec<'a> {
    pub dim: usize,
    pub eval: &'a dyn Fn(&[f64]) -> Option<f64>,
    pub max_evals: usize,
    /// Simplex diameter tolerance for Nelder–Mead; gradient / step tolerance for BFGS.
    pub tol: f64,
    /// Initial simplex edge relative to `1 + |xⱼ|`.
    pub simplex_scale: f64,
}

impl<'a> ObjectiveSpec<'a> {
    pub fn new(dim: usize, eval: &'a dyn Fn(&[f64]) -> Option<f64>) -> Self {
        Self {
            dim,
            eval,
            max_evals: 5000,
            tol: 1e-8,
            simplex_scale: 0.1,
        }
    }

    fn call(&self, x: &[f64], evals: &mut usize) -> f64 {
        *evals += 1;
        match (self.eval)(x) {
            Some(v) if v.is_finite() => v,
            _ => f64::NEG_INFINITY,
        }
    }

    fn check_start(&self, start: &[f64]) -> Result<f64> {
        if start.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "start has {} coordinates, objective has {}",
                start.len(),
                self.dim
            )));
        }
        if start.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite start".into()));
        }
        match (self.eval)(start) {
            Some(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Optimization("objective is not finite at the start".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    NelderMead,
    Bfgs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub evals: usize,
}

/// Result of [`best_of`]: the winning run, its method, and both runs' diagnostics.
#[derive(Debug, Clone)]
pub struct BestOf {
    pub result: OptResult,
    pub method: Method,
    pub nelder_mead: std::result::Result<OptResult, String>,
    pub bfgs: std::result::Result<OptResult, String>,
}

/// Nelder–Mead maximisation with coefficients (reflection 1, expansion 2, contraction ½,
/// shrink ½). Stops when every vertex is within `tol·(1 + |x_best|)` of the best vertex
/// (coordinate-wise), when the vertex values agree to `tol·(1 + |f_best|)`, or when the
/// evaluation budget is spent.
pub fn nelder_mead(obj: &ObjectiveSpec, start: &[f64]) -> Result<OptResult> {
    let f0 = obj.check_start(start)?;
    let n = obj.dim;
    let mut evals = 1usize;
    let mut improved_elsewhere = false;
    if n == 0 {
        return Ok(OptResult {
            x: vec![],
            value: f0,
            converged: true,
            evals,
        });
    }
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
    pts.push(start.to_vec());
    vals.push(f0);
    for j in 0..n {
        let mut p = start.to_vec();
        p[j] += obj.simplex_scale * (1.0 + start[j].abs());
        let v = obj.call(&p, &mut evals);
        improved_elsewhere |= v.is_finite();
        pts.push(p);
        vals.push(v);
    }

    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();
    loop {
        // best first; ties keep earlier (stable)
        order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap_or(std::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let diameter_ok = pts.iter().all(|p| {
            p.iter()
                .zip(&pts[best])
                .all(|(a, b)| (a - b).abs() <= obj.tol * (1.0 + b.abs()))
        });
        let spread_ok = vals[worst].is_finite()
            && vals[best] - vals[worst] <= obj.tol * (1.0 + vals[best].abs());
        if diameter_ok || spread_ok {
            converged = true;
            break;
        }
        if evals >= obj.max_evals {
            break;
        }

        let mut centroid = vec![0.0; n];
        for &k in order.iter().take(n) {
            for (c, v) in centroid.iter_mut().zip(&pts[k]) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(1.0);
        let fr = obj.call(&xr, &mut evals);
        improved_elsewhere |= fr.is_finite();
        if fr > vals[best] {
            let xe = along(2.0);
            let fe = obj.call(&xe, &mut evals);
            improved_elsewhere |= fe.is_finite();
            if fe > fr {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if fr > vals[second_worst] {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        // contraction: outside if the reflected point beats the worst, inside otherwise
        let (xc, fc) = if fr > vals[worst] {
            let xc = along(0.5);
            let fc = obj.call(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = obj.call(&xc, &mut evals);
            (xc, fc)
        };
        improved_elsewhere |= fc.is_finite();
        if fc > vals[worst].max(fr) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        // shrink toward the best vertex
        let anchor = pts[best].clone();
        for k in 0..=n {
            if k == best {
                continue;
            }
            for (p, a) in pts[k].iter_mut().zip(&anchor) {
                *p = a + 0.5 * (*p - a);
            }
            vals[k] = obj.call(&pts[k], &mut evals);
            improved_elsewhere |= vals[k].is_finite();
        }
    }

    let (best, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
    let (x, value) = if vals[best] >= f0 {
        (pts[best].clone(), vals[best])
    } else {
        (start.to_vec(), f0)
    };
    Ok(OptResult {
        x,
        value,
        converged: converged && improved_elsewhere,
        evals,
    })
}

/// Central-difference gradient with step `1e-5·(1 + |xⱼ|)`; falls back to a one-sided
/// difference when one side is rejected. `None` when neither side is usable.
fn numeric_gradient(
    obj: &ObjectiveSpec,
    x: &[f64],
    fx: f64,
    evals: &mut usize,
) -> Option<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let h = 1e-5 * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let fp = obj.call(&xp, evals);
        xp[j] = x[j] - h;
        let fm = obj.call(&xp, evals);
        xp[j] = x[j];
        g[j] = match (fp.is_finite(), fm.is_finite()) {
            (true, true) => (fp - fm) / (2.0 * h),
            (true, false) => (fp - fx) / h,
            (false, true) => (fx - fm) / h,
            (false, false) => return None,
        };
    }
    Some(g)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS ascent with numerical gradients and a backtracking (Armijo) line search. Converged when
/// the gradient sup-norm falls below `tol·(1 + |f|)` or an accepted step changes `f` by no more
/// than `tol·(1 + |f|)`. A line-search failure ends the run, returning the best point, not converged.
pub fn bfgs_numeric(obj: &ObjectiveSpec, start: &[f64]) -> Result<OptResult> {
    let f0 = obj.check_start(start)?;
    let n = obj.dim;
    let mut evals = 1usize;
    let mut x = start.to_vec();
    let mut fx = f0;
    if n == 0 {
        return Ok(OptResult {
            x,
            value: fx,
            converged: true,
            evals,
        });
    }
    // work with the minimisation of -f
    let Some(mut g) = numeric_gradient(obj, &x, fx, &mut evals).map(|g| neg(&g)) else {
        return Ok(OptResult {
            x,
            value: fx,
            converged: false,
            evals,
        });
    };
    let mut hinv = identity(n);
    let mut first = true;
    let mut converged = false;
    while evals < obj.max_evals {
        let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gnorm <= obj.tol * (1.0 + fx.abs()) {
            converged = true;
            break;
        }
        let mut p = matvec(&hinv, &g);
        p.iter_mut().for_each(|v| *v = -*v);
        let mut slope = dot(&p, &g);
        if slope >= 0.0 {
            // not a descent direction: reset to steepest descent
            hinv = identity(n);
            p = neg(&g);
            slope = dot(&p, &g);
        }
        if first {
            // scale the first step to unit length in the sup-norm
            let pn = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if pn > 1.0 {
                p.iter_mut().for_each(|v| *v /= pn);
                slope /= pn;
            }
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let xn: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + t * b).collect();
            let fnew = obj.call(&xn, &mut evals);
            if fnew.is_finite() && -fnew <= -fx + 1e-4 * t * slope {
                accepted = Some((xn, fnew));
                break;
            }
            if evals >= obj.max_evals {
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            break;
        };
        let f_small = (fnew - fx).abs() <= obj.tol * (1.0 + fx.abs());
        let Some(gn) = numeric_gradient(obj, &xn, fnew, &mut evals).map(|g| neg(&g)) else {
            x = xn;
            fx = fnew;
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if first {
                let scale = sy / dot(&y, &y);
                hinv.iter_mut().flatten().for_each(|v| *v *= scale);
            }
            bfgs_update(&mut hinv, &s, &y, sy);
            first = false;
        }
        x = xn;
        fx = fnew;
        g = gn;
        if f_small {
            converged = true;
            break;
        }
    }
    Ok(OptResult {
        x,
        value: fx,
        converged,
        evals,
    })
}

fn neg(v: &[f64]) -> Vec<f64> {
    v.iter().map(|a| -a).collect()
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`, `ρ = 1/(sᵀy)`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = matvec(h, y);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Runs both optimisers from the same start and keeps the higher value (Nelder–Mead on ties).
/// A run that errors is skipped; both erroring is an error carrying both messages.
pub fn best_of(obj: &ObjectiveSpec, start: &[f64]) -> Result<BestOf> {
    let nm = nelder_mead(obj, start).map_err(|e| e.to_string());
    let bf = bfgs_numeric(obj, start).map_err(|e| e.to_string());
    let pick = match (&nm, &bf) {
        (Ok(a), Ok(b)) => {
            if b.value > a.value {
                (b.clone(), Method::Bfgs)
            } else {
                (a.clone(), Method::NelderMead)
            }
        }
        (Ok(a), Err(_)) => (a.clone(), Method::NelderMead),
        (Err(_), Ok(b)) => (b.clone(), Method::Bfgs),
        (Err(a), Err(b)) => {
            return Err(Error::Optimization(format!(
                "both optimisers failed: nelder-mead: {a}; bfgs: {b}"
            )))
        }
    };
    Ok(BestOf {
        result: pick.0,
        method: pick.1,
        nelder_mead: nm,
        bfgs: bf,
    })
}

/// Maps `(χ, ψ) ∈ (0, ∞)²` to the plane.
pub fn to_log_scale(chi: f64, psi: f64) -> Result<(f64, f64)> {
    if !(chi > 0.0 && psi > 0.0) || !chi.is_finite() || !psi.is_finite() {
        return Err(Error::Domain(format!(
            "log transform needs chi, psi > 0 (got {chi}, {psi})"
        )));
    }
    Ok((chi.ln(), psi.ln()))
}

/// Inverse of [`to_log_scale`].
pub fn from_log_scale(log_chi: f64, log_psi: f64) -> (f64, f64) {
    (log_chi.exp(), log_psi.exp())
}
