//! Penalised ECME estimation of the GH parameters.
//!
//! Each iteration runs an E-step (conditional moments of the mixing variable), a closed-form
//! CM-step for `(μ, Σ)` and a numerical CM-step that maximises the penalised observed-data
//! log-likelihood over the shape block `(γ, λ, χ, ψ)` with `χ, ψ` on the log scale. After
//! convergence, nearly-active constraints are snapped onto their exact values when doing so
//! costs (essentially) nothing in penalised likelihood, and the result is classified.

use crate::error::{Error, Result};
use crate::ghdist::{gh_log_likelihood, Dataset, GhParams, ScaleFactor, Whitened};
use crate::optimize::{best_of, Method, ObjectiveSpec};
use crate::penalty::{PenaltySpec, ShapeParams};
use crate::select::{classify, Constraint, ModelLabel};
use crate::special::log_bessel_k_pair;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Threshold on the natural scale for a constraint to count as nearly active.
pub const SNAP_EPS: f64 = 1e-3;
/// Largest penalised log-likelihood loss, per observation, that a snap may cost.
pub const SNAP_LOSS_PER_OBS: f64 = 1e-6;
/// The shape step only searches `|ln χ|, |ln ψ| ≤ LOG_SCALE_BOUND`.
pub const LOG_SCALE_BOUND: f64 = 30.0;
/// The shape step only searches `|λ| ≤ LAMBDA_BOUND`.
pub const LAMBDA_BOUND: f64 = 1e4;

/// `E[Wᵢ | xᵢ]` and `E[1/Wᵢ | xᵢ]` at the current parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EStepWeights {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub v_bar: f64,
    pub u_bar: f64,
}

impl EStepWeights {
    pub fn from_vectors(v: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if v.len() != u.len() || v.is_empty() {
            return Err(Error::InvalidInput("weight vectors must be non-empty and equal length".into()));
        }
        let n = v.len() as f64;
        let v_bar = v.iter().sum::<f64>() / n;
        let u_bar = u.iter().sum::<f64>() / n;
        Ok(Self { v, u, v_bar, u_bar })
    }

    /// Pulls every weight halfway toward 1.
    fn damped(&self) -> Self {
        let v = self.v.iter().map(|w| 1.0 + 0.5 * (w - 1.0)).collect();
        let u = self.u.iter().map(|w| 1.0 + 0.5 * (w - 1.0)).collect();
        Self::from_vectors(v, u).expect("same shape as the original")
    }
}

/// Iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitControls {
    pub max_iter: usize,
    pub rel_tol: f64,
    /// Evaluation budget of each optimiser inside one shape-parameter step.
    pub cm2_max_evals: usize,
    /// Optimiser tolerance inside the shape-parameter step.
    pub cm2_tol: f64,
    /// Apply constraint snapping after convergence.
    pub snap: bool,
    /// Initial Nelder–Mead simplex edge (relative to `1 + |yⱼ|`) of the first shape step of a
    /// fit from an automatic start.
    pub simplex_scale: f64,
    /// Simplex edge for every later shape step and for fits from a supplied start.
    pub refine_simplex_scale: f64,
    /// With automatic initialisation, also run from heavy-tailed, near-Gaussian and
    /// variance-gamma-like starts and keep the best penalised fit.
    pub restarts: bool,
}

impl Default for FitControls {
    fn default() -> Self {
        Self {
            max_iter: 500,
            rel_tol: 1e-8,
            cm2_max_evals: 2000,
            cm2_tol: 1e-8,
            snap: true,
            simplex_scale: 0.1,
            refine_simplex_scale: 0.01,
            restarts: true,
        }
    }
}

/// Outcome of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Estimate after snapping (boundary values allowed).
    pub theta: GhParams,
    /// Converged interior estimate before snapping.
    pub theta_unsnapped: GhParams,
    pub loglik: f64,
    pub pen_loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Penalised log-likelihood at the start and after each iteration.
    pub trace: Vec<f64>,
    pub label: ModelLabel,
    pub penalty: PenaltySpec,
    /// Scale `c = -χ/(2λ)` when the Gaussian corner was snapped.
    pub gaussian_scale: Option<f64>,
    /// Objective evaluations spent in the shape-parameter steps.
    pub evaluations: usize,
}

impl FitResult {
    /// Log-density of the fitted (snapped) model at `x`.
    pub fn log_density(&self, x: &DVector<f64>) -> Result<f64> {
        let data = Dataset::new(DMatrix::from_row_slice(1, x.len(), x.as_slice()))?;
        let w = Whitened::new(&data, &self.theta.mu, self.theta.factor())?;
        match self.gaussian_scale {
            Some(c) => w.gaussian_log_likelihood(&self.theta.factor().whiten(&self.theta.gamma), c),
            None => w.log_likelihood(&self.theta),
        }
    }
}

/// Conditional moments of the mixing variable:
/// `Wᵢ | xᵢ ~ GIG(λ − d/2, δᵢ + χ, ρ + ψ)`.
pub fn e_step(data: &Dataset, theta: &GhParams) -> Result<EStepWeights> {
    if !theta.is_interior() {
        return Err(Error::Domain("E-step needs chi > 0 and psi > 0".into()));
    }
    let w = Whitened::new(data, &theta.mu, theta.factor())?;
    weights_from_deltas(w.deltas(), theta)
}

fn weights_from_deltas(deltas: &[f64], theta: &GhParams) -> Result<EStepWeights> {
    let d = theta.dim() as f64;
    let nu = theta.lambda - 0.5 * d;
    let b = theta.rho() + theta.psi;
    let mut v = Vec::with_capacity(deltas.len());
    let mut u = Vec::with_capacity(deltas.len());
    for (i, &delta) in deltas.iter().enumerate() {
        let a = delta + theta.chi;
        let z = (a * b).sqrt();
        let (k0, k1) = log_bessel_k_pair(nu, z)
            .map_err(|e| Error::Fit(format!("E-step failed at observation {i}: {e}")))?;
        let ratio = (k1 - k0).exp();
        let vi = (a / b).sqrt() * ratio;
        let ui = (b / a).sqrt() * ratio - 2.0 * nu / a;
        if !(vi > 0.0 && ui > 0.0 && vi.is_finite() && ui.is_finite()) {
            return Err(Error::Fit(format!(
                "E-step produced invalid weights at observation {i} (v = {vi}, u = {ui})"
            )));
        }
        v.push(vi);
        u.push(ui);
    }
    EStepWeights::from_vectors(v, u)
}

/// Closed-form update of `(μ, Σ)` given the weights and the current `γ`:
/// `μ = (Σuᵢxᵢ − nγ)/(nū)`,
/// `Σ* = (1/n)Σuᵢ(xᵢ−μ)(xᵢ−μ)ᵀ − (x̄−μ)γᵀ − γ(x̄−μ)ᵀ + v̄γγᵀ`, `Σ = |Σ*|^{-1/d} Σ*`.
pub fn cm_step1(
    data: &Dataset,
    weights: &EStepWeights,
    gamma: &DVector<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = data.n();
    let d = data.d();
    if weights.u.len() != n || gamma.len() != d {
        return Err(Error::InvalidInput("weights/gamma do not match the data".into()));
    }
    let nf = n as f64;
    let x = data.matrix();
    let mut sum_ux = DVector::zeros(d);
    for i in 0..n {
        for j in 0..d {
            sum_ux[j] += weights.u[i] * x[(i, j)];
        }
    }
    let mu = (sum_ux - gamma * nf) / (nf * weights.u_bar);
    let xbar = data.mean();
    let mut s = DMatrix::zeros(d, d);
    let mut c = DVector::zeros(d);
    for i in 0..n {
        for j in 0..d {
            c[j] = x[(i, j)] - mu[j];
        }
        s.ger(weights.u[i] / nf, &c, &c, 1.0);
    }
    let dx = &xbar - &mu;
    s -= &dx * gamma.transpose() + gamma * dx.transpose();
    s += gamma * gamma.transpose() * weights.v_bar;
    let sigma = crate::ghdist::normalize_det(&s)?;
    Ok((mu, sigma))
}

/// The `Q₁` function maximised by [`cm_step1`] (terms not involving `μ`, `Σ` dropped):
/// `−(n/2)ln|Σ| − ½Σᵢ[uᵢ(xᵢ−μ)ᵀΣ⁻¹(xᵢ−μ) − 2(xᵢ−μ)ᵀΣ⁻¹γ + vᵢγᵀΣ⁻¹γ]`.
pub fn q1(
    data: &Dataset,
    weights: &EStepWeights,
    gamma: &DVector<f64>,
    mu: &DVector<f64>,
    sigma: &DMatrix<f64>,
) -> Result<f64> {
    let f = ScaleFactor::new(sigma)?;
    let zg = f.whiten(gamma);
    let rho = zg.norm_squared();
    let mut total = -0.5 * data.n() as f64 * f.log_det();
    for i in 0..data.n() {
        let z = f.whiten(&(data.row(i) - mu));
        total -= 0.5 * (weights.u[i] * z.norm_squared() - 2.0 * z.dot(&zg) + weights.v[i] * rho);
    }
    Ok(total)
}

/// `Σ ln f(xᵢ; θ) − P_h(γ, λ, χ, ψ)`.
pub fn penalised_loglik(data: &Dataset, theta: &GhParams, spec: &PenaltySpec) -> Result<f64> {
    Ok(gh_log_likelihood(data, theta)? - spec.value(&shape_of(theta), theta.dim()))
}

pub fn shape_of(theta: &GhParams) -> ShapeParams {
    ShapeParams::new(theta.gamma.clone(), theta.lambda, theta.chi, theta.psi)
}

fn pack(s: &ShapeParams) -> Vec<f64> {
    let mut y: Vec<f64> = s.gamma.iter().copied().collect();
    y.push(s.lambda);
    y.push(s.chi.ln());
    y.push(s.psi.ln());
    y
}

fn unpack(y: &[f64], d: usize) -> ShapeParams {
    ShapeParams::new(
        DVector::from_column_slice(&y[..d]),
        y[d],
        y[d + 1].exp(),
        y[d + 2].exp(),
    )
}

/// Penalised log-likelihood of the shape block on pre-whitened data.
fn shape_objective(
    w: &Whitened,
    factor: &ScaleFactor,
    spec: &PenaltySpec,
    s: &ShapeParams,
) -> Option<f64> {
    let inside = |v: f64| v.is_finite() && v > 0.0 && v.ln().abs() <= LOG_SCALE_BOUND;
    if !(inside(s.chi) && inside(s.psi)) || !(s.lambda.abs() <= LAMBDA_BOUND) {
        return None;
    }
    let zg = factor.whiten(&s.gamma);
    let ll = w.log_likelihood_whitened_gamma(&zg, s.lambda, s.chi, s.psi).ok()?;
    let v = ll - spec.value_parts(s.gamma.norm(), s.lambda, s.chi, s.psi, s.gamma.len());
    v.is_finite().then_some(v)
}

/// Outcome of one shape-parameter step.
#[derive(Debug, Clone)]
pub struct Cm2Outcome {
    pub shape: ShapeParams,
    pub value: f64,
    pub method: Option<Method>,
    /// `false` when both optimisers failed and the start was kept.
    pub ok: bool,
    /// Objective evaluations spent by both optimisers.
    pub evals: usize,
}

/// Maximises the penalised log-likelihood over `(γ, λ, ln χ, ln ψ)` with `(μ, Σ)` held fixed.
pub fn cm_step2(
    data: &Dataset,
    mu: &DVector<f64>,
    sigma: &DMatrix<f64>,
    start: &ShapeParams,
    spec: &PenaltySpec,
) -> Result<ShapeParams> {
    let factor = ScaleFactor::new(sigma)?;
    let w = Whitened::new(data, mu, &factor)?;
    let controls = FitControls::default();
    Ok(cm_step2_whitened(&w, &factor, start, spec, &controls, controls.simplex_scale)?.shape)
}

fn cm_step2_whitened(
    w: &Whitened,
    factor: &ScaleFactor,
    start: &ShapeParams,
    spec: &PenaltySpec,
    controls: &FitControls,
    simplex_scale: f64,
) -> Result<Cm2Outcome> {
    let d = start.gamma.len();
    let eval = |y: &[f64]| shape_objective(w, factor, spec, &unpack(y, d));
    let mut obj = ObjectiveSpec::new(d + 3, &eval);
    obj.max_evals = controls.cm2_max_evals;
    obj.tol = controls.cm2_tol;
    obj.simplex_scale = simplex_scale;
    let y0 = pack(start);
    let start_value = eval(&y0);
    match best_of(&obj, &y0) {
        Ok(b) => {
            let evals = b.nelder_mead.as_ref().map_or(0, |r| r.evals)
                + b.bfgs.as_ref().map_or(0, |r| r.evals);
            Ok(Cm2Outcome {
                shape: unpack(&b.result.x, d),
                value: b.result.value,
                method: Some(b.method),
                ok: true,
                evals,
            })
        }
        Err(_) => Ok(Cm2Outcome {
            shape: start.clone(),
            value: start_value.unwrap_or(f64::NEG_INFINITY),
            method: None,
            ok: false,
            evals: 0,
        }),
    }
}

/// Default starting point: sample mean, unit-determinant sample covariance, `γ = 0`,
/// `λ = −1`, `χ = ψ = 1`.
pub fn default_init(data: &Dataset) -> Result<GhParams> {
    if data.n() <= data.d() {
        return Err(Error::InvalidInput(format!(
            "need more observations ({}) than dimensions ({})",
            data.n(),
            data.d()
        )));
    }
    GhParams::with_unit_det(
        data.mean(),
        data.covariance(),
        DVector::zeros(data.d()),
        -1.0,
        1.0,
        1.0,
    )
    .map_err(|e| Error::Fit(format!("initialisation failed: {e}")))
}

/// Extra starting points used with automatic initialisation: the default `(μ, Σ)` with shapes
/// near the heavy-tailed, Gaussian and variance-gamma corners, each scaled so that `E[W]`
/// matches the generalised variance `|S|^{1/d}` of the data.
pub fn restart_inits(data: &Dataset) -> Result<Vec<GhParams>> {
    let base = default_init(data)?;
    let s = data.covariance().determinant().powf(1.0 / data.d() as f64);
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Fit("sample covariance is singular".into()));
    }
    let shapes = [(-1.5, s, 1e-6), (-20.0, 38.0 * s, 1e-6), (1.5, 1e-6, 3.0 / s)];
    Ok(shapes
        .iter()
        .map(|&(lambda, chi, psi)| {
            let mut t = base.clone();
            t.lambda = lambda;
            t.chi = chi;
            t.psi = psi;
            t
        })
        .collect())
}

/// Penalised ECME fit. `init = None` uses [`default_init`] and, when `controls.restarts` is set,
/// also the starts of [`restart_inits`], keeping the highest penalised log-likelihood (earlier
/// starts win ties).
pub fn fit(
    data: &Dataset,
    spec: &PenaltySpec,
    init: Option<&GhParams>,
    controls: &FitControls,
) -> Result<FitResult> {
    if !(controls.rel_tol > 0.0) || controls.max_iter == 0 {
        return Err(Error::InvalidInput("controls must be positive".into()));
    }
    if let Some(t) = init {
        if t.dim() != data.d() {
            return Err(Error::InvalidInput("initial parameters have the wrong dimension".into()));
        }
        if !t.is_interior() {
            return Err(Error::InvalidInput("initial chi and psi must be positive".into()));
        }
        return fit_from(data, spec, t.clone(), controls, false);
    }
    let first = fit_from(data, spec, default_init(data)?, controls, true);
    if !controls.restarts {
        return first;
    }
    let mut best = first;
    for start in restart_inits(data)? {
        let Ok(candidate) = fit_from(data, spec, start, controls, true) else {
            continue;
        };
        let better = match &best {
            Ok(b) => candidate.pen_loglik > b.pen_loglik,
            Err(_) => true,
        };
        if better {
            best = Ok(candidate);
        }
    }
    best
}

fn fit_from(
    data: &Dataset,
    spec: &PenaltySpec,
    mut theta: GhParams,
    controls: &FitControls,
    cold: bool,
) -> Result<FitResult> {
    let d = data.d();
    let penalty_of = |t: &GhParams| spec.value_parts(t.gamma.norm(), t.lambda, t.chi, t.psi, d);

    let mut whitened = Whitened::new(data, &theta.mu, theta.factor())?;
    let mut current = whitened.log_likelihood(&theta)? - penalty_of(&theta);
    let mut trace = vec![current];
    let mut converged = false;
    let mut iterations = 0;
    let mut evaluations = 0;

    while iterations < controls.max_iter {
        iterations += 1;
        let previous = current;

        // E-step and CM-step 1, with damping when Σ* is not positive definite
        let mut weights = weights_from_deltas(whitened.deltas(), &theta)?;
        let mut step = None;
        for _ in 0..=5 {
            match cm_step1(data, &weights, &theta.gamma) {
                Ok(ms) => {
                    step = Some(ms);
                    break;
                }
                Err(Error::NotPositiveDefinite(_)) | Err(Error::InvalidInput(_)) => {
                    weights = weights.damped();
                }
                Err(e) => return Err(e),
            }
        }
        if let Some((mu, sigma)) = step {
            let mut candidate = theta.clone();
            candidate.mu = mu;
            if candidate.set_sigma(sigma).is_ok() {
                let w = Whitened::new(data, &candidate.mu, candidate.factor())?;
                if let Ok(ll) = w.log_likelihood(&candidate) {
                    let value = ll - penalty_of(&candidate);
                    // the exact step cannot decrease the objective; a damped one might
                    if value >= current {
                        theta = candidate;
                        whitened = w;
                        current = value;
                    }
                }
            }
        }

        // CM-step 2 on the observed-data penalised log-likelihood
        let scale = if cold && iterations == 1 {
            controls.simplex_scale
        } else {
            controls.refine_simplex_scale
        };
        let out = cm_step2_whitened(&whitened, theta.factor(), &shape_of(&theta), spec, controls, scale)?;
        evaluations += out.evals;
        if out.ok && out.value >= current {
            theta.gamma = out.shape.gamma;
            theta.lambda = out.shape.lambda;
            theta.chi = out.shape.chi;
            theta.psi = out.shape.psi;
            current = out.value;
        }
        trace.push(current);

        if (current - previous).abs() / (1.0 + current.abs()) < controls.rel_tol {
            converged = true;
            break;
        }
    }

    let unsnapped = theta.clone();
    let snapped = if controls.snap {
        snap_constraints(&whitened, &unsnapped, spec, current, data.n())?
    } else {
        SnapOutcome::none(&unsnapped, current, &whitened)?
    };
    let label = classify(&snapped.theta, &snapped.constraints, d)?;
    Ok(FitResult {
        theta: snapped.theta,
        theta_unsnapped: unsnapped,
        loglik: snapped.loglik,
        pen_loglik: snapped.pen_loglik,
        iterations,
        converged,
        trace,
        label,
        penalty: *spec,
        gaussian_scale: snapped.gaussian_scale,
        evaluations,
    })
}

struct SnapOutcome {
    theta: GhParams,
    constraints: Vec<Constraint>,
    loglik: f64,
    pen_loglik: f64,
    gaussian_scale: Option<f64>,
}

impl SnapOutcome {
    fn none(theta: &GhParams, pen: f64, w: &Whitened) -> Result<Self> {
        let ll = w.log_likelihood(theta)?;
        Ok(Self {
            theta: theta.clone(),
            constraints: vec![],
            loglik: ll,
            pen_loglik: pen,
            gaussian_scale: None,
        })
    }
}

/// A provisional set of imposed constraints on top of an interior estimate.
#[derive(Debug, Clone)]
struct Snaps {
    gamma_zero: bool,
    psi_zero: bool,
    chi_zero: bool,
    gaussian: bool,
    lambda: Option<(Constraint, f64)>,
}

impl Snaps {
    fn apply(&self, base: &GhParams) -> GhParams {
        let mut t = base.clone();
        if self.gamma_zero {
            t.gamma.fill(0.0);
        }
        if self.psi_zero {
            t.psi = 0.0;
        }
        if self.chi_zero {
            t.chi = 0.0;
        }
        if let Some((_, v)) = self.lambda {
            t.lambda = v;
        }
        t
    }

    fn constraints(&self) -> Vec<Constraint> {
        let mut c = Vec::new();
        if self.gamma_zero {
            c.push(Constraint::GammaZero);
        }
        if self.psi_zero {
            c.push(Constraint::PsiZero);
        }
        if self.chi_zero {
            c.push(Constraint::ChiZero);
        }
        if self.gaussian {
            c.push(Constraint::GaussianCorner);
        }
        if let Some((k, _)) = self.lambda {
            c.push(k);
        }
        c
    }

    /// `(loglik, pen_loglik, gaussian scale)` of the snapped model, or `None` when the snapped
    /// parameters do not define a proper distribution.
    fn evaluate(
        &self,
        base: &GhParams,
        w: &Whitened,
        spec: &PenaltySpec,
    ) -> Option<(GhParams, f64, f64, Option<f64>)> {
        let t = self.apply(base);
        let d = t.dim();
        let gnorm = t.gamma.norm();
        if self.gaussian {
            let c = -base.chi / (2.0 * base.lambda);
            let zg = t.factor().whiten(&t.gamma);
            let ll = w.gaussian_log_likelihood(&zg, c).ok()?;
            let pen = spec.value_parts(gnorm, f64::NEG_INFINITY, f64::INFINITY, t.psi, d);
            return Some((t, ll, ll - pen, Some(c)));
        }
        let ll = w.log_likelihood(&t).ok()?;
        let pen = spec.value_parts(gnorm, t.lambda, t.chi, t.psi, d);
        Some((t, ll, ll - pen, None))
    }
}

/// Greedy snapping in a fixed order (γ, ψ, χ, Gaussian corner, λ targets). Each nearly-active
/// constraint is imposed on top of the ones already kept and retained iff the penalised
/// log-likelihood stays within `SNAP_LOSS_PER_OBS · n` of the converged value.
fn snap_constraints(
    w: &Whitened,
    base: &GhParams,
    spec: &PenaltySpec,
    converged_value: f64,
    n: usize,
) -> Result<SnapOutcome> {
    let d = base.dim() as f64;
    let floor = converged_value - SNAP_LOSS_PER_OBS * n as f64;
    let mut kept = Snaps {
        gamma_zero: false,
        psi_zero: false,
        chi_zero: false,
        gaussian: false,
        lambda: None,
    };
    let ll0 = w.log_likelihood(base)?;
    let mut best = (base.clone(), ll0, converged_value, None);

    let lambda_targets = [
        (Constraint::LambdaNegHalf, -0.5),
        (Constraint::LambdaOne, 1.0),
        (Constraint::LambdaHyperbolic, 0.5 * (d + 1.0)),
    ];
    let mut candidates: Vec<Snaps> = Vec::new();
    let mut push = |f: &dyn Fn(&mut Snaps)| {
        let mut s = kept.clone();
        f(&mut s);
        candidates.push(s);
    };
    if base.gamma.norm() < SNAP_EPS * d.sqrt() {
        push(&|s| s.gamma_zero = true);
    }
    if base.psi < SNAP_EPS {
        push(&|s| s.psi_zero = true);
    }
    if base.chi < SNAP_EPS {
        push(&|s| s.chi_zero = true);
    }
    if base.lambda < 0.0 && 1.0 / base.chi < SNAP_EPS && 1.0 / base.lambda.abs() < SNAP_EPS {
        push(&|s| s.gaussian = true);
    }
    for (tag, v) in lambda_targets {
        if (base.lambda - v).abs() < SNAP_EPS {
            push(&move |s| s.lambda = Some((tag, v)));
        }
    }

    // apply each candidate change on top of what has been kept so far
    for cand in candidates {
        let mut trial = kept.clone();
        trial.gamma_zero |= cand.gamma_zero;
        trial.psi_zero |= cand.psi_zero;
        trial.chi_zero |= cand.chi_zero;
        trial.gaussian |= cand.gaussian;
        if cand.lambda.is_some() {
            trial.lambda = cand.lambda;
        }
        let ev = trial.evaluate(base, w, spec);
        if let Some((t, ll, pen, c)) = ev {
            if pen >= floor {
                kept = trial;
                best = (t, ll, pen, c);
            }
        }
    }
    Ok(SnapOutcome {
        theta: best.0,
        constraints: kept.constraints(),
        loglik: best.1,
        pen_loglik: best.2,
        gaussian_scale: best.3,
    })
}
