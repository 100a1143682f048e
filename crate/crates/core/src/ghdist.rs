//! Multivariate generalised hyperbolic distribution `GH_d(μ, Σ, γ, λ, χ, ψ)` with `|Σ| = 1`.
//!
//! Everything is assembled in log scale. `Σ` always travels with its Cholesky factor, and all
//! quadratic forms and determinants go through the factor.

use crate::error::{Error, Result};
use crate::gig::{gig_log_normalizer, GigParams, GigSampler};
use crate::special::{log_bessel_k, LogBesselK};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::io::{Read, Write};
use std::path::Path;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Tolerance on `|det Σ| = 1`.
pub const DET_TOL: f64 = 1e-8;

/// Lower Cholesky factor of an SPD matrix plus its log-determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleFactor {
    lower: DMatrix<f64>,
    log_det: f64,
}

impl ScaleFactor {
    pub fn new(sigma: &DMatrix<f64>) -> Result<Self> {
        if !sigma.is_square() || sigma.nrows() == 0 {
            return Err(Error::InvalidInput("scale matrix must be square and non-empty".into()));
        }
        if sigma.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite("non-finite entries".into()));
        }
        let sym = (sigma + sigma.transpose()) * 0.5;
        let chol = sym
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite(format!("{sigma}")))?;
        let lower = chol.l();
        let log_det = 2.0 * lower.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(Error::NotPositiveDefinite("singular factor".into()));
        }
        Ok(Self { lower, log_det })
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// `L^{-1} v`.
    pub fn whiten(&self, v: &DVector<f64>) -> DVector<f64> {
        self.lower
            .solve_lower_triangular(v)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// `vᵀ Σ^{-1} v`.
    pub fn quad_form(&self, v: &DVector<f64>) -> f64 {
        self.whiten(v).norm_squared()
    }
}

/// Squared Mahalanobis distance `(x-μ)ᵀ Σ^{-1} (x-μ)` via a triangular solve.
pub fn mahalanobis(x: &DVector<f64>, mu: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<f64> {
    if x.len() != mu.len() || sigma.nrows() != x.len() {
        return Err(Error::InvalidInput("dimension mismatch in mahalanobis".into()));
    }
    Ok(ScaleFactor::new(sigma)?.quad_form(&(x - mu)))
}

/// Full GH parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GhParamsRecord", into = "GhParamsRecord")]
pub struct GhParams {
    pub mu: DVector<f64>,
    sigma: DMatrix<f64>,
    factor: ScaleFactor,
    pub gamma: DVector<f64>,
    pub lambda: f64,
    pub chi: f64,
    pub psi: f64,
}

/// Plain serialisable view of [`GhParams`] (`sigma` as rows).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GhParamsRecord {
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
    pub lambda: f64,
    pub chi: f64,
    pub psi: f64,
}

impl TryFrom<GhParamsRecord> for GhParams {
    type Error = Error;

    fn try_from(r: GhParamsRecord) -> Result<Self> {
        let d = r.mu.len();
        if r.sigma.len() != d || r.sigma.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidInput("sigma must be d x d".into()));
        }
        let sigma = DMatrix::from_fn(d, d, |i, j| r.sigma[i][j]);
        GhParams::new(
            DVector::from_vec(r.mu),
            sigma,
            DVector::from_vec(r.gamma),
            r.lambda,
            r.chi,
            r.psi,
        )
    }
}

impl From<GhParams> for GhParamsRecord {
    fn from(p: GhParams) -> Self {
        let d = p.dim();
        Self {
            mu: p.mu.iter().copied().collect(),
            sigma: (0..d).map(|i| (0..d).map(|j| p.sigma[(i, j)]).collect()).collect(),
            gamma: p.gamma.iter().copied().collect(),
            lambda: p.lambda,
            chi: p.chi,
            psi: p.psi,
        }
    }
}

impl GhParams {
    /// Validates dimensions, SPD-ness and `|det Σ| = 1` (within [`DET_TOL`]). `χ`, `ψ` must be
    /// non-negative; zero values denote limiting models and are rejected by the interior density.
    pub fn new(
        mu: DVector<f64>,
        sigma: DMatrix<f64>,
        gamma: DVector<f64>,
        lambda: f64,
        chi: f64,
        psi: f64,
    ) -> Result<Self> {
        let d = mu.len();
        if d == 0 || gamma.len() != d || sigma.nrows() != d || sigma.ncols() != d {
            return Err(Error::InvalidInput(format!(
                "inconsistent dimensions: mu {d}, gamma {}, sigma {}x{}",
                gamma.len(),
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if mu.iter().chain(gamma.iter()).any(|v| !v.is_finite())
            || !lambda.is_finite()
            || !(chi >= 0.0 && chi.is_finite())
            || !(psi >= 0.0 && psi.is_finite())
        {
            return Err(Error::Domain("non-finite or negative GH parameters".into()));
        }
        let factor = ScaleFactor::new(&sigma)?;
        if (factor.log_det.exp() - 1.0).abs() > DET_TOL {
            return Err(Error::InvalidInput(format!(
                "|det sigma| = {} violates the unit-determinant constraint",
                factor.log_det.exp()
            )));
        }
        Ok(Self {
            mu,
            sigma: (&sigma + sigma.transpose()) * 0.5,
            factor,
            gamma,
            lambda,
            chi,
            psi,
        })
    }

    /// Like [`GhParams::new`] but first rescales `sigma` to unit determinant.
    pub fn with_unit_det(
        mu: DVector<f64>,
        sigma: DMatrix<f64>,
        gamma: DVector<f64>,
        lambda: f64,
        chi: f64,
        psi: f64,
    ) -> Result<Self> {
        let sigma = normalize_det(&sigma)?;
        Self::new(mu, sigma, gamma, lambda, chi, psi)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn factor(&self) -> &ScaleFactor {
        &self.factor
    }

    /// Replaces `Σ` (refactorising); the unit-determinant constraint is re-checked.
    pub fn set_sigma(&mut self, sigma: DMatrix<f64>) -> Result<()> {
        let factor = ScaleFactor::new(&sigma)?;
        if (factor.log_det.exp() - 1.0).abs() > DET_TOL {
            return Err(Error::InvalidInput("sigma must have unit determinant".into()));
        }
        self.sigma = (&sigma + sigma.transpose()) * 0.5;
        self.factor = factor;
        Ok(())
    }

    pub fn gig(&self) -> GigParams {
        GigParams {
            lambda: self.lambda,
            chi: self.chi,
            psi: self.psi,
        }
    }

    pub fn is_interior(&self) -> bool {
        self.chi > 0.0 && self.psi > 0.0
    }

    /// `ρ(γ, Σ) = γᵀ Σ^{-1} γ`.
    pub fn rho(&self) -> f64 {
        self.factor.quad_form(&self.gamma)
    }
}

/// `|Σ|^{-1/d} Σ`.
pub fn normalize_det(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let f = ScaleFactor::new(sigma)?;
    let d = sigma.nrows() as f64;
    Ok(sigma * (-f.log_det / d).exp())
}

/// Observations stored one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: DMatrix<f64>,
}

impl Dataset {
    pub fn new(rows: DMatrix<f64>) -> Result<Self> {
        if rows.ncols() == 0 {
            return Err(Error::InvalidInput("dataset dimension must be at least 1".into()));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("dataset contains non-finite values".into()));
        }
        Ok(Self { rows })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Self::new(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
    }

    pub fn empty(d: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(0, d))
    }

    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn d(&self) -> usize {
        self.rows.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.rows.row(i).transpose()
    }

    pub fn mean(&self) -> DVector<f64> {
        let n = self.n() as f64;
        self.rows.row_sum().transpose() / n
    }

    /// Maximum-likelihood (divide-by-n) covariance.
    pub fn covariance(&self) -> DMatrix<f64> {
        let mean = self.mean();
        let mut cov = DMatrix::zeros(self.d(), self.d());
        for i in 0..self.n() {
            let c = self.row(i) - &mean;
            cov += &c * c.transpose();
        }
        cov / self.n() as f64
    }

    /// A copy without row `skip`.
    pub fn without_row(&self, skip: usize) -> Self {
        Self {
            rows: self.rows.clone().remove_row(skip),
        }
    }

    /// Adds `shift` to every row.
    pub fn shifted(&self, shift: &DVector<f64>) -> Self {
        let mut rows = self.rows.clone();
        for mut r in rows.row_iter_mut() {
            r += shift.transpose();
        }
        Self { rows }
    }

    /// Reads comma-separated observations; `header` skips the first line.
    pub fn read_csv<R: Read>(reader: R, header: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(header)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::InvalidInput(format!("bad number {f:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::InvalidInput("no observations".into()));
        }
        Self::from_rows(&rows)
    }

    pub fn read_csv_path(path: &Path, header: bool) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, header)
    }

    /// Writes one observation per line; `header` names the columns when given.
    pub fn write_csv<W: Write>(&self, writer: W, header: Option<&[String]>) -> Result<()> {
        let mut w = csv::WriterBuilder::new().from_writer(writer);
        if let Some(h) = header {
            w.write_record(h)?;
        }
        for i in 0..self.n() {
            w.write_record(self.rows.row(i).iter().map(|v| format!("{v:?}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `ln ∫_0^∞ w^{ν-1} exp(-(a/w + b w)/2) dw`, including the one-sided limits `a = 0` or `b = 0`.
pub(crate) fn log_mixing_integral(nu: f64, a: f64, b: f64) -> Result<f64> {
    match (a > 0.0, b > 0.0) {
        (true, true) => Ok(std::f64::consts::LN_2
            + 0.5 * nu * (a.ln() - b.ln())
            + log_bessel_k(nu, (a * b).sqrt())?),
        (true, false) if nu < 0.0 => Ok(ln_gamma(-nu) + nu * (0.5 * a).ln()),
        (false, true) if nu > 0.0 => Ok(ln_gamma(nu) - nu * (0.5 * b).ln()),
        _ => Err(Error::Domain(format!(
            "mixing integral diverges (nu = {nu}, a = {a}, b = {b})"
        ))),
    }
}

/// Log-density of the GH distribution at `x`; interior parameters only (`χ > 0`, `ψ > 0`).
///
/// `(ψ/χ)^{λ/2} e^{(x-μ)ᵀΣ⁻¹γ} [(χ+δ)/(ψ+ρ)]^{(λ-d/2)/2} K_{λ-d/2}(√((χ+δ)(ψ+ρ)))
///  / ((2π)^{d/2} |Σ|^{1/2} K_λ(√(χψ)))`
pub fn gh_log_density(x: &DVector<f64>, theta: &GhParams) -> Result<f64> {
    if !theta.is_interior() {
        return Err(Error::Domain(format!(
            "GH density needs chi > 0 and psi > 0 (chi = {}, psi = {}); use the limiting form",
            theta.chi, theta.psi
        )));
    }
    if x.len() != theta.dim() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    let v = mixture_log_density(x, theta)?;
    if !v.is_finite() {
        return Err(Error::Domain(format!("non-finite density at {x}")));
    }
    Ok(v)
}

/// Log-density from the normal variance-mean mixture integral; valid for interior parameters
/// and for the `ψ = 0` (λ < 0) and `χ = 0` (λ > 0) limits.
pub fn mixture_log_density(x: &DVector<f64>, theta: &GhParams) -> Result<f64> {
    let d = theta.dim() as f64;
    let diff = x - &theta.mu;
    let zx = theta.factor.whiten(&diff);
    let zg = theta.factor.whiten(&theta.gamma);
    let delta = zx.norm_squared();
    let rho = zg.norm_squared();
    let log_c = gig_log_normalizer(&theta.gig())?;
    Ok(log_c - 0.5 * d * LN_2PI - 0.5 * theta.factor.log_det
        + zx.dot(&zg)
        + log_mixing_integral(theta.lambda - 0.5 * d, theta.chi + delta, theta.psi + rho)?)
}

/// The Gaussian limit `λ → -∞`, `χ → ∞` with `c = -χ/(2λ)` held fixed:
/// `N(μ + cγ, cΣ)`.
pub fn gaussian_limit_log_density(x: &DVector<f64>, theta: &GhParams, c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("gaussian scale must be positive, got {c}")));
    }
    let d = theta.dim() as f64;
    let diff = x - &theta.mu - &theta.gamma * c;
    Ok(-0.5 * d * LN_2PI - 0.5 * (theta.factor.log_det + d * c.ln())
        - 0.5 * theta.factor.quad_form(&diff) / c)
}

/// `Σᵢ ln f(xᵢ; θ)`.
pub fn gh_log_likelihood(data: &Dataset, theta: &GhParams) -> Result<f64> {
    if data.n() == 0 {
        return Err(Error::InvalidInput("empty dataset".into()));
    }
    if data.d() != theta.dim() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    Whitened::new(data, &theta.mu, theta.factor())?.log_likelihood(theta)
}

/// Data whitened by a fixed `(μ, L)`: `zᵢ = L^{-1}(xᵢ - μ)` and `δᵢ = ‖zᵢ‖²`.
///
/// With location and scale held fixed, the likelihood as a function of `(γ, λ, χ, ψ)` only needs
/// these, which keeps the shape-parameter optimisation at O(n d) plus one Bessel call per row.
#[derive(Debug, Clone)]
pub struct Whitened {
    z: DMatrix<f64>,
    delta: Vec<f64>,
    log_det: f64,
}

impl Whitened {
    pub fn new(data: &Dataset, mu: &DVector<f64>, factor: &ScaleFactor) -> Result<Self> {
        let centered = DMatrix::from_fn(data.n(), data.d(), |i, j| data.matrix()[(i, j)] - mu[j]);
        // rows of Z are L^{-1}(x_i - mu): solve L Zᵀ = centeredᵀ
        let zt = factor
            .lower()
            .solve_lower_triangular(&centered.transpose())
            .ok_or_else(|| Error::NotPositiveDefinite("triangular solve failed".into()))?;
        let z = zt.transpose();
        let delta = z.row_iter().map(|r| r.norm_squared()).collect();
        Ok(Self {
            z,
            delta,
            log_det: factor.log_det(),
        })
    }

    pub fn deltas(&self) -> &[f64] {
        &self.delta
    }

    /// Log-likelihood at shape parameters; `theta.mu`/`theta.sigma` are assumed to be the ones
    /// used for whitening. Boundary `χ`/`ψ` use the limiting mixing integrals.
    pub fn log_likelihood(&self, theta: &GhParams) -> Result<f64> {
        let zg = theta.factor().whiten(&theta.gamma);
        self.log_likelihood_whitened_gamma(&zg, theta.lambda, theta.chi, theta.psi)
    }

    /// Same as [`Whitened::log_likelihood`] with `L^{-1}γ` supplied directly.
    pub fn log_likelihood_whitened_gamma(
        &self,
        zg: &DVector<f64>,
        lambda: f64,
        chi: f64,
        psi: f64,
    ) -> Result<f64> {
        let n = self.delta.len();
        let d = self.z.ncols() as f64;
        let rho = zg.norm_squared();
        let log_c = gig_log_normalizer(&GigParams { lambda, chi, psi })?;
        let nu = lambda - 0.5 * d;
        let b = psi + rho;
        let lin = &self.z * zg;
        let mut total = n as f64 * (log_c - 0.5 * d * LN_2PI - 0.5 * self.log_det);
        if b > 0.0 && chi > 0.0 {
            // interior: one order for every observation, so set the Bessel evaluator up once
            let bessel = LogBesselK::new(nu)?;
            let ln_b = b.ln();
            total += n as f64 * (std::f64::consts::LN_2 - 0.5 * nu * ln_b);
            for (i, &delta) in self.delta.iter().enumerate() {
                let a = chi + delta;
                total += lin[i] + 0.5 * nu * a.ln() + bessel.eval((a * b).sqrt())?;
            }
        } else {
            for (i, &delta) in self.delta.iter().enumerate() {
                total += lin[i] + log_mixing_integral(nu, chi + delta, b)?;
            }
        }
        if !total.is_finite() {
            return Err(Error::Domain("non-finite log-likelihood".into()));
        }
        Ok(total)
    }

    /// Gaussian-limit log-likelihood with scale `c`.
    pub fn gaussian_log_likelihood(&self, zg: &DVector<f64>, c: f64) -> Result<f64> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!("gaussian scale must be positive, got {c}")));
        }
        let n = self.delta.len() as f64;
        let d = self.z.ncols() as f64;
        let shift = zg * c;
        let q: f64 = self
            .z
            .row_iter()
            .map(|r| (r.transpose() - &shift).norm_squared())
            .sum();
        Ok(-0.5 * n * (d * LN_2PI + self.log_det + d * c.ln()) - 0.5 * q / c)
    }
}

/// Draws `n` observations via `W ~ GIG(λ, χ, ψ)`, `X | W = w ~ N(μ + wγ, wΣ)`.
/// Boundary `χ = 0` / `ψ = 0` are allowed where the GIG supports them.
pub fn gh_sample<R: Rng + ?Sized>(theta: &GhParams, n: usize, rng: &mut R) -> Result<Dataset> {
    let d = theta.dim();
    let sampler = GigSampler::new(&theta.gig())?;
    let lower = theta.factor.lower();
    let mut rows = DMatrix::zeros(n, d);
    for i in 0..n {
        let w = sampler.draw(rng);
        let u = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = &theta.mu + &theta.gamma * w + lower * u * w.sqrt();
        rows.set_row(i, &x.transpose());
    }
    Dataset::new(rows)
}
