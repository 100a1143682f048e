//! Penalty-weight selection by partial leave-one-out likelihood cross-validation, classification
//! of a fitted model into the 16 named members of the GH family, and conversion to the
//! conventional parametrisations of the limiting models.

use crate::ecme::{fit, FitControls, FitResult};
use crate::error::{Error, Result};
use crate::ghdist::{mixture_log_density, Dataset, GhParams, ScaleFactor};
use crate::penalty::{PenaltyKind, PenaltySpec};
use crate::special::log_bessel_k;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::fmt;
use std::str::FromStr;

/// An exactly imposed parameter constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `γ = 0`.
    GammaZero,
    /// `ψ → 0`.
    PsiZero,
    /// `χ → 0`.
    ChiZero,
    /// `λ → −∞`, `χ → ∞` with `c = −χ/(2λ)` fixed (Gaussian limit).
    GaussianCorner,
    /// `λ = −1/2`.
    LambdaNegHalf,
    /// `λ = 1`.
    LambdaOne,
    /// `λ = (d+1)/2`.
    LambdaHyperbolic,
}

/// The 16 named models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelName {
    N,
    #[serde(rename = "t")]
    T,
    C,
    L,
    SGH,
    St,
    VG,
    AL,
    NIG,
    H,
    HUM,
    SNIG,
    SVG,
    SH,
    SC,
    GH,
}

impl ModelName {
    pub const ALL: [ModelName; 16] = [
        ModelName::N,
        ModelName::T,
        ModelName::C,
        ModelName::L,
        ModelName::SGH,
        ModelName::St,
        ModelName::VG,
        ModelName::AL,
        ModelName::NIG,
        ModelName::H,
        ModelName::HUM,
        ModelName::SNIG,
        ModelName::SVG,
        ModelName::SH,
        ModelName::SC,
        ModelName::GH,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelName::N => "N",
            ModelName::T => "t",
            ModelName::C => "C",
            ModelName::L => "L",
            ModelName::SGH => "SGH",
            ModelName::St => "St",
            ModelName::VG => "VG",
            ModelName::AL => "AL",
            ModelName::NIG => "NIG",
            ModelName::H => "H",
            ModelName::HUM => "HUM",
            ModelName::SNIG => "SNIG",
            ModelName::SVG => "SVG",
            ModelName::SH => "SH",
            ModelName::SC => "SC",
            ModelName::GH => "GH",
        }
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelName::ALL
            .iter()
            .copied()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown model name {s:?}")))
    }
}

/// Which closed form a [`ConventionalParams`] record refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConventionalForm {
    /// `N(μ, Σ)`.
    Gaussian,
    /// Skew-t `(μ, Σ, γ, ν)`; Student t when `γ = 0`, skew-Cauchy / Cauchy when `ν = 1`.
    SkewT,
    /// Variance gamma `(μ, Σ, γ, λ)` with a unit-mean Gamma(λ, λ) mixing law; asymmetric
    /// Laplace / Laplace when `λ = 1`.
    VarianceGamma,
    /// Normal inverse Gaussian `(μ, Σ, γ, χ, ψ)`.
    Nig,
    /// No closed form: the GH parameters are passed through.
    Native,
}

/// Parameters in the conventional form of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionalParams {
    pub form: ConventionalForm,
    pub mu: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
    /// Degrees of freedom (skew-t family).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nu: Option<f64>,
    /// Shape (variance gamma) or index (native).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub psi: Option<f64>,
    /// The multiplier applied to `Σ` and `γ`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scale: Option<f64>,
}

/// Classification of a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelLabel {
    pub name: ModelName,
    pub active_constraints: Vec<Constraint>,
    pub conventional_params: ConventionalParams,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn check_consistent(theta: &GhParams, snapped: &[Constraint]) -> Result<()> {
    let has = |c: Constraint| snapped.contains(&c);
    let lambda_tags = [
        Constraint::LambdaNegHalf,
        Constraint::LambdaOne,
        Constraint::LambdaHyperbolic,
    ]
    .iter()
    .filter(|&&c| has(c))
    .count();
    let err = |msg: &str| Err(Error::Classification(format!("{msg}: {snapped:?}")));
    if lambda_tags > 1 {
        return err("more than one value imposed on lambda");
    }
    if has(Constraint::GaussianCorner) && (lambda_tags > 0 || has(Constraint::ChiZero)) {
        return err("Gaussian limit combined with a finite-lambda or chi -> 0 constraint");
    }
    if has(Constraint::ChiZero) && has(Constraint::PsiZero) {
        return err("chi -> 0 and psi -> 0 together");
    }
    if has(Constraint::ChiZero) && theta.lambda <= 0.0 {
        return err("chi -> 0 needs lambda > 0");
    }
    if has(Constraint::PsiZero) && !has(Constraint::GaussianCorner) && theta.lambda >= 0.0 {
        return err("psi -> 0 needs lambda < 0");
    }
    if has(Constraint::GaussianCorner) && theta.lambda >= 0.0 {
        return err("Gaussian limit needs lambda < 0");
    }
    if has(Constraint::GammaZero) && theta.gamma.iter().any(|&g| g != 0.0) {
        return err("gamma = 0 imposed but gamma is non-zero");
    }
    if has(Constraint::PsiZero) && theta.psi != 0.0 {
        return err("psi -> 0 imposed but psi is non-zero");
    }
    if has(Constraint::ChiZero) && theta.chi != 0.0 {
        return err("chi -> 0 imposed but chi is non-zero");
    }
    Ok(())
}

/// Maps the imposed constraints to a named model.
///
/// Gaussian corner → N; ψ → 0 → t / St (C / SC at λ = −1/2); χ → 0 → VG / SVG (AL / L at
/// λ = 1); λ = −1/2 → NIG / SNIG; λ = (d+1)/2 → H / SH; λ = 1 → HUM; nothing → GH / SGH. The
/// symmetric variant is chosen when `γ = 0` is imposed.
pub fn classify(theta: &GhParams, snapped: &[Constraint], d: usize) -> Result<ModelLabel> {
    if theta.dim() != d {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    check_consistent(theta, snapped)?;
    let has = |c: Constraint| snapped.contains(&c);
    let sym = has(Constraint::GammaZero);
    let pick = |s: ModelName, a: ModelName| if sym { s } else { a };
    let name = if has(Constraint::GaussianCorner) {
        ModelName::N
    } else if has(Constraint::PsiZero) {
        if has(Constraint::LambdaNegHalf) {
            pick(ModelName::C, ModelName::SC)
        } else {
            pick(ModelName::T, ModelName::St)
        }
    } else if has(Constraint::ChiZero) {
        if has(Constraint::LambdaOne) {
            pick(ModelName::L, ModelName::AL)
        } else {
            pick(ModelName::SVG, ModelName::VG)
        }
    } else if has(Constraint::LambdaNegHalf) {
        pick(ModelName::SNIG, ModelName::NIG)
    } else if has(Constraint::LambdaHyperbolic) {
        pick(ModelName::SH, ModelName::H)
    } else if has(Constraint::LambdaOne) {
        ModelName::HUM
    } else {
        pick(ModelName::SGH, ModelName::GH)
    };
    let mut active = snapped.to_vec();
    active.sort();
    active.dedup();
    Ok(ModelLabel {
        name,
        active_constraints: active,
        conventional_params: to_conventional(name, theta),
    })
}

/// Conventional parametrisation of a named model.
///
/// St / t / SC / C: `(μ, cΣ, cγ, ν = −2λ)` with `c = −χ/(2λ)`; VG / SVG / AL / L:
/// `(μ, cΣ, cγ, λ)` with `c = 2λ/ψ`; NIG: unchanged; N: `(μ + cγ, cΣ)` with `c = −χ/(2λ)`;
/// everything else passes through as `Native`.
pub fn to_conventional(name: ModelName, theta: &GhParams) -> ConventionalParams {
    let native = ConventionalParams {
        form: ConventionalForm::Native,
        mu: theta.mu.iter().copied().collect(),
        sigma: rows(theta.sigma()),
        gamma: theta.gamma.iter().copied().collect(),
        nu: None,
        lambda: Some(theta.lambda),
        chi: Some(theta.chi),
        psi: Some(theta.psi),
        scale: None,
    };
    let scaled = |form, c: f64, shift: bool| ConventionalParams {
        form,
        mu: if shift {
            (&theta.mu + &theta.gamma * c).iter().copied().collect()
        } else {
            theta.mu.iter().copied().collect()
        },
        sigma: rows(&(theta.sigma() * c)),
        gamma: (&theta.gamma * c).iter().copied().collect(),
        nu: None,
        lambda: None,
        chi: None,
        psi: None,
        scale: Some(c),
    };
    match name {
        ModelName::St | ModelName::T | ModelName::SC | ModelName::C => {
            let c = -theta.chi / (2.0 * theta.lambda);
            ConventionalParams {
                nu: Some(-2.0 * theta.lambda),
                ..scaled(ConventionalForm::SkewT, c, false)
            }
        }
        ModelName::VG | ModelName::SVG | ModelName::AL | ModelName::L => {
            let c = 2.0 * theta.lambda / theta.psi;
            ConventionalParams {
                lambda: Some(theta.lambda),
                ..scaled(ConventionalForm::VarianceGamma, c, false)
            }
        }
        ModelName::NIG => ConventionalParams {
            form: ConventionalForm::Nig,
            lambda: None,
            ..native
        },
        ModelName::N => {
            let c = -theta.chi / (2.0 * theta.lambda);
            let mut p = scaled(ConventionalForm::Gaussian, c, true);
            p.gamma = vec![0.0; theta.dim()];
            p
        }
        _ => native,
    }
}

fn conventional_parts(p: &ConventionalParams) -> Result<(DVector<f64>, ScaleFactor, DVector<f64>)> {
    let d = p.mu.len();
    if p.sigma.len() != d || p.gamma.len() != d {
        return Err(Error::InvalidInput("inconsistent conventional parameters".into()));
    }
    let sigma = DMatrix::from_fn(d, d, |i, j| p.sigma[i][j]);
    Ok((
        DVector::from_column_slice(&p.mu),
        ScaleFactor::new(&sigma)?,
        DVector::from_column_slice(&p.gamma),
    ))
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Log-density of a model in its conventional parametrisation.
pub fn conventional_log_density(x: &DVector<f64>, p: &ConventionalParams) -> Result<f64> {
    let (mu, f, gamma) = conventional_parts(p)?;
    let d = mu.len() as f64;
    let zx = f.whiten(&(x - &mu));
    let zg = f.whiten(&gamma);
    let q = zx.norm_squared();
    let rho = zg.norm_squared();
    let lin = zx.dot(&zg);
    match p.form {
        ConventionalForm::Gaussian => Ok(-0.5 * (d * LN_2PI + f.log_det() + q)),
        ConventionalForm::SkewT => {
            let nu = p.nu.ok_or_else(|| Error::InvalidInput("skew-t needs nu".into()))?;
            let m = 0.5 * (nu + d);
            let log_c = ln_gamma(m) - ln_gamma(0.5 * nu) - 0.5 * d * (std::f64::consts::PI * nu).ln()
                - 0.5 * f.log_det();
            if rho == 0.0 {
                return Ok(log_c - m * (q / nu).ln_1p());
            }
            // 2^{1-m} / Γ(ν/2) · K_m(√((ν+Q)ρ)) e^{lin} (√((ν+Q)ρ))^{m} / (1 + Q/ν)^{m}
            let arg = ((nu + q) * rho).sqrt();
            Ok((1.0 - m) * std::f64::consts::LN_2 - ln_gamma(0.5 * nu)
                - 0.5 * d * (std::f64::consts::PI * nu).ln()
                - 0.5 * f.log_det()
                + log_bessel_k(m, arg)?
                + lin
                + m * arg.ln()
                - m * (q / nu).ln_1p())
        }
        ConventionalForm::VarianceGamma => {
            let lambda = p
                .lambda
                .ok_or_else(|| Error::InvalidInput("variance gamma needs lambda".into()))?;
            let nu = lambda - 0.5 * d;
            let b = 2.0 * lambda + rho;
            let base = std::f64::consts::LN_2 + lambda * lambda.ln() - ln_gamma(lambda)
                - 0.5 * d * LN_2PI
                - 0.5 * f.log_det()
                + lin;
            if q == 0.0 {
                if nu > 0.0 {
                    // ∫ w^{ν−1} e^{−bw/2} dw / 2 = Γ(ν) (b/2)^{−ν} / 2
                    return Ok(base - std::f64::consts::LN_2 + ln_gamma(nu) - nu * (0.5 * b).ln());
                }
                return Err(Error::Domain("variance gamma density is unbounded at mu".into()));
            }
            Ok(base + 0.5 * nu * (q / b).ln() + log_bessel_k(nu, (q * b).sqrt())?)
        }
        ConventionalForm::Nig | ConventionalForm::Native => {
            let lambda = match p.form {
                ConventionalForm::Nig => -0.5,
                _ => p.lambda.ok_or_else(|| Error::InvalidInput("native form needs lambda".into()))?,
            };
            let chi = p.chi.ok_or_else(|| Error::InvalidInput("missing chi".into()))?;
            let psi = p.psi.ok_or_else(|| Error::InvalidInput("missing psi".into()))?;
            let sigma = DMatrix::from_fn(mu.len(), mu.len(), |i, j| p.sigma[i][j]);
            let theta = GhParams::with_unit_det(mu, sigma, gamma, lambda, chi, psi)?;
            mixture_log_density(x, &theta)
        }
    }
}

/// Cross-validation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcvConfig {
    pub grid: Vec<f64>,
    pub p: f64,
    pub seed: u64,
    #[serde(default)]
    pub controls: FitControls,
}

impl LcvConfig {
    pub fn new(grid: Vec<f64>, p: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            grid,
            p,
            seed,
            controls: FitControls::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidInput("grid must not be empty".into()));
        }
        if self.grid.iter().any(|h| !(*h >= 0.0) || !h.is_finite()) {
            return Err(Error::InvalidInput("grid values must be finite and >= 0".into()));
        }
        let mut g = self.grid.clone();
        g.sort_by(f64::total_cmp);
        if g.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("grid values must be distinct".into()));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::InvalidInput(format!("p must be in (0, 1], got {}", self.p)));
        }
        Ok(())
    }
}

/// The held-out indices: `⌊p·n⌋` distinct rows drawn uniformly, fixed by `(n, seed)`.
pub fn holdout_indices(n: usize, p: f64, seed: u64) -> Result<Vec<usize>> {
    let k = (p * n as f64).floor() as usize;
    if k == 0 {
        return Err(Error::InvalidInput(format!("floor(p n) = 0 for p = {p}, n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, k).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// LCV score at one penalty weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcvScore {
    pub h: f64,
    /// Mean held-out log-density, `None` when too many folds failed.
    pub score: Option<f64>,
    pub folds: usize,
    pub skipped: usize,
}

/// Largest fraction of failed folds tolerated.
pub const MAX_SKIPPED_FRACTION: f64 = 0.2;

/// Partial leave-one-out cross-validated log-likelihood at one `h`.
pub fn lcv_statistic(data: &Dataset, kind: PenaltyKind, h: f64, cfg: &LcvConfig) -> Result<LcvScore> {
    cfg.validate()?;
    if data.n() < 2 {
        return Err(Error::InvalidInput("LCV needs at least two observations".into()));
    }
    let spec = PenaltySpec::new(kind, h)?;
    let full = fit(data, &spec, None, &cfg.controls).ok();
    lcv_with_start(data, &spec, cfg, full.as_ref())
}

/// LCV score with each fold warm-started from `start` (a fit on the full data at the same `h`),
/// or from the default initialisation when absent.
pub fn lcv_with_start(
    data: &Dataset,
    spec: &PenaltySpec,
    cfg: &LcvConfig,
    start: Option<&FitResult>,
) -> Result<LcvScore> {
    let held = holdout_indices(data.n(), cfg.p, cfg.seed)?;
    let init = start.map(|f| &f.theta_unsnapped);
    let values: Vec<Option<f64>> = held
        .par_iter()
        .map(|&i| {
            let train = data.without_row(i);
            let f = fit(&train, spec, init, &cfg.controls).ok()?;
            f.log_density(&data.row(i)).ok().filter(|v| v.is_finite())
        })
        .collect();
    let folds = values.len();
    let ok: Vec<f64> = values.into_iter().flatten().collect();
    let skipped = folds - ok.len();
    let score = if (skipped as f64) > MAX_SKIPPED_FRACTION * folds as f64 || ok.is_empty() {
        None
    } else {
        Some(ok.iter().sum::<f64>() / ok.len() as f64)
    };
    Ok(LcvScore {
        h: spec.h,
        score,
        folds,
        skipped,
    })
}

/// Outcome of the grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub h_star: f64,
    /// Scores in increasing order of `h`.
    pub scores: Vec<LcvScore>,
    /// Fit on the full data at `h*`.
    pub fit: FitResult,
}

/// `argmax` over scored grid points, ties toward the larger `h`.
pub fn argmax_h(scores: &[LcvScore]) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for s in scores {
        if let Some(v) = s.score {
            match best {
                Some((bh, bv)) if v < bv || (v == bv && s.h < bh) => {}
                _ => best = Some((s.h, v)),
            }
        }
    }
    best.map(|b| b.0)
}

/// Grid search over `cfg.grid` and refit on the full data at the selected `h`.
pub fn select_h(data: &Dataset, kind: PenaltyKind, cfg: &LcvConfig) -> Result<Selection> {
    cfg.validate()?;
    let mut grid = cfg.grid.clone();
    grid.sort_by(f64::total_cmp);
    let mut scores = Vec::with_capacity(grid.len());
    let mut fits = Vec::with_capacity(grid.len());
    for &h in &grid {
        let spec = PenaltySpec::new(kind, h)?;
        let full = fit(data, &spec, None, &cfg.controls).ok();
        let score = match &full {
            Some(f) => lcv_with_start(data, &spec, cfg, Some(f))?,
            None => LcvScore {
                h,
                score: None,
                folds: 0,
                skipped: 0,
            },
        };
        scores.push(score);
        fits.push(full);
    }
    let h_star = argmax_h(&scores)
        .ok_or_else(|| Error::Fit("every grid point was invalidated".into()))?;
    let k = grid.iter().position(|&h| h == h_star).expect("h* comes from the grid");
    let fit = fits[k].clone().expect("scored grid points have a full-data fit");
    Ok(Selection {
        h_star,
        scores,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma: &[f64], lambda: f64, chi: f64, psi: f64) -> GhParams {
        let d = gamma.len();
        GhParams::new(
            DVector::zeros(d),
            DMatrix::identity(d, d),
            DVector::from_column_slice(gamma),
            lambda,
            chi,
            psi,
        )
        .unwrap()
    }

    #[test]
    fn classification_table() {
        use Constraint::*;
        let cases: Vec<(GhParams, Vec<Constraint>, ModelName)> = vec![
            (params(&[0.3, 0.1], -1.0, 2.0, 3.0), vec![], ModelName::GH),
            (params(&[0.0, 0.0], -1.0, 2.0, 3.0), vec![GammaZero], ModelName::SGH),
            (params(&[0.0, 0.0], -1.0, 2.0, 0.0), vec![GammaZero, PsiZero], ModelName::T),
            (params(&[0.0, 0.0], -0.5, 2.0, 0.0), vec![GammaZero, PsiZero, LambdaNegHalf], ModelName::C),
            (params(&[0.2, 0.0], -1.0, 2.0, 0.0), vec![PsiZero], ModelName::St),
            (params(&[0.2, 0.0], -0.5, 2.0, 0.0), vec![PsiZero, LambdaNegHalf], ModelName::SC),
            (params(&[0.2, 0.0], 1.0, 0.0, 0.5), vec![ChiZero, LambdaOne], ModelName::AL),
            (params(&[0.0, 0.0], 1.0, 0.0, 0.5), vec![GammaZero, ChiZero, LambdaOne], ModelName::L),
            (params(&[0.2, 0.0], 1.7, 0.0, 0.5), vec![ChiZero], ModelName::VG),
            (params(&[0.0, 0.0], 1.7, 0.0, 0.5), vec![GammaZero, ChiZero], ModelName::SVG),
            (params(&[0.2, 0.0], -0.5, 1.0, 0.5), vec![LambdaNegHalf], ModelName::NIG),
            (params(&[0.0, 0.0], -0.5, 1.0, 0.5), vec![GammaZero, LambdaNegHalf], ModelName::SNIG),
            (params(&[0.2, 0.0], 1.5, 1.0, 0.5), vec![LambdaHyperbolic], ModelName::H),
            (params(&[0.0, 0.0], 1.5, 1.0, 0.5), vec![GammaZero, LambdaHyperbolic], ModelName::SH),
            (params(&[0.2, 0.0], 1.0, 1.0, 0.5), vec![LambdaOne], ModelName::HUM),
            (params(&[0.0, 0.0], -2000.0, 5000.0, 0.0), vec![GammaZero, PsiZero, GaussianCorner], ModelName::N),
        ];
        for (theta, snapped, want) in cases {
            let l = classify(&theta, &snapped, 2).unwrap();
            assert_eq!(l.name, want, "{snapped:?}");
        }
    }

    #[test]
    fn inconsistent_sets_are_errors() {
        use Constraint::*;
        let t = params(&[0.0, 0.0], 1.0, 0.0, 0.0);
        assert!(classify(&t, &[ChiZero, PsiZero], 2).is_err());
        let t = params(&[0.0, 0.0], -0.5, 1.0, 1.0);
        assert!(classify(&t, &[LambdaNegHalf, LambdaOne], 2).is_err());
        let t = params(&[0.0, 0.0], -1.0, 0.0, 1.0);
        assert!(classify(&t, &[ChiZero], 2).is_err());
        let t = params(&[0.1, 0.0], -1.0, 1.0, 1.0);
        assert!(classify(&t, &[GammaZero], 2).is_err());
    }

    #[test]
    fn conventional_examples() {
        let st = to_conventional(ModelName::St, &params(&[0.2, 0.1], -1.0, 2.0, 0.0));
        assert_eq!(st.scale, Some(1.0));
        assert_eq!(st.nu, Some(2.0));
        let al = to_conventional(ModelName::AL, &params(&[0.2, 0.1], 1.0, 0.0, 0.5));
        assert_eq!(al.scale, Some(4.0));
        let n = to_conventional(ModelName::N, &params(&[0.0, 0.0], -20.0, 100.0, 0.0));
        assert_eq!(n.scale, Some(2.5));
        assert_eq!(n.form, ConventionalForm::Gaussian);
        let gh = to_conventional(ModelName::GH, &params(&[0.0, 0.0], -1.0, 2.0, 3.0));
        assert_eq!(gh.form, ConventionalForm::Native);
    }

    #[test]
    fn argmax_prefers_larger_h_on_ties() {
        let s = |h: f64, v: Option<f64>| LcvScore {
            h,
            score: v,
            folds: 1,
            skipped: 0,
        };
        assert_eq!(argmax_h(&[s(0.0, Some(1.0)), s(5.0, Some(1.0))]), Some(5.0));
        assert_eq!(argmax_h(&[s(5.0, Some(1.0)), s(0.0, Some(1.0))]), Some(5.0));
        assert_eq!(argmax_h(&[s(0.0, Some(1.0)), s(5.0, Some(3.0)), s(9.0, Some(2.0))]), Some(5.0));
        assert_eq!(argmax_h(&[s(0.0, None)]), None);
    }

    #[test]
    fn holdout_is_fixed_by_seed() {
        let a = holdout_indices(1000, 0.1, 4).unwrap();
        assert_eq!(a.len(), 100);
        assert_eq!(a, holdout_indices(1000, 0.1, 4).unwrap());
        assert_ne!(a, holdout_indices(1000, 0.1, 5).unwrap());
        assert!(holdout_indices(5, 0.1, 1).is_err());
    }
}
