//! Generalised inverse Gaussian distribution GIG(λ, χ, ψ):
//! density `(ψ/χ)^{λ/2} w^{λ-1} exp(-(ψw + χ/w)/2) / (2 K_λ(√(ψχ)))` on `w > 0`.
//!
//! The boundary cases `χ = 0` (gamma, needs λ > 0) and `ψ = 0` (inverse gamma, needs λ < 0)
//! are only taken when the parameter is exactly zero.

use crate::error::{Error, Result};
use crate::special::{bessel_k_ratio, log_bessel_k};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GigParams {
    pub lambda: f64,
    pub chi: f64,
    pub psi: f64,
}

/// Which member of the family a parameter triple denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GigKind {
    Interior,
    /// `χ = 0`, `λ > 0`: Gamma(shape λ, rate ψ/2).
    Gamma,
    /// `ψ = 0`, `λ < 0`: InverseGamma(shape -λ, scale χ/2).
    InverseGamma,
}

impl GigParams {
    pub fn new(lambda: f64, chi: f64, psi: f64) -> Result<Self> {
        let p = Self { lambda, chi, psi };
        p.kind()?;
        Ok(p)
    }

    /// Validates the sign-domain rules and classifies the parameter triple.
    pub fn kind(&self) -> Result<GigKind> {
        let Self { lambda, chi, psi } = *self;
        if !lambda.is_finite() || !chi.is_finite() || !psi.is_finite() || chi < 0.0 || psi < 0.0 {
            return Err(Error::Domain(format!("invalid GIG parameters {self:?}")));
        }
        match (chi > 0.0, psi > 0.0) {
            (true, true) => Ok(GigKind::Interior),
            (false, true) if lambda > 0.0 => Ok(GigKind::Gamma),
            (true, false) if lambda < 0.0 => Ok(GigKind::InverseGamma),
            _ => Err(Error::Domain(format!(
                "GIG parameters outside the admissible domain: {self:?}"
            ))),
        }
    }

    fn require_interior(&self) -> Result<()> {
        match self.kind()? {
            GigKind::Interior => Ok(()),
            _ => Err(Error::Domain(format!(
                "boundary GIG parameters {self:?}: use the gamma / inverse-gamma limit"
            ))),
        }
    }
}

/// `ln` of the normalising constant `C` in `f(w) = C w^{λ-1} exp(-(ψw + χ/w)/2)`,
/// valid on the whole admissible domain including both boundaries.
pub fn gig_log_normalizer(p: &GigParams) -> Result<f64> {
    match p.kind()? {
        GigKind::Interior => {
            let omega = (p.chi * p.psi).sqrt();
            Ok(0.5 * p.lambda * (p.psi / p.chi).ln()
                - std::f64::consts::LN_2
                - log_bessel_k(p.lambda, omega)?)
        }
        GigKind::Gamma => Ok(p.lambda * (0.5 * p.psi).ln() - ln_gamma(p.lambda)),
        GigKind::InverseGamma => Ok(-p.lambda * (0.5 * p.chi).ln() - ln_gamma(-p.lambda)),
    }
}

/// Log-density at `w` for interior parameters (`χ > 0`, `ψ > 0`).
pub fn gig_log_pdf(w: f64, p: &GigParams) -> Result<f64> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::Domain(format!("GIG density needs w > 0, got {w}")));
    }
    p.require_interior()?;
    Ok(gig_log_normalizer(p)? + (p.lambda - 1.0) * w.ln() - 0.5 * (p.psi * w + p.chi / w))
}

/// `E[W] = √(χ/ψ) K_{λ+1}(√(ψχ)) / K_λ(√(ψχ))`.
pub fn gig_mean(p: &GigParams) -> Result<f64> {
    p.require_interior()?;
    let omega = (p.chi * p.psi).sqrt();
    Ok((p.chi / p.psi).sqrt() * bessel_k_ratio(p.lambda, omega)?)
}

/// `E[1/W] = √(ψ/χ) K_{λ+1}(√(ψχ)) / K_λ(√(ψχ)) - 2λ/χ`.
pub fn gig_mean_inverse(p: &GigParams) -> Result<f64> {
    p.require_interior()?;
    let omega = (p.chi * p.psi).sqrt();
    Ok((p.psi / p.chi).sqrt() * bessel_k_ratio(p.lambda, omega)? - 2.0 * p.lambda / p.chi)
}

/// `Var(W)` for interior parameters, from `E[W²] = (χ/ψ) K_{λ+2}/K_λ`.
pub fn gig_variance(p: &GigParams) -> Result<f64> {
    p.require_interior()?;
    let omega = (p.chi * p.psi).sqrt();
    let r1 = bessel_k_ratio(p.lambda, omega)?;
    let r2 = bessel_k_ratio(p.lambda + 1.0, omega)?;
    let scale = p.chi / p.psi;
    Ok(scale * (r1 * r2 - r1 * r1))
}

/// Draws `n` independent variates.
///
/// Interior parameters use the ratio-of-uniforms family of Hörmann & Leydold (2014) on the
/// two-parameter form `GIG(λ, ω, ω)` with `ω = √(ψχ)`, rescaled by `√(χ/ψ)`; negative λ is
/// handled through `1/GIG(-λ) ~ GIG(λ)`. Boundaries use dedicated gamma / inverse-gamma draws.
pub fn gig_sample<R: Rng + ?Sized>(p: &GigParams, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let sampler = GigSampler::new(p)?;
    Ok((0..n).map(|_| sampler.draw(rng)).collect())
}

/// Precomputed sampler for one parameter triple.
#[derive(Debug, Clone)]
pub struct GigSampler {
    method: Method,
}

#[derive(Debug, Clone)]
enum Method {
    Gamma { dist: Gamma<f64> },
    InverseGamma { dist: Gamma<f64>, half_chi: f64 },
    Interior { core: Standardized, alpha: f64, invert: bool },
}

impl GigSampler {
    pub fn new(p: &GigParams) -> Result<Self> {
        let method = match p.kind()? {
            GigKind::Gamma => Method::Gamma {
                dist: Gamma::new(p.lambda, 2.0 / p.psi)
                    .map_err(|e| Error::Domain(format!("gamma branch: {e}")))?,
            },
            GigKind::InverseGamma => Method::InverseGamma {
                dist: Gamma::new(-p.lambda, 1.0)
                    .map_err(|e| Error::Domain(format!("inverse gamma branch: {e}")))?,
                half_chi: 0.5 * p.chi,
            },
            GigKind::Interior => {
                let omega = (p.chi * p.psi).sqrt();
                let alpha = (p.chi / p.psi).sqrt();
                let lambda = p.lambda.abs();
                Method::Interior {
                    core: Standardized::new(lambda, omega),
                    alpha,
                    invert: p.lambda < 0.0,
                }
            }
        };
        Ok(Self { method })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.method {
            Method::Gamma { dist } => dist.sample(rng),
            Method::InverseGamma { dist, half_chi } => half_chi / dist.sample(rng),
            Method::Interior { core, alpha, invert } => {
                let y = core.draw(rng);
                if *invert {
                    alpha / y
                } else {
                    alpha * y
                }
            }
        }
    }
}

/// Mode of the standardized density `y^{λ-1} exp(-ω(y + 1/y)/2)`.
fn standardized_mode(lambda: f64, omega: f64) -> f64 {
    if lambda >= 1.0 {
        (((lambda - 1.0).powi(2) + omega * omega).sqrt() + (lambda - 1.0)) / omega
    } else {
        omega / (((1.0 - lambda).powi(2) + omega * omega).sqrt() + (1.0 - lambda))
    }
}

/// Sampler for `GIG(λ, ω, ω)` with `λ ≥ 0`, `ω > 0`.
#[derive(Debug, Clone)]
enum Standardized {
    /// Ratio-of-uniforms with mode shift; bounding rectangle from the cubic's roots.
    RouShift {
        t: f64,
        s: f64,
        mode: f64,
        norm: f64,
        u_minus: f64,
        u_plus: f64,
    },
    /// Ratio-of-uniforms without mode shift.
    RouNoShift { t: f64, s: f64, norm: f64, u_max: f64 },
    /// Three-piece rejection hat for the non-T-concave corner (λ < 1, small ω).
    Hat(HatPieces),
}

#[derive(Debug, Clone)]
struct HatPieces {
    lambda: f64,
    omega: f64,
    x0: f64,
    a1: f64,
    a2: f64,
    a_total: f64,
    k0: f64,
    k1: f64,
    k2: f64,
    tail_start: f64,
}

impl Standardized {
    fn new(lambda: f64, omega: f64) -> Self {
        if lambda > 2.0 || omega > 3.0 {
            Self::rou_shift(lambda, omega)
        } else if lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2 {
            Self::rou_noshift(lambda, omega)
        } else {
            Self::hat(lambda, omega)
        }
    }

    fn log_kernel(t: f64, s: f64, y: f64) -> f64 {
        t * y.ln() - s * (y + 1.0 / y)
    }

    fn rou_shift(lambda: f64, omega: f64) -> Self {
        let t = 0.5 * (lambda - 1.0);
        let s = 0.25 * omega;
        let mode = standardized_mode(lambda, omega);
        let norm = Self::log_kernel(t, s, mode);
        // (y - m)·√f(y) has its extremes at the roots of a cubic; solve it trigonometrically.
        let a = -(2.0 * (lambda + 1.0) / omega + mode);
        let b = 2.0 * (lambda - 1.0) * mode / omega - 1.0;
        let c = mode;
        let p = b - a * a / 3.0;
        let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
        let phi = (-q / (2.0 * (-(p * p * p) / 27.0).sqrt())).clamp(-1.0, 1.0).acos();
        let fak = 2.0 * (-p / 3.0).sqrt();
        let y1 = fak * (phi / 3.0).cos() - a / 3.0;
        let y2 = fak * (phi / 3.0 + 4.0 / 3.0 * std::f64::consts::PI).cos() - a / 3.0;
        let u_plus = (y1 - mode) * (Self::log_kernel(t, s, y1) - norm).exp();
        let u_minus = (y2 - mode) * (Self::log_kernel(t, s, y2) - norm).exp();
        Self::RouShift {
            t,
            s,
            mode,
            norm,
            u_minus,
            u_plus,
        }
    }

    fn rou_noshift(lambda: f64, omega: f64) -> Self {
        let t = 0.5 * (lambda - 1.0);
        let s = 0.25 * omega;
        let mode = standardized_mode(lambda, omega);
        let norm = Self::log_kernel(t, s, mode);
        let ym = ((lambda + 1.0) + ((lambda + 1.0).powi(2) + omega * omega).sqrt()) / omega;
        let u_max = (0.5 * (lambda + 1.0) * ym.ln() - s * (ym + 1.0 / ym) - norm).exp();
        Self::RouNoShift { t, s, norm, u_max }
    }

    fn hat(lambda: f64, omega: f64) -> Self {
        let mode = standardized_mode(lambda, omega);
        let x0 = omega / (1.0 - lambda);
        let k0 = ((lambda - 1.0) * mode.ln() - 0.5 * omega * (mode + 1.0 / mode)).exp();
        let a1 = k0 * x0;
        let (k1, a2, k2, a3, tail_start) = if x0 >= 2.0 / omega {
            let k2 = x0.powf(lambda - 1.0);
            (0.0, 0.0, k2, k2 * 2.0 * (-omega * x0 / 2.0).exp() / omega, x0)
        } else {
            let k1 = (-omega).exp();
            let a2 = if lambda == 0.0 {
                k1 * (2.0 / (omega * omega)).ln()
            } else {
                k1 / lambda * ((2.0 / omega).powf(lambda) - x0.powf(lambda))
            };
            let k2 = (2.0 / omega).powf(lambda - 1.0);
            (k1, a2, k2, k2 * 2.0 * (-1.0f64).exp() / omega, 2.0 / omega)
        };
        Self::Hat(HatPieces {
            lambda,
            omega,
            x0,
            a1,
            a2,
            a_total: a1 + a2 + a3,
            k0,
            k1,
            k2,
            tail_start,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::RouShift {
                t,
                s,
                mode,
                norm,
                u_minus,
                u_plus,
            } => loop {
                let u = u_minus + rng.random::<f64>() * (u_plus - u_minus);
                let v: f64 = rng.random();
                let y = u / v + mode;
                if y > 0.0 && v.ln() <= Self::log_kernel(*t, *s, y) - norm {
                    return y;
                }
            },
            Self::RouNoShift { t, s, norm, u_max } => loop {
                let u = u_max * rng.random::<f64>();
                let v: f64 = rng.random();
                let y = u / v;
                if y > 0.0 && v.ln() <= Self::log_kernel(*t, *s, y) - norm {
                    return y;
                }
            },
            Self::Hat(h) => h.draw(rng),
        }
    }
}

impl HatPieces {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let lambda = self.lambda;
        let omega = self.omega;
        loop {
            let mut v = self.a_total * rng.random::<f64>();
            let (x, hx) = if v <= self.a1 {
                (self.x0 * v / self.a1, self.k0)
            } else {
                v -= self.a1;
                if v <= self.a2 {
                    let x = if lambda == 0.0 {
                        self.x0 * (v / self.k1).exp()
                    } else {
                        (self.x0.powf(lambda) + v / self.k1 * lambda).powf(1.0 / lambda)
                    };
                    (x, self.k1 * x.powf(lambda - 1.0))
                } else {
                    v -= self.a2;
                    let x = -2.0 / omega
                        * ((-omega / 2.0 * self.tail_start).exp() - v * omega / (2.0 * self.k2)).ln();
                    (x, self.k2 * (-omega / 2.0 * x).exp())
                }
            };
            if !(x > 0.0) || !x.is_finite() {
                continue;
            }
            let u = rng.random::<f64>() * hx;
            if u.ln() <= (lambda - 1.0) * x.ln() - omega / 2.0 * (x + 1.0 / x) {
                return x;
            }
        }
    }
}
