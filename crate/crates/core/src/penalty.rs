//! Penalties on the shape block `(γ, λ, χ, ψ)`: classical, hierarchical and multiple-choice LASSO
//! building blocks, and the two composite GH penalties (72-model and hierarchical 16-model).

use crate::error::{Error, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Which composite penalty is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyKind {
    None,
    Full72,
    Hier16,
}

impl fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PenaltyKind::None => "none",
            PenaltyKind::Full72 => "full72",
            PenaltyKind::Hier16 => "hier16",
        })
    }
}

impl FromStr for PenaltyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(PenaltyKind::None),
            "full72" | "72" => Ok(PenaltyKind::Full72),
            "hier16" | "16" => Ok(PenaltyKind::Hier16),
            other => Err(Error::InvalidInput(format!("unknown penalty kind {other:?}"))),
        }
    }
}

/// Penalty kind plus weight `h ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub h: f64,
}

impl PenaltySpec {
    pub fn new(kind: PenaltyKind, h: f64) -> Result<Self> {
        if !(h >= 0.0) || !h.is_finite() {
            return Err(Error::InvalidInput(format!("penalty weight must be >= 0, got {h}")));
        }
        Ok(Self { kind, h })
    }

    pub fn none() -> Self {
        Self {
            kind: PenaltyKind::None,
            h: 0.0,
        }
    }

    /// Penalty value at `s` in dimension `d`.
    pub fn value(&self, s: &ShapeParams, d: usize) -> f64 {
        self.value_parts(s.gamma.norm(), s.lambda, s.chi, s.psi, d)
    }

    /// Same as [`PenaltySpec::value`] from `‖γ‖` and the scalar shape parameters.
    pub fn value_parts(&self, gamma_norm: f64, lambda: f64, chi: f64, psi: f64, d: usize) -> f64 {
        match self.kind {
            PenaltyKind::None => 0.0,
            _ if self.h == 0.0 => 0.0,
            PenaltyKind::Full72 => self.h * full72_unit(gamma_norm, lambda, chi, psi, d),
            PenaltyKind::Hier16 => self.h * hier16_unit(gamma_norm, lambda, chi, psi, d),
        }
    }
}

/// The shape block `θ₂ = (γ, λ, χ, ψ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub gamma: DVector<f64>,
    pub lambda: f64,
    pub chi: f64,
    pub psi: f64,
}

impl ShapeParams {
    pub fn new(gamma: DVector<f64>, lambda: f64, chi: f64, psi: f64) -> Self {
        Self {
            gamma,
            lambda,
            chi,
            psi,
        }
    }
}

/// Multiple-choice LASSO: `h · minⱼ |θ − tⱼ|`.
pub fn mc_lasso(theta: f64, targets: &[f64], h: f64) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::InvalidInput("mc_lasso needs at least one target".into()));
    }
    if !(h >= 0.0) {
        return Err(Error::InvalidInput(format!("penalty weight must be >= 0, got {h}")));
    }
    let m = targets
        .iter()
        .map(|t| (theta - t).abs())
        .fold(f64::INFINITY, f64::min);
    Ok(h * m)
}

/// Hierarchical LASSO for a parent `θ_c` / child `θ_d` pair: `h(|θ_d| + max(|θ_c|, |θ_d|)/2)`.
pub fn hier_lasso_pair(theta_c: f64, theta_d: f64, h: f64) -> f64 {
    h * (theta_d.abs() + 0.5 * theta_c.abs().max(theta_d.abs()))
}

/// 72-model penalty:
/// `h{min(|λ−(d+1)/2|, |λ+½|, |λ−1|, |1/λ| if λ<0) + min(χ, 1/χ) + ψ + ‖γ‖}`.
pub fn penalty_full72(s: &ShapeParams, h: f64, d: usize) -> f64 {
    h * full72_unit(s.gamma.norm(), s.lambda, s.chi, s.psi, d)
}

/// Hierarchical 16-model penalty (see [`hier16_breakdown`] for the individual terms).
pub fn penalty_hier16(s: &ShapeParams, h: f64, d: usize) -> f64 {
    h * hier16_unit(s.gamma.norm(), s.lambda, s.chi, s.psi, d)
}

/// `(value, index)` of the smallest entry, ties resolved toward the earlier entry.
fn argmin(values: &[f64]) -> (f64, usize) {
    let mut best = (values[0], 0);
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v < best.0 {
            best = (v, k);
        }
    }
    best
}

fn full72_lambda_terms(lambda: f64, d: usize) -> [f64; 4] {
    let dd = d as f64;
    [
        (lambda - 0.5 * (dd + 1.0)).abs(),
        (lambda + 0.5).abs(),
        (lambda - 1.0).abs(),
        if lambda < 0.0 {
            (1.0 / lambda).abs()
        } else {
            f64::INFINITY
        },
    ]
}

fn full72_unit(gamma_norm: f64, lambda: f64, chi: f64, psi: f64, d: usize) -> f64 {
    let l = argmin(&full72_lambda_terms(lambda, d)).0;
    l + chi.abs().min((1.0 / chi).abs()) + psi.abs() + gamma_norm
}

/// Term-by-term view of the hierarchical 16-model penalty at `h = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hier16Breakdown {
    /// `‖γ‖/√d`.
    pub gamma_term: f64,
    /// `true` when the `λ ≤ 0` branch is active.
    pub nonpositive_branch: bool,
    /// The three alternatives of the active branch, in printed order.
    pub alternatives: [f64; 3],
    /// Index of the smallest alternative (earliest on ties).
    pub nearest: usize,
    pub total: f64,
}

/// Evaluates the 16-model penalty at `h = 1`:
///
/// `‖γ‖/√d
///  + I(λ≤0) min[|λ+½| + ½max(|λ+½|, ψ), ψ + ½max(|λ+½|, ψ), ¼max(‖γ‖/√d, |1/λ|, ψ, |1/χ|)]
///  + I(λ>0) min[|λ−(d+1)/2|, χ + ½max(|λ−1|, χ), ½max(‖γ‖/√d, |λ−1|)]`.
pub fn hier16_breakdown(gamma_norm: f64, lambda: f64, chi: f64, psi: f64, d: usize) -> Hier16Breakdown {
    let dd = d as f64;
    let g = gamma_norm / dd.sqrt();
    let psi = psi.abs();
    let chi_abs = chi.abs();
    let alternatives = if lambda <= 0.0 {
        let a = (lambda + 0.5).abs();
        let inv_lambda = if lambda == 0.0 {
            f64::INFINITY
        } else {
            (1.0 / lambda).abs()
        };
        [
            a + 0.5 * a.max(psi),
            psi + 0.5 * a.max(psi),
            0.25 * g.max(inv_lambda).max(psi).max((1.0 / chi).abs()),
        ]
    } else {
        let b = (lambda - 1.0).abs();
        [
            (lambda - 0.5 * (dd + 1.0)).abs(),
            chi_abs + 0.5 * b.max(chi_abs),
            0.5 * g.max(b),
        ]
    };
    let (m, nearest) = argmin(&alternatives);
    Hier16Breakdown {
        gamma_term: g,
        nonpositive_branch: lambda <= 0.0,
        alternatives,
        nearest,
        total: g + m,
    }
}

fn hier16_unit(gamma_norm: f64, lambda: f64, chi: f64, psi: f64, d: usize) -> f64 {
    hier16_breakdown(gamma_norm, lambda, chi, psi, d).total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(gamma: &[f64], lambda: f64, chi: f64, psi: f64) -> ShapeParams {
        ShapeParams::new(DVector::from_column_slice(gamma), lambda, chi, psi)
    }

    const TARGETS: [f64; 7] = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];

    #[test]
    fn mc_lasso_examples() {
        assert_eq!(mc_lasso(1.0, &TARGETS, 0.5).unwrap(), 0.0);
        assert!((mc_lasso(1.4, &TARGETS, 0.5).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(mc_lasso(10.0, &TARGETS, 0.5).unwrap(), 3.5);
        assert!(mc_lasso(1.0, &[], 0.5).is_err());
        assert!(mc_lasso(1.0, &TARGETS, -1.0).is_err());
    }

    #[test]
    fn hier_pair_examples() {
        assert_eq!(hier_lasso_pair(0.0, 0.0, 0.7), 0.0);
        assert_eq!(hier_lasso_pair(2.0, 1.0, 0.5), 1.0);
        assert_eq!(hier_lasso_pair(1.0, 2.0, 0.5), 1.5);
    }

    #[test]
    fn full72_examples() {
        let v = penalty_full72(&shape(&[0.0, 0.0], 1.0, 1e6, 0.0), 2.0, 2);
        assert!((v - 2.0 * 1e-6).abs() < 1e-18);
        assert_eq!(penalty_full72(&shape(&[0.0, 0.0], -0.5, 1.0, 0.0), 1.0, 2), 1.0);
        let v = penalty_full72(&shape(&[0.0, 0.0], -1e3, 1.0, 0.0), 1.0, 2);
        assert!((v - (1e-3 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn full72_gaussian_corner_limit() {
        let mut prev = f64::INFINITY;
        for k in 1..8 {
            let t = 10f64.powi(k);
            let v = penalty_full72(&shape(&[0.0, 0.0], -t, t * t, 1.0 / t), 1.0, 2);
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn hier16_examples() {
        let v = penalty_hier16(&shape(&[0.0, 0.0], -30.0, 1e3, 1e-3), 1.0, 2);
        assert!((v - 1.0 / 120.0).abs() < 1e-15);
        let v = penalty_hier16(&shape(&[0.0, 0.0], -0.5, 1.0, 2.0), 1.0, 2);
        assert_eq!(v, 0.5);
        let b = hier16_breakdown(0.0, -0.5, 1.0, 2.0, 2);
        assert!(b.nonpositive_branch);
        assert_eq!(b.alternatives, [1.0, 3.0, 0.5]);
        assert_eq!(b.nearest, 2);
    }

    #[test]
    fn hier16_lambda_zero_belongs_to_nonpositive_branch() {
        let b = hier16_breakdown(0.0, 0.0, 1.0, 1.0, 2);
        assert!(b.nonpositive_branch);
        assert!(b.total.is_finite());
    }

    #[test]
    fn hier16_positive_branch_targets() {
        // λ = (d+1)/2 → H; χ = 0, λ = 1 → AL; λ = 1 and γ = 0 → HUM pattern
        assert_eq!(penalty_hier16(&shape(&[0.0, 0.0], 1.5, 2.0, 1.0), 1.0, 2), 0.0);
        let v = penalty_hier16(&shape(&[0.3, 0.4], 1.0, 0.0, 1.0), 1.0, 2);
        assert!((v - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(penalty_hier16(&shape(&[0.0, 0.0], 1.0, 0.7, 1.0), 1.0, 2), 0.0);
    }

    #[test]
    fn ties_go_to_earlier_alternative() {
        assert_eq!(argmin(&[1.0, 1.0, 2.0]).1, 0);
        assert_eq!(argmin(&[3.0, 1.0, 1.0]).1, 1);
    }

    #[test]
    fn spec_dispatch() {
        let s = shape(&[0.3, -0.1], -1.2, 2.0, 0.4);
        assert_eq!(PenaltySpec::none().value(&s, 2), 0.0);
        assert_eq!(PenaltySpec::new(PenaltyKind::Hier16, 0.0).unwrap().value(&s, 2), 0.0);
        let f = PenaltySpec::new(PenaltyKind::Full72, 3.0).unwrap();
        assert_eq!(f.value(&s, 2), penalty_full72(&s, 3.0, 2));
        let h = PenaltySpec::new(PenaltyKind::Hier16, 3.0).unwrap();
        assert_eq!(h.value(&s, 2), penalty_hier16(&s, 3.0, 2));
        assert!(PenaltySpec::new(PenaltyKind::Hier16, -1.0).is_err());
        assert_eq!("Hier16".parse::<PenaltyKind>().unwrap(), PenaltyKind::Hier16);
        assert!("bogus".parse::<PenaltyKind>().is_err());
    }
}
