//! Independent numerical oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls into the Bessel code of the library: everything is plain quadrature of
//! integral representations, so agreement with the library is a genuine cross-check.
#![allow(dead_code)]

/// `ln ∫ exp(logf(s)) ds` over the real line by the trapezoid rule.
///
/// The integrand must be analytic and decay quickly on both sides (after any substitution the
/// caller applies); the trapezoid rule is then spectrally accurate. `scan` is a window wide enough
/// to contain all of the mass.
pub fn log_integrate_line(logf: impl Fn(f64) -> f64, scan: (f64, f64)) -> f64 {
    let (lo, hi) = scan;
    let coarse = 20_000;
    let step = (hi - lo) / coarse as f64;
    let mut peak = f64::NEG_INFINITY;
    for k in 0..=coarse {
        let v = logf(lo + k as f64 * step);
        if v > peak {
            peak = v;
        }
    }
    assert!(peak.is_finite(), "integrand has no finite values in scan window");
    // Trim the window to where the integrand matters.
    let cut = peak - 90.0;
    let mut a = lo;
    while a < hi && logf(a) < cut {
        a += step;
    }
    let mut b = hi;
    while b > a && logf(b) < cut {
        b -= step;
    }
    a -= step;
    b += step;

    let mut h = (b - a) / 64.0;
    let mut sum = 0.0;
    let mut m = 64usize;
    for k in 0..=m {
        sum += (logf(a + k as f64 * h) - peak).exp();
    }
    let mut prev = (sum * h).ln();
    for _ in 0..14 {
        // add midpoints
        let mut mid = 0.0;
        for k in 0..m {
            mid += (logf(a + (k as f64 + 0.5) * h) - peak).exp();
        }
        sum += mid;
        m *= 2;
        h *= 0.5;
        let cur = (sum * h).ln();
        if (cur - prev).abs() < 1e-14 && m >= 512 {
            return cur + peak;
        }
        prev = cur;
    }
    prev + peak
}

fn log_cosh(y: f64) -> f64 {
    let a = y.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln K_ν(x)` from `K_ν(x) = ∫_0^∞ exp(-x cosh t) cosh(ν t) dt` (even integrand, so half of the
/// integral over the line).
pub fn log_bessel_k_quad(nu: f64, x: f64) -> f64 {
    let logf = |t: f64| -x * t.cosh() + log_cosh(nu * t);
    // the mass sits where x sinh t ~ |ν| at most, well inside |t| < 40 for x ≥ 1e-8, |ν| ≤ 200
    let reach = ((nu.abs() + 50.0) / x).asinh() + 2.0;
    log_integrate_line(logf, (-reach, reach)) - std::f64::consts::LN_2
}

/// `ln ∫_0^∞ w^{a-1} exp(-(ψ w + χ / w)/2) dw`, via `w = e^s`.
pub fn log_gig_kernel_integral(a: f64, chi: f64, psi: f64) -> f64 {
    let logf = |s: f64| a * s - 0.5 * (psi * s.exp() + chi * (-s).exp());
    log_integrate_line(logf, (-60.0, 60.0))
}

/// `E[W]` and `E[1/W]` of GIG(λ, χ, ψ) as ratios of kernel integrals (no Bessel functions).
pub fn gig_moments_quad(lambda: f64, chi: f64, psi: f64) -> (f64, f64) {
    let i0 = log_gig_kernel_integral(lambda, chi, psi);
    let i1 = log_gig_kernel_integral(lambda + 1.0, chi, psi);
    let im1 = log_gig_kernel_integral(lambda - 1.0, chi, psi);
    ((i1 - i0).exp(), (im1 - i0).exp())
}

/// Gauss–Legendre nodes/weights on [-1, 1] by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// ∫ over [a, b] (either end may be infinite) of `f`, composite Gauss–Legendre after mapping
/// infinite ends with `x = a + t/(1-t)` style substitutions.
pub fn integrate_interval(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (gx, gw) = gauss_legendre(32);
    let mapped = |u: f64| -> (f64, f64) {
        // returns (x, dx/du) for u in (0, 1)
        match (a.is_finite(), b.is_finite()) {
            (true, true) => (a + (b - a) * u, b - a),
            (true, false) => (a + u / (1.0 - u), 1.0 / ((1.0 - u) * (1.0 - u))),
            (false, true) => (b - (1.0 - u) / u, 1.0 / (u * u)),
            (false, false) => {
                let t = 2.0 * u - 1.0;
                (t / (1.0 - t * t), 2.0 * (1.0 + t * t) / ((1.0 - t * t) * (1.0 - t * t)))
            }
        }
    };
    let mut total = 0.0;
    for p in 0..panels {
        let u0 = p as f64 / panels as f64;
        let u1 = (p + 1) as f64 / panels as f64;
        for (xi, wi) in gx.iter().zip(&gw) {
            let u = 0.5 * (u0 + u1) + 0.5 * (u1 - u0) * xi;
            let (x, jac) = mapped(u);
            let v = f(x) * jac;
            if v.is_finite() {
                total += 0.5 * (u1 - u0) * wi * v;
            }
        }
    }
    total
}

/// Two-sided one-sample Kolmogorov–Smirnov statistic against a CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Asymptotic KS critical value: reject when `D > c(α)/√n`.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Upper-tail p-value of a chi-square statistic.
pub fn chi_square_p_value(stat: f64, df: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

/// Tabulated CDF on a log-spaced grid from an arbitrary log-density on (0, ∞).
pub struct TabulatedCdf {
    s: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedCdf {
    pub fn from_log_pdf(log_pdf: impl Fn(f64) -> f64, s_range: (f64, f64), points: usize) -> Self {
        let (lo, hi) = s_range;
        let h = (hi - lo) / (points - 1) as f64;
        let s: Vec<f64> = (0..points).map(|k| lo + k as f64 * h).collect();
        // density in s: f(e^s) e^s
        let g: Vec<f64> = s.iter().map(|&v| (log_pdf(v.exp()) + v).exp()).collect();
        let mut cdf = vec![0.0; points];
        for k in 1..points {
            // Simpson on each interval using the midpoint value
            let mid = 0.5 * (s[k - 1] + s[k]);
            let gm = (log_pdf(mid.exp()) + mid).exp();
            cdf[k] = cdf[k - 1] + h / 6.0 * (g[k - 1] + 4.0 * gm + g[k]);
        }
        Self { s, cdf }
    }

    pub fn total(&self) -> f64 {
        *self.cdf.last().unwrap()
    }

    pub fn eval(&self, w: f64) -> f64 {
        let v = w.ln();
        if v <= self.s[0] {
            return 0.0;
        }
        if v >= *self.s.last().unwrap() {
            return self.total();
        }
        let h = self.s[1] - self.s[0];
        let k = ((v - self.s[0]) / h) as usize;
        let t = (v - self.s[k]) / h;
        self.cdf[k] * (1.0 - t) + self.cdf[k + 1] * t
    }
}

/// `ln f(x)` of a normal variance-mean mixture with GIG(λ, χ, ψ) mixing, by direct quadrature
/// over the mixing variable (`w = e^s`). Inputs are pre-whitened: `delta = (x-μ)ᵀΣ⁻¹(x-μ)`,
/// `lin = (x-μ)ᵀΣ⁻¹γ`, `rho = γᵀΣ⁻¹γ`, `log_det = ln|Σ|`. `psi = 0` or `chi = 0` are allowed
/// where the mixing law is proper.
#[allow(clippy::too_many_arguments)]
pub fn log_nmvm_density_quad(
    d: usize,
    delta: f64,
    lin: f64,
    rho: f64,
    log_det: f64,
    lambda: f64,
    chi: f64,
    psi: f64,
) -> f64 {
    let d = d as f64;
    let log_norm = log_gig_kernel_integral(lambda, chi, psi);
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    // N(x; μ + wγ, wΣ) = (2πw)^{-d/2}|Σ|^{-1/2} exp(-(δ - 2w·lin + w²ρ)/(2w))
    let logf = |s: f64| {
        let w = s.exp();
        let log_normal =
            -0.5 * d * (ln_2pi + s) - 0.5 * log_det - 0.5 * (delta / w - 2.0 * lin + w * rho);
        let log_mix = lambda * s - 0.5 * (psi * w + chi / w);
        log_normal + log_mix
    };
    log_integrate_line(logf, (-60.0, 60.0)) - log_norm
}

/// Binned χ² statistic and degrees of freedom for a d = 2 sample against the density, on a
/// square grid of cells plus one overflow cell; cell masses by 8×8 Gauss–Legendre.
pub fn chi_square_gof(p: &ghfit::ghdist::GhParams, data: &ghfit::ghdist::Dataset, half_width: f64, cells: usize) -> (f64, f64) {
    let (gx, gw) = gauss_legendre(8);
    let width = 2.0 * half_width / cells as f64;
    let lo0 = p.mu[0] - half_width;
    let lo1 = p.mu[1] - half_width;
    let mut expected = vec![0.0; cells * cells];
    for a in 0..cells {
        for b in 0..cells {
            let mut mass = 0.0;
            for (xi, wi) in gx.iter().zip(&gw) {
                for (xj, wj) in gx.iter().zip(&gw) {
                    let x = nalgebra::DVector::from_vec(vec![
                        lo0 + width * (a as f64 + 0.5 + 0.5 * xi),
                        lo1 + width * (b as f64 + 0.5 + 0.5 * xj),
                    ]);
                    mass += wi * wj * ghfit::ghdist::gh_log_density(&x, p).unwrap().exp();
                }
            }
            expected[a * cells + b] = mass * 0.25 * width * width;
        }
    }
    let mut observed = vec![0.0; cells * cells];
    let mut outside = 0.0;
    for i in 0..data.n() {
        let a = ((data.matrix()[(i, 0)] - lo0) / width).floor();
        let b = ((data.matrix()[(i, 1)] - lo1) / width).floor();
        if a >= 0.0 && b >= 0.0 && (a as usize) < cells && (b as usize) < cells {
            observed[a as usize * cells + b as usize] += 1.0;
        } else {
            outside += 1.0;
        }
    }
    let n = data.n() as f64;
    let mut stat = 0.0;
    let mut bins = 0usize;
    let mut pool_obs = outside;
    let mut pool_exp = n * (1.0 - expected.iter().sum::<f64>());
    for (o, e) in observed.iter().zip(&expected) {
        let e = e * n;
        if e < 5.0 {
            pool_obs += o;
            pool_exp += e;
        } else {
            stat += (o - e).powi(2) / e;
            bins += 1;
        }
    }
    if pool_exp > 0.0 {
        stat += (pool_obs - pool_exp).powi(2) / pool_exp;
        bins += 1;
    }
    (stat, (bins - 1) as f64)
}

/// `Q₁` transcribed from its definition, with `|Σ| = 1` so the log-determinant term drops.
pub fn q1_oracle(x: &[nalgebra::DVector<f64>], u: &[f64], v: &[f64], gamma: &nalgebra::DVector<f64>, mu: &nalgebra::DVector<f64>, sigma: &nalgebra::DMatrix<f64>) -> f64 {
    let inv = sigma.clone().try_inverse().unwrap();
    let n = x.len() as f64;
    let ld = sigma.determinant().ln();
    let mut q = -0.5 * n * ld;
    for i in 0..x.len() {
        let r = &x[i] - mu;
        q += -0.5 * u[i] * (r.transpose() * &inv * &r)[(0, 0)] + (r.transpose() * &inv * gamma)[(0, 0)]
            - 0.5 * v[i] * (gamma.transpose() * &inv * gamma)[(0, 0)];
    }
    q
}

/// Unit-determinant `Σ = LLᵀ` from `d−1` log-diagonal entries and the strict lower triangle.
pub fn sigma_from(p: &[f64], d: usize) -> nalgebra::DMatrix<f64> {
    let mut l = nalgebra::DMatrix::zeros(d, d);
    let mut s = 0.0;
    for j in 0..d - 1 {
        l[(j, j)] = p[j].exp();
        s += p[j];
    }
    l[(d - 1, d - 1)] = (-s).exp();
    let mut k = d - 1;
    for i in 1..d {
        for j in 0..i {
            l[(i, j)] = p[k];
            k += 1;
        }
    }
    &l * l.transpose()
}

/// Damped Newton maximisation with finite-difference derivatives.
pub fn newton_max(f: &dyn Fn(&[f64]) -> f64, start: Vec<f64>) -> Vec<f64> {
    let m = start.len();
    let mut x = start;
    let mut fx = f(&x);
    for _ in 0..200 {
        let h = 1e-5;
        let grad: Vec<f64> = (0..m)
            .map(|j| {
                let mut a = x.clone();
                let mut b = x.clone();
                a[j] += h;
                b[j] -= h;
                (f(&a) - f(&b)) / (2.0 * h)
            })
            .collect();
        let hh = 1e-4;
        let mut hess = nalgebra::DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let e = |di: f64, dj: f64| {
                    let mut y = x.clone();
                    y[i] += di;
                    y[j] += dj;
                    f(&y)
                };
                hess[(i, j)] = (e(hh, hh) - e(hh, -hh) - e(-hh, hh) + e(-hh, -hh)) / (4.0 * hh * hh);
            }
        }
        let g = nalgebra::DVector::from_vec(grad);
        let mut tau = 0.0;
        let mut moved = false;
        for _ in 0..60 {
            let a = -&hess + nalgebra::DMatrix::identity(m, m) * tau;
            if let Some(step) = a.clone().cholesky().map(|c| c.solve(&g)) {
                let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
                let fnew = f(&xn);
                if fnew >= fx {
                    let small = step.amax() < 1e-13;
                    x = xn;
                    fx = fnew;
                    moved = !small;
                    break;
                }
            }
            tau = if tau == 0.0 { 1e-6 } else { tau * 10.0 };
        }
        if !moved {
            break;
        }
    }
    x
}
