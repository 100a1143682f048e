use ghfit::penalty::{
    hier16_breakdown, mc_lasso, penalty_full72, penalty_hier16, PenaltyKind, PenaltySpec,
    ShapeParams,
};
use nalgebra::DVector;
use proptest::prelude::*;

fn shape(g: (f64, f64), lambda: f64, chi: f64, psi: f64) -> ShapeParams {
    ShapeParams::new(DVector::from_vec(vec![g.0, g.1]), lambda, chi, psi)
}

fn interior() -> impl Strategy<Value = ShapeParams> {
    (
        (-3.0..3.0f64, -3.0..3.0f64),
        -40.0..40.0f64,
        1e-4..1e4f64,
        0.0..50.0f64,
    )
        .prop_map(|(g, l, c, p)| shape(g, l, c, p))
}

proptest! {
    #[test]
    fn composite_penalties_are_nonnegative_and_homogeneous(s in interior(), h in 0.0..200.0f64) {
        for f in [penalty_full72, penalty_hier16] {
            let one = f(&s, 1.0, 2);
            let v = f(&s, h, 2);
            prop_assert!(one >= 0.0);
            prop_assert!((v - h * one).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn mc_lasso_zero_only_on_targets(theta in -5.0..5.0f64) {
        let targets = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
        let v = mc_lasso(theta, &targets, 0.5).unwrap();
        prop_assert_eq!(v == 0.0, targets.contains(&theta));
        prop_assert!(v <= 0.25 || theta.abs() > 3.0);
    }

    #[test]
    fn composite_penalties_are_lipschitz_locally(s in interior(), dir in 0usize..5) {
        // a step of 1e-5 in any coordinate moves the unit penalty by at most a local Lipschitz
        // bound: no jumps between adjacent grid points.
        let step = 1e-5;
        let mut t = s.clone();
        match dir {
            0 => t.gamma[0] += step,
            1 => t.gamma[1] += step,
            2 => t.lambda += step,
            3 => t.chi += step,
            _ => t.psi += step,
        }
        // |1/λ| and |1/χ| have derivative 1/λ², 1/χ²
        let lip = 3.0 + 1.0 / (s.lambda * s.lambda).max(1e-12) + 1.0 / (s.chi * s.chi);
        for f in [penalty_full72, penalty_hier16] {
            let a = f(&s, 1.0, 2);
            let b = f(&t, 1.0, 2);
            if (s.lambda > 0.0) == (t.lambda > 0.0) {
                prop_assert!((a - b).abs() <= lip * step * 1.000001 + 1e-12, "{} vs {}", a, b);
            }
        }
    }
}

#[test]
fn dense_scan_has_no_jumps() {
    // sweep each parameter over a range at spacing 1e-5; adjacent values may differ only by the
    // local slope times the spacing
    let base = shape((0.3, -0.2), -0.8, 1.5, 0.6);
    let step = 1e-5;
    for param in 0..4 {
        for f in [penalty_full72, penalty_hier16] {
            let mut prev: Option<f64> = None;
            let (lo, hi) = match param {
                0 => (-1.0, 1.0),
                1 => (-3.0, 3.0),
                2 => (0.2, 3.0),
                _ => (0.0, 2.0),
            };
            let n = ((hi - lo) / step) as usize;
            for k in 0..=n {
                let v = lo + k as f64 * step;
                let mut s = base.clone();
                match param {
                    0 => s.gamma[0] = v,
                    1 => s.lambda = v,
                    2 => s.chi = v,
                    _ => s.psi = v,
                }
                if param == 1 && v.abs() < 0.05 {
                    // |1/λ| is unbounded near λ = 0; the λ≤0/λ>0 split is a printed
                    // discontinuity of the hierarchical form, so skip the origin
                    prev = None;
                    continue;
                }
                let cur = f(&s, 1.0, 2);
                if let Some(p) = prev {
                    let slope = 3.0 + 1.0 / (s.chi * s.chi) + 1.0 / (s.lambda * s.lambda);
                    assert!(
                        (cur - p).abs() <= slope * step + 1e-9,
                        "param {param} at {v}: {p} -> {cur}"
                    );
                }
                prev = Some(cur);
            }
        }
    }
}

#[test]
fn gaussian_walk_through_equals_quarter_max() {
    let d = 2;
    let s = shape((0.0, 0.0), -30.0, 1e3, 1e-3);
    for h in [0.5, 1.0, 20.0, 100.0] {
        let want = h / 4.0
            * (s.gamma.norm() / (d as f64).sqrt())
                .max((1.0 / s.lambda).abs())
                .max(s.psi)
                .max(1.0 / s.chi);
        assert!((penalty_hier16(&s, h, d) - want).abs() <= 1e-12);
    }
    let b = hier16_breakdown(0.0, -30.0, 1e3, 1e-3, d);
    assert_eq!(b.nearest, 2);
}

#[test]
fn sawtooth_matches_figure_shape() {
    let targets: Vec<f64> = (-3..=3).map(f64::from).collect();
    for k in 0..=800 {
        let theta = -4.0 + k as f64 * 0.01;
        let v = mc_lasso(theta, &targets, 0.5).unwrap();
        let nearest = theta.round().clamp(-3.0, 3.0);
        assert!((v - 0.5 * (theta - nearest).abs()).abs() < 1e-12);
    }
}

#[test]
fn none_kind_is_identically_zero() {
    let spec = PenaltySpec::new(PenaltyKind::None, 50.0).unwrap();
    assert_eq!(spec.value(&shape((1.0, 2.0), 3.0, 4.0, 5.0), 2), 0.0);
}
