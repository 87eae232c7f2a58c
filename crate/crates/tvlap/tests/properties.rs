//! Property tests for the algebraic and behavioral invariants.

use proptest::prelude::*;

use tvlap::analysis::{track, ExtremaKind, ExtremaMode};
use tvlap::filter::{forecast, init_state, step};
use tvlap::matrix::{rank, solve_spd, Matrix, DEFAULT_RANK_TOL};
use tvlap::model::{arma_to_state_space, build_transition, make_tvlap, GVariant, TvlapConfig};
use tvlap::noise::{impulse_response, innovation_variance};
use tvlap::ArmaSpec;

fn matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-10.0f64..10.0, rows * cols)
        .prop_map(move |data| Matrix::new(rows, cols, data).unwrap())
}

/// AR polynomial from real roots strictly inside the unit circle, plus
/// random moving-average coefficients. Always passes the stability check.
fn stable_arma_strategy() -> impl Strategy<Value = ArmaSpec> {
    let roots = proptest::collection::vec(-0.85f64..0.85, 0..=3);
    let theta0 = 0.5f64..1.5;
    let thetas = proptest::collection::vec(-1.0f64..1.0, 0..=3);
    (roots, theta0, thetas).prop_map(|(roots, theta0, mut thetas)| {
        // Expand prod (z - root_i) into monic coefficients; the non-leading
        // ones are the phi coefficients in order phi_1..phi_p.
        let mut poly = vec![1.0f64];
        for r in &roots {
            let mut next = vec![0.0; poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * r;
            }
            poly = next;
        }
        let phi = poly[1..].to_vec();
        let mut theta = vec![theta0];
        theta.append(&mut thetas);
        ArmaSpec::new(phi, theta).expect("roots are inside the unit circle")
    })
}

proptest! {
    #[test]
    fn matmul_is_associative(
        a in matrix_strategy(3, 4),
        b in matrix_strategy(4, 2),
        c in matrix_strategy(2, 5),
    ) {
        let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
        let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
        let scale = left.max_abs().max(1.0);
        prop_assert!(left.sub(&right).unwrap().max_abs() <= 1e-9 * scale);
    }

    #[test]
    fn solve_spd_residual_bound(
        m in matrix_strategy(4, 4),
        x0 in matrix_strategy(4, 1),
    ) {
        let a = m
            .matmul(&m.transpose())
            .unwrap()
            .add(&Matrix::identity(4))
            .unwrap()
            .symmetrized();
        let b = a.matmul(&x0).unwrap();
        let x = solve_spd(&a, &b).unwrap();
        let resid = a.matmul(&x).unwrap().sub(&b).unwrap().max_abs();
        prop_assert!(resid <= 1e-8 * (a.max_abs() * x.max_abs() + b.max_abs()));
    }

    #[test]
    fn rank_invariant_under_row_permutation_and_scaling(
        a in matrix_strategy(4, 5),
        perm_seed in 0usize..24,
        exps in proptest::collection::vec((-6i32..=6, proptest::bool::ANY), 4),
    ) {
        let base = rank(&a, DEFAULT_RANK_TOL);

        // Apply a permutation and exact power-of-two row scalings.
        let mut order = [0usize, 1, 2, 3];
        let mut s = perm_seed;
        for i in (1..4).rev() {
            order.swap(i, s % (i + 1));
            s /= i + 1;
        }
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (idx, &src) in order.iter().enumerate() {
            let (e, neg) = exps[idx];
            let factor = if neg { -libm::exp2(e as f64) } else { libm::exp2(e as f64) };
            rows.push((0..5).map(|j| a[(src, j)] * factor).collect());
        }
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let transformed = Matrix::from_rows(&refs).unwrap();
        prop_assert_eq!(rank(&transformed, DEFAULT_RANK_TOL), base);
    }

    #[test]
    fn pow_splits_additively(
        a in matrix_strategy(3, 3).prop_map(|m| m.scale(0.15)),
        i in 0usize..5,
        j in 0usize..5,
    ) {
        let whole = a.pow(i + j).unwrap();
        let split = a.pow(i).unwrap().matmul(&a.pow(j).unwrap()).unwrap();
        let scale = whole.max_abs().max(1.0);
        prop_assert!(whole.sub(&split).unwrap().max_abs() <= 1e-9 * scale);
    }

    #[test]
    fn transition_power_identity(k in 0usize..=8, t in 0.001f64..1.0, steps in 1usize..=5) {
        let phi = build_transition(k, t);
        let powered = phi.pow(steps).unwrap();
        let direct = build_transition(k, steps as f64 * t);
        let err = powered.sub(&direct).unwrap().max_abs();
        prop_assert!(err <= 1e-9 * direct.max_abs());
    }

    #[test]
    fn transition_semigroup(k in 0usize..=6, t1 in 0.01f64..1.0, t2 in 0.01f64..1.0) {
        let prod = build_transition(k, t1)
            .matmul(&build_transition(k, t2))
            .unwrap();
        let direct = build_transition(k, t1 + t2);
        prop_assert!(prod.sub(&direct).unwrap().max_abs() <= 1e-9 * direct.max_abs());
    }

    #[test]
    fn arma_state_space_matches_difference_equation(spec in stable_arma_strategy()) {
        // Impulse response through the companion form must reproduce the
        // direct recursion term by term.
        let direct = impulse_response(&spec, 1e-30, 51).unwrap();
        let ss = arma_to_state_space(&spec);
        let mut via_ss = vec![ss.lambda];
        if let Some(comp) = &ss.companion {
            let mut xi = comp.upsilon.clone();
            for _ in 1..51 {
                via_ss.push(comp.pi.matmul(&xi).unwrap()[(0, 0)]);
                xi = comp.xi.matmul(&xi).unwrap();
            }
        }
        for n in 0..51 {
            let a = direct.get(n).copied().unwrap_or(0.0);
            let b = via_ss.get(n).copied().unwrap_or(0.0);
            prop_assert!((a - b).abs() <= 1e-10, "term {} differs: {} vs {}", n, a, b);
        }
    }

    #[test]
    fn innovation_variance_scales_linearly(
        spec in stable_arma_strategy(),
        r in 0.1f64..10.0,
    ) {
        // Skip the measure-zero case of an all-zero numerator.
        prop_assume!(spec.theta_coeffs().iter().any(|t| *t != 0.0));
        let one = innovation_variance(r, &spec, 1e-10).unwrap();
        let two = innovation_variance(2.0 * r, &spec, 1e-10).unwrap();
        prop_assert!((two - 2.0 * one).abs() <= 1e-9 * two.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tracked_events_alternate_and_respect_curvature(
        stream in proptest::collection::vec(-5.0f64..5.0, 120..300),
    ) {
        let q = Matrix::from_rows(&[&[1e-4]]).unwrap();
        let config = TvlapConfig::new(4, 0.1, GVariant::G1, q, 1.0).unwrap();
        let model = make_tvlap(&config).unwrap();
        let outputs = track(&model, &stream, &config, ExtremaMode::ZeroCross, true).unwrap();
        prop_assert_eq!(outputs.len(), stream.len());

        let mut prev_kind: Option<ExtremaKind> = None;
        for out in &outputs {
            prop_assert_eq!(out.derivatives.len(), 4);
            if let Some(e) = out.event {
                match e.kind {
                    ExtremaKind::Minimum => prop_assert!(e.d2 > 0.0),
                    ExtremaKind::Maximum => prop_assert!(e.d2 < 0.0),
                }
                prop_assert!(prev_kind != Some(e.kind), "same kind twice in a row");
                prev_kind = Some(e.kind);
            }
        }
    }

    #[test]
    fn forecast_one_step_matches_step_prediction(
        ys in proptest::collection::vec(-3.0f64..3.0, 10..40),
        y_next in -3.0f64..3.0,
    ) {
        let q = Matrix::from_rows(&[&[0.01]]).unwrap();
        let config = TvlapConfig::new(2, 0.1, GVariant::G1, q, 1.0).unwrap();
        let model = make_tvlap(&config).unwrap();
        let mut state = init_state(3, 1e5).unwrap();
        for &y in &ys {
            state = step(&model, &state, y).unwrap().state;
        }
        // The one-step forecast mean is the predicted measurement, so the
        // innovation of the next step must equal the forecast residual.
        let point = forecast(&model, &state, 1).remove(0);
        let out = step(&model, &state, y_next).unwrap();
        prop_assert_eq!(out.innovation.to_bits(), (y_next - point.xhat[(0, 0)]).to_bits());
    }
}
