use proptest::prelude::*;
use stressopt_core::capacity::{
    concentration_factor_for, generalized_k, kinematic_limit_check, limit_analysis, Method,
};
use stressopt_core::kinematics::{assemble, DiscreteOperators, TractionField};
use stressopt_core::lp::{solve, solve_brute, LpStandardForm, LpStatus};
use stressopt_core::matnorm::NormPair;
use stressopt_core::mesh::{generate_rectangle, Edge};
use stressopt_core::stress::{optimal_stress, stress_measure, Mode};

const LAYOUTS: [(Edge, Edge); 3] = [
    (Edge::Left, Edge::Right),
    (Edge::Bottom, Edge::Top),
    (Edge::Left, Edge::Top),
];

fn rectangle(nx: usize, ny: usize, layout: usize) -> DiscreteOperators {
    let (support, load) = LAYOUTS[layout];
    let mesh = generate_rectangle(1.0, 1.5, nx, ny, support, load).unwrap();
    assemble(&mesh, NormPair::L1_LINF).unwrap()
}

fn traction(ops: &DiscreteOperators, raw: &[f64]) -> TractionField {
    let m = ops.boundary_components();
    let mut flat: Vec<f64> = raw.iter().cycle().take(m).copied().collect();
    if flat.iter().all(|v| *v == 0.0) {
        flat[0] = 1.0;
    }
    TractionField::from_flat(ops, &flat).unwrap()
}

fn mode_of(plastic: bool) -> Mode {
    if plastic {
        Mode::Plastic
    } else {
        Mode::Elastic
    }
}

fn small_lp() -> impl Strategy<Value = LpStandardForm> {
    (1usize..=3, 0usize..=3).prop_flat_map(|(m, extra)| {
        let n = m + extra;
        (
            prop::collection::vec(-2i32..=4, n),
            prop::collection::vec(prop::collection::vec(-3i32..=3, n), m),
            prop::collection::vec(0i32..=3, n),
            any::<bool>(),
            prop::collection::vec(-4i32..=4, m),
        )
            .prop_map(|(c, a, x0, feasible, b_raw)| {
                let a: Vec<Vec<f64>> = a
                    .iter()
                    .map(|r| r.iter().map(|&v| v as f64).collect())
                    .collect();
                let b = if feasible {
                    a.iter()
                        .map(|r| r.iter().zip(&x0).map(|(v, x)| v * *x as f64).sum())
                        .collect()
                } else {
                    b_raw.iter().map(|&v| v as f64).collect()
                };
                LpStandardForm::new(c.iter().map(|&v| v as f64).collect(), a, b).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simplex_matches_vertex_enumeration(p in small_lp()) {
        let fast = solve(&p).unwrap();
        let slow = solve_brute(&p).unwrap();
        prop_assert_eq!(fast.status, slow.status);
        if fast.status == LpStatus::Optimal {
            let tol = 1e-6 * (1.0 + slow.objective.abs());
            prop_assert!((fast.objective - slow.objective).abs() <= tol);
            prop_assert!(p.certificate(&fast).holds(&p.b, fast.objective));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn optimal_stress_closes_the_gap(
        nx in 1usize..=2,
        ny in 1usize..=2,
        layout in 0usize..3,
        plastic in any::<bool>(),
        raw in prop::collection::vec(-2.0f64..2.0, 1..12),
    ) {
        let ops = rectangle(nx, ny, layout);
        let t = traction(&ops, &raw);
        let mode = mode_of(plastic);
        let r = optimal_stress(&ops, &t, mode).unwrap();
        prop_assert!(r.duality_gap <= 1e-6 * (1.0 + r.sigma_opt));
        prop_assert!(r.equilibrium_residual <= 1e-6 * (1.0 + r.sigma_opt));
        let measure = stress_measure(&r.sigma_hat, mode, ops.norm_pair);
        prop_assert!((measure - r.sigma_opt).abs() <= 1e-6 * (1.0 + r.sigma_opt));
    }

    #[test]
    fn optimal_stress_is_a_seminorm(
        layout in 0usize..3,
        plastic in any::<bool>(),
        scale in -3.0f64..3.0,
        a in prop::collection::vec(-2.0f64..2.0, 1..8),
        b in prop::collection::vec(-2.0f64..2.0, 1..8),
    ) {
        let ops = rectangle(2, 1, layout);
        let mode = mode_of(plastic);
        let ta = traction(&ops, &a);
        let tb = traction(&ops, &b);
        let sa = optimal_stress(&ops, &ta, mode).unwrap().sigma_opt;
        let sb = optimal_stress(&ops, &tb, mode).unwrap().sigma_opt;
        let scaled = optimal_stress(&ops, &ta.scale(scale), mode).unwrap().sigma_opt;
        prop_assert!((scaled - scale.abs() * sa).abs() <= 1e-6 * (1.0 + sa * scale.abs()));
        let sum_flat: Vec<f64> = ta.flat().iter().zip(tb.flat()).map(|(x, y)| x + y).collect();
        let sum = TractionField::from_flat(&ops, &sum_flat).unwrap();
        let ssum = optimal_stress(&ops, &sum, mode).unwrap().sigma_opt;
        prop_assert!(ssum <= sa + sb + 1e-6 * (1.0 + sa + sb));
    }

    #[test]
    fn single_traction_factor_is_bounded_by_k(
        layout in 0usize..3,
        plastic in any::<bool>(),
        raw in prop::collection::vec(-2.0f64..2.0, 1..10),
    ) {
        let ops = rectangle(1, 1, layout);
        let mode = mode_of(plastic);
        let k = generalized_k(&ops, mode, Method::ExactVertexEnumeration).unwrap().k;
        let kt = concentration_factor_for(&ops, &traction(&ops, &raw), mode).unwrap();
        prop_assert!(kt <= k + 1e-6 * (1.0 + k));
    }

    #[test]
    fn limit_factor_scales_to_yield(
        layout in 0usize..3,
        y0 in 0.1f64..5.0,
        raw in prop::collection::vec(-2.0f64..2.0, 1..10),
    ) {
        let ops = rectangle(2, 1, layout);
        let t = traction(&ops, &raw);
        let r = limit_analysis(&ops, &t, y0).unwrap();
        prop_assert!((r.lambda_star * r.sigma_opt - y0).abs() <= 1e-9 * y0);
        prop_assert!((r.sigma_opt_collapse - y0).abs() <= 1e-6 * y0);
        let kin = kinematic_limit_check(&ops, &t, y0).unwrap();
        prop_assert!(kin.gap <= 1e-6 * (1.0 + r.lambda_star));
    }
}
