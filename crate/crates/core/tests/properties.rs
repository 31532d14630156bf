mod common;

use common::{check_gordan, check_lp_outcome, check_motzkin, kernel_holds, opposite_infeasible, replay};
use invex_core::alternative::{gordan, motzkin};
use invex_core::expr::{central_difference, eval, eval_with_gradient, parse, BinOp, Condition, Expr, Func, Relation};
use invex_core::invexity::{certify_pair, PairKind};
use invex_core::lp::{solve_lp, LpOutcome, LpProblem, RowKind, VarBound};
use invex_core::problem::{evaluate, fixture, EvaluatedPoint, Problem};
use invex_core::ToleranceConfig;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn lp_outcomes_carry_valid_certificates(seed in any::<u64>()) {
        let lp = common::random_lp(&mut ChaCha8Rng::seed_from_u64(seed));
        let out = solve_lp(&lp, &tol()).unwrap();
        prop_assert!(check_lp_outcome(&lp, &out).is_ok(), "{:?}", check_lp_outcome(&lp, &out));
    }

    #[test]
    fn alternatives_are_exclusive(seed in any::<u64>(), rows in 1usize..=6, brows in 0usize..=4, cols in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = common::random_matrix(&mut rng, rows, cols);
        let b = common::random_matrix(&mut rng, brows, cols);
        let g = gordan(&a, &tol()).unwrap();
        prop_assert!(check_gordan(&a, &g, &tol()).is_ok(), "{:?}", check_gordan(&a, &g, &tol()));
        let m = motzkin(&a, &b, &tol()).unwrap();
        prop_assert!(check_motzkin(&a, &b, &m, &tol()).is_ok(), "{:?}", check_motzkin(&a, &b, &m, &tol()));
    }
}

/// Two-variable LPs in `x >= 0` checked against vertex enumeration.
#[test]
fn lp_matches_vertex_enumeration() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let rows = rng.gen_range(1..=5);
        let mut matrix = common::random_matrix(&mut rng, rows, 2);
        let mut rhs: Vec<f64> = (0..rows).map(|_| rng.gen_range(-5.0..=5.0)).collect();
        // A box keeps the feasible set bounded, so the optimum is a vertex.
        matrix.push(vec![1.0, 1.0]);
        rhs.push(10.0);
        let objective = vec![rng.gen_range(-5.0..=5.0), rng.gen_range(-5.0..=5.0)];
        let lp = LpProblem {
            objective: objective.clone(),
            matrix: matrix.clone(),
            rhs: rhs.clone(),
            row_kinds: vec![RowKind::Le; rows + 1],
            bounds: vec![VarBound::NonNegative; 2],
        };
        let mut lines: Vec<([f64; 2], f64)> = matrix.iter().zip(&rhs).map(|(r, b)| ([r[0], r[1]], *b)).collect();
        lines.push(([-1.0, 0.0], 0.0));
        lines.push(([0.0, -1.0], 0.0));
        let mut best: Option<f64> = None;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let ([a, b], e) = lines[i];
                let ([c, d], f) = lines[j];
                let det = a * d - b * c;
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = [(e * d - b * f) / det, (a * f - e * c) / det];
                if lines.iter().all(|([p, q], r)| p * x[0] + q * x[1] <= r + 1e-9) {
                    let v = objective[0] * x[0] + objective[1] * x[1];
                    best = Some(best.map_or(v, |bv: f64| bv.min(v)));
                }
            }
        }
        match (solve_lp(&lp, &tol()).unwrap(), best) {
            (LpOutcome::Optimal { value, .. }, Some(v)) => assert!((value - v).abs() < 1e-7, "{value} vs {v}"),
            (LpOutcome::Infeasible { .. }, None) => {}
            (out, oracle) => panic!("solver {out:?}, oracle {oracle:?}"),
        }
    }
}

fn pair_points(name: &'static str) -> impl Strategy<Value = (Problem, EvaluatedPoint, EvaluatedPoint)> {
    let problem = fixture(name).unwrap();
    let bounds = problem.bounds.clone();
    let coords = move || bounds.iter().map(|&(lo, hi)| lo + 1e-6..hi - 1e-6).collect::<Vec<_>>();
    (coords(), coords()).prop_filter_map("infeasible sample", move |(xbar, x)| {
        let problem = fixture(name).unwrap();
        let pbar = evaluate(&problem, &xbar, &tol()).ok()?;
        let p = evaluate(&problem, &x, &tol()).ok()?;
        (pbar.feasible && p.feasible).then_some((problem, pbar, p))
    })
}

fn any_fixture_pair() -> impl Strategy<Value = (Problem, EvaluatedPoint, EvaluatedPoint)> {
    prop_oneof![
        pair_points("paper-example-2.1"),
        pair_points("cube"),
        pair_points("convex-pair"),
        pair_points("kt-linear-quad"),
        pair_points("two-var-convex"),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn verdicts_replay_and_exclude_each_other((_problem, pbar, p) in any_fixture_pair()) {
        for kind in PairKind::ALL {
            let v = certify_pair(kind, &pbar, &p, &tol()).unwrap();
            prop_assert!(replay(&v, &pbar, &p).is_ok(), "{kind}: {:?}", replay(&v, &pbar, &p));
            prop_assert!(opposite_infeasible(&v, &pbar, &p, &tol()), "{kind}: both outcomes constructible");
        }
    }

    #[test]
    fn strict_kernel_implies_kernel((_problem, pbar, p) in any_fixture_pair()) {
        for kind in [PairKind::StrictInvex, PairKind::StrictKtInvex] {
            if certify_pair(kind, &pbar, &p, &tol()).unwrap().is_kernel() {
                prop_assert!(certify_pair(kind.relaxed(), &pbar, &p, &tol()).unwrap().is_kernel());
            }
        }
    }

    #[test]
    fn convex_fixtures_accept_the_difference_kernel(
        (_problem, pbar, p) in prop_oneof![
            pair_points("paper-example-2.1"),
            pair_points("convex-pair"),
            pair_points("two-var-convex"),
        ]
    ) {
        let eta: Vec<f64> = p.x.iter().zip(&pbar.x).map(|(a, b)| a - b).collect();
        prop_assert!(kernel_holds(PairKind::KtInvex, &pbar, &p, &eta, 0.0));
        prop_assert!(certify_pair(PairKind::KtInvex, &pbar, &p, &tol()).unwrap().is_kernel());
    }
}

fn names() -> Vec<String> {
    vec!["x".into(), "y".into()]
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..1000).prop_map(|k| Expr::Const(f64::from(k) / 8.0)),
        (0usize..2).prop_map(Expr::Var),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        let func = prop_oneof![Just(Func::Exp), Just(Func::Ln), Just(Func::Sin), Just(Func::Cos), Just(Func::Abs)];
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)];
        let rel = prop_oneof![Just(Relation::Lt), Just(Relation::Le), Just(Relation::Gt), Just(Relation::Ge)];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::binary(o, l, r)),
            (inner.clone(), 0u32..4).prop_map(|(b, k)| Expr::Pow(Box::new(b), k)),
            (func, inner.clone()).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
            (inner.clone(), rel, inner.clone(), inner.clone(), inner).prop_map(|(l, r, rhs, body, other)| {
                Expr::Piecewise {
                    branches: vec![(Condition { lhs: l, relation: r, rhs }, body)],
                    otherwise: Box::new(other),
                }
            }),
        ]
    })
}

/// Smooth expressions: polynomials, exp, sin, cos.
fn arb_smooth() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..16).prop_map(|k| Expr::Const(f64::from(k) / 4.0)),
        (0usize..2).prop_map(Expr::Var),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        let func = prop_oneof![Just(Func::Exp), Just(Func::Sin), Just(Func::Cos)];
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul)];
        prop_oneof![
            (op, inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::binary(o, l, r)),
            (inner.clone(), 1u32..4).prop_map(|(b, k)| Expr::Pow(Box::new(b), k)),
            (func, inner).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn printed_expressions_reparse(e in arb_expr()) {
        let text = e.display(&names()).to_string();
        let back = parse(&text, &names()).unwrap();
        prop_assert_eq!(back, e, "{}", text);
    }

    #[test]
    fn dual_numbers_match_finite_differences(e in arb_smooth(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let point = [x, y];
        let (value, grad) = eval_with_gradient(&e, &point).unwrap();
        prop_assert_eq!(value, eval(&e, &point).unwrap());
        let fd = central_difference(&e, &point, 1e-6).unwrap();
        for (a, f) in grad.iter().zip(&fd) {
            prop_assert!((a - f).abs() <= 1e-5 * f.abs().max(1.0), "{} vs {} in {}", a, f, e.display(&names()));
        }
    }
}
