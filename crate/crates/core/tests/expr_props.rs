use hadamard_bench::calculus::{central_difference, central_mixed_difference, mixed_partial, mixed_partial_yx};
use hadamard_bench::expr::{BinaryOp, UnaryOp};
use hadamard_bench::harness::builtin_corpus;
use hadamard_bench::{parse, Expr, Var};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::Var(Var::X)),
        Just(Expr::Var(Var::Y)),
        prop::sample::select(vec![0.0, 0.5, 1.0, 2.0, 3.25, -1.5, 1e-3, 12.0]).prop_map(Expr::Const),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 40, 2, |inner| {
        let unary = prop::sample::select(vec![
            UnaryOp::Neg,
            UnaryOp::Abs,
            UnaryOp::Exp,
            UnaryOp::Ln,
            UnaryOp::Sin,
            UnaryOp::Cos,
            UnaryOp::Sqrt,
        ]);
        let binary = prop::sample::select(vec![BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div]);
        let exponent = prop::sample::select(vec![2.0, 3.0, 0.5, -1.0, -2.5]);
        prop_oneof![
            (unary, inner.clone()).prop_map(|(op, e)| Expr::Unary(op, Box::new(e))),
            (binary, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            (inner, exponent).prop_map(|(e, k)| Expr::Pow(Box::new(e), k)),
        ]
    })
}

fn same(a: Result<f64, impl std::fmt::Debug>, b: Result<f64, impl std::fmt::Debug>) -> bool {
    match (a, b) {
        (Ok(u), Ok(v)) => u == v,
        (Err(_), Err(_)) => true,
        _ => false,
    }
}

proptest! {
    #[test]
    fn printing_round_trips(e in expr(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let text = e.to_string();
        let back = parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(back.to_string(), text.clone());
        prop_assert!(same(e.eval(x, y), back.eval(x, y)), "{} at ({}, {})", text, x, y);
    }

    #[test]
    fn derivative_of_sum_is_sum_of_derivatives(a in expr(), b in expr(), x in 0.1f64..1.0, y in 0.1f64..1.0) {
        let sum = Expr::Binary(BinaryOp::Add, Box::new(a.clone()), Box::new(b.clone()));
        if let (Ok(ds), Ok(da), Ok(db)) = (sum.differentiate(Var::X), a.differentiate(Var::X), b.differentiate(Var::X)) {
            if let (Ok(s), Ok(u), Ok(v)) = (ds.eval(x, y), da.eval(x, y), db.eval(x, y)) {
                prop_assert!((s - (u + v)).abs() <= 1e-12 * (1.0 + s.abs()));
            }
        }
    }

    #[test]
    fn constants_differentiate_to_zero(c in -1e3f64..1e3, var in prop::sample::select(vec![Var::X, Var::Y])) {
        prop_assert_eq!(Expr::Const(c).differentiate(var).unwrap(), Expr::Const(0.0));
    }
}

/// Smooth expressions checked against finite differences: the corpus plus a few more.
fn smooth_cases() -> Vec<(Expr, (f64, f64, f64, f64))> {
    let mut out: Vec<(Expr, (f64, f64, f64, f64))> = builtin_corpus()
        .into_iter()
        .map(|e| (e.expr().unwrap(), (e.rect.a(), e.rect.b(), e.rect.c(), e.rect.d())))
        .collect();
    for text in [
        "sin(x*y)/(1+x^2)",
        "ln(1+x^2+y^2)*sqrt(2+y)",
        "x^(-1)*exp(-y^2)",
        "cos(x)^3 - y^2.5",
    ] {
        out.push((parse(text).unwrap(), (0.5, 2.0, 0.5, 2.0)));
    }
    out
}

#[test]
fn symbolic_derivatives_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for (f, (a, b, c, d)) in smooth_cases() {
        for var in [Var::X, Var::Y] {
            let df = f.differentiate(var).unwrap();
            for _ in 0..100 {
                let (x, y) = (rng.gen_range(a..=b), rng.gen_range(c..=d));
                let exact = df.eval(x, y).unwrap();
                let approx = central_difference(&f, var, x, y, 1e-5).unwrap();
                assert!(
                    (exact - approx).abs() <= 1e-5 * (1.0 + exact.abs()),
                    "d{f}/d{} at ({x}, {y}): {exact} vs {approx}",
                    var.name()
                );
            }
        }
    }
}

#[test]
fn mixed_partials_commute() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (f, (a, b, c, d)) in smooth_cases() {
        let xy = mixed_partial(&f).unwrap();
        let yx = mixed_partial_yx(&f).unwrap();
        for _ in 0..100 {
            let (x, y) = (rng.gen_range(a..=b), rng.gen_range(c..=d));
            let u = xy.eval(x, y).unwrap();
            let v = yx.eval(x, y).unwrap();
            assert!((u - v).abs() <= 1e-9 * (1.0 + u.abs()), "{f} at ({x}, {y}): {u} vs {v}");
            let fd = central_mixed_difference(&f, x, y, 1e-4).unwrap();
            assert!(
                (u - fd).abs() <= 1e-4 * (1.0 + u.abs()),
                "{f} at ({x}, {y}): {u} vs stencil {fd}"
            );
        }
    }
}
