use hadamard_bench::harness::builtin_corpus;
use hadamard_bench::quad::{composite2d, gauss_rule, integrate1d, integrate2d, QuadError};
use hadamard_bench::{QuadOptions, Rect};
use proptest::prelude::*;

fn power_integral(lo: f64, hi: f64, k: i32) -> f64 {
    (hi.powi(k + 1) - lo.powi(k + 1)) / (k + 1) as f64
}

fn abs_power_integral(lo: f64, hi: f64, k: i32) -> f64 {
    let prim = |x: f64| x.abs().powi(k + 1) / (k + 1) as f64;
    if lo >= 0.0 || hi <= 0.0 {
        (prim(hi) - prim(lo)).abs()
    } else {
        prim(hi) + prim(lo)
    }
}

fn rect() -> impl Strategy<Value = Rect> {
    (-3.0f64..3.0, 0.1f64..3.0, -3.0f64..3.0, 0.1f64..3.0)
        .prop_map(|(a, w, c, h)| Rect::new(a, a + w, c, c + h).unwrap())
}

proptest! {
    #[test]
    fn gauss_rules_are_exact_on_monomials(n in 2usize..=12, i in 0i32..24, j in 0i32..24, r in rect()) {
        let top = 2 * n as i32 - 1;
        let (i, j) = (i.min(top), j.min(top));
        let rule = gauss_rule(n).unwrap();
        let got = composite2d(rule, &|x: f64, y: f64| Ok(x.powi(i) * y.powi(j)), &r, 1).unwrap();
        let exact = power_integral(r.a(), r.b(), i) * power_integral(r.c(), r.d(), j);
        let scale = abs_power_integral(r.a(), r.b(), i) * abs_power_integral(r.c(), r.d(), j);
        prop_assert!((got - exact).abs() <= 1e-12 * scale, "n={} x^{} y^{} on {}: {} vs {}", n, i, j, r, got, exact);
    }

    #[test]
    fn weights_are_positive_and_sum_to_two(n in 2usize..=32) {
        let rule = gauss_rule(n).unwrap();
        prop_assert!(rule.weights.iter().all(|&w| w > 0.0));
        prop_assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        prop_assert!(rule.nodes.iter().all(|&t| t > -1.0 && t < 1.0));
    }

    #[test]
    fn integrals_are_affine_covariant(entry in 0usize..9, r in rect()) {
        let e = &builtin_corpus()[entry];
        let f = e.expr().unwrap();
        let opts = QuadOptions::default();
        let direct = integrate2d(|x, y| f.eval(x, y), &r, &opts).unwrap().value;
        let pulled = integrate2d(
            |t, s| f.eval(r.a() + t * r.width(), r.c() + s * r.height()),
            &Rect::unit(),
            &opts,
        )
        .unwrap()
        .value
            * r.area();
        prop_assert!((direct - pulled).abs() <= 1e-10 * (1.0 + direct.abs()), "{} on {}: {} vs {}", e.name, r, direct, pulled);
    }
}

#[test]
fn error_estimates_shrink_under_refinement() {
    for e in builtin_corpus() {
        let f = e.expr().unwrap();
        let mut last: Option<(f64, usize)> = None;
        for k in 3..=10 {
            let opts = QuadOptions {
                order: 4,
                ..QuadOptions::with_tol(10f64.powi(-k))
            };
            let q = integrate2d(|x, y| f.eval(x, y), &e.rect, &opts).unwrap();
            let floor = 1e-13 * (1.0 + q.value.abs());
            if let Some((prev, panels)) = last {
                assert!(
                    q.panels >= panels,
                    "{}: panels went from {panels} to {}",
                    e.name,
                    q.panels
                );
                assert!(
                    q.error_estimate <= prev || q.error_estimate <= floor,
                    "{}: estimate went from {prev:e} to {:e}",
                    e.name,
                    q.error_estimate
                );
            }
            last = Some((q.error_estimate, q.panels));
        }
    }
}

#[test]
fn unreachable_tolerance_reports_best_value() {
    let opts = QuadOptions {
        order: 2,
        max_panels_1d: 4,
        ..QuadOptions::with_tol(1e-14)
    };
    match integrate1d(|x: f64| Ok(x.sqrt()), 0.0, 1.0, &opts) {
        Err(QuadError::ToleranceNotReached { best, tol }) => {
            assert!((best.value - 2.0 / 3.0).abs() < 1e-2);
            assert!(best.error_estimate > 1e-14);
            assert_eq!(tol, 1e-14);
        }
        other => panic!("expected ToleranceNotReached, got {other:?}"),
    }
}
