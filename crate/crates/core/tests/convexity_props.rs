use hadamard_bench::convexity::{
    check_convex_coords, check_quasiconvex_coords, check_quasiconvex_joint, CheckOptions, Status,
};
use hadamard_bench::harness::{builtin_corpus, ExpectedClass};
use hadamard_bench::{parse, Expr, Rect};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), -1.0f64..1.0]
}

/// Random members of a family that mixes convex, monotone and oscillating terms.
fn family() -> impl Strategy<Value = Expr> {
    (coeff(), coeff(), coeff(), coeff(), coeff(), 1.0f64..4.0).prop_map(|(a, b, c, d, e, k)| {
        parse(&format!(
            "{a}*x^2 + {b}*y^2 + {c}*x*y + {d}*x^3 + {e}*sin({k}*x)*cos(y)"
        ))
        .unwrap()
    })
}

fn rect() -> impl Strategy<Value = Rect> {
    (-2.0f64..2.0, 0.2f64..2.0, -2.0f64..2.0, 0.2f64..2.0)
        .prop_map(|(a, w, c, h)| Rect::new(a, a + w, c, c + h).unwrap())
}

fn quick(seed: u64) -> CheckOptions {
    CheckOptions {
        trials: 1000,
        seed,
        grid: 17,
        ..CheckOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convex_implies_quasiconvex(f in family(), r in rect(), seed in any::<u64>()) {
        let opts = quick(seed);
        let convex = check_convex_coords(&f, &r, &opts).unwrap();
        let quasi = check_quasiconvex_coords(&f, &r, &opts).unwrap();
        if convex.passed() {
            prop_assert!(quasi.passed(), "{} on {}: {}", f, r, quasi.label());
        }
    }

    #[test]
    fn failures_carry_reverifiable_witnesses(f in family(), r in rect(), seed in any::<u64>()) {
        let opts = quick(seed);
        for v in [
            check_convex_coords(&f, &r, &opts).unwrap(),
            check_quasiconvex_coords(&f, &r, &opts).unwrap(),
            check_quasiconvex_joint(&f, &r, &opts).unwrap(),
        ] {
            match (v.status, v.witness) {
                (Status::Fail, Some(w)) => {
                    prop_assert!(w.reverify(&f, opts.tol).unwrap(), "{} on {}: {:?}", f, r, w);
                    let (x, y) = w.point();
                    prop_assert!(r.contains(x, y));
                }
                (Status::Fail, None) => prop_assert!(false, "fail without witness"),
                (_, w) => prop_assert!(w.is_none()),
            }
        }
    }

    #[test]
    fn verdicts_are_deterministic(f in family(), r in rect(), seed in any::<u64>()) {
        let opts = quick(seed);
        prop_assert_eq!(check_quasiconvex_coords(&f, &r, &opts).unwrap(), check_quasiconvex_coords(&f, &r, &opts).unwrap());
        prop_assert_eq!(check_quasiconvex_joint(&f, &r, &opts).unwrap(), check_quasiconvex_joint(&f, &r, &opts).unwrap());
    }
}

#[test]
fn corpus_classes_hold_under_other_seeds() {
    for seed in [1, 2, 3] {
        let opts = CheckOptions {
            seed,
            ..CheckOptions::default()
        };
        for e in builtin_corpus() {
            let f = e.expr().unwrap();
            let convex = check_convex_coords(&f, &e.rect, &opts).unwrap().passed();
            let quasi = check_quasiconvex_coords(&f, &e.rect, &opts).unwrap().passed();
            let observed = match (convex, quasi) {
                (true, _) => ExpectedClass::CoordinateConvex,
                (false, true) => ExpectedClass::CoordinateQuasiConvexOnly,
                (false, false) => ExpectedClass::Neither,
            };
            assert_eq!(Some(observed), e.expected_class, "{} with seed {seed}", e.name);
        }
    }
}
