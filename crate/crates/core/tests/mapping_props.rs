use hadamard_bench::convexity::Status;
use hadamard_bench::harness::{builtin_corpus, ExpectedClass};
use hadamard_bench::inequality::corner_average;
use hadamard_bench::mappings::{check_g_integral_inequality, check_mapping_properties, eval_g, GForm, MappingKind};
use hadamard_bench::{parse, Expr, Rect, Settings};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Expr> {
    (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, 0.5f64..3.0)
        .prop_map(|(a, b, c, k)| parse(&format!("{a}*exp({k}*x)*y^2 + {b}*sin(x*y) + {c}*x^3*y")).unwrap())
}

fn rect() -> impl Strategy<Value = Rect> {
    (-2.0f64..2.0, 0.01f64..3.0, -2.0f64..2.0, 0.01f64..3.0)
        .prop_map(|(a, w, c, h)| Rect::new(a, a + w, c, c + h).unwrap())
}

proptest! {
    #[test]
    fn g_endpoints_are_exact(f in family(), r in rect()) {
        prop_assert_eq!(eval_g(&f, &r, 0.0, 0.0).unwrap(), f.eval(r.mid_x(), r.mid_y()).unwrap());
        prop_assert_eq!(eval_g(&f, &r, 1.0, 1.0).unwrap(), corner_average(&f, &r).unwrap());
    }

    #[test]
    fn g_ignores_reflection_about_the_centre(f in family(), r in rect(), t in 0.0f64..=1.0, s in 0.0f64..=1.0) {
        let mirrored = |x: f64, y: f64| f.eval(r.a() + r.b() - x, r.c() + r.d() - y);
        let g = eval_g(&f, &r, t, s).unwrap();
        let h = eval_g(&mirrored, &r, t, s).unwrap();
        let scale = [(r.a(), r.c()), (r.a(), r.d()), (r.b(), r.c()), (r.b(), r.d())]
            .iter()
            .map(|&(x, y)| f.eval(x, y).unwrap().abs())
            .fold(1.0, f64::max);
        prop_assert!((g - h).abs() <= 1e-9 * scale, "{} vs {}", g, h);
    }
}

fn settings() -> Settings {
    let mut s = Settings::default();
    s.check.trials = 2000;
    s
}

#[test]
fn mapping_properties_hold_on_convex_corpus() {
    let s = settings();
    for e in builtin_corpus() {
        if e.expected_class != Some(ExpectedClass::CoordinateConvex) {
            continue;
        }
        let f = e.expr().unwrap();
        for kind in [MappingKind::H, MappingKind::G] {
            for r in check_mapping_properties(kind, &f, &e.rect, &s, 17).unwrap() {
                assert_eq!(
                    r.status,
                    Status::Pass,
                    "{} {kind:?} {}: {}",
                    e.name,
                    r.property,
                    r.details
                );
            }
        }
        let c = check_g_integral_inequality(&f, &e.rect, GForm::Corrected, &s).unwrap();
        assert_eq!(c.status, Status::Pass, "{}: corrected margin {}", e.name, c.margin);
    }
}

#[test]
fn printed_form_fails_on_square_product() {
    let c =
        check_g_integral_inequality(&parse("x^2*y^2").unwrap(), &Rect::unit(), GForm::Printed, &settings()).unwrap();
    assert_eq!(c.status, Status::Fail);
    assert!((c.margin - (7.0 / 64.0 - 1.0 / 9.0)).abs() < 1e-14);
}
