use appell_sep::billiard::reflect;
use appell_sep::hypergeom::{f4_eval, F4Params};
use appell_sep::mechanics::{poisson_bracket, poisson_bracket_exact, IntegralSpec, PhaseFunction, PhasePoint};
use appell_sep::residuals::{eq1_operator, sys10_operators};
use appell_sep::scalar::{int, rat, Rational};
use appell_sep::LaurentPoly;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    (prop_oneof![-9i64..=-1, 1i64..=9], 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn laurent(n: usize) -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((prop::collection::vec(-3i32..=3, n), rational()), 0..5).prop_map(move |terms| {
        let mut p = LaurentPoly::zero(n);
        for (e, c) in terms {
            p = &p + &LaurentPoly::monomial(c, e);
        }
        p
    })
}

fn point(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(nonzero_rational(), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(f in laurent(2), g in laurent(2), h in laurent(2)) {
        prop_assert_eq!(&f + &g, &g + &f);
        prop_assert_eq!(&f * &g, &g * &f);
        prop_assert_eq!(&(&f + &g) + &h, &f + &(&g + &h));
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
        prop_assert!((&f - &f).is_zero());
        prop_assert_eq!(&f * &LaurentPoly::one(2), f.clone());
    }

    #[test]
    fn leibniz_rule(f in laurent(3), g in laurent(3), var in 0usize..3) {
        let lhs = (&f * &g).diff(var);
        let rhs = &(&f.diff(var) * &g) + &(&f * &g.diff(var));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn mixed_partials_commute(f in laurent(3), i in 0usize..3, j in 0usize..3) {
        prop_assert_eq!(f.diff(i).diff(j), f.diff(j).diff(i));
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(f in laurent(2), g in laurent(2), q in point(2)) {
        let (fv, gv) = (f.eval(&q).unwrap(), g.eval(&q).unwrap());
        prop_assert_eq!((&f * &g).eval(&q).unwrap(), &fv * &gv);
        prop_assert_eq!((&f + &g).eval(&q).unwrap(), &fv + &gv);
    }

    #[test]
    fn canonical_text_round_trips(f in laurent(3)) {
        let back: LaurentPoly = f.to_canonical_string().parse().unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn antiderivative_inverts_differentiation(f in laurent(2), var in 0usize..2) {
        let a = f.antiderivative(var);
        let mut recovered = a.poly.diff(var);
        for (e, c) in a.log_coeff.terms() {
            let mut e2 = e.0.clone();
            e2[var] -= 1;
            recovered = &recovered + &LaurentPoly::monomial(c.clone(), e2);
        }
        prop_assert_eq!(recovered, f);
    }

    #[test]
    fn f4_is_symmetric_in_its_numerator_parameters(
        a in -4i64..=-1, b in 1i64..=5, c in 1i64..=4, d in 1i64..=4, x in rational(), y in rational()
    ) {
        let p = F4Params::new(int(a), int(b), int(c), int(d));
        let q = F4Params::new(int(b), int(a), int(c), int(d));
        prop_assert_eq!(f4_eval(&p, &x, &y, 20).unwrap().value, f4_eval(&q, &x, &y, 20).unwrap().value);
    }

    #[test]
    fn f4_exchanges_variables_with_denominators(
        a in -4i64..=-1, b in rational(), c in 1i64..=4, d in 1i64..=4, x in rational(), y in rational()
    ) {
        let p = F4Params::new(int(a), b.clone(), int(c), int(d));
        let swapped = F4Params::new(int(a), b, int(d), int(c));
        prop_assert_eq!(f4_eval(&p, &x, &y, 20).unwrap().value, f4_eval(&swapped, &y, &x, 20).unwrap().value);
    }

    #[test]
    fn f4_float_exchange_inside_domain(
        a in -2.0f64..2.0, b in -2.0f64..2.0, c in 0.5f64..3.0, d in 0.5f64..3.0, x in -0.2f64..0.2, y in -0.2f64..0.2
    ) {
        let p = F4Params::new(a, b, c, d);
        let q = F4Params::new(a, b, d, c);
        let u = f4_eval(&p, &x, &y, 40).unwrap().value;
        let v = f4_eval(&q, &y, &x, 40).unwrap().value;
        prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
    }

    #[test]
    fn separability_operators_are_linear(
        u in laurent(2), v in laurent(2), al in rational(), be in rational(), lambda in nonzero_rational()
    ) {
        let op = eq1_operator(&lambda);
        let combo = &u.scale(&al) + &v.scale(&be);
        let lhs = op.apply_exact(&combo).unwrap();
        let rhs = &op.apply_exact(&u).unwrap().scale(&al) + &op.apply_exact(&v).unwrap().scale(&be);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn curved_operators_are_linear(u in laurent(3), v in laurent(3), al in rational(), k in prop_oneof![Just(1i8), Just(-1i8)]) {
        for op in sys10_operators(&int(5), &int(3), &int(2), k).unwrap() {
            let lhs = op.apply_exact(&(&u + &v.scale(&al))).unwrap();
            let rhs = &op.apply_exact(&u).unwrap() + &op.apply_exact(&v).unwrap().scale(&al);
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn bracket_is_antisymmetric_and_bilinear(
        q in prop::collection::vec(0.1f64..1.5, 3), p in prop::collection::vec(-2.0f64..2.0, 3), c in -3.0f64..3.0
    ) {
        let axes = vec![int(5), int(3), int(2)];
        let f = PhaseFunction::from_integral(&IntegralSpec::ki(axes.clone(), 0)).unwrap();
        let g = PhaseFunction::from_integral(&IntegralSpec::jacobi_k1(int(5), int(3), int(2))).unwrap();
        let h = PhaseFunction::from_integral(&IntegralSpec::curved_k(int(5), int(3), int(2), 1)).unwrap();
        let s = PhasePoint::new(q, p).unwrap();
        let (fg, scale) = poisson_bracket(&f, &g, &s).unwrap();
        let (gf, _) = poisson_bracket(&g, &f, &s).unwrap();
        prop_assert!((fg + gf).abs() <= 1e-12 * scale.max(1e-300));
        let cr = Rational::from_float(c).unwrap();
        let gh = PhaseFunction { poly: &g.poly + &h.poly.scale(&cr), extra: None };
        let (lhs, s1) = poisson_bracket(&f, &gh, &s).unwrap();
        let (fh, s2) = poisson_bracket(&f, &h, &s).unwrap();
        let rhs = fg + c * fh;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (s1 + scale + c.abs() * s2));
        let (ff, _) = poisson_bracket(&f, &f, &s).unwrap();
        prop_assert_eq!(ff, 0.0);
    }

    #[test]
    fn bracket_satisfies_the_jacobi_identity(f in laurent(4), g in laurent(4), h in laurent(4)) {
        let br = |a: &LaurentPoly, b: &LaurentPoly| poisson_bracket_exact(a, b).unwrap();
        let total = &(&br(&f, &br(&g, &h)) + &br(&g, &br(&h, &f))) + &br(&h, &br(&f, &g));
        prop_assert!(total.is_zero());
    }

    #[test]
    fn reflection_is_an_involution_preserving_speed(theta in 0.0f64..std::f64::consts::TAU, px in -2.0f64..2.0, py in -2.0f64..2.0) {
        let (a, b) = (3.0f64, 2.0f64);
        let q = appell_sep::billiard::project([a.sqrt() * theta.cos(), b.sqrt() * theta.sin()], a, b);
        let out = reflect(q, [px, py], a, b, 1e-12).unwrap();
        let back = reflect(q, out, a, b, 1e-12).unwrap();
        let speed = px.hypot(py);
        prop_assert!((out[0].hypot(out[1]) - speed).abs() <= 1e-14 * speed.max(1e-300) + 1e-300);
        prop_assert!((back[0] - px).abs() <= 1e-14 * speed + 1e-300 && (back[1] - py).abs() <= 1e-14 * speed + 1e-300);
    }
}
