use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::scalar::{pow_i, rat};

fn lp(s: &str, n: usize) -> LaurentPoly {
    let p: LaurentPoly = s.parse().unwrap();
    assert_eq!(p.nvars(), n);
    p
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n)
        .map(|_| {
            let mut num = rng.gen_range(-9i64..=9);
            if num == 0 {
                num = 1;
            }
            rat(num, rng.gen_range(1..=7))
        })
        .collect()
}

#[test]
fn ellipse_laurent_low_orders() {
    let v1 = ellipse_vk_laurent(&EllipseFamilySpec::new(1.0, int(1))).unwrap();
    assert_eq!(v1, lp("1 * x0^0 x1^-2", 2));
    let v2 = ellipse_vk_laurent(&EllipseFamilySpec::new(2.0, int(1))).unwrap();
    assert_eq!(v2, lp("1 * x0^0 x1^-4\n-1 * x0^2 x1^-4", 2));
    let w2 = ellipse_vk_laurent(&EllipseFamilySpec::new(2.0, int(1)).w_branch()).unwrap();
    assert_eq!(w2, lp("1 * x0^-4 x1^0\n1 * x0^-4 x1^2", 2));
    let v3 = ellipse_vk_laurent(&EllipseFamilySpec::new(3.0, int(1))).unwrap();
    assert_eq!(
        v3,
        lp("1 * x0^0 x1^-6\n-2 * x0^2 x1^-6\n1 * x0^2 x1^-4\n1 * x0^4 x1^-6", 2)
    );
    assert!(matches!(
        ellipse_vk_laurent(&EllipseFamilySpec::new(2.5, int(1))),
        Err(Error::NonInteger(_))
    ));
}

#[test]
fn ellipse_amplitude_scales_linearly() {
    let mut spec = EllipseFamilySpec::new(4.0, rat(3, 2));
    let base = ellipse_vk_laurent(&spec).unwrap();
    spec.alpha = rat(-5, 3);
    assert_eq!(ellipse_vk_laurent(&spec).unwrap(), base.scale(&rat(-5, 3)));
}

#[test]
fn w_branch_is_v_branch_with_swapped_roles() {
    for k in 1..=8 {
        for lam in [int(1), rat(5, 3), int(-2)] {
            let w = ellipse_vk_laurent(&EllipseFamilySpec::new(k as f64, lam.clone()).w_branch()).unwrap();
            let v = ellipse_vk_laurent(&EllipseFamilySpec::new(k as f64, -lam)).unwrap();
            assert_eq!(w, v.remap_vars(&[1, 0], 2).unwrap(), "k = {k}");
        }
    }
}

#[test]
fn rescaling_moves_between_lambdas() {
    // V_k(x, y; λ) = λ^{-k} V_k(x/√λ, y/√λ; 1) for λ a perfect square
    for k in 1..=6 {
        let v1 = ellipse_vk_laurent(&EllipseFamilySpec::new(k as f64, int(1))).unwrap();
        let v4 = ellipse_vk_laurent(&EllipseFamilySpec::new(k as f64, rat(4, 9))).unwrap();
        let moved = v1.scale_vars(&[rat(3, 2), rat(3, 2)]).unwrap().scale(&pow_i(&rat(4, 9), -k));
        assert_eq!(moved, v4);
    }
}

#[test]
fn recurrence_small_tables() {
    let t2 = ellipse_recurrence_coeffs(&int(2), 0).unwrap();
    let nz: Vec<_> = t2.nonzero_entries().collect();
    assert_eq!(nz, vec![(&(0, 0), &int(-1))]);
    let t1 = ellipse_recurrence_coeffs(&int(1), 10).unwrap();
    assert_eq!(t1.nonzero_entries().count(), 0);
    assert_eq!(t1.to_laurent().unwrap(), lp("1 * x0^0 x1^-2", 2));
}

#[test]
fn recurrence_reproduces_laurent_family_and_closed_coefficients() {
    for g in 2..=8i64 {
        let t = ellipse_recurrence_coeffs(&int(g), 0).unwrap();
        assert!(t.satisfies_recurrence());
        let v = ellipse_vk_laurent(&EllipseFamilySpec::new(g as f64, int(1))).unwrap();
        assert_eq!(t.to_laurent().unwrap(), v, "γ = {g}");
        for (&(s, i), c) in &t.entries {
            assert_eq!(*c, ellipse_coefficient(&int(g), s, i, true));
        }
    }
    for g in [rat(5, 2), rat(-1, 3)] {
        let t = ellipse_recurrence_coeffs(&g, 6).unwrap();
        assert!(t.satisfies_recurrence());
        for (&(s, i), c) in &t.entries {
            assert_eq!(*c, ellipse_coefficient(&g, s, i, true));
        }
    }
}

#[test]
fn coefficient_formula_without_inner_factor_breaks_recurrence_at_the_seed() {
    let g = rat(5, 2);
    let mut t = ellipse_recurrence_coeffs(&g, 3).unwrap();
    for (&(s, i), c) in t.entries.iter_mut() {
        *c = ellipse_coefficient(&g, s, i, false);
    }
    assert!(!t.recurrence_defect(0, 0).is_zero());
}

#[test]
fn recurrence_pivot_error() {
    assert!(ellipse_recurrence_coeffs(&int(0), 3).is_err());
    let t = ellipse_recurrence_coeffs(&2.5f64, 5).unwrap();
    assert!((t.get(0, 0) - ellipse_coefficient(&2.5, 0, 0, true)).abs() < 1e-12);
}

#[test]
fn pmn_examples_and_symmetric_reduction() {
    for (m, n) in [(0, 0), (3, 1), (2, 5)] {
        assert_eq!(pmn_poly(m, n, 0, &rat(2, 3), &rat(-7, 5)), int(1));
    }
    let b = rat(3, 7);
    assert_eq!(pmn_poly(1, 1, 2, &b, &-b.clone()), int(3) * &b * &b);
    assert_eq!(pmn_symmetric(1, 1, 2, &b), int(3) * &b * &b);
    assert_eq!(pmn_poly(0, 0, 1, &rat(2, 3), &rat(-7, 5)), Rational::zero());
    assert_eq!(pmn_symmetric(0, 0, 3, &b), Rational::zero());
    assert_eq!(pmn_symmetric(4, 2, 0, &b), Rational::one());
    for m in 0..=8 {
        for n in 0..=8 {
            for k in 0..=8 {
                assert_eq!(pmn_poly(m, n, k, &b, &-b.clone()), pmn_symmetric(m, n, k, &b));
            }
        }
    }
}

fn curved(l0: f64, k: i8) -> CurvedFamilySpec {
    CurvedFamilySpec { gamma_exp: l0, a: int(3), b: int(2), c: int(1), curvature_sign: k }
}

#[test]
fn curved_laurent_examples() {
    let v1 = curved_v_l0_laurent(&curved(1.0, 1)).unwrap();
    assert_eq!(v1, lp("1 * x0^0 x1^0 x2^-2", 3));
    // l0 = 2, A=3, B=2, C=1: a00 = K, a10 = K/2, a01 = 0
    let v2 = curved_v_l0_laurent(&curved(2.0, 1)).unwrap();
    assert_eq!(v2, lp("1 * x0^0 x1^2 x2^-4\n1/2 * x0^2 x1^0 x2^-4", 3));
    let v2m = curved_v_l0_laurent(&curved(2.0, -1)).unwrap();
    assert_eq!(v2m, lp("-1 * x0^0 x1^2 x2^-4\n-1/2 * x0^2 x1^0 x2^-4", 3));
    let sym = CurvedFamilySpec { b: int(3), ..curved(4.0, 1) };
    let p = curved_v_l0_laurent(&sym).unwrap();
    assert!(p.terms().all(|(e, _)| e.0[2] == -8));
}

#[test]
fn ellipsoid_laurent_examples() {
    let spec = |l0: f64| EllipsoidFamilySpec { l0, a: int(4), b: int(2), c: int(1) };
    assert_eq!(ellipsoid3d_w_l0_laurent(&spec(1.0)).unwrap(), lp("1 * x0^0 x1^0 x2^-2", 3));
    // β = 1, γ = -3
    let w2 = ellipsoid3d_w_l0_laurent(&spec(2.0)).unwrap();
    assert_eq!(w2, lp("1 * x0^0 x1^0 x2^-4\n-1 * x0^0 x1^2 x2^-4\n-1/3 * x0^2 x1^0 x2^-4", 3));
    let bad = EllipsoidFamilySpec { l0: 2.0, a: int(2), b: int(2), c: int(2) };
    assert!(matches!(ellipsoid3d_w_l0_laurent(&bad), Err(Error::DegenerateGeometry(_))));
}

#[test]
fn jacobi_laurent_low_orders() {
    let spec = JacobiFamilySpec { gamma_exp: 1.0, a: int(7), b: int(3), c: int(2) };
    assert_eq!(jacobi_v_l0_laurent(&spec).unwrap(), lp("1 * x0^-2 x1^0 x2^0", 3));
    let (p, q) = spec.hat_constants();
    assert_eq!((p, q), (rat(-5, 6), rat(1, 14)));
}

#[test]
fn closed_form_examples() {
    let e2 = EllipseFamilySpec::new(2.0, int(1));
    for (x, y) in [(0.3, 0.7), (-1.5, 2.0), (4.0, -0.2)] {
        let v = ellipse_v_gamma_f4(&e2, &[x, y], 10).unwrap().value;
        assert!((v - (1.0 - x * x) / y.powi(4)).abs() < 1e-12 * v.abs().max(1.0));
        let v1 = ellipse_v_gamma_f4(&EllipseFamilySpec::new(1.0, int(1)), &[x, y], 10).unwrap();
        assert!((v1.value - 1.0 / (y * y)).abs() < 1e-12 / (y * y));
    }
    assert!(matches!(ellipse_v_gamma_f4(&e2, &[0.3, 0.0], 10), Err(Error::Singular(_))));

    let frac = ellipse_v_gamma_f4(&EllipseFamilySpec::new(2.5, int(1)), &[0.3, 0.4], 60).unwrap();
    assert!(frac.value.is_finite() && frac.tail_estimate < 1e-10);
    assert!(matches!(
        ellipse_v_gamma_f4(&EllipseFamilySpec::new(2.5, int(1)), &[0.9, 0.9], 60),
        Err(Error::OutOfDomain { .. })
    ));

    let sym = EllipsoidFamilySpec { l0: 3.0, a: int(3), b: int(3), c: int(1) };
    // first hat argument zero when x̂ = ŷ, i.e. x = y here
    let v = symmetric3d_w_f4(&sym, &[0.0, 0.0, 0.5], 10).unwrap();
    assert!((v.value - (0.25f64 / 2.0).powi(-3)).abs() < 1e-9);
    let asym = EllipsoidFamilySpec { l0: 3.0, a: int(4), b: int(3), c: int(1) };
    assert!(symmetric3d_w_f4(&asym, &[0.1, 0.1, 0.5], 10).is_err());

    let c = CurvedFamilySpec { b: int(3), ..curved(2.0, 1) };
    assert!(matches!(curved_v_gamma_f4(&c, &[0.1, 0.2, 0.3], 10), Err(Error::DegenerateGeometry(_))));
}

#[test]
fn gamma_one_needs_no_series() {
    let sym = EllipsoidFamilySpec { l0: 1.0, a: int(3), b: int(3), c: int(1) };
    let spec = FamilySpec::Ellipsoid3d(sym);
    let cf = spec.closed_form().unwrap();
    let w1 = spec.laurent().unwrap();
    assert_eq!(cf.to_laurent().unwrap(), w1.scale(&spec.kappa().unwrap()));
}

#[test]
fn symmetric_n_reduces_to_three_dimensions() {
    let s3 = SymmetricNFamilySpec { k_exp: 3.0, n: 3, transverse: int(3), last: int(1) };
    let e3 = EllipsoidFamilySpec { l0: 3.0, a: int(3), b: int(3), c: int(1) };
    let a = FamilySpec::SymmetricN(s3).closed_form().unwrap().to_laurent().unwrap();
    let b = FamilySpec::Ellipsoid3d(e3).closed_form().unwrap().to_laurent().unwrap();
    assert_eq!(a, b);
    let s4 = SymmetricNFamilySpec { k_exp: 2.0, n: 4, transverse: int(2), last: int(5) };
    let v = symmetric_n_v_f4(&s4, &[0.0, 0.0, 0.0, 0.7], 10).unwrap().value;
    assert!((v - (0.49f64 / 3.0).powi(-2)).abs() < 1e-9);
}

fn families(l: i64) -> Vec<FamilySpec> {
    let g = l as f64;
    vec![
        FamilySpec::Ellipse(EllipseFamilySpec::new(g, int(1))),
        FamilySpec::Ellipse(EllipseFamilySpec::new(g, rat(7, 3))),
        FamilySpec::Ellipse(EllipseFamilySpec::new(g, rat(2, 5)).w_branch()),
        FamilySpec::Jacobi(JacobiFamilySpec { gamma_exp: g, a: int(7), b: int(3), c: int(2) }),
        FamilySpec::Curved(curved(g, 1)),
        FamilySpec::Curved(CurvedFamilySpec { a: int(5), b: int(2), c: int(3), ..curved(g, -1) }),
        FamilySpec::Ellipsoid3d(EllipsoidFamilySpec { l0: g, a: int(3), b: int(3), c: int(1) }),
    ]
}

#[test]
fn closed_forms_equal_kappa_times_laurent() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for l in 2..=6 {
        for spec in families(l) {
            let cf = spec.closed_form().unwrap();
            let lau = spec.laurent().unwrap().scale(&spec.kappa().unwrap());
            assert_eq!(cf.to_laurent().unwrap(), lau, "{spec:?}");
            for _ in 0..5 {
                let q = random_point(&mut rng, spec.nvars());
                assert_eq!(cf.eval_exact(&q).unwrap(), lau.eval(&q).unwrap(), "{spec:?}");
            }
        }
    }
}

#[test]
fn printed_ellipse_bracket_differs_from_laurent_family() {
    let spec = FamilySpec::Ellipse(EllipseFamilySpec::new(2.0, int(1)));
    let printed = spec
        .closed_form_with(&Convention::printed(Family::Ellipse))
        .unwrap()
        .to_laurent()
        .unwrap();
    assert_eq!(printed, lp("1 * x0^0 x1^-4\n1 * x0^2 x1^-4", 2));
}
