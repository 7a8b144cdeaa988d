use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergeom::{f4_eval, f4_in_domain, pochhammer, F4Params};
use crate::poly::LaurentPoly;
use crate::scalar::{as_integer, int, pow_i, Rational, Scalar};

use super::conventions::{Convention, Family, HatLayout, InnerFactor};
use super::laurent::integer_exponent;
use super::{Branch, CurvedFamilySpec, EllipseFamilySpec, EllipsoidFamilySpec, FamilySpec, JacobiFamilySpec, SymmetricNFamilySpec};

pub const DEFAULT_ORDER: usize = 60;

/// `V = M · |Y|^{-γ} · [μ(γ) · S · F4(1, 2-γ; 2, 1-γ; S, Y) + 1]` with `S`,
/// `Y` and `M` Laurent polynomials in the coordinates (`Y` and `M` single
/// monomials).
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedForm {
    pub family: Family,
    pub gamma: f64,
    pub s: LaurentPoly,
    pub y: LaurentPoly,
    pub homog: LaurentPoly,
    pub inner: InnerFactor,
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedValue {
    pub value: f64,
    pub tail_estimate: f64,
    pub terms_used: usize,
    pub in_domain: bool,
}

fn mono(c: Rational, e: &[i32]) -> LaurentPoly {
    LaurentPoly::monomial(c, e.to_vec())
}

fn sign(s: i8) -> Rational {
    int(s as i64)
}

impl ClosedForm {
    pub fn new(
        family: Family,
        gamma: f64,
        s: LaurentPoly,
        y: LaurentPoly,
        homog: LaurentPoly,
        inner: InnerFactor,
    ) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("exponent {gamma}")));
        }
        if y.is_zero() {
            return Err(Error::DegenerateGeometry("second hat variable vanishes identically".into()));
        }
        if y.len() != 1 || homog.len() != 1 {
            return Err(Error::InvalidParameter("Y and M must be single monomials".into()));
        }
        if y.terms().any(|(e, _)| e.0.iter().any(|k| k % 2 != 0)) {
            return Err(Error::InvalidParameter("Y must have even exponents".into()));
        }
        Ok(ClosedForm { family, gamma, s, y, homog, inner, order: DEFAULT_ORDER })
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn nvars(&self) -> usize {
        self.s.nvars()
    }

    pub fn singular_vars(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.s.pole_vars();
        v.extend(self.homog.pole_vars());
        for (e, _) in self.y.terms() {
            v.extend(e.0.iter().enumerate().filter(|(_, k)| **k != 0).map(|(i, _)| i));
        }
        v.sort_unstable();
        v.dedup();
        v
    }

    fn f4_params<T: Scalar>(&self, gamma: T) -> F4Params<T> {
        let one = T::one();
        let two = T::from_i64(2);
        F4Params::new(one.clone(), two.clone() - gamma.clone(), two, one - gamma)
    }

    fn singular(&self, what: &str) -> Error {
        Error::Singular(format!("{what} of the {} closed form", self.family.name()))
    }

    pub fn eval(&self, q: &[f64]) -> Result<ClosedValue> {
        let pole = |e: Error| match e {
            Error::Pole { var } => Error::Singular(format!("coordinate x{var} = 0")),
            other => other,
        };
        let sv = self.s.eval_f64(q).map_err(pole)?;
        let yv = self.y.eval_f64(q).map_err(pole)?;
        let mv = self.homog.eval_f64(q).map_err(pole)?;
        if yv == 0.0 {
            return Err(self.singular("zero of Y"));
        }
        let prefactor = mv * yv.abs().powf(-self.gamma);
        let mu = self.inner.value(self.gamma);
        if mu == 0.0 || sv == 0.0 {
            return Ok(ClosedValue { value: prefactor, tail_estimate: 0.0, terms_used: 1, in_domain: f4_in_domain(sv, yv) });
        }
        let params = self.f4_params(self.gamma);
        let terminates = params.termination().is_some_and(|t| t <= self.order);
        if !terminates && !f4_in_domain(sv, yv) {
            return Err(Error::OutOfDomain { x: sv, y: yv });
        }
        let f = f4_eval(&params, &sv, &yv, self.order)?;
        let scale = prefactor * mu * sv;
        Ok(ClosedValue {
            value: scale * f.value + prefactor,
            tail_estimate: (scale * f.tail_estimate).abs(),
            terms_used: f.terms_used,
            in_domain: f.in_domain,
        })
    }

    fn integer_gamma(&self) -> Result<i64> {
        as_integer(self.gamma).ok_or_else(|| Error::NonInteger(format!("{}", self.gamma)))
    }

    fn mu_exact(&self, g: i64) -> Rational {
        match self.inner {
            InnerFactor::Unit => Rational::one(),
            InnerFactor::OneMinusGamma => int(1 - g),
        }
    }

    /// Exact evaluation at a rational point (integer exponent). The F4
    /// factor is the exact partial sum, which is the full series when it
    /// terminates.
    pub fn eval_exact(&self, q: &[Rational]) -> Result<Rational> {
        let g = self.integer_gamma()?;
        let sv = self.s.eval(q)?;
        let yv = self.y.eval(q)?;
        let mv = self.homog.eval(q)?;
        if yv.is_zero() {
            return Err(self.singular("zero of Y"));
        }
        let prefactor = mv * pow_i(&yv.abs(), -g as i32);
        let mu = self.mu_exact(g);
        if mu.is_zero() || sv.is_zero() {
            return Ok(prefactor);
        }
        let f = f4_eval(&self.f4_params(int(g)), &sv, &yv, self.order)?;
        Ok(&prefactor * mu * sv * f.value + &prefactor)
    }

    /// `M · |Y|^{-γ}` as a Laurent polynomial.
    fn prefactor_laurent(&self, g: i64) -> LaurentPoly {
        let (e, c) = self.y.terms().next().expect("Y is a monomial");
        let exps: Vec<i32> = e.0.iter().map(|k| -(g as i32) * k).collect();
        let p = mono(pow_i(&c.abs(), -g as i32), &exps);
        &self.homog * &p
    }

    /// `(P0, P1)` with `V = μ · P1 + P0`, for integer exponent `γ ≥ 2`
    /// where the F4 series is a polynomial.
    pub fn split_laurent(&self) -> Result<(LaurentPoly, LaurentPoly)> {
        let g = integer_exponent(self.gamma, 2)?;
        let p0 = self.prefactor_laurent(g);
        let n = self.nvars();
        let one = Rational::one();
        let two = int(2);
        let b = int(2 - g);
        let d = int(1 - g);
        let fact = |k: u32| pochhammer(&one, k);
        let mut series = LaurentPoly::zero(n);
        let top = (g - 2) as u32;
        let s_pows: Vec<LaurentPoly> = (0..=top).map(|m| self.s.pow(m)).collect();
        let y_pows: Vec<LaurentPoly> = (0..=top).map(|m| self.y.pow(m)).collect();
        for m in 0..=top {
            for k in 0..=(top - m) {
                let c = pochhammer(&one, m + k) * pochhammer(&b, m + k)
                    / (pochhammer(&two, m) * pochhammer(&d, k) * fact(m) * fact(k));
                series = &series + &(&s_pows[m as usize] * &y_pows[k as usize]).scale(&c);
            }
        }
        let p1 = &(&p0 * &self.s) * &series;
        Ok((p0, p1))
    }

    /// The closed form as an exact Laurent polynomial (integer `γ ≥ 1`).
    pub fn to_laurent(&self) -> Result<LaurentPoly> {
        let g = integer_exponent(self.gamma, 1)?;
        let mu = self.mu_exact(g);
        if g == 1 {
            if !mu.is_zero() {
                return Err(Error::InvalidParameter(
                    "F4(1, 1; 2, 0; ...) has a vanishing lower parameter".into(),
                ));
            }
            return Ok(self.prefactor_laurent(1));
        }
        let (p0, p1) = self.split_laurent()?;
        Ok(&p1.scale(&mu) + &p0)
    }

    pub fn ellipse(spec: &EllipseFamilySpec, conv: &Convention) -> Result<Self> {
        if spec.lambda.is_zero() {
            return Err(Error::DegenerateGeometry("lambda = 0".into()));
        }
        // W(x, y; λ) = V(y, x; -λ)
        let (xs, ys, lam) = match spec.branch {
            Branch::V => (0usize, 1usize, spec.lambda.clone()),
            Branch::W => (1, 0, -spec.lambda.clone()),
        };
        let sq = |slot: usize| {
            let mut e = [0; 2];
            e[slot] = 2;
            e
        };
        let s = mono(sign(conv.s_sign) / &lam, &sq(xs));
        let y = mono(-sign(conv.y_sign) / &lam, &sq(ys));
        Self::new(Family::Ellipse, spec.gamma_exp, s, y, LaurentPoly::one(2), conv.inner)
    }

    pub fn jacobi(spec: &JacobiFamilySpec, conv: &Convention) -> Result<Self> {
        spec.check()?;
        let (a, b, c) = (&spec.a, &spec.b, &spec.c);
        let (num_s, num_y) = (c * (a - c), c * (c - b));
        let (x2, y2) = ([2, 0, -2], [0, 2, -2]);
        let (s_exp, y_exp, s_den, y_den) = match conv.layout {
            HatLayout::Printed => (x2, y2, a, b),
            HatLayout::SwapNumerators => (y2, x2, a, b),
            HatLayout::SwapDenominators => (x2, y2, b, a),
            HatLayout::SwapBoth => (y2, x2, b, a),
        };
        let s = mono(sign(conv.s_sign) * num_s / ((b - a) * s_den), &s_exp);
        let y = mono(sign(conv.y_sign) * num_y / ((b - a) * y_den), &y_exp);
        let m = mono(Rational::one(), &[0, 0, -2]);
        Self::new(Family::Jacobi, spec.gamma_exp, s, y, m, conv.inner)
    }

    pub fn curved(spec: &CurvedFamilySpec, conv: &Convention) -> Result<Self> {
        spec.check()?;
        if spec.a == spec.b {
            return Err(Error::DegenerateGeometry("A = B makes the second hat variable vanish".into()));
        }
        let (a, b, c) = (&spec.a, &spec.b, &spec.c);
        let k = int(spec.curvature_sign as i64);
        let s = mono(sign(conv.s_sign) * (b - c) / (c - a), &[2, -2, 0]);
        let y = mono(sign(conv.y_sign) * k * (a - b) / (c - a), &[0, -2, 2]);
        let m = mono(Rational::one(), &[0, -2, 0]);
        Self::new(Family::Curved, spec.gamma_exp, s, y, m, conv.inner)
    }

    pub fn symmetric3d(spec: &EllipsoidFamilySpec, conv: &Convention) -> Result<Self> {
        if !spec.is_symmetric() {
            return Err(Error::InvalidParameter(format!(
                "closed form needs A = B (got A = {}, B = {})",
                spec.a, spec.b
            )));
        }
        let (beta, gamma) = (spec.beta_ax(), spec.gamma_ax());
        if gamma.is_zero() {
            return Err(Error::DegenerateGeometry("C = A".into()));
        }
        let s = &mono(-Rational::one() / &gamma, &[2, 0, 0]) + &mono(Rational::one() / &beta, &[0, 2, 0]);
        let s = s.scale(&sign(conv.s_sign));
        let y = mono(sign(conv.y_sign) / &gamma, &[0, 0, 2]);
        Self::new(Family::Ellipsoid3d, spec.l0, s, y, LaurentPoly::one(3), conv.inner)
    }

    pub fn symmetric_n(spec: &SymmetricNFamilySpec, conv: &Convention) -> Result<Self> {
        spec.check()?;
        let n = spec.n;
        let d = &spec.transverse - &spec.last;
        let mut s = LaurentPoly::zero(n);
        for i in 0..n - 1 {
            let mut e = vec![0; n];
            e[i] = 2;
            s = &s + &LaurentPoly::monomial(sign(conv.s_sign) / &d, e);
        }
        let mut e = vec![0; n];
        e[n - 1] = 2;
        let y = LaurentPoly::monomial(-sign(conv.y_sign) / &d, e);
        Self::new(Family::SymmetricN, spec.k_exp, s, y, LaurentPoly::one(n), conv.inner)
    }
}

pub(super) fn kappa(spec: &FamilySpec) -> Result<Rational> {
    let l = integer_exponent(spec.exponent(), 1)? as i32;
    Ok(match spec {
        FamilySpec::Ellipse(s) => {
            if s.alpha.is_zero() {
                return Err(Error::InvalidParameter("alpha = 0".into()));
            }
            pow_i(&s.lambda.abs(), l) / &s.alpha
        }
        FamilySpec::Jacobi(s) => {
            let (_, q) = s.hat_constants();
            pow_i(&q.abs(), -l)
        }
        FamilySpec::Curved(s) => {
            let k = int(s.curvature_sign as i64);
            let q = &k * (&s.a - &s.b) / (&s.c - &s.a);
            if q.is_zero() {
                return Err(Error::DegenerateGeometry("A = B".into()));
            }
            pow_i(&q.abs(), -l) * pow_i(&k, l - 1)
        }
        FamilySpec::Ellipsoid3d(s) => pow_i(&s.gamma_ax().abs(), l),
        FamilySpec::SymmetricN(_) => Rational::one(),
    })
}
