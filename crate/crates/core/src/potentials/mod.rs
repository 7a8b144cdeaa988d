//! Potential families compatible with the billiard and geodesic integrals:
//! exact Laurent members at integer exponent and Appell-F4 closed forms at
//! real exponent.

mod closed;
pub mod conventions;
mod laurent;
mod recurrence;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd;
use crate::poly::LaurentPoly;
use crate::scalar::{int, Rational};

pub use closed::{ClosedForm, ClosedValue};
pub use conventions::{Convention, Family, HatLayout, InnerFactor};
pub use laurent::{
    curved_coeff, curved_v_l0_laurent, ellipse_vk_laurent, ellipsoid3d_w_l0_laurent, jacobi_v_l0_laurent,
    pmn_poly, pmn_symmetric,
};
pub use recurrence::{ellipse_coefficient, ellipse_recurrence_coeffs, RecurrenceTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    V,
    W,
}

/// Ellipse billiard `x²/A + y²/B = 1`, `λ = A - B`.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipseFamilySpec {
    pub gamma_exp: f64,
    pub lambda: Rational,
    pub alpha: Rational,
    pub branch: Branch,
}

impl EllipseFamilySpec {
    pub fn new(gamma_exp: f64, lambda: Rational) -> Self {
        EllipseFamilySpec { gamma_exp, lambda, alpha: int(1), branch: Branch::V }
    }

    pub fn w_branch(mut self) -> Self {
        self.branch = Branch::W;
        self
    }
}

fn distinct_positive(axes: &[&Rational]) -> Result<()> {
    for (i, a) in axes.iter().enumerate() {
        if !a.is_positive() {
            return Err(Error::InvalidParameter(format!("axis {a} must be positive")));
        }
        if axes[..i].contains(a) {
            return Err(Error::DegenerateGeometry(format!("repeated axis {a}")));
        }
    }
    Ok(())
}

/// Jacobi problem on the ellipsoid with axes `a, b, c`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiFamilySpec {
    pub gamma_exp: f64,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

impl JacobiFamilySpec {
    pub fn check(&self) -> Result<()> {
        distinct_positive(&[&self.a, &self.b, &self.c])
    }

    /// `(p, q) = (c(a-c)/(b(b-a)), c(c-b)/(a(b-a)))`, the coefficients of
    /// `y²/z²` and `x²/z²` in the hat variables.
    pub fn hat_constants(&self) -> (Rational, Rational) {
        let (a, b, c) = (&self.a, &self.b, &self.c);
        let p = c * (a - c) / (b * (b - a));
        let q = c * (c - b) / (a * (b - a));
        (p, q)
    }
}

/// Billiard on a constant-curvature surface, axes `A, B, C`, curvature
/// sign `K = ±1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvedFamilySpec {
    pub gamma_exp: f64,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub curvature_sign: i8,
}

impl CurvedFamilySpec {
    pub fn check(&self) -> Result<()> {
        if self.curvature_sign != 1 && self.curvature_sign != -1 {
            return Err(Error::InvalidParameter(format!("curvature sign {}", self.curvature_sign)));
        }
        if self.c == self.a {
            return Err(Error::DegenerateGeometry("C = A".into()));
        }
        for v in [&self.a, &self.b, &self.c] {
            if !v.is_positive() {
                return Err(Error::InvalidParameter(format!("axis {v} must be positive")));
            }
        }
        Ok(())
    }
}

/// Billiard inside the ellipsoid `x²/A + y²/B + z²/C = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipsoidFamilySpec {
    pub l0: f64,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

impl EllipsoidFamilySpec {
    pub fn beta_ax(&self) -> Rational {
        &self.b - &self.c
    }

    pub fn gamma_ax(&self) -> Rational {
        &self.c - &self.a
    }

    pub fn is_symmetric(&self) -> bool {
        (self.beta_ax() + self.gamma_ax()).is_zero()
    }
}

/// Ellipsoid in `R^n` with `a_1 = ... = a_{n-1} = A` and `a_n = C`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricNFamilySpec {
    pub k_exp: f64,
    pub n: usize,
    pub transverse: Rational,
    pub last: Rational,
}

impl SymmetricNFamilySpec {
    pub fn check(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidParameter(format!("n = {} (need n >= 3)", self.n)));
        }
        if self.transverse == self.last {
            return Err(Error::DegenerateGeometry("A = C".into()));
        }
        Ok(())
    }

    pub fn axes(&self) -> Vec<Rational> {
        let mut v = vec![self.transverse.clone(); self.n - 1];
        v.push(self.last.clone());
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    Ellipse(EllipseFamilySpec),
    Jacobi(JacobiFamilySpec),
    Curved(CurvedFamilySpec),
    Ellipsoid3d(EllipsoidFamilySpec),
    SymmetricN(SymmetricNFamilySpec),
}

impl FamilySpec {
    pub fn family(&self) -> Family {
        match self {
            FamilySpec::Ellipse(_) => Family::Ellipse,
            FamilySpec::Jacobi(_) => Family::Jacobi,
            FamilySpec::Curved(_) => Family::Curved,
            FamilySpec::Ellipsoid3d(_) => Family::Ellipsoid3d,
            FamilySpec::SymmetricN(_) => Family::SymmetricN,
        }
    }

    pub fn exponent(&self) -> f64 {
        match self {
            FamilySpec::Ellipse(s) => s.gamma_exp,
            FamilySpec::Jacobi(s) => s.gamma_exp,
            FamilySpec::Curved(s) => s.gamma_exp,
            FamilySpec::Ellipsoid3d(s) => s.l0,
            FamilySpec::SymmetricN(s) => s.k_exp,
        }
    }

    pub fn nvars(&self) -> usize {
        match self {
            FamilySpec::Ellipse(_) => 2,
            FamilySpec::SymmetricN(s) => s.n,
            _ => 3,
        }
    }

    /// Exact member of the family; integer exponent only. The
    /// symmetric-`n` family has no separate Laurent construction and is
    /// expanded from its terminating closed form.
    pub fn laurent(&self) -> Result<LaurentPoly> {
        match self {
            FamilySpec::Ellipse(s) => ellipse_vk_laurent(s),
            FamilySpec::Jacobi(s) => jacobi_v_l0_laurent(s),
            FamilySpec::Curved(s) => curved_v_l0_laurent(s),
            FamilySpec::Ellipsoid3d(s) => ellipsoid3d_w_l0_laurent(s),
            FamilySpec::SymmetricN(_) => self.closed_form()?.to_laurent(),
        }
    }

    /// Closed form under the committed convention of the family.
    pub fn closed_form(&self) -> Result<ClosedForm> {
        let conv = conventions::committed(self.family());
        self.closed_form_with(&conv)
    }

    pub fn closed_form_with(&self, conv: &Convention) -> Result<ClosedForm> {
        match self {
            FamilySpec::Ellipse(s) => ClosedForm::ellipse(s, conv),
            FamilySpec::Jacobi(s) => ClosedForm::jacobi(s, conv),
            FamilySpec::Curved(s) => ClosedForm::curved(s, conv),
            FamilySpec::Ellipsoid3d(s) => ClosedForm::symmetric3d(s, conv),
            FamilySpec::SymmetricN(s) => ClosedForm::symmetric_n(s, conv),
        }
    }

    /// Constant `κ` with `closed form = κ · Laurent` at integer exponent.
    pub fn kappa(&self) -> Result<Rational> {
        closed::kappa(self)
    }
}

/// Anything that can be evaluated as a potential on configuration space.
pub trait Potential {
    fn nvars(&self) -> usize;
    fn value(&self, q: &[f64]) -> Result<f64>;
    /// Coordinates whose vanishing makes the potential singular.
    fn singular_vars(&self) -> Vec<usize>;

    /// Gradient at `q`; central differences with Richardson extrapolation
    /// unless the implementor knows better.
    fn gradient(&self, q: &[f64]) -> Result<Vec<f64>> {
        let steps = fd::relative_steps(q, 1e-3);
        let f = |x: &[f64]| self.value(x);
        (0..q.len()).map(|i| fd::derivative(&f, q, &[i], &steps, true)).collect()
    }
}

impl Potential for LaurentPoly {
    fn nvars(&self) -> usize {
        LaurentPoly::nvars(self)
    }
    fn value(&self, q: &[f64]) -> Result<f64> {
        self.eval_f64(q)
    }
    fn singular_vars(&self) -> Vec<usize> {
        self.pole_vars()
    }
    fn gradient(&self, q: &[f64]) -> Result<Vec<f64>> {
        (0..LaurentPoly::nvars(self)).map(|i| self.diff(i).eval_f64(q)).collect()
    }
}

impl Potential for ClosedForm {
    fn nvars(&self) -> usize {
        ClosedForm::nvars(self)
    }
    fn value(&self, q: &[f64]) -> Result<f64> {
        self.eval(q).map(|v| v.value)
    }
    fn singular_vars(&self) -> Vec<usize> {
        ClosedForm::singular_vars(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialForm {
    Laurent(LaurentPoly),
    Closed(ClosedForm),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialInstance {
    pub spec: FamilySpec,
    pub form: PotentialForm,
}

impl PotentialInstance {
    pub fn laurent(spec: FamilySpec) -> Result<Self> {
        let p = spec.laurent()?;
        Ok(PotentialInstance { spec, form: PotentialForm::Laurent(p) })
    }

    pub fn closed(spec: FamilySpec) -> Result<Self> {
        let c = spec.closed_form()?;
        Ok(PotentialInstance { spec, form: PotentialForm::Closed(c) })
    }

    pub fn as_laurent(&self) -> Option<&LaurentPoly> {
        match &self.form {
            PotentialForm::Laurent(p) => Some(p),
            PotentialForm::Closed(_) => None,
        }
    }
}

impl Potential for PotentialInstance {
    fn nvars(&self) -> usize {
        self.spec.nvars()
    }
    fn value(&self, q: &[f64]) -> Result<f64> {
        match &self.form {
            PotentialForm::Laurent(p) => p.value(q),
            PotentialForm::Closed(c) => c.value(q),
        }
    }
    fn singular_vars(&self) -> Vec<usize> {
        match &self.form {
            PotentialForm::Laurent(p) => p.singular_vars(),
            PotentialForm::Closed(c) => Potential::singular_vars(c),
        }
    }
    fn gradient(&self, q: &[f64]) -> Result<Vec<f64>> {
        match &self.form {
            PotentialForm::Laurent(p) => p.gradient(q),
            PotentialForm::Closed(c) => c.gradient(q),
        }
    }
}

/// `ellipse_v_gamma_f4`: the calibrated closed form at a point.
pub fn ellipse_v_gamma_f4(spec: &EllipseFamilySpec, point: &[f64], order: usize) -> Result<ClosedValue> {
    ClosedForm::ellipse(spec, &conventions::committed(Family::Ellipse))?
        .with_order(order)
        .eval(point)
}

pub fn jacobi_v_gamma(spec: &JacobiFamilySpec, point: &[f64], order: usize) -> Result<ClosedValue> {
    ClosedForm::jacobi(spec, &conventions::committed(Family::Jacobi))?
        .with_order(order)
        .eval(point)
}

pub fn curved_v_gamma_f4(spec: &CurvedFamilySpec, point: &[f64], order: usize) -> Result<ClosedValue> {
    ClosedForm::curved(spec, &conventions::committed(Family::Curved))?
        .with_order(order)
        .eval(point)
}

pub fn symmetric3d_w_f4(spec: &EllipsoidFamilySpec, point: &[f64], order: usize) -> Result<ClosedValue> {
    ClosedForm::symmetric3d(spec, &conventions::committed(Family::Ellipsoid3d))?
        .with_order(order)
        .eval(point)
}

pub fn symmetric_n_v_f4(spec: &SymmetricNFamilySpec, point: &[f64], order: usize) -> Result<ClosedValue> {
    ClosedForm::symmetric_n(spec, &conventions::committed(Family::SymmetricN))?
        .with_order(order)
        .eval(point)
}

#[cfg(test)]
mod tests;
