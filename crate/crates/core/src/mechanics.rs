//! First integrals of the unperturbed systems, Poisson brackets, and the
//! coordinate correction `k₁` that keeps `K₁ + k₁` conserved for the
//! perturbed ellipse billiard.
//!
//! Phase-space functions are Laurent polynomials in `2n` variables, the
//! positions `q_0..q_{n-1}` followed by the momenta `p_0..p_{n-1}`. Mass is
//! one and `{F, G} = Σ ∂F/∂q ∂G/∂p - ∂F/∂p ∂G/∂q`.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::LaurentPoly;
use crate::potentials::Potential;
use crate::residuals::eq1_operator;
use crate::scalar::{int, rat, rational_to_f64, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::Arity { expected: q.len(), got: p.len() });
        }
        Ok(PhasePoint { q, p })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// `(q, p)` concatenated, the argument order of phase polynomials.
    pub fn coords(&self) -> Vec<f64> {
        let mut v = self.q.clone();
        v.extend_from_slice(&self.p);
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegralKind {
    EllipseK1,
    JacobiK1,
    /// Integral of the billiard on a constant-curvature surface. Not to be
    /// confused with the curvature sign, stored separately.
    CurvedK,
    EllipticFamilyKi,
    Hamiltonian,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralSpec {
    pub kind: IntegralKind,
    pub axes: Vec<Rational>,
    pub curvature_sign: i8,
    /// Which `K_i` for the n-dimensional family (0-based).
    pub index: usize,
    /// Phase dimension for the Hamiltonian.
    pub dim: usize,
}

impl IntegralSpec {
    pub fn ellipse_k1(a: Rational, b: Rational) -> Self {
        Self::with_axes(IntegralKind::EllipseK1, vec![a, b])
    }

    pub fn jacobi_k1(a: Rational, b: Rational, c: Rational) -> Self {
        Self::with_axes(IntegralKind::JacobiK1, vec![a, b, c])
    }

    pub fn curved_k(a: Rational, b: Rational, c: Rational, curvature_sign: i8) -> Self {
        IntegralSpec { curvature_sign, ..Self::with_axes(IntegralKind::CurvedK, vec![a, b, c]) }
    }

    pub fn ki(axes: Vec<Rational>, index: usize) -> Self {
        IntegralSpec { index, ..Self::with_axes(IntegralKind::EllipticFamilyKi, axes) }
    }

    /// Free Hamiltonian `|p|²/2` in dimension `n`; the potential is added at
    /// evaluation.
    pub fn hamiltonian(n: usize) -> Self {
        IntegralSpec { dim: n, ..Self::with_axes(IntegralKind::Hamiltonian, Vec::new()) }
    }

    fn with_axes(kind: IntegralKind, axes: Vec<Rational>) -> Self {
        let dim = axes.len();
        IntegralSpec { kind, axes, curvature_sign: 1, index: 0, dim }
    }

    pub fn check(&self) -> Result<()> {
        let want = match self.kind {
            IntegralKind::EllipseK1 => Some(2),
            IntegralKind::JacobiK1 | IntegralKind::CurvedK => Some(3),
            IntegralKind::EllipticFamilyKi => None,
            IntegralKind::Hamiltonian => Some(0),
        };
        if let Some(n) = want {
            if self.axes.len() != n {
                return Err(Error::Arity { expected: n, got: self.axes.len() });
            }
        }
        if self.axes.iter().any(|a| a.is_zero()) {
            return Err(Error::InvalidParameter("zero axis".into()));
        }
        match self.kind {
            IntegralKind::EllipticFamilyKi => {
                let n = self.axes.len();
                if n < 2 || self.index >= n {
                    return Err(Error::InvalidParameter(format!("K_{} in dimension {n}", self.index)));
                }
                let ai = &self.axes[self.index];
                if self.axes.iter().enumerate().any(|(j, a)| j != self.index && a == ai) {
                    return Err(Error::DegenerateGeometry(format!("repeated axis {ai}")));
                }
            }
            IntegralKind::CurvedK if self.curvature_sign.abs() != 1 => {
                return Err(Error::InvalidParameter(format!("curvature sign {}", self.curvature_sign)));
            }
            IntegralKind::Hamiltonian if self.dim == 0 => {
                return Err(Error::InvalidParameter("dimension 0".into()));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The integral as a polynomial in `(q, p)`.
    pub fn phase_poly(&self) -> Result<LaurentPoly> {
        self.check()?;
        let n = self.dim;
        let m = 2 * n;
        let q = |i: usize| LaurentPoly::var(m, i);
        let p = |i: usize| LaurentPoly::var(m, n + i);
        let k = |c: Rational| LaurentPoly::constant(m, c);
        let ang = |i: usize, j: usize| &(&p(i) * &q(j)) - &(&p(j) * &q(i));
        let a = &self.axes;
        let out = match self.kind {
            IntegralKind::EllipseK1 => {
                let l = ang(0, 1);
                let t = &(&k(a[0].recip()) * &p(0).pow(2)) + &(&k(a[1].recip()) * &p(1).pow(2));
                &t - &(&k((&a[0] * &a[1]).recip()) * &l.pow(2))
            }
            IntegralKind::JacobiK1 => {
                let mut pos = LaurentPoly::zero(m);
                let mut mom = LaurentPoly::zero(m);
                for (i, ai) in a.iter().enumerate().take(3) {
                    pos = &pos + &(&k((ai * ai).recip()) * &q(i).pow(2));
                    mom = &mom + &(&k(ai.recip()) * &p(i).pow(2));
                }
                &pos * &mom
            }
            IntegralKind::CurvedK => {
                let s = int(self.curvature_sign as i64);
                let t1 = &k((&a[0] * &a[1]).recip()) * &ang(0, 1).pow(2);
                let t2 = &k(&s / (&a[0] * &a[2])) * &ang(0, 2).pow(2);
                let t3 = &k(&s / (&a[1] * &a[2])) * &ang(2, 1).pow(2);
                &(&t1 + &t2) + &t3
            }
            IntegralKind::EllipticFamilyKi => {
                let i = self.index;
                let mut out = LaurentPoly::zero(m);
                for j in (0..n).filter(|&j| j != i) {
                    out = &out + &(&k((&a[i] - &a[j]).recip()) * &ang(i, j).pow(2));
                }
                out
            }
            IntegralKind::Hamiltonian => {
                let mut out = LaurentPoly::zero(m);
                for i in 0..n {
                    out = &out + &p(i).pow(2);
                }
                out.scale(&rat(1, 2))
            }
        };
        Ok(out)
    }
}

/// Value of an integral at a phase point. The potential is accepted only
/// for the Hamiltonian; perturbed integrals add `k₁` on the caller side.
pub fn integral_value(spec: &IntegralSpec, s: &PhasePoint, v: Option<&dyn Potential>) -> Result<f64> {
    if s.dim() != spec.dim() {
        return Err(Error::Arity { expected: spec.dim(), got: s.dim() });
    }
    let base = spec.phase_poly()?.eval_f64(&s.coords())?;
    match (spec.kind, v) {
        (IntegralKind::Hamiltonian, Some(v)) => Ok(base + v.value(&s.q)?),
        (IntegralKind::Hamiltonian, None) | (_, None) => Ok(base),
        (_, Some(_)) => Err(Error::InvalidParameter("a potential only enters the Hamiltonian".into())),
    }
}

/// Phase lift of a coordinate function on `n` positions into `2n` variables.
pub fn lift(v: &LaurentPoly) -> Result<LaurentPoly> {
    let n = v.nvars();
    v.remap_vars(&(0..n).collect::<Vec<_>>(), 2 * n)
}

/// Exact bracket of two phase polynomials over `n` degrees of freedom.
pub fn poisson_bracket_exact(f: &LaurentPoly, g: &LaurentPoly) -> Result<LaurentPoly> {
    if f.nvars() != g.nvars() || !f.nvars().is_multiple_of(2) {
        return Err(Error::Arity { expected: f.nvars(), got: g.nvars() });
    }
    let n = f.nvars() / 2;
    let mut out = LaurentPoly::zero(2 * n);
    for j in 0..n {
        out = &out + &(&f.diff(j) * &g.diff(n + j));
        out = &out - &(&f.diff(n + j) * &g.diff(j));
    }
    Ok(out)
}

/// A phase polynomial plus an optional coordinate-only term known only
/// numerically (for instance a closed-form potential).
pub struct PhaseFunction<'a> {
    pub poly: LaurentPoly,
    pub extra: Option<&'a dyn Potential>,
}

impl<'a> PhaseFunction<'a> {
    pub fn from_integral(spec: &IntegralSpec) -> Result<Self> {
        Ok(PhaseFunction { poly: spec.phase_poly()?, extra: None })
    }

    /// Adds an exact coordinate term such as a Laurent potential or `k₁`.
    pub fn plus_coordinate(mut self, v: &LaurentPoly) -> Result<Self> {
        self.poly = &self.poly + &lift(v)?;
        Ok(self)
    }

    pub fn plus_numeric(mut self, v: &'a dyn Potential) -> Self {
        self.extra = Some(v);
        self
    }

    pub fn dim(&self) -> usize {
        self.poly.nvars() / 2
    }

    pub fn value(&self, s: &PhasePoint) -> Result<f64> {
        let mut v = self.poly.eval_f64(&s.coords())?;
        if let Some(e) = self.extra {
            v += e.value(&s.q)?;
        }
        Ok(v)
    }

    /// `(∂/∂q, ∂/∂p)` at `s`.
    pub fn gradient(&self, s: &PhasePoint) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        let x = s.coords();
        let mut dq = (0..n).map(|i| self.poly.diff(i).eval_f64(&x)).collect::<Result<Vec<_>>>()?;
        let dp = (0..n).map(|i| self.poly.diff(n + i).eval_f64(&x)).collect::<Result<Vec<_>>>()?;
        if let Some(e) = self.extra {
            for (d, g) in dq.iter_mut().zip(e.gradient(&s.q)?) {
                *d += g;
            }
        }
        Ok((dq, dp))
    }
}

/// `{F, G}` at a phase point, with `Σ |individual products|` as the scale
/// for relative comparisons.
pub fn poisson_bracket(f: &PhaseFunction<'_>, g: &PhaseFunction<'_>, s: &PhasePoint) -> Result<(f64, f64)> {
    if f.dim() != s.dim() || g.dim() != s.dim() {
        return Err(Error::Arity { expected: s.dim(), got: f.dim().max(g.dim()) });
    }
    let (fq, fp) = f.gradient(s)?;
    let (gq, gp) = g.gradient(s)?;
    let mut sum = 0.0;
    let mut scale = 0.0;
    for j in 0..s.dim() {
        let (a, b) = (fq[j] * gp[j], fp[j] * gq[j]);
        sum += a - b;
        scale += a.abs() + b.abs();
    }
    Ok((sum, scale))
}

fn check_axes(a: &Rational, b: &Rational) -> Result<()> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::InvalidParameter("zero axis".into()));
    }
    Ok(())
}

/// `(∂k₁/∂x, ∂k₁/∂y)` as Laurent polynomials:
/// `2[(1/A - y²/(AB)) V_x + xy/(AB) V_y]` and `2[xy/(AB) V_x + (1/B - x²/(AB)) V_y]`.
pub fn grad_k1_exact(v: &LaurentPoly, a: &Rational, b: &Rational) -> Result<(LaurentPoly, LaurentPoly)> {
    check_axes(a, b)?;
    if v.nvars() != 2 {
        return Err(Error::Arity { expected: 2, got: v.nvars() });
    }
    let ab = (a * b).recip();
    let c = |r: Rational, ex: i32, ey: i32| LaurentPoly::monomial(r, vec![ex, ey]);
    let (vx, vy) = (v.diff(0), v.diff(1));
    let xy = c(ab.clone(), 1, 1);
    let gx = &(&(&c(a.recip(), 0, 0) - &c(ab.clone(), 0, 2)) * &vx) + &(&xy * &vy);
    let gy = &(&xy * &vx) + &(&(&c(b.recip(), 0, 0) - &c(ab, 2, 0)) * &vy);
    let two = int(2);
    Ok((gx.scale(&two), gy.scale(&two)))
}

/// Numeric gradient of `k₁` at `(x, y)` from the gradient of `V`.
pub fn grad_k1_correction(v: &dyn Potential, a: f64, b: f64, point: [f64; 2]) -> Result<[f64; 2]> {
    if v.nvars() != 2 {
        return Err(Error::Arity { expected: 2, got: v.nvars() });
    }
    let [x, y] = point;
    let g = v.gradient(&point)?;
    let ab = a * b;
    Ok([
        2.0 * ((1.0 / a - y * y / ab) * g[0] + x * y / ab * g[1]),
        2.0 * (x * y / ab * g[0] + (1.0 / b - x * x / ab) * g[1]),
    ])
}

/// Curl `∂y(∂k₁/∂x) - ∂x(∂k₁/∂y)`.
pub fn closure_curl(v: &LaurentPoly, a: &Rational, b: &Rational) -> Result<LaurentPoly> {
    let (gx, gy) = grad_k1_exact(v, a, b)?;
    Ok(&gx.diff(1) - &gy.diff(0))
}

/// The constant `c(A, B) = -2/(AB)` with `curl = c · L V`, where `L` is the
/// ellipse operator at `λ = A - B`.
pub fn closure_constant(a: &Rational, b: &Rational) -> Rational {
    -int(2) / (a * b)
}

/// The closure identity `curl = c(A, B) · L V` as a polynomial difference;
/// zero for every `V`.
pub fn closure_defect(v: &LaurentPoly, a: &Rational, b: &Rational) -> Result<LaurentPoly> {
    let curl = closure_curl(v, a, b)?;
    let lv = eq1_operator(&(a - b)).apply_exact(v)?;
    Ok(&curl - &lv.scale(&closure_constant(a, b)))
}

/// Exact `k₁ = poly + log_x ln|x| + log_y ln|y|` up to a constant.
#[derive(Clone, Debug, PartialEq)]
pub struct K1Exact {
    pub poly: LaurentPoly,
    pub log_x: Rational,
    pub log_y: Rational,
}

impl K1Exact {
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        let mut v = self.poly.eval_f64(point)?;
        for (var, c) in [(0, &self.log_x), (1, &self.log_y)] {
            if !c.is_zero() {
                if point[var] == 0.0 {
                    return Err(Error::Pole { var });
                }
                v += rational_to_f64(c) * point[var].abs().ln();
            }
        }
        Ok(v)
    }

    /// `k₁(point) - k₁(refpoint)`.
    pub fn gauged(&self, point: &[f64], refpoint: &[f64]) -> Result<f64> {
        Ok(self.eval(point)? - self.eval(refpoint)?)
    }
}

fn constant_log(log: &LaurentPoly, what: &str) -> Result<Rational> {
    let mut c = Rational::zero();
    for (e, coeff) in log.terms() {
        if e.0.iter().any(|&k| k != 0) {
            return Err(Error::NotClosed(format!("ln|{what}| coefficient depends on the coordinates")));
        }
        c = coeff.clone();
    }
    Ok(c)
}

/// `k₁` by integrating `∂k₁/∂x` in `x` and correcting with a function of
/// `y` alone; fails when the field has nonzero curl.
pub fn k1_exact(v: &LaurentPoly, a: &Rational, b: &Rational) -> Result<K1Exact> {
    let (gx, gy) = grad_k1_exact(v, a, b)?;
    let fx = gx.antiderivative(0);
    let log_x = constant_log(&fx.log_coeff, "x")?;
    let rest = &gy - &fx.poly.diff(1);
    if rest.terms().any(|(e, _)| e.0[0] != 0) {
        return Err(Error::NotClosed("the remainder after x-integration depends on x".into()));
    }
    let fy = rest.antiderivative(1);
    let log_y = constant_log(&fy.log_coeff, "y")?;
    Ok(K1Exact { poly: &fx.poly + &fy.poly, log_x, log_y })
}

/// Reference point `s(1, 1)` halfway to the boundary along the diagonal.
pub fn default_refpoint(a: f64, b: f64) -> [f64; 2] {
    let s = (0.5 / (1.0 / a + 1.0 / b)).sqrt();
    [s, s]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathOrder {
    XFirst,
    YFirst,
}

/// Quadrature settings for the path integral.
#[derive(Clone, Debug)]
pub struct PathQuadrature {
    pub degree: usize,
    pub panels: usize,
    /// Minimum distance kept from a singular axis.
    pub margin: f64,
}

impl Default for PathQuadrature {
    fn default() -> Self {
        PathQuadrature { degree: 24, panels: 8, margin: 1e-3 }
    }
}

fn segment_ok(singular: &[usize], from: [f64; 2], to: [f64; 2], margin: f64) -> bool {
    singular.iter().all(|&i| {
        let (s, e) = (from[i], to[i]);
        s.abs() >= margin && e.abs() >= margin && s.signum() == e.signum()
    })
}

fn path_corners(point: [f64; 2], refpoint: [f64; 2], order: PathOrder) -> [[f64; 2]; 3] {
    let corner = match order {
        PathOrder::XFirst => [point[0], refpoint[1]],
        PathOrder::YFirst => [refpoint[0], point[1]],
    };
    [refpoint, corner, point]
}

/// `k₁(point) - k₁(refpoint)` along a two-segment axis-parallel path.
pub fn k1_path(
    v: &dyn Potential,
    a: f64,
    b: f64,
    point: [f64; 2],
    refpoint: [f64; 2],
    order: PathOrder,
    quad: &PathQuadrature,
) -> Result<f64> {
    let singular = v.singular_vars();
    let corners = path_corners(point, refpoint, order);
    if !corners.windows(2).all(|w| segment_ok(&singular, w[0], w[1], quad.margin)) {
        return Err(Error::NoPath(format!("{order:?} path from {refpoint:?} to {point:?} crosses a singular axis")));
    }
    let degree = NonZeroUsize::new(quad.degree).ok_or_else(|| Error::InvalidParameter("degree 0".into()))?;
    let rule = GaussLegendre::new(degree);
    let mut total = 0.0;
    for w in corners.windows(2) {
        let (from, to) = (w[0], w[1]);
        let axis = if from[0] != to[0] { 0 } else { 1 };
        if from[axis] == to[axis] {
            continue;
        }
        let mut failure = None;
        let width = (to[axis] - from[axis]) / quad.panels as f64;
        for k in 0..quad.panels {
            let lo = from[axis] + k as f64 * width;
            total += rule.integrate(lo, lo + width, |t| {
                let mut at = from;
                at[axis] = t;
                match grad_k1_correction(v, a, b, at) {
                    Ok(g) => g[axis],
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            });
        }
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(total)
}

/// `k₁(point) - k₁(refpoint)` by quadrature, trying both path orders.
pub fn k1_correction(
    v: &dyn Potential,
    a: f64,
    b: f64,
    point: [f64; 2],
    refpoint: [f64; 2],
    quad: &PathQuadrature,
) -> Result<f64> {
    k1_path(v, a, b, point, refpoint, PathOrder::XFirst, quad)
        .or_else(|_| k1_path(v, a, b, point, refpoint, PathOrder::YFirst, quad))
}

/// `{K₁, V} + {k₁, H₀}` as a polynomial in `(x, y, p_x, p_y)`; zero for
/// any `V`, which checks the formula for the gradient of `k₁`.
pub fn k1_gradient_defect(v: &LaurentPoly, a: &Rational, b: &Rational) -> Result<LaurentPoly> {
    let k1 = IntegralSpec::ellipse_k1(a.clone(), b.clone()).phase_poly()?;
    let first = poisson_bracket_exact(&k1, &lift(v)?)?;
    let (gx, gy) = grad_k1_exact(v, a, b)?;
    let px = LaurentPoly::var(4, 2);
    let py = LaurentPoly::var(4, 3);
    let second = &(&lift(&gx)? * &px) + &(&lift(&gy)? * &py);
    Ok(&first + &second)
}

/// `{K₁ + k₁, H₀ + V}` exactly, from the integrated `k₁`. Log terms of `k₁`
/// enter through their derivatives `c/x`, `c/y`.
pub fn perturbed_bracket_exact(v: &LaurentPoly, a: &Rational, b: &Rational) -> Result<LaurentPoly> {
    let k = k1_exact(v, a, b)?;
    let k1t = &IntegralSpec::ellipse_k1(a.clone(), b.clone()).phase_poly()? + &lift(&k.poly)?;
    let h = &IntegralSpec::hamiltonian(2).phase_poly()? + &lift(v)?;
    let mut bracket = poisson_bracket_exact(&k1t, &h)?;
    for (var, c) in [(0usize, &k.log_x), (1, &k.log_y)] {
        if !c.is_zero() {
            let mut e = vec![0; 4];
            e[var] = -1;
            e[2 + var] = 1;
            bracket = &bracket + &LaurentPoly::monomial(c.clone(), e);
        }
    }
    Ok(bracket)
}
