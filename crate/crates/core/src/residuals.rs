//! The separability conditions as linear differential operators acting on
//! a potential `V`, evaluated either exactly on Laurent polynomials or by
//! finite differences on arbitrary potentials.
//!
//! Each equation is stored as a list of [`Term`]s `c(q) · ∂^α V` with
//! Laurent-polynomial coefficients, so the same operator drives both
//! backends.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd;
use crate::poly::LaurentPoly;
use crate::potentials::Potential;
use crate::scalar::{int, rat, rational_to_f64, Rational};

/// `coeff · ∂^deriv V`; `deriv` lists variable indices (empty for `V`).
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: LaurentPoly,
    pub deriv: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    pub label: String,
    pub nvars: usize,
    pub terms: Vec<Term>,
}

impl Operator {
    fn new(label: impl Into<String>, nvars: usize) -> Self {
        Operator { label: label.into(), nvars, terms: Vec::new() }
    }

    fn push(&mut self, coeff: LaurentPoly, deriv: &[usize]) {
        if !coeff.is_zero() {
            let mut d = deriv.to_vec();
            d.sort_unstable();
            self.terms.push(Term { coeff, deriv: d });
        }
    }

    /// Exact residual polynomial.
    pub fn apply_exact(&self, v: &LaurentPoly) -> Result<LaurentPoly> {
        if v.nvars() != self.nvars {
            return Err(Error::Arity { expected: self.nvars, got: v.nvars() });
        }
        let mut out = LaurentPoly::zero(self.nvars);
        for t in &self.terms {
            out = &out + &(&t.coeff * &v.diff_many(&t.deriv));
        }
        Ok(out)
    }

    /// `(residual, Σ |term|)` at a point, with derivatives from `derivs`.
    fn apply_numeric(&self, q: &[f64], derivs: &BTreeMap<Vec<usize>, f64>) -> Result<(f64, f64)> {
        let mut vals = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            vals.push(t.coeff.eval_f64(q)? * derivs[&t.deriv]);
        }
        let scale = vals.iter().map(|v| v.abs()).sum();
        Ok((<f64 as crate::scalar::Scalar>::sum(&vals), scale))
    }
}

fn c(n: usize, value: Rational, exps: &[i32]) -> LaurentPoly {
    debug_assert_eq!(exps.len(), n);
    LaurentPoly::monomial(value, exps.to_vec())
}

/// Bertrand–Darboux parameters; only `c - c'` enters the operator.
#[derive(Clone, Debug, PartialEq)]
pub struct BDParams {
    pub a: Rational,
    pub b: Rational,
    pub b_prime: Rational,
    pub c: Rational,
    pub c_prime: Rational,
    pub c1: Rational,
}

impl BDParams {
    /// The choice that reduces the operator to the ellipse-billiard
    /// equation with parameter `λ`.
    pub fn ellipse(lambda: &Rational) -> Self {
        BDParams {
            a: rat(-1, 2),
            b: Rational::zero(),
            b_prime: Rational::zero(),
            c: -lambda / int(2),
            c_prime: Rational::zero(),
            c1: Rational::zero(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sys4Form {
    /// As written, with `(a_i - a_j)^{-1}` coefficients; needs distinct axes.
    Divided,
    /// Each equation multiplied through by the product of its own axis
    /// differences; defined for repeated axes.
    Cleared,
}

#[derive(Clone, Debug, PartialEq)]
pub enum System {
    /// `λV_xy + 3(yV_x - xV_y) + (y² - x²)V_xy + xy(V_xx - V_yy)`.
    Eq1 { lambda: Rational },
    Bd(BDParams),
    /// Jacobi geodesic problem on the ellipsoid with axes `A, B, C`.
    Sys8 { a: Rational, b: Rational, c: Rational },
    /// Billiard on a constant-curvature surface.
    Sys10 { a: Rational, b: Rational, c: Rational, curvature_sign: i8 },
    /// Billiard inside an ellipsoid in `R^n`.
    Sys4 { axes: Vec<Rational>, form: Sys4Form },
}

impl System {
    pub fn name(&self) -> &'static str {
        match self {
            System::Eq1 { .. } => "eq1",
            System::Bd(_) => "bd",
            System::Sys8 { .. } => "sys8",
            System::Sys10 { .. } => "sys10",
            System::Sys4 { .. } => "sys4",
        }
    }

    pub fn nvars(&self) -> usize {
        match self {
            System::Eq1 { .. } | System::Bd(_) => 2,
            System::Sys8 { .. } | System::Sys10 { .. } => 3,
            System::Sys4 { axes, .. } => axes.len(),
        }
    }

    pub fn operators(&self) -> Result<Vec<Operator>> {
        match self {
            System::Eq1 { lambda } => Ok(vec![eq1_operator(lambda)]),
            System::Bd(p) => Ok(vec![bd_operator(p)]),
            System::Sys8 { a, b, c } => sys8_operators(a, b, c),
            System::Sys10 { a, b, c, curvature_sign } => sys10_operators(a, b, c, *curvature_sign),
            System::Sys4 { axes, form } => sys4_operators(axes, *form),
        }
    }
}

pub fn eq1_operator(lambda: &Rational) -> Operator {
    let n = 2;
    let mut op = Operator::new("eq1", n);
    let mixed = &(&c(n, lambda.clone(), &[0, 0]) + &c(n, int(1), &[0, 2])) + &c(n, int(-1), &[2, 0]);
    op.push(mixed, &[0, 1]);
    op.push(c(n, int(3), &[0, 1]), &[0]);
    op.push(c(n, int(-3), &[1, 0]), &[1]);
    op.push(c(n, int(1), &[1, 1]), &[0, 0]);
    op.push(c(n, int(-1), &[1, 1]), &[1, 1]);
    op
}

pub fn bd_operator(p: &BDParams) -> Operator {
    let n = 2;
    let mut op = Operator::new("bd", n);
    // (V_yy - V_xx)(-2axy - b'y - bx + c1)
    let w = [
        c(n, int(-2) * &p.a, &[1, 1]),
        c(n, -p.b_prime.clone(), &[0, 1]),
        c(n, -p.b.clone(), &[1, 0]),
        c(n, p.c1.clone(), &[0, 0]),
    ]
    .iter()
    .fold(LaurentPoly::zero(n), |acc, t| &acc + t);
    op.push(w.clone(), &[1, 1]);
    op.push(-w, &[0, 0]);
    // 2V_xy(ay² - ax² + by - b'x + c - c')
    let m = [
        c(n, p.a.clone(), &[0, 2]),
        c(n, -p.a.clone(), &[2, 0]),
        c(n, p.b.clone(), &[0, 1]),
        c(n, -p.b_prime.clone(), &[1, 0]),
        c(n, &p.c - &p.c_prime, &[0, 0]),
    ]
    .iter()
    .fold(LaurentPoly::zero(n), |acc, t| &acc + t);
    op.push(m.scale(&int(2)), &[0, 1]);
    op.push(&c(n, int(6) * &p.a, &[0, 1]) + &c(n, int(3) * &p.b, &[0, 0]), &[0]);
    op.push(&c(n, int(-6) * &p.a, &[1, 0]) + &c(n, int(-3) * &p.b_prime, &[0, 0]), &[1]);
    op
}

fn distinct(axes: &[&Rational]) -> Result<()> {
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].contains(a) {
            return Err(Error::DegenerateGeometry(format!("repeated axis {a}")));
        }
        if a.is_zero() {
            return Err(Error::DegenerateGeometry("zero axis".into()));
        }
    }
    Ok(())
}

/// The three equations for the Jacobi problem, written for the cyclic
/// triples `(x, y, z)`, `(y, z, x)`, `(z, x, y)`.
pub fn sys8_operators(a: &Rational, b: &Rational, cc: &Rational) -> Result<Vec<Operator>> {
    distinct(&[a, b, cc])?;
    let n = 3;
    let ax = [a.clone(), b.clone(), cc.clone()];
    let sq = |i: usize| {
        let mut e = [0; 3];
        e[i] = 2;
        e
    };
    let pair = |i: usize, j: usize| {
        let mut e = [0; 3];
        e[i] += 1;
        e[j] += 1;
        e
    };
    let lin = |i: usize| {
        let mut e = [0; 3];
        e[i] = 1;
        e
    };
    let s_poly = (0..3).fold(LaurentPoly::zero(n), |acc, i| {
        &acc + &c(n, int(1) / (&ax[i] * &ax[i]), &sq(i))
    });
    let mut ops = Vec::new();
    for (idx, (i, j, k)) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)].into_iter().enumerate() {
        let (ai, aj, ak) = (&ax[i], &ax[j], &ax[k]);
        let mut op = Operator::new(format!("sys8.{}", idx + 1), n);
        // S V_ij (A_i - A_j)/(A_i A_j) + (x_i²/A_i³ - x_j²/A_j³) V_ij
        let mixed = &(&s_poly.scale(&((ai - aj) / (ai * aj)))
            + &c(n, int(1) / (ai * ai * ai), &sq(i)))
            + &c(n, int(-1) / (aj * aj * aj), &sq(j));
        op.push(mixed, &[i, j]);
        op.push(c(n, int(-3) / (aj * aj * ai), &lin(j)), &[i]);
        op.push(c(n, int(3) / (ai * ai * aj), &lin(i)), &[j]);
        op.push(c(n, int(1) / (ai * aj * ai), &pair(i, j)), &[j, j]);
        op.push(c(n, int(-1) / (ai * aj * aj), &pair(i, j)), &[i, i]);
        op.push(c(n, int(1) / (ak * ai * ai), &pair(k, i)), &[k, j]);
        op.push(c(n, int(-1) / (ak * aj * aj), &pair(k, j)), &[k, i]);
        ops.push(op);
    }
    Ok(ops)
}

/// The three equations for the billiard on a constant-curvature surface
/// (`K = ±1`).
pub fn sys10_operators(a: &Rational, b: &Rational, cc: &Rational, curvature_sign: i8) -> Result<Vec<Operator>> {
    if curvature_sign != 1 && curvature_sign != -1 {
        return Err(Error::InvalidParameter(format!("curvature sign {curvature_sign}")));
    }
    distinct(&[a, b, cc])?;
    let n = 3;
    let k = int(curvature_sign as i64);
    let m = |v: Rational, e: [i32; 3]| c(n, v, &e);
    let (x, y, z) = (0, 1, 2);

    let mut e1 = Operator::new("sys10.1", n);
    e1.push(m(int(3) * cc, [0, 1, 0]), &[x]);
    e1.push(m(int(-3) * cc, [1, 0, 0]), &[y]);
    let w = &(&m(cc.clone(), [0, 2, 0]) + &m(-cc.clone(), [2, 0, 0])) + &m(&k * (b - a), [0, 0, 2]);
    e1.push(w, &[x, y]);
    e1.push(m(cc.clone(), [1, 1, 0]), &[x, x]);
    e1.push(m(-cc.clone(), [1, 1, 0]), &[y, y]);
    e1.push(m(a.clone(), [0, 1, 1]), &[z, x]);
    e1.push(m(-b.clone(), [1, 0, 1]), &[z, y]);

    let mut e2 = Operator::new("sys10.2", n);
    e2.push(m(int(3) * b, [0, 0, 1]), &[x]);
    e2.push(m(int(-3) * &k * b, [1, 0, 0]), &[z]);
    let w = &(&m(b.clone(), [0, 0, 2]) + &m(-(&k * b), [2, 0, 0])) + &m(&k * (cc - a), [0, 2, 0]);
    e2.push(w, &[x, z]);
    e2.push(m(b.clone(), [1, 0, 1]), &[x, x]);
    e2.push(m(-(&k * b), [1, 0, 1]), &[z, z]);
    e2.push(m(a.clone(), [0, 1, 1]), &[x, y]);
    e2.push(m(-(&k * cc), [1, 1, 0]), &[y, z]);

    let mut e3 = Operator::new("sys10.3", n);
    e3.push(m(int(3) * a, [0, 0, 1]), &[y]);
    e3.push(m(int(-3) * &k * a, [0, 1, 0]), &[z]);
    let w = &(&m(a.clone(), [0, 0, 2]) + &m(-(&k * a), [0, 2, 0])) + &m(&k * (cc - b), [2, 0, 0]);
    e3.push(w, &[y, z]);
    e3.push(m(a.clone(), [0, 1, 1]), &[y, y]);
    e3.push(m(-(&k * a), [0, 1, 1]), &[z, z]);
    e3.push(m(b.clone(), [1, 0, 1]), &[x, y]);
    e3.push(m(-(&k * cc), [1, 1, 0]), &[x, z]);

    Ok(vec![e1, e2, e3])
}

/// System (4) for `n ≥ 3`: the three-index equations for each `i` and
/// unordered `{r, s}` not containing `i`, then the two-index equations for
/// each `i < r`; `(n-1)·n(n-1)/2` in total.
pub fn sys4_operators(axes: &[Rational], form: Sys4Form) -> Result<Vec<Operator>> {
    let n = axes.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("system (4) needs n >= 3, got {n}")));
    }
    if form == Sys4Form::Divided {
        distinct(&axes.iter().collect::<Vec<_>>())?;
    }
    let e = |pairs: &[(usize, i32)]| {
        let mut v = vec![0; n];
        for &(i, k) in pairs {
            v[i] += k;
        }
        v
    };
    let d = |i: usize, j: usize| &axes[i] - &axes[j];
    let mut ops = Vec::new();

    for i in 0..n {
        for r in 0..n {
            for s in (r + 1)..n {
                if r == i || s == i {
                    continue;
                }
                let (wr, ws) = match form {
                    Sys4Form::Divided => (int(1) / d(i, r), int(1) / d(i, s)),
                    Sys4Form::Cleared => (d(i, s), d(i, r)),
                };
                let mut op = Operator::new(format!("sys4.3.{i}.{r}.{s}"), n);
                op.push(c(n, &wr - &ws, &e(&[(i, 2)])), &[r, s]);
                op.push(c(n, -wr, &e(&[(i, 1), (r, 1)])), &[i, s]);
                op.push(c(n, ws, &e(&[(i, 1), (s, 1)])), &[i, r]);
                ops.push(op);
            }
        }
    }

    for i in 0..n {
        for r in (i + 1)..n {
            let others: Vec<usize> = (0..n).filter(|&j| j != i && j != r).collect();
            // weight standing in for (a_i - a_j)^{-1}; j = r included
            let inv = |j: usize| -> Rational {
                match form {
                    Sys4Form::Divided => int(1) / d(i, j),
                    Sys4Form::Cleared => std::iter::once(r)
                        .chain(others.iter().copied())
                        .filter(|&l| l != j)
                        .fold(Rational::one(), |acc, l| acc * d(i, l)),
                }
            };
            let unit = match form {
                Sys4Form::Divided => Rational::one(),
                Sys4Form::Cleared => std::iter::once(r)
                    .chain(others.iter().copied())
                    .fold(Rational::one(), |acc, l| acc * d(i, l)),
            };
            let mut op = Operator::new(format!("sys4.2.{i}.{r}"), n);
            let wr = inv(r);
            op.push(c(n, wr.clone(), &e(&[(i, 1), (r, 1)])), &[i, i]);
            op.push(c(n, -wr.clone(), &e(&[(i, 1), (r, 1)])), &[r, r]);
            for &j in &others {
                op.push(c(n, -inv(j), &e(&[(i, 1), (j, 1)])), &[j, r]);
            }
            let mut mixed = LaurentPoly::constant(n, unit);
            for &j in &others {
                mixed = &mixed + &c(n, inv(j), &e(&[(j, 2)]));
            }
            // (a_r - a_i)^{-1}(x_i² - x_r²)
            mixed = &mixed + &c(n, -wr.clone(), &e(&[(i, 2)]));
            mixed = &mixed + &c(n, wr.clone(), &e(&[(r, 2)]));
            op.push(mixed, &[i, r]);
            op.push(c(n, int(3) * &wr, &e(&[(r, 1)])), &[i]);
            op.push(c(n, int(-3) * &wr, &e(&[(i, 1)])), &[r]);
            ops.push(op);
        }
    }
    Ok(ops)
}

/// How the finite-difference step follows the coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepScale {
    /// `h · max(1, |x_i|)`.
    Floored,
    /// `h · |x_i|` (`h` at zero), which tracks steep growth near a pole.
    Coordinate,
}

impl StepScale {
    pub fn steps(self, q: &[f64], h: f64) -> Vec<f64> {
        match self {
            StepScale::Floored => fd::relative_steps(q, h),
            StepScale::Coordinate => q.iter().map(|x| if *x == 0.0 { h } else { h * x.abs() }).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FdConfig {
    pub h: f64,
    pub scale: StepScale,
    pub richardson: bool,
    /// Bound on the relative residual `|Σ terms| / Σ |terms|`.
    pub tolerance: f64,
    /// Points with a singular coordinate closer than this to zero are
    /// rejected.
    pub pole_margin: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { h: 2e-3, scale: StepScale::Coordinate, richardson: true, tolerance: 1e-8, pole_margin: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Exact,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub equation: String,
    /// Index into `points` (finite-difference backend only).
    pub point: Option<usize>,
    pub value: Option<f64>,
    pub relative: Option<f64>,
    /// Exact backend: whether the residual polynomial is identically zero.
    pub exact_zero: Option<bool>,
    /// Exact backend: the residual polynomial in canonical text form when
    /// it is nonzero.
    pub remainder: Option<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub system: String,
    pub equation_ids: Vec<String>,
    pub backend: BackendKind,
    pub points: Vec<Vec<f64>>,
    pub step: Option<f64>,
    pub tolerance: Option<f64>,
    pub residuals: Vec<ResidualEntry>,
    pub pass: bool,
}

impl ResidualReport {
    pub fn max_relative(&self) -> f64 {
        self.residuals.iter().filter_map(|r| r.relative).fold(0.0, f64::max)
    }
}

/// Residual polynomials of every equation of `system` applied to `v`.
pub fn residual_polys(system: &System, v: &LaurentPoly) -> Result<Vec<(String, LaurentPoly)>> {
    system
        .operators()?
        .into_iter()
        .map(|op| Ok((op.label.clone(), op.apply_exact(v)?)))
        .collect()
}

pub fn residual_exact(system: &System, v: &LaurentPoly) -> Result<ResidualReport> {
    let polys = residual_polys(system, v)?;
    let residuals: Vec<ResidualEntry> = polys
        .iter()
        .map(|(label, p)| ResidualEntry {
            equation: label.clone(),
            point: None,
            value: None,
            relative: None,
            exact_zero: Some(p.is_zero()),
            remainder: (!p.is_zero()).then(|| p.to_canonical_string()),
            pass: p.is_zero(),
        })
        .collect();
    Ok(ResidualReport {
        system: system.name().into(),
        equation_ids: polys.into_iter().map(|(l, _)| l).collect(),
        backend: BackendKind::Exact,
        points: Vec::new(),
        step: None,
        tolerance: None,
        pass: residuals.iter().all(|r| r.pass),
        residuals,
    })
}

/// Rejects points where a singular coordinate is within `margin` of zero.
pub fn check_point(v: &dyn Potential, q: &[f64], margin: f64) -> Result<()> {
    if q.len() != v.nvars() {
        return Err(Error::Arity { expected: v.nvars(), got: q.len() });
    }
    for i in v.singular_vars() {
        if q[i].abs() < margin {
            return Err(Error::Singular(format!("x{i} = {} is within {margin} of a pole", q[i])));
        }
    }
    Ok(())
}

pub fn residual_fd(system: &System, v: &dyn Potential, points: &[Vec<f64>], cfg: &FdConfig) -> Result<ResidualReport> {
    let ops = system.operators()?;
    if v.nvars() != system.nvars() {
        return Err(Error::Arity { expected: system.nvars(), got: v.nvars() });
    }
    let f = |q: &[f64]| v.value(q);
    let mut residuals = Vec::new();
    for (pi, q) in points.iter().enumerate() {
        check_point(v, q, cfg.pole_margin)?;
        let steps = cfg.scale.steps(q, cfg.h);
        let mut derivs = BTreeMap::new();
        for op in &ops {
            for t in &op.terms {
                if !derivs.contains_key(&t.deriv) {
                    let d = fd::derivative(&f, q, &t.deriv, &steps, cfg.richardson)?;
                    derivs.insert(t.deriv.clone(), d);
                }
            }
        }
        for op in &ops {
            let (value, scale) = op.apply_numeric(q, &derivs)?;
            let relative = if scale == 0.0 { 0.0 } else { value.abs() / scale };
            residuals.push(ResidualEntry {
                equation: op.label.clone(),
                point: Some(pi),
                value: Some(value),
                relative: Some(relative),
                exact_zero: None,
                remainder: None,
                pass: relative <= cfg.tolerance,
            });
        }
    }
    Ok(ResidualReport {
        system: system.name().into(),
        equation_ids: ops.into_iter().map(|o| o.label).collect(),
        backend: BackendKind::FiniteDifference,
        points: points.to_vec(),
        step: Some(cfg.h),
        tolerance: Some(cfg.tolerance),
        pass: residuals.iter().all(|r| r.pass),
        residuals,
    })
}

/// Where and how to evaluate a residual.
pub enum Evaluation<'a> {
    Exact(&'a LaurentPoly),
    Numeric { potential: &'a dyn Potential, points: &'a [Vec<f64>], config: FdConfig },
}

fn run(system: System, how: Evaluation<'_>) -> Result<ResidualReport> {
    match how {
        Evaluation::Exact(v) => residual_exact(&system, v),
        Evaluation::Numeric { potential, points, config } => residual_fd(&system, potential, points, &config),
    }
}

pub fn eq1_residual(lambda: &Rational, how: Evaluation<'_>) -> Result<ResidualReport> {
    run(System::Eq1 { lambda: lambda.clone() }, how)
}

pub fn bd_residual(params: &BDParams, how: Evaluation<'_>) -> Result<ResidualReport> {
    run(System::Bd(params.clone()), how)
}

pub fn sys8_residual(a: &Rational, b: &Rational, c: &Rational, how: Evaluation<'_>) -> Result<ResidualReport> {
    run(System::Sys8 { a: a.clone(), b: b.clone(), c: c.clone() }, how)
}

pub fn sys10_residual(
    a: &Rational,
    b: &Rational,
    c: &Rational,
    curvature_sign: i8,
    how: Evaluation<'_>,
) -> Result<ResidualReport> {
    run(System::Sys10 { a: a.clone(), b: b.clone(), c: c.clone(), curvature_sign }, how)
}

pub fn sys4_residual(axes: &[Rational], form: Sys4Form, how: Evaluation<'_>) -> Result<ResidualReport> {
    run(System::Sys4 { axes: axes.to_vec(), form }, how)
}

/// Largest coefficient of a residual polynomial, for diagnostics.
pub fn residual_size(p: &LaurentPoly) -> f64 {
    rational_to_f64(&p.max_abs_coeff())
}
