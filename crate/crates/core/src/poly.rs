//! Exact multivariate Laurent polynomials over the rationals.
//!
//! Terms live in a `BTreeMap` keyed by the exponent vector, so iteration
//! order (and therefore the canonical text form) is lexicographic in the
//! exponents. Zero coefficients are never stored.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{int, parse_rational, pow_i, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiExponent(pub Vec<i32>);

impl MultiExponent {
    pub fn zero(nvars: usize) -> Self {
        MultiExponent(vec![0; nvars])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPoly {
    nvars: usize,
    terms: BTreeMap<MultiExponent, Rational>,
}

impl LaurentPoly {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars > 0, "a Laurent polynomial needs at least one variable");
        LaurentPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::monomial(c, vec![0; nvars])
    }

    pub fn monomial(coeff: Rational, exps: Vec<i32>) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(MultiExponent(exps), coeff);
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(Rational::one(), e)
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i32>, Rational)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::Arity { expected: nvars, got: e.len() });
            }
            p.add_term(MultiExponent(e), c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiExponent, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[i32]) -> Rational {
        self.terms
            .get(&MultiExponent(exps.to_vec()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Adds `c * x^e` in place, dropping the entry if it cancels.
    pub fn add_term(&mut self, e: MultiExponent, c: Rational) {
        debug_assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    fn check_arity(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::Arity { expected: self.nvars, got: other.nvars });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_arity(other)?;
        let mut out = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<i32> = e1.0.iter().zip(&e2.0).map(|(a, b)| a + b).collect();
                out.add_term(MultiExponent(e), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        LaurentPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative in `x_var`; valid for negative exponents.
    pub fn diff(&self, var: usize) -> Self {
        assert!(var < self.nvars, "variable index {var} out of range");
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e.0[var];
            if k == 0 {
                continue;
            }
            let mut e2 = e.0.clone();
            e2[var] -= 1;
            out.add_term(MultiExponent(e2), c * int(k as i64));
        }
        out
    }

    /// Repeated differentiation along a multi-index given as a variable list,
    /// e.g. `[0, 1]` is the mixed second derivative.
    pub fn diff_many(&self, vars: &[usize]) -> Self {
        vars.iter().fold(self.clone(), |p, &v| p.diff(v))
    }

    pub fn eval<T: Scalar>(&self, point: &[T]) -> Result<T> {
        if point.len() != self.nvars {
            return Err(Error::Arity { expected: self.nvars, got: point.len() });
        }
        for (i, v) in point.iter().enumerate() {
            if v.is_zero() && self.terms.keys().any(|e| e.0[i] < 0) {
                return Err(Error::Pole { var: i });
            }
        }
        let vals: Vec<T> = self
            .terms
            .iter()
            .map(|(e, c)| {
                e.0.iter()
                    .zip(point)
                    .filter(|(k, _)| **k != 0)
                    .fold(T::from_rational(c), |acc, (k, v)| acc * v.powi(*k))
            })
            .collect();
        Ok(T::sum(&vals))
    }

    pub fn eval_f64(&self, point: &[f64]) -> Result<f64> {
        self.eval(point)
    }

    /// Substitution `x_i -> c_i x_i`.
    pub fn scale_vars(&self, factors: &[Rational]) -> Result<Self> {
        if factors.len() != self.nvars {
            return Err(Error::Arity { expected: self.nvars, got: factors.len() });
        }
        if let Some(var) = factors.iter().position(|c| c.is_zero()) {
            return Err(Error::ZeroFactor { var });
        }
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mult = e
                .0
                .iter()
                .zip(factors)
                .fold(c.clone(), |acc, (k, f)| acc * pow_i(f, *k));
            out.add_term(e.clone(), mult);
        }
        Ok(out)
    }

    /// Renames variables: variable `i` of `self` becomes variable `perm[i]`
    /// of the result, which has `nvars_out` variables.
    pub fn remap_vars(&self, perm: &[usize], nvars_out: usize) -> Result<Self> {
        if perm.len() != self.nvars {
            return Err(Error::Arity { expected: self.nvars, got: perm.len() });
        }
        let mut out = Self::zero(nvars_out);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; nvars_out];
            for (i, k) in e.0.iter().enumerate() {
                e2[perm[i]] += k;
            }
            out.add_term(MultiExponent(e2), c.clone());
        }
        Ok(out)
    }

    /// Exponents of `x_var` that occur with a negative power (pole variables).
    pub fn pole_vars(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&i| self.terms.keys().any(|e| e.0[i] < 0))
            .collect()
    }

    /// Largest absolute coefficient; zero for the zero polynomial.
    pub fn max_abs_coeff(&self) -> Rational {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// Term-wise antiderivative in `x_var`. Monomials with exponent `-1`
    /// integrate to a logarithm; they are returned separately as the
    /// coefficient polynomial of `ln|x_var|` (independent of `x_var`).
    pub fn antiderivative(&self, var: usize) -> Antiderivative {
        let mut poly = Self::zero(self.nvars);
        let mut log_coeff = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e.0[var];
            if k == -1 {
                let mut e2 = e.0.clone();
                e2[var] = 0;
                log_coeff.add_term(MultiExponent(e2), c.clone());
            } else {
                let mut e2 = e.0.clone();
                e2[var] = k + 1;
                poly.add_term(MultiExponent(e2), c / int(k as i64 + 1));
            }
        }
        Antiderivative { var, poly, log_coeff }
    }

    /// Canonical text form, one term per line: `coeff * x0^e0 ... xk^ek`.
    pub fn to_canonical_string(&self) -> String {
        self.to_string()
    }
}

/// `poly + log_coeff * ln|x_var|`.
#[derive(Clone, Debug, PartialEq)]
pub struct Antiderivative {
    pub var: usize,
    pub poly: LaurentPoly,
    pub log_coeff: LaurentPoly,
}

impl Antiderivative {
    pub fn eval_f64(&self, point: &[f64]) -> Result<f64> {
        let mut v = self.poly.eval_f64(point)?;
        if !self.log_coeff.is_zero() {
            let x = point[self.var];
            if x == 0.0 {
                return Err(Error::Pole { var: self.var });
            }
            v += self.log_coeff.eval_f64(point)? * x.abs().ln();
        }
        Ok(v)
    }

    pub fn has_log(&self) -> bool {
        !self.log_coeff.is_zero()
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let write_term = |f: &mut fmt::Formatter<'_>, e: &[i32], c: &Rational| -> fmt::Result {
            write!(f, "{c} *")?;
            for (i, k) in e.iter().enumerate() {
                write!(f, " x{i}^{k}")?;
            }
            Ok(())
        };
        if self.terms.is_empty() {
            return write_term(f, &vec![0; self.nvars], &Rational::zero());
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write_term(f, &e.0, c)?;
        }
        Ok(())
    }
}

impl FromStr for LaurentPoly {
    type Err = Error;

    /// Parses the canonical form. Blank lines and `#` comments are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut nvars = None;
        for line in s.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (coeff, mono) = line
                .split_once('*')
                .ok_or_else(|| Error::Parse(format!("expected `coeff * x0^e0 ...`, got {line:?}")))?;
            let coeff = parse_rational(coeff)?;
            let mut exps = Vec::new();
            for (i, tok) in mono.split_whitespace().enumerate() {
                let (name, k) = tok
                    .split_once('^')
                    .ok_or_else(|| Error::Parse(format!("bad factor {tok:?}")))?;
                if name != format!("x{i}") {
                    return Err(Error::Parse(format!("expected x{i}, got {name:?}")));
                }
                exps.push(k.parse::<i32>().map_err(|_| Error::Parse(format!("bad exponent {k:?}")))?);
            }
            match nvars {
                None => nvars = Some(exps.len()),
                Some(n) if n != exps.len() => return Err(Error::Arity { expected: n, got: exps.len() }),
                _ => {}
            }
            terms.push((exps, coeff));
        }
        let nvars = nvars.filter(|&n| n > 0).ok_or_else(|| Error::Parse("empty polynomial text".into()))?;
        LaurentPoly::from_terms(nvars, terms)
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.try_add(rhs).expect("arity mismatch in polynomial addition")
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.try_sub(rhs).expect("arity mismatch in polynomial subtraction")
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.try_mul(rhs).expect("arity mismatch in polynomial multiplication")
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(&-Rational::one())
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: LaurentPoly) -> LaurentPoly {
        &self + &rhs
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: LaurentPoly) -> LaurentPoly {
        &self - &rhs
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}
