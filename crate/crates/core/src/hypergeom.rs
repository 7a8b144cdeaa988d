//! Pochhammer symbols, the Appell F4 double series, the Gauss 2F1 series it
//! reduces to on the coordinate axes, and the two second-order PDEs that F4
//! satisfies.
//!
//! ```text
//! F4(a, b; c, d; x, y) = Σ_{m,n ≥ 0} (a)_{m+n} (b)_{m+n} / ((c)_m (d)_n) · x^m/m! · y^n/n!
//! ```
//!
//! Summation runs over diagonals `m + n = 0, 1, ..., order`. When `a` or `b`
//! is a non-positive integer the series is a polynomial and is summed to its
//! last nonzero diagonal; terms whose numerator vanishes are skipped before
//! the denominator is looked at, so `(d)_n = 0` beyond the termination point
//! is harmless.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd;
use crate::scalar::Scalar;

pub fn pochhammer<T: Scalar>(a: &T, n: u32) -> T {
    (0..n).fold(T::one(), |acc, j| acc * (a.clone() + T::from_i64(j as i64)))
}

/// Absolute-convergence test `√|x| + √|y| ≤ 1` (closed region).
pub fn f4_in_domain(x: f64, y: f64) -> bool {
    x.abs().sqrt() + y.abs().sqrt() <= 1.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct F4Params<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Scalar> F4Params<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        F4Params { a, b, c, d }
    }

    /// Last nonzero diagonal when `a` or `b` is a non-positive integer.
    pub fn termination(&self) -> Option<usize> {
        [&self.a, &self.b]
            .into_iter()
            .filter_map(|p| p.as_nonpositive_integer())
            .map(|k| (-k) as usize)
            .min()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct F4Value<T> {
    pub value: T,
    pub terms_used: usize,
    pub tail_estimate: f64,
    pub in_domain: bool,
}

pub fn f4_eval<T: Scalar>(params: &F4Params<T>, x: &T, y: &T, order: usize) -> Result<F4Value<T>> {
    let termination = params.termination();
    let last = termination.map_or(order, |t| t.min(order));
    let terminated = termination.is_some_and(|t| t <= order);
    let zero_den = |m: usize, n: usize| {
        Error::InvalidParameter(format!(
            "F4 denominator Pochhammer vanishes at (m, n) = ({m}, {n}) for a non-terminated term"
        ))
    };
    // t[m][n] by ratios of neighbouring terms, which keeps floats in range
    // where factorials and Pochhammer products alone would overflow
    let ratio_num = |k: usize| {
        let k = T::from_i64(k as i64);
        (params.a.clone() + k.clone()) * (params.b.clone() + k)
    };
    let mut table: Vec<Vec<T>> = Vec::with_capacity(last + 1);
    for m in 0..=last {
        let mut row: Vec<T> = Vec::with_capacity(last + 1 - m);
        let first = if m == 0 {
            T::one()
        } else {
            let prev = &table[m - 1][0];
            let num = ratio_num(m - 1);
            if prev.is_zero() || num.is_zero() || x.is_zero() {
                T::zero()
            } else {
                let den = (params.c.clone() + T::from_i64(m as i64 - 1)) * T::from_i64(m as i64);
                if den.is_zero() {
                    return Err(zero_den(m, 0));
                }
                prev.clone() * num * x.clone() / den
            }
        };
        row.push(first);
        for n in 1..=(last - m) {
            let prev = &row[n - 1];
            let num = ratio_num(m + n - 1);
            let t = if prev.is_zero() || num.is_zero() || y.is_zero() {
                T::zero()
            } else {
                let den = (params.d.clone() + T::from_i64(n as i64 - 1)) * T::from_i64(n as i64);
                if den.is_zero() {
                    return Err(zero_den(m, n));
                }
                prev.clone() * num * y.clone() / den
            };
            row.push(t);
        }
        table.push(row);
    }

    let mut terms = Vec::new();
    let mut diag_abs = vec![0.0; last + 1];
    for (m, row) in table.into_iter().enumerate() {
        for (n, t) in row.into_iter().enumerate() {
            if !t.is_zero() {
                diag_abs[m + n] += t.to_f64().abs();
                terms.push(t);
            }
        }
    }

    let tail_estimate = if terminated {
        0.0
    } else {
        geometric_tail(&diag_abs)
    };
    Ok(F4Value {
        value: T::sum(&terms),
        terms_used: terms.len().max(1),
        tail_estimate,
        in_domain: f4_in_domain(x.to_f64(), y.to_f64()),
    })
}

/// Ratio-extrapolated tail from the last two diagonal sums.
fn geometric_tail(diag_abs: &[f64]) -> f64 {
    match diag_abs {
        [] | [_] => f64::INFINITY,
        [.., prev, last] => {
            if *last == 0.0 {
                0.0
            } else if *prev == 0.0 {
                f64::INFINITY
            } else {
                let r = last / prev;
                if r < 1.0 {
                    last * r / (1.0 - r)
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

pub fn gauss_2f1<T: Scalar>(a: &T, b: &T, c: &T, x: &T, order: usize) -> Result<T> {
    let mut terms = vec![T::one()];
    let mut t = T::one();
    for m in 0..order {
        let mm = T::from_i64(m as i64);
        let num = (a.clone() + mm.clone()) * (b.clone() + mm.clone());
        if num.is_zero() {
            break;
        }
        let den = (c.clone() + mm) * T::from_i64(m as i64 + 1);
        if den.is_zero() {
            return Err(Error::InvalidParameter(format!("2F1 denominator (c)_{} vanishes", m + 1)));
        }
        t = t * num * x.clone() / den;
        terms.push(t.clone());
    }
    Ok(T::sum(&terms))
}

/// Left-hand sides of the two F4 PDEs on the truncated series, with
/// derivatives from central differences of step `h` plus one Richardson
/// refinement:
///
/// ```text
/// x(1-x)F_xx - y²F_yy - 2xyF_xy + [c - (a+b+1)x]F_x - (a+b+1)yF_y - abF
/// y(1-y)F_yy - x²F_xx - 2xyF_xy + [d - (a+b+1)y]F_y - (a+b+1)xF_x - abF
/// ```
pub fn f4_pde_residual(params: &F4Params<f64>, x: f64, y: f64, order: usize, h: f64) -> Result<(f64, f64)> {
    let margin = 2.0 * h;
    let corners = [(x.abs() + margin, y.abs() + margin)];
    if corners.iter().any(|&(u, v)| u.sqrt() + v.sqrt() >= 1.0) {
        return Err(Error::OutOfDomain { x, y });
    }
    let f = |p: &[f64]| -> Result<f64> { Ok(f4_eval(params, &p[0], &p[1], order)?.value) };
    let pt = [x, y];
    let steps = [h, h];
    let d = |vars: &[usize]| fd::derivative(&f, &pt, vars, &steps, true);
    let (fv, fx, fy) = (d(&[])?, d(&[0])?, d(&[1])?);
    let (fxx, fyy, fxy) = (d(&[0, 0])?, d(&[1, 1])?, d(&[0, 1])?);
    let F4Params { a, b, c, d: dd } = *params;
    let s = a + b + 1.0;
    let r1 = x * (1.0 - x) * fxx - y * y * fyy - 2.0 * x * y * fxy + (c - s * x) * fx - s * y * fy - a * b * fv;
    let r2 = y * (1.0 - y) * fyy - x * x * fxx - 2.0 * x * y * fxy + (dd - s * y) * fy - s * x * fx - a * b * fv;
    Ok((r1, r2))
}
