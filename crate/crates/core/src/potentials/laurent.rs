//! Exact Laurent-polynomial members of each family at integer exponent.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::LaurentPoly;
use crate::scalar::{binom, factorial, int, pow_i, Rational};

use super::{Branch, CurvedFamilySpec, EllipseFamilySpec, EllipsoidFamilySpec, JacobiFamilySpec};

pub(crate) fn integer_exponent(v: f64, min: i64) -> Result<i64> {
    match crate::scalar::as_integer(v) {
        Some(k) if k >= min => Ok(k),
        _ => Err(Error::NonInteger(format!("{v} (need an integer >= {min})"))),
    }
}

fn bigrat(n: num_bigint::BigInt) -> Rational {
    Rational::from_integer(n)
}

/// `U_{kis}` coefficient without the amplitude:
/// `binom(s+i-1, i) · Π_{j=1..s} (j-(k-i)) / (λ^{s+i} s!)`.
fn u_coeff(k: i64, i: i64, s: i64, lambda: &Rational) -> Rational {
    let prod = (1..=s).fold(Rational::one(), |acc, j| acc * int(j - (k - i)));
    bigrat(binom(s + i - 1, i)) * prod / (pow_i(lambda, (s + i) as i32) * bigrat(factorial(s as u64)))
}

/// `V_k` (or `W_k`) for the ellipse billiard, as the finite double sum over
/// `U_{kis}` plus the seed term `α y^{-2k}` (`α x^{-2k}` for `W_k`).
pub fn ellipse_vk_laurent(spec: &EllipseFamilySpec) -> Result<LaurentPoly> {
    let k = integer_exponent(spec.gamma_exp, 1)?;
    if spec.lambda.is_zero() {
        return Err(Error::DegenerateGeometry("lambda = 0".into()));
    }
    // (x exponent slot, y exponent slot) for the branch
    let (xs, ys) = match spec.branch {
        Branch::V => (0, 1),
        Branch::W => (1, 0),
    };
    let mut p = LaurentPoly::zero(2);
    let mut seed = vec![0; 2];
    seed[ys] = (-2 * k) as i32;
    p = &p + &LaurentPoly::monomial(spec.alpha.clone(), seed);
    for i in 0..=(k - 2) {
        for s in 1..=(k - i - 1) {
            let sign = match spec.branch {
                Branch::V => if i % 2 == 0 { 1 } else { -1 },
                Branch::W => if s % 2 == 0 { 1 } else { -1 },
            };
            let c = u_coeff(k, i, s, &spec.lambda) * &spec.alpha * int(sign);
            let mut e = vec![0; 2];
            e[xs] = (2 * s) as i32;
            e[ys] = (-2 * k + 2 * i) as i32;
            p = &p + &LaurentPoly::monomial(c, e);
        }
    }
    Ok(p)
}

/// Jacobi-problem family in `(x, y, z)`:
/// `Σ_{s+k ≤ l0-1} binom(s+k-1, k) (1-l0)_{s+k} / ((1-l0)_k s!) · p^s q^k
///  · x^{2(k-l0)} y^{2s} z^{2(l0-k-s-1)}`
/// with `p = c(a-c)/(b(b-a))` and `q = c(c-b)/(a(b-a))`.
pub fn jacobi_v_l0_laurent(spec: &JacobiFamilySpec) -> Result<LaurentPoly> {
    let l0 = integer_exponent(spec.gamma_exp, 1)?;
    spec.check()?;
    let (p, q) = spec.hat_constants();
    let poch = |k: i64| (0..k).fold(Rational::one(), |acc, j| acc * int(1 - l0 + j));
    let mut out = LaurentPoly::zero(3);
    for s in 0..l0 {
        for k in 0..(l0 - s) {
            let b = binom(s + k - 1, k);
            if b.is_zero() {
                continue;
            }
            let c = bigrat(b) * poch(s + k) / (poch(k) * bigrat(factorial(s as u64)))
                * pow_i(&p, s as i32)
                * pow_i(&q, k as i32);
            let e = vec![(2 * (k - l0)) as i32, (2 * s) as i32, (2 * (l0 - k - s - 1)) as i32];
            out = &out + &LaurentPoly::monomial(c, e);
        }
    }
    Ok(out)
}

/// `a_{m,k} = K^{l0-k-1} ((C-B)/(C-A))^m binom(l0-k-1, m) binom(k+m-1, k) ((A-B)/(C-A))^k`.
pub fn curved_coeff(spec: &CurvedFamilySpec, l0: i64, m: i64, k: i64) -> Rational {
    let (a, b, c) = (&spec.a, &spec.b, &spec.c);
    let kk = int(spec.curvature_sign as i64);
    pow_i(&kk, (l0 - k - 1) as i32)
        * pow_i(&((c - b) / (c - a)), m as i32)
        * bigrat(binom(l0 - k - 1, m))
        * bigrat(binom(k + m - 1, k))
        * pow_i(&((a - b) / (c - a)), k as i32)
}

/// Constant-curvature family
/// `V_{l0} = z^{-2 l0} Σ a_{m,k} x^{2m} y^{2 l0 - 2 - 2k - 2m} z^{2k}`.
pub fn curved_v_l0_laurent(spec: &CurvedFamilySpec) -> Result<LaurentPoly> {
    let l0 = integer_exponent(spec.gamma_exp, 1)?;
    spec.check()?;
    let mut out = LaurentPoly::zero(3);
    for k in 0..l0 {
        for m in 0..(l0 - k) {
            let c = curved_coeff(spec, l0, m, k);
            let e = vec![(2 * m) as i32, (2 * l0 - 2 - 2 * k - 2 * m) as i32, (2 * k - 2 * l0) as i32];
            out = &out + &LaurentPoly::monomial(c, e);
        }
    }
    Ok(out)
}

/// `P^k_{m,n}(β, γ) = Σ_{i=0..k} binom(m+k-1-i, k-i) binom(n+i-1, i) (-1)^i β^{k-i} γ^i`.
pub fn pmn_poly(m: u32, n: u32, k: u32, beta: &Rational, gamma: &Rational) -> Rational {
    let (m, n, k) = (m as i64, n as i64, k as i64);
    (0..=k).fold(Rational::zero(), |acc, i| {
        let sign = if i % 2 == 0 { int(1) } else { int(-1) };
        acc + bigrat(binom(m + k - 1 - i, k - i) * binom(n + i - 1, i))
            * sign
            * pow_i(beta, (k - i) as i32)
            * pow_i(gamma, i as i32)
    })
}

/// `P^k_{m,n}(β, -β) = binom(k+m+n-1, k) β^k`.
pub fn pmn_symmetric(m: u32, n: u32, k: u32, beta: &Rational) -> Rational {
    bigrat(binom(k as i64 + m as i64 + n as i64 - 1, k as i64)) * pow_i(beta, k as i32)
}

/// Three-axis ellipsoid family
/// `W_{l0} = z^{-2 l0} Σ_{m+n+k<l0} (l0-k-1)! (-1)^n / (m! n! (l0-1-k-m-n)!)
///  · P^k_{m,n}(β,γ) / (γ^{m+k} β^{n+k}) · x^{2m} y^{2n} z^{2k}`.
pub fn ellipsoid3d_w_l0_laurent(spec: &EllipsoidFamilySpec) -> Result<LaurentPoly> {
    let l0 = integer_exponent(spec.l0, 1)?;
    let (beta, gamma) = (spec.beta_ax(), spec.gamma_ax());
    if beta.is_zero() || gamma.is_zero() {
        return Err(Error::DegenerateGeometry(format!("beta = {beta}, gamma = {gamma}")));
    }
    let f = |n: i64| bigrat(factorial(n as u64));
    let mut out = LaurentPoly::zero(3);
    for k in 0..l0 {
        for m in 0..(l0 - k) {
            for n in 0..(l0 - k - m) {
                let sign = if n % 2 == 0 { int(1) } else { int(-1) };
                let c = f(l0 - k - 1) * sign / (f(m) * f(n) * f(l0 - 1 - k - m - n))
                    * pmn_poly(m as u32, n as u32, k as u32, &beta, &gamma)
                    / (pow_i(&gamma, (m + k) as i32) * pow_i(&beta, (n + k) as i32));
                let e = vec![(2 * m) as i32, (2 * n) as i32, (2 * k - 2 * l0) as i32];
                out = &out + &LaurentPoly::monomial(c, e);
            }
        }
    }
    Ok(out)
}
