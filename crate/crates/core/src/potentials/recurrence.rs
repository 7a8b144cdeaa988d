//! Power-series coefficients of the ellipse family from the two-index
//! recurrence
//!
//! ```text
//! n m a_{n,m} = (n + m) (m a_{n-2,m} - n a_{n,m-2}),     a_{0,-2γ} = 1
//! ```
//!
//! (the `λ = 1` normalization). Entries are indexed by `(s, i)` with
//! `n = 2s + 2` and `m = 2i - 2γ`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hypergeom::pochhammer;
use crate::poly::LaurentPoly;
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceTable<T> {
    pub gamma: T,
    /// `Some(γ)` when the exponent is a positive integer and the table is
    /// truncated to the finite Laurent ranges.
    pub integer_gamma: Option<i64>,
    pub entries: BTreeMap<(u32, u32), T>,
}

fn positive_integer<T: Scalar>(g: &T) -> Option<i64> {
    (-g.clone()).as_nonpositive_integer().map(|k| -k).filter(|&k| k > 0)
}

impl<T: Scalar> RecurrenceTable<T> {
    /// `a_{n,m}` with `n = 2s`, `m = 2i - 2γ` (so `s = 0` is the seed row).
    fn a(&self, s_row: i64, i: i64) -> T {
        if s_row < 0 || i < 0 {
            return T::zero();
        }
        if s_row == 0 {
            return if i == 0 { T::one() } else { T::zero() };
        }
        self.entries
            .get(&((s_row - 1) as u32, i as u32))
            .cloned()
            .unwrap_or_else(T::zero)
    }

    pub fn get(&self, s: u32, i: u32) -> T {
        self.a(s as i64 + 1, i as i64)
    }

    fn nm(&self, s: i64, i: i64) -> (T, T) {
        let n = T::from_i64(2 * s + 2);
        let m = T::from_i64(2 * i) - T::from_i64(2) * self.gamma.clone();
        (n, m)
    }

    /// `lhs - rhs` of the recurrence at table position `(s, i)`.
    pub fn recurrence_defect(&self, s: u32, i: u32) -> T {
        let (s, i) = (s as i64, i as i64);
        let (n, m) = self.nm(s, i);
        let lhs = n.clone() * m.clone() * self.a(s + 1, i);
        let rhs = (n.clone() + m.clone()) * (m * self.a(s, i) - n * self.a(s + 1, i - 1));
        lhs - rhs
    }

    /// Every stored entry satisfies the recurrence (exactly for rationals).
    pub fn satisfies_recurrence(&self) -> bool {
        self.entries.keys().all(|&(s, i)| self.recurrence_defect(s, i).is_zero())
    }

    pub fn nonzero_entries(&self) -> impl Iterator<Item = (&(u32, u32), &T)> {
        self.entries.iter().filter(|(_, v)| !v.is_zero())
    }
}

/// Builds the table by increasing `s + i`. For a positive integer `γ` the
/// ranges are `i ≤ γ - 2`, `s + i ≤ γ - 1` and `max_order` is ignored;
/// otherwise all entries with `s + i ≤ max_order` are produced.
pub fn ellipse_recurrence_coeffs<T: Scalar>(gamma: &T, max_order: u32) -> Result<RecurrenceTable<T>> {
    let integer_gamma = positive_integer(gamma);
    let mut table = RecurrenceTable { gamma: gamma.clone(), integer_gamma, entries: BTreeMap::new() };
    let top = match integer_gamma {
        Some(g) => g - 1,
        None => max_order as i64,
    };
    for d in 0..=top {
        for i in 0..=d {
            if let Some(g) = integer_gamma {
                if i > g - 2 {
                    continue;
                }
            }
            let s = d - i;
            let (n, m) = table.nm(s, i);
            let pivot = n.clone() * m.clone();
            if pivot.is_zero() {
                return Err(Error::InvalidParameter(format!(
                    "recurrence pivot n*m vanishes at (s, i) = ({s}, {i})"
                )));
            }
            let rhs = (n.clone() + m.clone()) * (m * table.a(s, i) - n * table.a(s + 1, i - 1));
            table.entries.insert((s as u32, i as u32), rhs / pivot);
        }
    }
    Ok(table)
}

/// Closed form of the table entries:
/// `a_{2s+2, 2i-2γ} = (1-γ) (-1)^i (1)_{s+i} (2-γ)_{s+i} / ((2)_s (1-γ)_i s! i!)`.
/// With `with_inner_factor = false` the leading `(1-γ)` is omitted, which
/// does not solve the recurrence at the seed.
pub fn ellipse_coefficient<T: Scalar>(gamma: &T, s: u32, i: u32, with_inner_factor: bool) -> T {
    let one = T::one();
    let two = T::from_i64(2);
    let fact = |n: u32| pochhammer(&one, n);
    let sign = if i.is_multiple_of(2) { T::one() } else { -T::one() };
    let base = sign * pochhammer(&one, s + i) * pochhammer(&(two.clone() - gamma.clone()), s + i)
        / (pochhammer(&two, s) * pochhammer(&(one.clone() - gamma.clone()), i) * fact(s) * fact(i));
    if with_inner_factor {
        (one - gamma.clone()) * base
    } else {
        base
    }
}

impl RecurrenceTable<Rational> {
    /// The table as a Laurent polynomial in `(x, y)` including the seed
    /// `y^{-2γ}`; requires an integer exponent.
    pub fn to_laurent(&self) -> Result<LaurentPoly> {
        let g = self
            .integer_gamma
            .ok_or_else(|| Error::NonInteger(format!("{}", self.gamma)))?;
        let mut p = LaurentPoly::monomial(Rational::from_i64(1), vec![0, (-2 * g) as i32]);
        for (&(s, i), c) in &self.entries {
            let e = vec![(2 * s + 2) as i32, (2 * i as i64 - 2 * g) as i32];
            p = &p + &LaurentPoly::monomial(c.clone(), e);
        }
        Ok(p)
    }
}
