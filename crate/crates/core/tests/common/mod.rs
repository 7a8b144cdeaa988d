#![allow(dead_code)]

use appell_sep::scalar::{rat, Rational};
use appell_sep::LaurentPoly;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn lp(s: &str) -> LaurentPoly {
    s.parse().expect("valid polynomial text")
}

/// Nonzero rationals with small numerators and denominators.
pub fn rational_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n)
        .map(|_| {
            let num = loop {
                let v = rng.gen_range(-9i64..=9);
                if v != 0 {
                    break v;
                }
            };
            rat(num, rng.gen_range(1..=7))
        })
        .collect()
}

/// Float point with every coordinate in `lo <= |x| <= hi`, random signs.
pub fn float_point(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let m = rng.gen_range(lo..hi);
            if rng.gen_bool(0.5) { m } else { -m }
        })
        .collect()
}

/// Random Laurent polynomial with exponents in `-emax..=emax`.
pub fn random_laurent(rng: &mut ChaCha8Rng, n: usize, terms: usize, emax: i32) -> LaurentPoly {
    let mut p = LaurentPoly::zero(n);
    for _ in 0..terms {
        let e: Vec<i32> = (0..n).map(|_| rng.gen_range(-emax..=emax)).collect();
        let c = rat(rng.gen_range(-9..=9), rng.gen_range(1..=5));
        p = &p + &LaurentPoly::monomial(c, e);
    }
    p
}
