//! The multinomial moment inequality and the moment-bound formulas.

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};
use rayon::prelude::*;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundsError {
    #[error("double factorial undefined for {0}")]
    DoubleFactorialDomain(i64),
    #[error("need p ≥ 1, got {0}")]
    Order(i64),
    #[error("need p < m, got p={p}, m={m}")]
    GridTooCoarse { p: i64, m: i64 },
    #[error("need s < t")]
    EmptyInterval,
    #[error("need k ≥ 0, got {0}")]
    NegativeMoment(i64),
}

/// `n!! = n (n−2) ⋯`, with `(−1)!! = 1` and `0!! = 1`.
pub fn double_factorial(n: i64) -> Result<BigInt, BoundsError> {
    if n < -1 {
        return Err(BoundsError::DoubleFactorialDomain(n));
    }
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    Ok(acc)
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// All `k ∈ ℕ^m` with `Σ k_i = p`, in lexicographically decreasing order.
fn compositions(p: u32, m: u32) -> Vec<Vec<u32>> {
    if m == 1 {
        return vec![vec![p]];
    }
    let mut out = Vec::new();
    for first in (0..=p).rev() {
        for mut rest in compositions(p - first, m - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `Σ_{k_1+⋯+k_m=p} p!/(k_1!⋯k_m!) · (Π (2k_i−1)!! − 1)`.
pub fn multinomial_lhs(p: u32, m: u32) -> BigInt {
    let pf = factorial(p);
    compositions(p, m)
        .into_iter()
        .map(|k| {
            let denom = k.iter().fold(BigInt::one(), |acc, &ki| acc * factorial(ki));
            let prod = k.iter().fold(BigInt::one(), |acc, &ki| {
                acc * double_factorial(2 * ki as i64 - 1).expect("odd argument ≥ −1")
            });
            (&pf / denom) * (prod - 1)
        })
        .sum()
}

/// `4^p p! m^{p−1}`.
pub fn multinomial_rhs(p: u32, m: u32) -> BigInt {
    Pow::pow(BigInt::from(4), p) * factorial(p) * Pow::pow(BigInt::from(m), p - 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub p: u32,
    pub m: u32,
    pub lhs: BigInt,
    pub rhs: BigInt,
    pub holds: bool,
}

/// Exhaustive check over `1 ≤ p ≤ p_max`, `p ≤ m ≤ m_max`, ordered by `(p, m)`.
pub fn verify_multinomial_inequality(p_max: u32, m_max: u32) -> Vec<BoundReport> {
    let pairs: Vec<(u32, u32)> = (1..=p_max)
        .flat_map(|p| (p..=m_max).map(move |m| (p, m)))
        .collect();
    pairs
        .into_par_iter()
        .map(|(p, m)| {
            let lhs = multinomial_lhs(p, m);
            let rhs = multinomial_rhs(p, m);
            BoundReport {
                holds: lhs <= rhs,
                p,
                m,
                lhs,
                rhs,
            }
        })
        .collect()
}

fn rpow(x: &Rational, e: u32) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * x)
}

/// `σ̄^{2p} (t−s)^p (1 + 4^p p!/m)`.
pub fn dm2_bound(p: i64, m: i64, sigma_bar: &Rational, s: &Rational, t: &Rational) -> Result<Rational, BoundsError> {
    if p < 1 {
        return Err(BoundsError::Order(p));
    }
    if p >= m {
        return Err(BoundsError::GridTooCoarse { p, m });
    }
    if s >= t {
        return Err(BoundsError::EmptyInterval);
    }
    let p = p as u32;
    let tail = Rational::new(Pow::pow(BigInt::from(4), p) * factorial(p), BigInt::from(m));
    Ok(rpow(sigma_bar, 2 * p) * rpow(&(t - s), p) * (Rational::one() + tail))
}

/// `(2k−1)!! σ̄^{2k} t^k`.
pub fn moment_bound(k: i64, sigma_bar: &Rational, t: &Rational) -> Result<Rational, BoundsError> {
    if k < 0 {
        return Err(BoundsError::NegativeMoment(k));
    }
    let df = double_factorial(2 * k - 1)?;
    let k = k as u32;
    let v = Rational::from_integer(df) * rpow(sigma_bar, 2 * k) * rpow(t, k);
    Ok(if v.is_zero() { Rational::zero() } else { v })
}
