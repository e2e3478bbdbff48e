//! Moments of multinomial weight sums restricted to an empty block.
//!
//! For `W ~ Multinomial(n; 1/n, ..., 1/n)` and pairwise disjoint index sets
//! `S`, `S'`, `T` with `W_S = sum_{j in S} W_j`:
//!
//! ```text
//! E[W_S 1(W_T = 0)]        = |S| q^{n-1}
//! E[W_S^2 1(W_T = 0)]      = |S| q^{n-1} + |S|^2 (1 - 1/n) q^{n-2}
//! E[W_S W_S' 1(W_T = 0)]   = |S| |S'| (1 - 1/n) q^{n-2}
//! ```
//!
//! with `q = 1 - |T|/n`.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::coeff::{base_pow_exact, rat, to_f64};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultinomialMoments {
    pub m1: f64,
    pub m2: f64,
    pub m_cross: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMultinomialMoments {
    pub m1: BigRational,
    pub m2: BigRational,
    pub m_cross: BigRational,
}

fn check(s: u64, s2: u64, t: u64, n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if s.checked_add(s2)
        .and_then(|v| v.checked_add(t))
        .is_none_or(|v| v > n)
    {
        return Err(Error::param(
            "sizes",
            format!("|S| + |S'| + |T| = {s} + {s2} + {t} exceeds n = {n}"),
        ));
    }
    if n > i32::MAX as u64 {
        return Err(Error::param("n", "too large"));
    }
    Ok(())
}

pub fn multinomial_moments_exact(
    s: u64,
    s2: u64,
    t: u64,
    n: u64,
) -> Result<ExactMultinomialMoments> {
    check(s, s2, t, n)?;
    let (ni, ti) = (n as i64, t as i64);
    let q1 = base_pow_exact(ni, ni - 1, ti);
    // At n = 1 the second factor carries (1 - 1/n) = 0; skip the q^{-1} term.
    let second = if n >= 2 {
        rat(ni - 1, ni) * base_pow_exact(ni, ni - 2, ti)
    } else {
        BigRational::zero()
    };
    let (s, s2) = (rat(s as i64, 1), rat(s2 as i64, 1));
    Ok(ExactMultinomialMoments {
        m1: &s * &q1,
        m2: &s * &q1 + &s * &s * &second,
        m_cross: &s * &s2 * &second,
    })
}

pub fn multinomial_moments(s: u64, s2: u64, t: u64, n: u64) -> Result<MultinomialMoments> {
    check(s, s2, t, n)?;
    if n <= 200 {
        let e = multinomial_moments_exact(s, s2, t, n)?;
        return Ok(MultinomialMoments {
            m1: to_f64(&e.m1),
            m2: to_f64(&e.m2),
            m_cross: to_f64(&e.m_cross),
        });
    }
    let nf = n as f64;
    let lq = (-(t as f64) / nf).ln_1p();
    let q1 = ((nf - 1.0) * lq).exp();
    let q2 = ((nf - 2.0) * lq).exp() * (1.0 - 1.0 / nf);
    let (s, s2) = (s as f64, s2 as f64);
    Ok(MultinomialMoments {
        m1: s * q1,
        m2: s * q1 + s * s * q2,
        m_cross: s * s2 * q2,
    })
}
